# noma-lab source package
