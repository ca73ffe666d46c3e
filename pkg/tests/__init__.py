# Test package for noma-lab
