# Configuration package: environment settings and scenario files
