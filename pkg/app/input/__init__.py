# Input layer package
