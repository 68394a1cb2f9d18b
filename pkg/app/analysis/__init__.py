# Analysis layer package
