# Validation layer package
