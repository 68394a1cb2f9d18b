# Output layer package
