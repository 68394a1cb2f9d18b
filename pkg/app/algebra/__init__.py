# Algebra layer package
