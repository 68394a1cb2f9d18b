# Solver layer package
