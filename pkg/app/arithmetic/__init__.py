# Arithmetic layer package
