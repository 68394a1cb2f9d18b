# Orchestration layer package
