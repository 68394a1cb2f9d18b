# Index calculus layer package
