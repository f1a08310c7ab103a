"""The simplex projection that keeps every membership column valid."""
import numpy as np

from fuzzclust import project_columns, project_simplex

for x in ([1.2, -0.3, 0.1], [0.8, 0.8], [2.0, 0.0], [0.2, 0.3, 0.5]):
    print(x, "->", project_simplex(x))

# shifting every entry by the same amount does not change the result
x = np.array([0.3, -1.0, 2.5, 0.9])
print(project_simplex(x), project_simplex(x + 7.0))

# columns are projected independently; each lands on the simplex
rng = np.random.default_rng(0)
Y = project_columns(rng.normal(size=(3, 5)))
print(Y.round(4))
print("column sums:", Y.sum(axis=0))
