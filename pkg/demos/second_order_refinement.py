"""Telling critical points apart with second-order information.

All three outputs of ``seven_node_example.py`` are critical points. The
uniform one is not a local minimiser: moving node 1 toward either cluster
has negative curvature.
"""
import numpy as np

from fuzzclust import (SolverConfig, build_similarity, check_condition_a, hessian_vector_product,
                       parse_edge_list, refine, solve, tangent_cone_contains)
from fuzzclust.objective import gradient, loss_decomposed

graph, _ = parse_edge_list("1 2\n2 3\n2 4\n3 4\n4 5\n4 6\n5 6\n6 7\n".splitlines())
S = build_similarity(graph)

points = {}
for init in ("random", "row_one", "uniform"):
    points[init], _ = solve(S, 2, SolverConfig(step_size=0.1, init=init, max_iter=10000))

for name, X in points.items():
    r = refine(X, S)
    print(f"{name:8s} critical={r['critical']}  residual={r['residual']:.1e}  "
          f"(a) {r['condition_a']['status']}  (b) {r['condition_b']['status']}  "
          f"directions={r['directions_tested']}")

# the witness at the uniform point, replayed by hand
X3 = points["uniform"]
v = check_condition_a(X3, S)
V = v.witness
print("\nwitness direction:\n", V)
print("in tangent cone:", tangent_cone_contains(X3, V))
print("<grad f, V> =", np.sum(gradient(X3, S) * V))
print("<H V, V>    =", np.sum(hessian_vector_product(X3, V, S) * V))

# a small step along V lowers the loss, as negative curvature predicts
for t in (0.0, 0.05, 0.1, 0.2):
    print(f"t={t:.2f}  f(X3 + tV) = {loss_decomposed(X3 + t * V, S):.6f}")
