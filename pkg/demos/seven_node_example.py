"""Fuzzy clustering of a 7-node graph from three different starting points.

The graph has two loose groups, {1, 2, 3} and {5, 6, 7}, that share node 4.
Run with ``python3 demos/seven_node_example.py``.
"""
import numpy as np

from fuzzclust import SolverConfig, build_similarity, parse_edge_list, solve

edges = "1 2\n2 3\n2 4\n3 4\n4 5\n4 6\n5 6\n6 7\n"
graph, remap = parse_edge_list(edges.splitlines())
S = build_similarity(graph)  # adjacency plus ones on the diagonal
print(S.matrix.toarray().astype(int))
print("nnz:", S.nnz)

np.set_printoptions(precision=4, suppress=True)

# random start: node 4 ends up split evenly, the two groups are recovered
X, trace = solve(S, 2, SolverConfig(step_size=0.1, init="random", seed=0))
print("\nrandom start, loss %.4f after %d updates" % (trace.final_loss, trace.n_iter))
print(X)

# everything in cluster 1: a different critical point with node 4 as the hub
X, trace = solve(S, 2, SolverConfig(step_size=0.1, init="row_one"))
print("\nrow-one start, loss %.4f after %d updates" % (trace.final_loss, trace.n_iter))
print(X)

# the uniform matrix is a fixed point of the projected gradient map
X, trace = solve(S, 2, SolverConfig(step_size=0.1, init="uniform"))
print("\nuniform start, loss %.4f, effective iterations %d"
      % (trace.final_loss, trace.effective_iterations))
print(X)

# the random start is stable across seeds
losses = [solve(S, 2, SolverConfig(step_size=0.1, init="random", seed=s))[1].final_loss
          for s in range(10)]
print("\nterminal losses over 10 seeds:", np.round(losses, 4))
