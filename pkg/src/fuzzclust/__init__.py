"""Similarity-based fuzzy clustering of sparse graphs by projected gradient methods."""
from .graph_io import (Graph, GeneratorError, GeneratorSpec, ParseError,
                       build_similarity, generate_two_cluster_er,
                       largest_connected_component, parse_edge_list,
                       prune_degree_one)
from .objective import (SparseSimilarity, gradient, gradient_column,
                        gradient_dense_reference, hessian_vector_product,
                        loss_decomposed, loss_dense_reference, loss_terms_column,
                        share_matrix, validate_membership)
from .secondorder import (RefinementVerdict, check_condition_a, check_condition_b,
                          critical_cone_directions, is_critical, refine,
                          second_order_cone_contains, tangent_cone_contains)
from .simplex import project_columns, project_simplex
from .solvers import (SolverConfig, SolverTrace, default_step_size, gpa_step,
                      init_membership, run_fista, run_gpa, solve)

__version__ = "0.1.0"
