"""Objective ``f(X) = ||S - X^T X||_F^2`` over column-stochastic memberships.

Everything here works column by column on a sparse ``S`` and the small
``C x C`` share matrix ``X X^T``. The ``N x N`` matrix ``X^T X`` is only ever
formed inside the ``*_dense_reference`` oracles, which refuse large inputs.
"""
import numpy as np
import scipy.sparse as sp

from . import _parallel

DENSE_GUARD = 5000
MEMBERSHIP_ATOL = 1e-9


class SparseSimilarity:
    """Symmetric nonnegative similarity matrix in compressed-column storage.

    Parameters
    ----------
    matrix : scipy sparse matrix or array-like, shape (N, N)
        Must be square, symmetric (exactly), finite and nonnegative.
    """

    def __init__(self, matrix):
        M = sp.csc_matrix(matrix, dtype=float)
        M.sum_duplicates()
        M.eliminate_zeros()
        M.sort_indices()
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"similarity must be square, got {M.shape}")
        if not np.all(np.isfinite(M.data)):
            raise ValueError("similarity contains non-finite values")
        if np.any(M.data < 0):
            raise ValueError("similarity entries must be nonnegative")
        if (M != M.T).nnz:
            raise ValueError("similarity matrix is not symmetric")
        self._csc = M
        # symmetric, so the transpose of the CSC arrays is a valid CSR view
        self._csr = sp.csr_matrix((M.data, M.indices, M.indptr), shape=M.shape)
        self.frob_sq = float(np.dot(M.data, M.data))

    @classmethod
    def from_dense(cls, S):
        S = np.asarray(S, dtype=float)
        return cls(sp.csc_matrix(S))

    @classmethod
    def from_coo_text(cls, stream, mirror=False):
        """Read ``i j value`` lines (``#`` comments allowed).

        With ``mirror=True`` each off-diagonal entry is also stored at
        ``(j, i)``; otherwise the listed entries must already be symmetric.
        """
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 'i j value', got {line!r}")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed entry {line!r}") from None
            if i < 0 or j < 0:
                raise ValueError(f"line {lineno}: negative index")
            rows.append(i)
            cols.append(j)
            vals.append(v)
            if mirror and i != j:
                rows.append(j)
                cols.append(i)
                vals.append(v)
        if not rows:
            raise ValueError("no entries found")
        n = max(max(rows), max(cols)) + 1
        if len(set(zip(rows, cols))) != len(rows):
            raise ValueError("duplicate entries")
        return cls(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))

    @property
    def N(self):
        return self._csc.shape[0]

    @property
    def nnz(self):
        return self._csc.nnz

    @property
    def matrix(self):
        return self._csc

    def column(self, i):
        """Row indices and values of column ``i``."""
        a, b = self._csc.indptr[i], self._csc.indptr[i + 1]
        return self._csc.indices[a:b], self._csc.data[a:b]

    def column_dense(self, i):
        s = np.zeros(self.N)
        idx, val = self.column(i)
        s[idx] = val
        return s

    def right_multiply(self, X, start=0, stop=None):
        """``X @ S[:, start:stop]`` for a dense ``(C, N)`` matrix ``X``."""
        stop = self.N if stop is None else stop
        rows = self._csr[start:stop]
        return np.ascontiguousarray((rows @ X.T).T)

    def to_dense(self):
        if self.N > DENSE_GUARD:
            raise ValueError(f"refusing to densify N={self.N} > {DENSE_GUARD}")
        return self._csc.toarray()

    def __repr__(self):
        return f"SparseSimilarity(N={self.N}, nnz={self.nnz})"


def as_similarity(S):
    if isinstance(S, SparseSimilarity):
        return S
    return SparseSimilarity(S)


def validate_membership(X, atol=MEMBERSHIP_ATOL):
    """Check that ``X`` is a finite ``(C, N)`` array with columns in the simplex."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"membership must be a (C, N) array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("membership contains non-finite values")
    if X.size and X.min() < -atol:
        raise ValueError(f"membership has negative entries (min {X.min():.3g})")
    dev = np.abs(X.sum(axis=0) - 1.0)
    if dev.size and dev.max() > atol:
        i = int(np.argmax(dev))
        raise ValueError(f"column {i} sums to {X[:, i].sum():.12g}, not 1")
    return X


def share_matrix(X, threads=None):
    """``X @ X.T`` accumulated over column blocks in a fixed order."""
    X = np.asarray(X, dtype=float)
    parts = _parallel.map_blocks(
        lambda a, b: X[:, a:b] @ X[:, a:b].T, X.shape[1], threads)
    if not parts:
        return np.zeros((X.shape[0], X.shape[0]))
    return _parallel.ordered_sum(parts)


def gradient_column(X, share, s_i, x_i):
    """Column ``i`` of the gradient, ``-4 (X s_i - share x_i)``.

    ``s_i`` is either a dense length-N vector or an ``(indices, values)`` pair
    as returned by :meth:`SparseSimilarity.column`; only its nonzeros are
    touched.
    """
    return -4.0 * (_x_times_column(X, s_i) - share @ np.asarray(x_i, dtype=float))


def loss_terms_column(X, s_i, x_i, xs_i=None):
    """``<X s_i, x_i>``; pass ``xs_i`` to reuse a product already computed."""
    if xs_i is None:
        xs_i = _x_times_column(X, s_i)
    return float(np.dot(xs_i, x_i))


def _x_times_column(X, s_i):
    if isinstance(s_i, tuple):
        idx, val = s_i
        return X[:, idx] @ val
    return X @ np.asarray(s_i, dtype=float)


def fused_pass(X, S, share, threads=None, want_gradient=True):
    """One sweep over the columns computing the gradient and the merged inner products.

    Every block computes ``X S_J`` once and uses it both for the gradient
    columns and for ``prod_i = <X s_i, x_i>``.

    Returns
    -------
    grad : ndarray, shape (C, N) or None
    merge : float
        ``sum_i prod_i``, combined block by block in ascending order.
    """
    def work(a, b):
        XS = S.right_multiply(X, a, b)
        Xb = X[:, a:b]
        prod = float(np.einsum("ij,ij->", XS, Xb))
        if not want_gradient:
            return None, prod
        return -4.0 * (XS - share @ Xb), prod

    parts = _parallel.map_blocks(work, X.shape[1], threads)
    merge = _parallel.ordered_sum([p for _, p in parts]) if parts else 0.0
    if not want_gradient:
        return None, merge
    grad = np.concatenate([g for g, _ in parts], axis=1) if parts else np.zeros_like(X)
    return grad, merge


def loss_from_parts(frob_sq, share, merge):
    return frob_sq + float(np.sum(share * share)) - 2.0 * merge


def loss_decomposed(X, S, share=None, threads=None):
    """``f(X) = ||S||_F^2 + ||X X^T||_F^2 - 2 sum_i <X s_i, x_i>``."""
    S = as_similarity(S)
    X = np.asarray(X, dtype=float)
    if share is None:
        share = share_matrix(X, threads)
    _, merge = fused_pass(X, S, share, threads, want_gradient=False)
    return loss_from_parts(S.frob_sq, share, merge)


def gradient(X, S, share=None, threads=None):
    """Full gradient assembled from the column formula."""
    S = as_similarity(S)
    X = np.asarray(X, dtype=float)
    if share is None:
        share = share_matrix(X, threads)
    grad, _ = fused_pass(X, S, share, threads)
    return grad


def hessian_vector_product(X, V, S, threads=None):
    """Apply the Hessian of ``f`` at ``X`` to the direction ``V``.

    Uses ``H V = -4 V S + 4 (V X^T + X V^T) X + 4 (X X^T) V``, which is the
    dense expression ``-4 V (S - X^T X) + 4 X (V^T X + X^T V)`` regrouped so
    that only ``C x C`` products and sparse column sums appear.
    """
    S = as_similarity(S)
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    if X.shape != V.shape:
        raise ValueError(f"shape mismatch: X {X.shape} vs V {V.shape}")
    if X.shape[1] != S.N:
        raise ValueError(f"X has {X.shape[1]} columns but S is {S.N} x {S.N}")
    cross = _block_gram(V, X, threads)
    cross = cross + cross.T
    share = share_matrix(X, threads)
    parts = _parallel.map_blocks(
        lambda a, b: -4.0 * S.right_multiply(V, a, b)
        + 4.0 * (cross @ X[:, a:b] + share @ V[:, a:b]),
        X.shape[1], threads)
    return np.concatenate(parts, axis=1) if parts else np.zeros_like(X)


def _block_gram(A, B, threads=None):
    parts = _parallel.map_blocks(
        lambda a, b: A[:, a:b] @ B[:, a:b].T, A.shape[1], threads)
    return _parallel.ordered_sum(parts)


def _dense_guard(n):
    if n > DENSE_GUARD:
        raise ValueError(f"dense oracle limited to N <= {DENSE_GUARD}, got N={n}")


def _as_dense(S):
    if isinstance(S, SparseSimilarity):
        return S.to_dense()
    if sp.issparse(S):
        return S.toarray()
    return np.asarray(S, dtype=float)


def loss_dense_reference(X, S):
    """Textbook ``||S - X^T X||_F^2``; test oracle only."""
    X = np.asarray(X, dtype=float)
    _dense_guard(X.shape[1])
    R = _as_dense(S) - X.T @ X
    return float(np.sum(R * R))


def gradient_dense_reference(X, S):
    """Textbook ``-4 X (S - X^T X)``; test oracle only."""
    X = np.asarray(X, dtype=float)
    _dense_guard(X.shape[1])
    return -4.0 * X @ (_as_dense(S) - X.T @ X)


def hessian_vector_product_dense(X, V, S):
    """Textbook ``-4 V (S - X^T X) + 4 X (V^T X + X^T V)``; test oracle only."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    if X.shape != V.shape:
        raise ValueError(f"shape mismatch: X {X.shape} vs V {V.shape}")
    _dense_guard(X.shape[1])
    return -4.0 * V @ (_as_dense(S) - X.T @ X) + 4.0 * X @ (V.T @ X + X.T @ V)
