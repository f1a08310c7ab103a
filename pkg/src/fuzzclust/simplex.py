"""Euclidean projection onto the unit simplex (sort-and-threshold method)."""
import numpy as np

SUM_TOL = 1e-12


def project_simplex(x):
    """Project a vector onto the unit simplex.

    Returns ``argmin_{y >= 0, sum(y) = 1} ||y - x||^2``.

    The components are sorted in descending order, the largest ``k`` with
    ``u_k - (cumsum_k - 1) / k >= 0`` fixes the threshold
    ``theta = (cumsum_k - 1) / k``, and ``y = max(x - theta, 0)``. The
    floating-point residual of the sum is then removed from the largest
    entry (shared among tied maxima) so that ``sum(y) == 1`` to within ``1e-12``.

    Parameters
    ----------
    x : array-like, shape (C,)

    Returns
    -------
    y : ndarray, shape (C,)
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {x.shape}")
    return project_columns(x[:, None])[:, 0]


def project_columns(X):
    """Project every column of a ``(C, N)`` array onto the unit simplex.

    Column by column this is identical to :func:`project_simplex`. Columns
    that already lie in the simplex are returned unchanged, which makes the
    projection exactly idempotent.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {X.shape}")
    C, N = X.shape
    if C == 0:
        raise ValueError("cannot project onto an empty simplex (C = 0)")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite values")
    if C == 1:
        return np.ones_like(X)
    if N == 0:
        return X.copy()

    inside = (X.min(axis=0) >= 0) & (np.abs(X.sum(axis=0) - 1.0) <= SUM_TOL)

    # stable sort keeps ties in index order
    U = -np.sort(-X, axis=0, kind="stable")
    css = np.cumsum(U, axis=0) - 1.0
    ks = np.arange(1, C + 1, dtype=float)[:, None]
    cond = U - css / ks >= 0
    # the condition holds on a prefix of the sorted entries (k = 1 always holds)
    rho = C - 1 - np.argmax(cond[::-1], axis=0)
    cols = np.arange(N)
    theta = css[rho, cols] / (rho + 1.0)
    Y = np.maximum(X - theta, 0.0)

    # remove the rounding residual from the largest entry; ties at the top
    # share it, and the top never drops below the runner-up, so equal inputs
    # stay equal and the order is preserved
    resid = Y.sum(axis=0) - 1.0
    ymax = Y.max(axis=0)
    is_top = Y == ymax
    n_top = is_top.sum(axis=0)
    runner_up = np.where(is_top, -np.inf, Y).max(axis=0)
    new_top = np.maximum(ymax - resid / n_top, np.maximum(runner_up, 0.0))
    Y = np.where(is_top, new_top, Y)

    Y[:, inside] = X[:, inside]
    return Y


def in_simplex(x, atol=SUM_TOL):
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= 0) and abs(x.sum() - 1.0) <= atol)
