"""Projected gradient (GPA) and FISTA drivers for fuzzy clustering.

Each iteration is a fixed sequence of column-block phases: the share matrix
``X X^T``, a fused gradient/inner-product sweep, a fixed-order merge and a
column-wise simplex projection. Phases may run on several threads, and the
reductions are ordered, so traces do not depend on the worker count.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _parallel
from .objective import (as_similarity, fused_pass, loss_from_parts,
                        share_matrix, validate_membership)
from .simplex import project_columns

METHODS = ("gpa", "fista")
INITS = ("random", "dirichlet", "row_one", "uniform", "given")


@dataclass
class SolverConfig:
    """Run parameters.

    ``step_size`` is a positive float or ``"auto"`` (see
    :func:`default_step_size`). ``tol`` is the smallest loss decrease that
    keeps the iteration going; the default 0 stops as soon as the loss fails
    to strictly decrease. ``init_row`` is the 0-based row used by the
    ``row_one`` start.
    """

    step_size: object = "auto"
    max_iter: int = 1000
    tol: float = 0.0
    method: str = "gpa"
    init: str = "random"
    init_row: int = 0
    seed: int = 0
    trace_every: int = 1
    fista_restart: bool = False
    threads: object = None

    def __post_init__(self):
        if isinstance(self.step_size, str):
            if self.step_size != "auto":
                self.step_size = float(self.step_size)
        if not isinstance(self.step_size, str) and not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        self.max_iter = int(self.max_iter)
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        self.tol = float(self.tol)
        if not self.tol >= 0:
            raise ValueError("tol must be >= 0")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")
        self.trace_every = int(self.trace_every)
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        self.init_row = int(self.init_row)
        self.seed = int(self.seed)

    def resolved_step(self, S):
        if self.step_size == "auto":
            return default_step_size(S)
        return float(self.step_size)

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def parse_config_text(text):
    """Parse ``key=value`` lines into a dict suitable for :class:`SolverConfig`."""
    known = SolverConfig.__dataclass_fields__
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key == "fista_restart":
            if value.lower() not in _BOOL:
                raise ValueError(f"config line {lineno}: bad boolean {value!r}")
            value = _BOOL[value.lower()]
        out[key] = value
    return out


def load_config(path, **overrides):
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**values)


@dataclass
class SolverTrace:
    """Per-iteration loss record.

    ``iterations[j]`` is the iterate index ``n`` whose loss is ``losses[j]``.
    For GPA iterate 0 is the starting point; for FISTA iterate 0 is the
    starting point and iterate ``n >= 1`` the ``n``-th projected point.
    ``n_iter`` counts projected-gradient updates performed.
    """

    iterations: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    elapsed_ms: list = field(default_factory=list)
    loss_increased: list = field(default_factory=list)
    reason: str = ""
    n_iter: int = 0
    step_size: float = float("nan")
    restarts: int = 0

    def record(self, n, loss, t0, increased=False):
        self.iterations.append(n)
        self.losses.append(loss)
        self.elapsed_ms.append((time.perf_counter() - t0) * 1e3)
        self.loss_increased.append(bool(increased))

    @property
    def final_loss(self):
        return self.losses[-1]

    @property
    def effective_iterations(self):
        """Updates that strictly lowered the loss."""
        return int(sum(b < a for a, b in zip(self.losses, self.losses[1:])))

    def to_csv(self, timing=True):
        lines = ["iteration,loss,elapsed_ms"]
        for n, loss, ms in zip(self.iterations, self.losses, self.elapsed_ms):
            lines.append(f"{n},{loss:.17g},{ms:.3f}" if timing else f"{n},{loss:.17g},")
        return "\n".join(lines) + "\n"


def default_step_size(S, N=None):
    """``1 / (4 ||S||_F + 12 N)``.

    ``||S||_F`` bounds the spectral norm from above, so this never exceeds
    the step ``1 / (4 ||S||_2 + 12 N)`` under which GPA is monotone.
    """
    S = as_similarity(S)
    N = S.N if N is None else N
    return 1.0 / (4.0 * math.sqrt(S.frob_sq) + 12.0 * N)


def init_membership(N, C, strategy="random", seed=0, row=0, given=None):
    """Starting membership matrix of shape ``(C, N)``.

    ``random`` draws i.i.d. uniform(0, 1) entries and projects each column;
    ``dirichlet`` samples columns from Dirichlet(1, ..., 1); ``row_one`` puts
    every node in cluster ``row``; ``uniform`` sets every entry to ``1/C``;
    ``given`` validates and copies ``given``.
    """
    if C < 1 or N < 0:
        raise ValueError("need C >= 1 and N >= 0")
    if strategy == "random":
        rng = np.random.default_rng(seed)
        return project_columns(rng.uniform(size=(C, N)))
    if strategy == "dirichlet":
        rng = np.random.default_rng(seed)
        return np.ascontiguousarray(rng.dirichlet(np.ones(C), size=N).T)
    if strategy == "row_one":
        if not 0 <= row < C:
            raise ValueError(f"row must lie in [0, {C}), got {row}")
        X = np.zeros((C, N))
        X[row] = 1.0
        return X
    if strategy == "uniform":
        return np.full((C, N), 1.0 / C)
    if strategy == "given":
        if given is None:
            raise ValueError("strategy 'given' needs a matrix")
        X = validate_membership(np.array(given, dtype=float))
        if X.shape != (C, N):
            raise ValueError(f"given matrix has shape {X.shape}, expected {(C, N)}")
        return X
    raise ValueError(f"unknown init strategy {strategy!r}")


def project_membership(Y, threads=None):
    parts = _parallel.map_blocks(lambda a, b: project_columns(Y[:, a:b]), Y.shape[1], threads)
    return np.concatenate(parts, axis=1) if parts else Y.copy()


def gpa_step(X, S, share, step, threads=None):
    """One projected gradient step ``P(X - step * grad f(X))``."""
    S = as_similarity(S)
    grad, _ = fused_pass(X, S, share, threads)
    return project_membership(X - step * grad, threads)


def _start(X0, S, config):
    S = as_similarity(S)
    X = validate_membership(np.array(X0, dtype=float, copy=True))
    if X.shape[1] != S.N:
        raise ValueError(f"X0 has {X.shape[1]} columns but S has N={S.N}")
    return X, S, config.resolved_step(S)


def run_gpa(X0, S, config=None):
    """Projected gradient with the loss evaluated in the same column sweep.

    The loss of the current iterate is computed first; if it fell by no more
    than ``tol`` relative to the previous one, the current iterate is
    returned. The initial "previous" loss is ``N**2``.

    Returns
    -------
    X : ndarray, shape (C, N)
    trace : SolverTrace
    """
    config = config or SolverConfig()
    X, S, step = _start(X0, S, config)
    threads = config.threads
    trace = SolverTrace(step_size=step)
    t0 = time.perf_counter()
    prev = float(S.N) ** 2
    n = 0
    while True:
        share = share_matrix(X, threads)
        grad, merge = fused_pass(X, S, share, threads)
        loss = loss_from_parts(S.frob_sq, share, merge)
        stop = prev - loss <= config.tol
        last = stop or n == config.max_iter
        if last or n % config.trace_every == 0:
            trace.record(n, loss, t0, increased=loss > prev)
        if stop:
            trace.reason = "tol_reached"
            break
        if n == config.max_iter:
            trace.reason = "max_iter"
            break
        X = project_membership(X - step * grad, threads)
        prev = loss
        n += 1
    trace.n_iter = n
    return X, trace


def next_inertial(t):
    """``(1 + sqrt(1 + 4 t^2)) / 2``."""
    return (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0


def run_fista(X0, S, config=None):
    """Accelerated projected gradient with the ``t_n`` inertial sequence.

    Each iteration takes a projected gradient step from the extrapolated
    point ``X^n`` to get ``Xbar^n``, evaluates the loss there, and stops once
    the decrease from ``Xbar^{n-1}`` is at most ``tol``; otherwise it sets
    ``X^{n+1} = Xbar^n + ((t_n - 1) / t_{n+1}) (Xbar^n - Xbar^{n-1})``.
    Extrapolated points may leave the feasible set; only projected points
    are returned. The returned matrix is ``Xbar^n`` from the final iteration.

    With ``config.fista_restart`` a loss increase resets ``t`` to 1 and the
    next step is a plain projected gradient step from the better point
    ``Xbar^{n-1}``; a second consecutive increase stops the run.
    """
    config = config or SolverConfig(method="fista")
    Xbar_prev, S, step = _start(X0, S, config)
    threads = config.threads
    trace = SolverTrace(step_size=step)
    t0 = time.perf_counter()

    share = share_matrix(Xbar_prev, threads)
    _, merge = fused_pass(Xbar_prev, S, share, threads, want_gradient=False)
    loss_prev = loss_from_parts(S.frob_sq, share, merge)
    trace.record(0, loss_prev, t0)

    X = Xbar_prev
    t = 1.0
    just_restarted = False
    n = 0
    Xbar = Xbar_prev
    for n in range(1, config.max_iter + 1):
        share = share_matrix(X, threads)
        grad, _ = fused_pass(X, S, share, threads)
        Xbar = project_membership(X - step * grad, threads)

        share_bar = share_matrix(Xbar, threads)
        _, merge = fused_pass(Xbar, S, share_bar, threads, want_gradient=False)
        loss = loss_from_parts(S.frob_sq, share_bar, merge)
        increased = loss > loss_prev
        stop = loss_prev - loss <= config.tol
        if config.fista_restart and increased and not just_restarted:
            stop = False
        last = stop or n == config.max_iter
        if last or n % config.trace_every == 0:
            trace.record(n, loss, t0, increased=increased)
        if stop:
            trace.reason = "loss_increase_fista" if increased else "tol_reached"
            break
        if n == config.max_iter:
            trace.reason = "max_iter"
            break

        if increased:
            # restart: drop the momentum and step again from the better point
            trace.restarts += 1
            just_restarted = True
            t = 1.0
            X = Xbar_prev
            continue
        just_restarted = False
        t_next = next_inertial(t)
        X = Xbar + ((t - 1.0) / t_next) * (Xbar - Xbar_prev)
        t = t_next
        Xbar_prev, loss_prev = Xbar, loss
    trace.n_iter = n
    return Xbar, trace


def solve(S, C, config=None, X0=None):
    """Initialise per ``config`` and dispatch to GPA or FISTA."""
    config = config or SolverConfig()
    S = as_similarity(S)
    if X0 is None:
        X0 = init_membership(S.N, C, config.init, config.seed, config.init_row)
    runner = run_fista if config.method == "fista" else run_gpa
    return runner(X0, S, config)
