"""Acceptance criteria, one test per criterion.

Each test prints (and records for the session summary) a single line
``[PASS] criterion N: ...`` or ``[FAIL] criterion N: ...`` before asserting.
Run on its own with ``pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.
"""
import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import (ACCEPTANCE_LINES, SEVEN_NODE_S, X1_REF, X2_REF, X3_REF,  # noqa: E402
                      random_membership, random_symmetric, seven_node_text)
from fuzzclust import cli  # noqa: E402
from fuzzclust.graph_io import (GeneratorSpec, build_similarity,  # noqa: E402
                                generate_two_cluster_er, parse_edge_list, write_edge_list)
from fuzzclust.objective import (SparseSimilarity, gradient,  # noqa: E402
                                 gradient_dense_reference, hessian_vector_product,
                                 loss_decomposed, loss_dense_reference, share_matrix)
from fuzzclust.simplex import project_simplex  # noqa: E402
from fuzzclust.solvers import (SolverConfig, gpa_step, init_membership,  # noqa: E402
                               run_fista, run_gpa, solve)

SYNTH = GeneratorSpec(n1=5000, p1=12 / 4999, n2=2500, p2=16 / 2499, k_inter=20, seed=1)
# 5e-7 on a 750k-node graph, rescaled by N
SYNTH_STEP_TIMES_N = 0.375


def report(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def seven_S():
    g, _ = parse_edge_list(seven_node_text().splitlines())
    return build_similarity(g)


def match_up_to_rows(X, ref):
    return min(np.abs(X[list(p)] - ref).max() for p in itertools.permutations(range(len(X))))


def dominant_accuracy(X, labels):
    """Share of nodes whose argmax cluster matches the label, best row relabelling."""
    pred = np.argmax(X, axis=0)
    best = 0.0
    for perm in itertools.permutations(range(X.shape[0])):
        best = max(best, float(np.mean(np.asarray(perm)[pred] + 1 == labels)))
    return best


def first_reach(trace, target):
    for n, loss in zip(trace.iterations, trace.losses):
        if loss <= target:
            return n
    return None


def planted_instance(seed):
    """Random planted-community graph used by the acceleration check."""
    rng = np.random.default_rng(seed)
    C = int(rng.integers(2, 5))
    N = int(rng.integers(40, 200))
    lab = rng.integers(0, C, N)
    P = np.where(lab[:, None] == lab[None, :], 0.25, 0.03)
    A = np.triu((rng.uniform(size=(N, N)) < P).astype(float), 1)
    A = A + A.T
    np.fill_diagonal(A, 1.0)
    return C, A


_synth_cache = {}


def synthetic():
    if "g" not in _synth_cache:
        t0 = time.perf_counter()
        g, labels = generate_two_cluster_er(SYNTH)
        _synth_cache.update(g=g, labels=labels, S=build_similarity(g),
                            gen_s=time.perf_counter() - t0)
    return _synth_cache


def test_criterion_01_random_start_scenario():
    S = seven_S()
    n_seeds = 20
    n_loss = n_member = n_both = n_fast = 0
    worst_dev = 0.0
    for seed in range(n_seeds):
        t0 = time.perf_counter()
        X, trace = solve(S, 2, SolverConfig(step_size=0.1, init="random", seed=seed))
        n_fast += time.perf_counter() - t0 < 1.0
        dev = match_up_to_rows(X, X1_REF)
        worst_dev = max(worst_dev, dev)
        loss_ok = abs(trace.final_loss - 6.49) <= 0.01
        n_loss += loss_ok
        n_member += dev <= 0.01
        n_both += loss_ok and dev <= 0.01
    ok = n_both >= 0.9 * n_seeds and n_fast == n_seeds
    report(1, ok, f"loss within 0.01 for {n_loss}/{n_seeds} seeds, membership within 0.01 for "
                  f"{n_member}/{n_seeds} (max entry deviation {worst_dev:.4f}), both for "
                  f"{n_both}/{n_seeds} (need 90%), runs under 1 s: {n_fast}/{n_seeds}")


def test_criterion_02_row_one_scenario():
    S = seven_S()
    t0 = time.perf_counter()
    X, trace = solve(S, 2, SolverConfig(step_size=0.1, init="row_one", init_row=0))
    elapsed = time.perf_counter() - t0
    dev = match_up_to_rows(X, X2_REF)
    ok = abs(trace.final_loss - 8.84) <= 0.01 and dev <= 0.01 and elapsed < 1.0
    report(2, ok, f"loss {trace.final_loss:.6f} (target 8.84 +- 0.01), max entry deviation "
                  f"{dev:.4f} (<= 0.01), {elapsed * 1e3:.1f} ms")


def test_criterion_03_uniform_scenario(tmp_path, capsys):
    S = seven_S()
    X, trace = solve(S, 2, SolverConfig(step_size=0.1, init="uniform"))
    loss_ok = abs(trace.final_loss - 12.25) <= 1e-9
    immediate = trace.effective_iterations == 0 and np.array_equal(X, X3_REF)
    m = tmp_path / "x3.csv"
    cli.write_membership(m, X, range(1, 8))
    g = tmp_path / "seven.txt"
    g.write_text(seven_node_text())
    code = cli.main(["check", str(g), str(m), "--no-prune"])
    import json
    rep = json.loads(capsys.readouterr().out)
    wv = rep["condition_a"]["witness_value"]
    refuted = code == 0 and rep["condition_a"]["status"] == "refuted_condition_a" \
        and abs(wv + 4.0) <= 1e-9
    ok = loss_ok and immediate and refuted
    report(3, ok, f"loss {trace.final_loss!r}, effective iterations "
                  f"{trace.effective_iterations}, check: {rep['condition_a']['status']} "
                  f"with witness value {wv!r}")


def test_criterion_04_monotone_descent():
    rng = np.random.default_rng(2024)
    instances = [(2, SEVEN_NODE_S)]
    for _ in range(50):
        n = int(rng.integers(20, 501))
        dens = min(1.0, float(rng.uniform(2, 12)) / n)
        instances.append((int(rng.integers(2, 6)), random_symmetric(rng, n, dens)))
    worst = -np.inf
    for idx, (C, A) in enumerate(instances):
        S = SparseSimilarity(A)
        cfg = SolverConfig()
        step = cfg.resolved_step(S)
        X = init_membership(S.N, C, "random", seed=idx)
        prev = loss_decomposed(X, S)
        for _ in range(1000):
            X = gpa_step(X, S, share_matrix(X), step)
            loss = loss_decomposed(X, S)
            worst = max(worst, loss - prev)
            prev = loss
    ok = worst <= 1e-9
    report(4, ok, f"{len(instances)} instances x 1000 auto-step iterations, largest loss "
                  f"increase {worst:.3e} (slack 1e-9)")


def test_criterion_05_oracle_equivalence():
    rng = np.random.default_rng(5)
    g_dev = l_dev = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 201))
        C = int(rng.integers(1, 6))
        A = random_symmetric(rng, n, float(rng.uniform(0.02, 0.5)), weighted=bool(rng.integers(2)))
        X = random_membership(rng, C, n)
        S = SparseSimilarity(A)
        g_dev = max(g_dev, np.abs(gradient(X, S) - gradient_dense_reference(X, A)).max())
        dense = loss_dense_reference(X, A)
        l_dev = max(l_dev, abs(loss_decomposed(X, S) - dense) / dense)
    ok = g_dev <= 1e-10 and l_dev <= 1e-10
    report(5, ok, f"100 instances: gradient max abs deviation {g_dev:.2e}, loss max relative "
                  f"deviation {l_dev:.2e} (both <= 1e-10)")


def test_criterion_06_derivative_checks():
    rng = np.random.default_rng(6)
    n, C, h = 30, 3, 1e-5
    A = random_symmetric(rng, n, 0.2)
    S = SparseSimilarity(A)
    X = random_membership(rng, C, n)
    G = gradient(X, S)
    g_err = hv_err = 0.0
    for _ in range(20):
        E = rng.normal(size=(C, n))
        E /= np.linalg.norm(E)
        fd = (loss_dense_reference(X + h * E, A) - loss_dense_reference(X - h * E, A)) / (2 * h)
        exact = np.sum(G * E)
        g_err = max(g_err, abs(fd - exact) / abs(exact))
        V = rng.normal(size=(C, n))
        V /= np.linalg.norm(V)
        fd_hv = (gradient(X + h * V, S) - gradient(X - h * V, S)) / (2 * h)
        hv = hessian_vector_product(X, V, S)
        hv_err = max(hv_err, np.linalg.norm(fd_hv - hv) / np.linalg.norm(hv))
    ok = g_err <= 1e-5 and hv_err <= 1e-5
    report(6, ok, f"20 directions each: gradient relative error {g_err:.2e}, Hessian-vector "
                  f"relative error {hv_err:.2e} (both <= 1e-5)")


def _active_set_oracle(x):
    C = len(x)
    best, best_d = None, np.inf
    for r in range(1, C + 1):
        for A in itertools.combinations(range(C), r):
            A = list(A)
            y = np.zeros(C)
            y[A] = x[A] - (x[A].sum() - 1.0) / len(A)
            if y.min() < -1e-15:
                continue
            d = np.linalg.norm(y - x)
            if d < best_d:
                best, best_d = y, d
    return best


def test_criterion_07_projection():
    rng = np.random.default_rng(7)
    dev = sum_dev = 0.0
    idem = inside = True
    for C in (2, 3, 4):
        for _ in range(1000):
            x = rng.normal(scale=rng.choice([0.1, 1.0, 10.0]), size=C)
            y = project_simplex(x)
            dev = max(dev, np.abs(y - _active_set_oracle(x)).max())
            idem &= np.array_equal(project_simplex(y), y)
            inside &= bool(y.min() >= 0)
            sum_dev = max(sum_dev, abs(y.sum() - 1.0))
    ok = dev <= 1e-9 and idem and inside and sum_dev <= 1e-12
    report(7, ok, f"3000 vectors: oracle deviation {dev:.2e}, idempotent {idem}, nonnegative "
                  f"{inside}, sum deviation {sum_dev:.1e}")


def test_criterion_08_synthetic_recovery():
    data = synthetic()
    S, labels = data["S"], data["labels"]
    step = SYNTH_STEP_TIMES_N / S.N
    X0 = init_membership(S.N, 2, "row_one")
    results = {}
    for method, runner in (("gpa", run_gpa), ("fista", run_fista)):
        t0 = time.perf_counter()
        X, trace = runner(X0, S, SolverConfig(step_size=step, method=method, max_iter=10))
        results[method] = (dominant_accuracy(X, labels), time.perf_counter() - t0)
    ok = all(acc >= 0.99 and data["gen_s"] + t < 30 for acc, t in results.values())
    report(8, ok, f"N={S.N}, step {step:.3e}, 10 iterations from the row-one start: "
                  f"GPA {results['gpa'][0]:.1%} ({results['gpa'][1]:.1f} s), FISTA "
                  f"{results['fista'][0]:.1%} ({results['fista'][1]:.1f} s); need >= 99%")


def test_supplementary_dense_cluster_recovery():
    """Same two-cluster layout at intra-cluster degrees 1200 and 1600.

    Not an acceptance criterion: it shows recovery within 10 iterations once
    the clusters are as dense as in the full-scale construction.
    """
    g, labels = generate_two_cluster_er(
        GeneratorSpec(n1=5000, p1=1200 / 4999, n2=2500, p2=1600 / 2499, k_inter=20, seed=1))
    S = build_similarity(g)
    X0 = init_membership(S.N, 2, "row_one")
    accs = {}
    for method, runner in (("gpa", run_gpa), ("fista", run_fista)):
        X, _ = runner(X0, S, SolverConfig(step_size=SYNTH_STEP_TIMES_N / S.N, method=method,
                                          max_iter=10))
        accs[method] = dominant_accuracy(X, labels)
    print(f"supplementary dense clusters: GPA {accs['gpa']:.1%}, FISTA {accs['fista']:.1%}")
    assert min(accs.values()) >= 0.99


def test_criterion_09_fista_acceleration():
    rows = []
    data = synthetic()
    S = data["S"]
    X0 = init_membership(S.N, 2, "random", seed=0)
    step = SYNTH_STEP_TIMES_N / S.N
    cases = [("synthetic", S, X0, step)]
    for seed in range(10):
        C, A = planted_instance(seed)
        Si = SparseSimilarity(A)
        cases.append((f"random{seed}", Si, init_membership(Si.N, C, "random", seed=seed), "auto"))
    ok = True
    for name, Si, X0i, st in cases:
        _, gt = run_gpa(X0i, Si, SolverConfig(step_size=st, max_iter=200000))
        target = min(gt.losses)
        _, ft = run_fista(X0i, Si, SolverConfig(step_size=st, method="fista",
                                               fista_restart=True, max_iter=200000))
        ng, nf = first_reach(gt, target), first_reach(ft, target)
        _, lit = run_fista(X0i, Si, SolverConfig(step_size=st, method="fista", max_iter=200000))
        good = nf is not None and nf < ng
        ok &= good
        rows.append(f"{name} {nf}/{ng}" + ("" if first_reach(lit, target) is None
                                         else f" (no restart: {first_reach(lit, target)})"))
    report(9, ok, "FISTA/GPA iterations to GPA's terminal loss at matched step: "
                  + ", ".join(rows))


def test_criterion_10_thread_determinism(tmp_path, capsys):
    g7 = tmp_path / "seven.txt"
    g7.write_text(seven_node_text())
    gs = tmp_path / "synthetic.txt"
    write_edge_list(synthetic()["g"], gs)
    runs = [
        (g7, ["--no-prune", "--step", "0.1", "--init", "random", "--seed", "0"]),
        (g7, ["--no-prune", "--step", "0.1", "--init", "row_one"]),
        (g7, ["--no-prune", "--step", "0.1", "--init", "uniform"]),
        (gs, ["--init", "row_one", "--max-iter", "10", "--step", "5e-5"]),
        (gs, ["--init", "row_one", "--max-iter", "10", "--step", "5e-5", "--method", "fista"]),
    ]
    for seed in range(10):
        C, A = planted_instance(seed)
        iu = np.argwhere(np.triu(A, 1))
        p = tmp_path / f"random{seed}.txt"
        p.write_text("".join(f"{u} {v}\n" for u, v in iu))
        runs.append((p, ["--c", str(C), "--no-prune", "--seed", str(seed), "--max-iter", "500"]))
    mismatches = []
    for idx, (graph, flags) in enumerate(runs):
        blobs = []
        for threads in ("1", "max", "4"):
            out = tmp_path / f"run{idx}_{threads}"
            code = cli.main(["cluster", str(graph), "--no-timing", "--threads", threads,
                             "--out", str(out)] + flags)
            assert code == 0
            blobs.append(tuple((out / f).read_bytes() for f in ("membership.csv", "trace.csv")))
        if len(set(blobs)) != 1:
            mismatches.append(idx)
    capsys.readouterr()
    ok = not mismatches
    report(10, ok, f"{len(runs)} instances x threads 1/max/4: byte-identical membership and "
                   f"trace files" + (f", mismatches {mismatches}" if mismatches else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
