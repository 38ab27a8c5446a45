"""Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned.

Run with ``pytest tests/test_acceptance.py`` (the lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import random
import sys
import time
from pathlib import Path

import mpmath as mp
import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
import oracle  # noqa: E402

from rarevc import bounds as B  # noqa: E402
from rarevc.bounds import BoundInput  # noqa: E402
from rarevc.classes import (  # noqa: E402
    FiniteClassSpec,
    brute_force_shattering,
    brute_force_vc_dim,
    make_tail_halflines,
)
from rarevc.cli import figure_grid, figure_rows, main  # noqa: E402
from rarevc.empirical import sup_deviation_halflines  # noqa: E402
from rarevc.montecarlo import (  # noqa: E402
    ExperimentConfig,
    SymmetrizationConfig,
    bound_input_for,
    run_coverage,
    verify_conditioning,
    verify_symmetrization,
)

RESULTS = []

P, DELTA = 1e-3, 1e-2
SEED = 20211130


def report(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {title}: {detail}"
    print(line)
    RESULTS.append(line)
    assert ok, line


# ---------------------------------------------------------------- 1


def test_01_figure_ordering():
    start = time.perf_counter()
    rows = figure_rows(figure_grid(32_000, 10**8, 8), P, DELTA)
    bad = []
    for n, r in rows:
        first, second, third, rel = (r[k] for k in ("first", "second", "third", "relative"))
        if n >= 10**5:
            if not (third.valid and first.valid and rel.valid):
                bad.append((n, "invalid"))
            elif not (third.total < first.total and third.total < rel.total):
                bad.append((n, "Cor 4.4 not below Thm 3.1 and Thm B.1"))
        if n > 10**6 and not (first.total < rel.total and second.total < rel.total):
            bad.append((n, "Thm 3.1/3.2 not below Thm B.1"))
    elapsed = time.perf_counter() - start
    checked = sum(n >= 10**5 for n, _ in rows)
    report(1, "Figure ordering", not bad and elapsed < 1.0,
           f"{checked} grid points n>=1e5, violations={bad[:3]}, {elapsed:.3f}s (<1s)")


# ---------------------------------------------------------------- 2


def test_02_spot_values():
    n = 10**6
    inp = bound_input_for(make_tail_halflines(P), n, DELTA)
    s = oracle.halfline_s
    want = {
        "Thm 3.1": (B.rare_sym_after_bound(inp).total, oracle.sym_after(n, P, DELTA, s(mp.mpf(4) * n * mp.mpf(P)))),
        "Thm 3.2": (B.rare_sym_before_bound(inp).total, oracle.sym_before(n, P, DELTA, s(mp.mpf(8) * n * mp.mpf(P)))),
        "Cor 4.4": (B.expectation_route_bound(inp).total, oracle.route(n, P, DELTA, 1)),
        "Thm B.1": (B.relative_vc_bound(inp).total, oracle.relative(n, P, DELTA, s(2 * n))),
    }
    approx = {"Thm 3.1": 3.898e-4, "Thm 3.2": 3.988e-4, "Cor 4.4": 2.992e-4, "Thm B.1": 4.157e-4}
    errs = {k: float(abs(mp.mpf(got) - ref) / ref) for k, (got, ref) in want.items()}
    near = all(abs(float(want[k][1]) - approx[k]) < 5e-4 * approx[k] for k in approx)
    ok = all(e <= 1e-12 for e in errs.values()) and near
    detail = ", ".join(f"{k}={want[k][0]:.6e} (rel err {e:.1e})" for k, e in errs.items())
    report(2, "Spot values vs 60-digit oracle (1e-12)", ok, detail)


# ---------------------------------------------------------------- 3 and 4


def random_vc_inputs(seed, count=1000):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = int(round(10 ** rng.uniform(0, 9)))
        delta = rng.uniform(1e-12, 1.0 - 1e-12)
        log_s = rng.uniform(0.0, n * math.log(2.0))
        out.append((n, delta, log_s))
    return out


def test_03_improved_dominance():
    start = time.perf_counter()
    violations = 0
    for n, delta, log_s in random_vc_inputs(3):
        inp = BoundInput(n, 1.0, delta, lambda x, v=log_s: v)
        violations += not (B.improved_vc_bound(inp).total < B.classic_vc_bound(inp).total)
    elapsed = time.perf_counter() - start
    report(3, "Improved VC below classic VC", violations == 0 and elapsed < 1.0,
           f"1000 inputs, violations={violations}, {elapsed:.3f}s (<1s)")


def test_04_inversion_plug_back():
    violations = []
    for n, delta, log_s in random_vc_inputs(4):
        inp = BoundInput(n, 1.0, delta, lambda x, v=log_s: v)
        pairs = (
            ("classic", B.classic_vc_tail, B.classic_vc_bound),
            ("improved", B.improved_vc_tail, B.improved_vc_bound),
        )
        for name, tail, bound in pairs:
            back = tail(n, bound(inp).total, log_s)
            if back > delta * (1 + 1e-9):
                violations.append((name, n, back / delta - 1))
    report(4, "Tail(bound(delta)) <= delta(1+1e-9)", not violations,
           f"2x1000 inputs, violations={len(violations)} {violations[:2]}")


# ---------------------------------------------------------------- 5


def dense_grid_sup(tail, n, q, step=1e-7, chunk=1 << 20):
    best = 0.0
    total = int(math.floor(q / step))
    for lo in range(0, total + 1, chunk):
        t = np.arange(lo, min(lo + chunk, total + 1)) * step
        fn = np.searchsorted(tail, t, side="right") / n
        best = max(best, float(np.max(np.abs(fn - t))))
    fq = np.searchsorted(tail, q, side="right") / n
    return max(best, abs(fq - q))


def test_05_exact_statistic_vs_grid():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    below = 0
    for _ in range(200):
        n = int(rng.integers(1, 51))
        q = float(rng.uniform(0.005, 0.05))
        x = rng.uniform(0.0, 1.5 * q, n)
        tail = np.sort(x[x <= q])
        exact = sup_deviation_halflines(tail, n, q, q)
        grid = dense_grid_sup(tail, n, q)
        worst = max(worst, abs(exact - grid))
        below += grid > exact + 1e-15
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and below == 0 and elapsed < 10.0
    report(5, "Exact half-line statistic vs 1e-7 grid", ok,
           f"200 instances, max |diff|={worst:.2e} (<=1e-7), grid above exact={below}, {elapsed:.2f}s (<10s)")


# ---------------------------------------------------------------- 6


def test_06_coverage():
    start = time.perf_counter()
    cfg = ExperimentConfig(n=10**5, p=1e-3, delta=0.05, replications=500, master_seed=SEED)
    rep = run_coverage(cfg)
    elapsed = time.perf_counter() - start
    valid = {k.value: c for k, c in rep.kinds.items() if c.valid}
    ok = (
        len(valid) == 4
        and all(c.exceed_count == 0 and c.coverage_ci_low >= 0.95 for c in valid.values())
        and elapsed < 60.0
    )
    detail = ", ".join(f"{k}: {c.exceed_count} exceed, low {c.coverage_ci_low:.4f}" for k, c in valid.items())
    report(6, "Coverage n=1e5 R=500", ok, f"{detail}; {elapsed:.2f}s (<60s)")


# ---------------------------------------------------------------- 7


def test_07_conditioning():
    start = time.perf_counter()
    cfg = ExperimentConfig(n=2000, p=0.05, delta=0.5, replications=80_000, master_seed=SEED)
    rep = verify_conditioning(cfg, 0.01, per_side=2000)
    adv = verify_conditioning(cfg, 0.01, per_side=2000, conditional_p=0.1)
    elapsed = time.perf_counter() - start
    ok = (
        min(rep.sample_sizes) >= 2000
        and rep.ks_statistic < rep.critical_value
        and adv.ks_statistic > adv.critical_value
        and elapsed < 60.0
    )
    report(7, "Conditioning trick KS test", ok,
           f"k*={rep.k_star}, sizes={rep.sample_sizes}, KS={rep.ks_statistic:.4f} < {rep.critical_value:.4f}; "
           f"wrong-p control KS={adv.ks_statistic:.4f} > {adv.critical_value:.4f}; {elapsed:.2f}s (<60s)")


# ---------------------------------------------------------------- 8


def test_08_symmetrization():
    start = time.perf_counter()
    parts = []
    ok = True
    for a in (0.5, SymmetrizationConfig.maximal_a(500, 0.1)):
        rep = verify_symmetrization(SymmetrizationConfig(a=a, t=0.1, n=500, p=1.0, replications=5000, master_seed=SEED))
        lhs = max(rep.lhs_upper, rep.lhs_lower)
        ok &= rep.holds
        parts.append(f"a={a:.4f}: lhs={lhs:.4f} <= 2*{rep.rhs:.4f}+3*{rep.stderr:.4f}")
    elapsed = time.perf_counter() - start
    report(8, "Ghost-sample inequality", ok and elapsed < 30.0, f"{'; '.join(parts)}; {elapsed:.2f}s (<30s)")


# ---------------------------------------------------------------- 9


def test_09_sauer():
    rng = random.Random(9)
    violations = 0
    for _ in range(50):
        g = rng.randint(1, 10)
        ground = list(range(g))
        sets = [[x for x in ground if rng.random() < 0.5] for _ in range(rng.randint(1, 60))]
        spec = FiniteClassSpec(ground, sets)
        v = brute_force_vc_dim(spec)
        for m in range(11):
            k = min(m, g)
            s = max(brute_force_shattering(spec, c) for c in itertools.combinations(ground, k))
            violations += s > (m + 1) ** v
    report(9, "Sauer bound on random finite classes", violations == 0,
           f"50 classes, m<=10, violations={violations}")


# ---------------------------------------------------------------- 10


def test_10_determinism(tmp_path):
    outputs = []
    for i in range(2):
        cov = tmp_path / f"cov{i}.csv"
        fig = tmp_path / f"fig{i}.csv"
        codes = (
            main(["coverage", "--seed", str(SEED), "--out-csv", str(cov)]),
            main(["figure", "--out-csv", str(fig), "--out-svg", str(tmp_path / f"fig{i}.svg")]),
        )
        outputs.append((codes, cov.read_bytes(), fig.read_bytes()))
    (c0, cov0, fig0), (c1, cov1, fig1) = outputs
    ok = c0 == c1 == (0, 0) and cov0 == cov1 and fig0 == fig1
    report(10, "Byte-identical repeated CLI runs", ok,
           f"exit codes {c0}/{c1}, coverage CSV identical={cov0 == cov1}, figure CSV identical={fig0 == fig1}")


if __name__ == "__main__":
    import tempfile

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                failed += 1
            except Exception as exc:  # a crash still gets its own line
                failed += 1
                print(f"[FAIL] {name}: {type(exc).__name__}: {exc}")
    sys.exit(1 if failed else 0)
