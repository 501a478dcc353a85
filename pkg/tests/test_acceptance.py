"""One test per acceptance criterion, each at its own tolerance.

Each test appends an ``ACCEPT N: PASS|FAIL ...`` line that conftest prints in
the terminal summary.
"""
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE
from oracles import game_tree_value
from pinstop.belief import critical_time
from pinstop.bounds import lower_bound
from pinstop.classical_bridge import boundary_b, value_known_pinning
from pinstop.closed_form_a0 import value_a0, zero_crossing_a0
from pinstop.core_math import solve_alpha
from pinstop.mc_engine import evaluate_policy, simulate_arrays, summarize, tau_b_rule
from pinstop.params import GridSpec, MCConfig, ModelParams, TimeState
from pinstop.urn_lab import UrnSpec, gaps_decreasing, scaling_check, shepp_value, uncertain_urn_solve
from pinstop.vi_solver import complementarity_residual, extract_region, never_stop_mask, solve


def record(n: int, ok: bool, text: str) -> None:
    ACCEPTANCE.append(f"ACCEPT {n}: {'PASS' if ok else 'FAIL'} {text}")
    assert ok, text


def test_01_alpha():
    c = solve_alpha()
    runs = []
    for _ in range(20):
        t0 = time.perf_counter()
        solve_alpha()
        runs.append(time.perf_counter() - t0)
    dt = min(runs)
    ok = abs(c.value - 0.839924) < 1e-6 and c.residual < 1e-10 and dt < 1e-3
    record(1, ok, f"alpha={c.value:.10f} residual={c.residual:.1e} time={dt * 1e3:.3f}ms")


def test_02_closed_form_vs_pde():
    g = GridSpec(-4.0, 4.0, 800, 800, 1 - 1e-4)
    t0 = time.perf_counter()
    s = solve(ModelParams(0.0, 0.5), g)
    r = extract_region(s)
    dt = time.perf_counter() - t0
    win = (s.t[:, None] <= 0.95) & (np.abs(s.x[None, :]) <= 3)
    err = float(np.max(np.abs(s.v - value_a0(s.t[:, None], s.x[None, :], 0.5))[win]))
    early = r.t <= 0.95
    dev = float(np.max(np.abs(r.lower[early] - boundary_b(r.t[early], 0.0))))
    ok = err < 5e-3 and dev <= g.dx and dt < 120
    record(2, ok, f"max|V_pde-V|={err:.2e} boundary dev={dev / g.dx:.2f} cells time={dt:.1f}s")


def test_03_zero_crossing():
    x = zero_crossing_a0(0.5)
    record(3, abs(x + 0.286) <= 5e-3, f"x*={x:.6f} (target -0.286 +- 5e-3)")


def test_04_critical_time():
    t1 = critical_time(ModelParams(1.0, 0.5))
    t2 = critical_time(ModelParams(-1.0, 0.5))
    ok = abs(t1 - 0.536) <= 2e-3 and abs(t2 - 0.536) <= 2e-3 and abs(t1 - t2) < 1e-9
    record(4, ok, f"t_c(a=1)={t1:.6f} t_c(a=-1)={t2:.6f} |diff|={abs(t1 - t2):.1e} "
                  f"(target 0.536 +- 2e-3)")


def _region(a):
    s = solve(ModelParams(a, 0.5), GridSpec.around(a))
    return s, extract_region(s)


def test_05_free_boundary_structure():
    levels = (-2.0, -1.0, -0.5, 0.2, 0.5, 1.0)
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=4) as ex:
        out = dict(zip(levels, ex.map(_region, levels)))
    dt = time.perf_counter() - t0

    s, r = out[1.0]
    tc = critical_time(s.params)
    onset = r.first_contact_time()
    empty_early = not any(iv for t, iv in zip(r.t, r.intervals) if t < tc - 0.02)
    two = int(np.sum(r.n_intervals() >= 2))
    hit = r.n_intervals() > 0
    ref = boundary_b(r.t, 1.0) - s.grid.dx
    above = all(lo >= rb and hi >= rb for row, rb in zip(r.intervals, ref) for lo, hi in row)
    neg, below = {}, {}
    for a in (-2.0, -1.0, -0.5):
        sa, _ = out[a]
        X = sa.x[None, :]
        neg[a] = int(np.sum(sa.contact & (X < 0)))
        # above b(t) stopping is provably optimal, so also count the rest
        below[a] = int(np.sum(sa.contact & (X < 0) & (X < boundary_b(sa.t[:, None], a))))
    checks = {"(i)": empty_early, "(ii)": two > 0, "(iii)": above and bool(hit.any()),
              "(neg)": all(v == 0 for v in neg.values()), "time": dt < 900}
    ok = all(checks.values())
    detail = " ".join(f"{k}={'ok' if v else 'no'}" for k, v in checks.items())
    record(5, ok, f"{detail}; a=1: t_c={tc:.4f} first contact t={onset:.4f} "
                  f"slices with >=2 stop intervals={two}; contact nodes with x<0: "
                  + ", ".join(f"a={a:g}:{n} ({below[a]} below b)" for a, n in neg.items())
                  + f"; time={dt:.1f}s")


def test_06_bounds_sandwich():
    mc = MCConfig(n_paths=200_000, n_steps=400, seed=0)
    t0 = time.perf_counter()
    rows, ok = [], True
    for a in (-1.0, 1.0):
        for pi in (0.25, 0.5, 0.75):
            p = ModelParams(a, pi)
            v = solve(p, GridSpec.around(a)).value_at(0.0, 0.0)
            b = lower_bound(0.0, 0.0, p, mc)
            good = b.lower - 3 * b.lower_stderr <= v <= b.upper + 5e-3 and b.lower_stderr < 2e-3
            ok &= good
            rows.append(f"a={a:g},pi={pi:g}: {b.lower:.5f}<={v:.5f}<={b.upper:.5f}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    record(6, ok, "; ".join(rows) + f"; time={dt:.1f}s")


def test_07_monte_carlo_vs_theorem():
    mc = MCConfig(n_paths=500_000, n_steps=400, seed=0)
    t0 = time.perf_counter()
    rows, ok = [], True
    for pi in (0.1, 0.5, 0.9):
        r = evaluate_policy(tau_b_rule(0.0), ModelParams(0.0, pi), TimeState(0.0, 0.0), mc)
        v = value_a0(0.0, 0.0, pi)
        z = (r.mean - v) / r.stderr
        ok &= abs(z) <= 3 and r.stderr < 1.5e-3
        rows.append(f"pi={pi:g}: {r.mean:.5f} vs {v:.5f} (z={z:+.2f}, se={r.stderr:.1e})")
    dt = time.perf_counter() - t0
    ok &= dt < 120
    record(7, ok, f"{2 * mc.n_paths} paths; " + "; ".join(rows) + f"; time={dt:.1f}s")


def test_08_martingale_checks():
    p = ModelParams(1.0, 0.5)
    mc = MCConfig(n_paths=100_000, n_steps=4, seed=0, time_grid="uniform")
    t, _, _, bel = simulate_arrays(p, TimeState(0.0, 0.0), mc)
    rows, ok = [], True
    for k in (1, 2, 3):
        r = summarize(bel[:, k], mc.antithetic)
        z = (r.mean - p.pi) / r.stderr
        ok &= abs(z) <= 3
        rows.append(f"t={t[k]:g}: z={z:+.2f}")
    _, theta, xs, _ = simulate_arrays(ModelParams(1.0, 1.0), TimeState(0.0, 0.0),
                                      MCConfig(n_paths=50_000, n_steps=50, seed=1))
    dev = float(np.max(np.abs(xs[:, -1] - 1.0)))
    ok &= bool(theta.all()) and dev <= 1e-8
    record(8, ok, "belief mean " + ", ".join(rows) + f"; max|X_1-a| under theta=1: {dev:.1e}")


def test_09_urn_oracle():
    t0 = time.perf_counter()
    bad = []
    n = 0
    for N in range(2, 9):
        for m in range(1, N):
            for prior in (0, 0.25, 0.5, 0.75, 1):
                n += 1
                dp = uncertain_urn_solve(UrnSpec(m, N - m, prior)).value00
                if dp != game_tree_value(m, N - m, Fraction(prior)):
                    bad.append((m, N - m, prior))
    sv = shepp_value(1, 1)
    dt = time.perf_counter() - t0
    ok = not bad and sv == Fraction(1, 2) and dt < 30
    record(9, ok, f"{n} urns, mismatches={bad}; shepp(1,1)={sv}; time={dt:.1f}s")


def test_10_scaling():
    t0 = time.perf_counter()
    rows, ok = [], True
    for prior in (0.5, 1.0):
        sc = scaling_check([25, 100, 400], prior)
        ok &= gaps_decreasing(sc)
        rows.append(f"pi={prior:g}: gaps " + ", ".join(f"{r.gap:.5f}" for r in sc))
    dt = time.perf_counter() - t0
    ok &= dt < 60
    record(10, ok, "; ".join(rows) + f"; time={dt:.1f}s")


def test_11_property_sweeps():
    rng = np.random.default_rng(2024)
    fails = []
    # solver properties on random (a, pi)
    for _ in range(12):
        a = float(rng.uniform(-2, 2))
        pi = float(rng.uniform(0.05, 0.95))
        s = solve(ModelParams(a, pi), GridSpec.around(a, nx=301, nt=300))
        if not np.all(s.w >= s.obstacle - s.psor_tol):
            fails.append(f"dominance a={a:.3f} pi={pi:.3f}")
        if complementarity_residual(s) > 1e-7:
            fails.append(f"residual a={a:.3f} pi={pi:.3f}")
        if np.any(s.contact & never_stop_mask(s.params, s.grid)):
            fails.append(f"H-contact a={a:.3f} pi={pi:.3f}")
    # sandwich and monotonicity in pi at random points
    for _ in range(50):
        t = rng.uniform(0, 0.999, 2000)
        x = rng.uniform(-4, 4, 2000)
        p1, p2 = np.sort(rng.uniform(0, 1, 2))
        v1, v2 = value_a0(t, x, p1), value_a0(t, x, p2)
        if not np.all(x <= v1 + 1e-12) or not np.all(v1 <= value_known_pinning(t, x, 0.0) + 1e-12):
            fails.append(f"sandwich pi={p1:.3f}")
        if not np.all(v1 <= v2 + 1e-12):
            fails.append(f"monotone pi={p1:.3f},{p2:.3f}")
    record(11, not fails, f"12 solver sweeps + 50 x 2000 random points; failures={fails}")
