"""Free-boundary sweep: region structure per pin level and a Monte Carlo check of each extracted policy.

For every a the PDE stopping set is turned into a rule and simulated from a
few starting points; the simulated mean should match the PDE value there.
"""
import argparse
import math


from pinstop.belief import critical_time
from pinstop.errors import NotFound
from pinstop.mc_engine import evaluate_policy
from pinstop.params import GridSpec, MCConfig, ModelParams, TimeState
from pinstop.vi_solver import extract_region, solve

ap = argparse.ArgumentParser()
ap.add_argument("--pi", type=float, default=0.5)
ap.add_argument("--paths", type=int, default=100_000)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()
mc = MCConfig(n_paths=args.paths, n_steps=400, seed=args.seed)

for a in (-2.0, -1.0, -0.5, 0.2, 0.5, 1.0):
    p = ModelParams(a, args.pi)
    s = solve(p, GridSpec.around(a))
    r = extract_region(s)
    try:
        tc = f"{critical_time(p):.4f}"
    except NotFound:
        tc = "none"
    k = r.n_intervals()
    print(f"a={a:+.1f} V(0,0)={s.value_at(0, 0):.5f} t_c={tc} first contact={r.first_contact_time():.4f} "
          f"max intervals/slice={k.max()} residual={s.residual.max():.1e}")
    rule = r.as_rule()
    for t0, x0 in ((0.0, 0.0), (0.3, a - 0.5), (0.5, a + 0.5)):
        e = evaluate_policy(rule, p, TimeState(t0, x0), mc)
        v = s.value_at(t0, x0)
        z = (e.mean - v) / e.stderr if e.stderr > 0 else math.nan
        print(f"    start ({t0}, {x0:+.2f}): pde {v:+.5f}  mc {e.mean:+.5f} +- {e.stderr:.1e}  z={z:+.2f}")
