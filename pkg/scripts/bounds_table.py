"""Lower bound, PDE value and upper bound at (0, 0) over a small (a, pi) grid."""
import argparse

from pinstop.bounds import lower_bound
from pinstop.params import GridSpec, MCConfig, ModelParams
from pinstop.vi_solver import solve

ap = argparse.ArgumentParser()
ap.add_argument("--paths", type=int, default=200_000)
ap.add_argument("--steps", type=int, default=400)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()
mc = MCConfig(n_paths=args.paths, n_steps=args.steps, seed=args.seed)

print(f"{'a':>5} {'pi':>5} {'lower':>9} {'se':>8} {'V_pde':>9} {'upper':>9} {'gap':>8}")
for a in (-1.0, -0.5, 0.5, 1.0):
    for pi in (0.25, 0.5, 0.75):
        p = ModelParams(a, pi)
        v = solve(p, GridSpec.around(a)).value_at(0.0, 0.0)
        b = lower_bound(0.0, 0.0, p, mc)
        print(f"{a:5.2f} {pi:5.2f} {b.lower:9.5f} {b.lower_stderr:8.1e} {v:9.5f} {b.upper:9.5f} {b.gap:8.5f}")
