"""Command-line entry point: ``pinstop <command> ...``.

Exit status is 0 on success, 2 on invalid input and 1 on numerical failure.
JSON goes to stdout; CSV files use 17 significant digits.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, fields

import numpy as np

from . import bounds, figures, mc_engine, urn_lab, vi_solver
from .belief import posterior_value
from .classical_bridge import policy_tau_b, value_known_pinning
from .closed_form_a0 import value_a0
from .core_math import solve_alpha
from .errors import ConfigError, DomainError, PinstopError
from .params import GridSpec, MCConfig, ModelParams, TimeState


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(obj) -> None:
    print(json.dumps(obj))


def _num(v):
    # JSON has no NaN/inf; report them as null
    v = float(v)
    return v if math.isfinite(v) else None


def _model(args) -> ModelParams:
    return ModelParams(args.a, args.pi)


def _grid_from(args) -> GridSpec:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        for key in ("a", "pi"):
            if key in cfg and getattr(args, key) is None:
                setattr(args, key, cfg[key])
    if args.a is None or args.pi is None:
        raise ConfigError("need --a and --pi (flags or config file)")
    base = GridSpec.around(args.a)
    names = {f.name for f in fields(GridSpec)}
    vals = {k: v for k, v in asdict(base).items()}
    vals.update({k: v for k, v in cfg.items() if k in names})
    if "eps" in cfg:
        vals["t_cutoff"] = 1.0 - cfg["eps"]
    for k in ("x_min", "x_max", "nx", "nt"):
        if getattr(args, k, None) is not None:
            vals[k] = getattr(args, k)
    if getattr(args, "eps", None) is not None:
        vals["t_cutoff"] = 1.0 - args.eps
    return GridSpec(**vals)


def cmd_alpha(args):
    c = solve_alpha()
    _emit({"alpha": c.value, "residual": c.residual})


def cmd_value(args):
    p = _model(args)
    st = TimeState(args.t, args.x)
    if st.t >= 1.0:
        raise DomainError("t must be < 1")
    if p.pi == 1.0 or p.a == 0.0:
        # tau_b is optimal for every pi when a = 0
        fn = value_known_pinning if p.pi == 1.0 else lambda t, x, a: value_a0(t, x, p.pi)
        v, how = fn(st.t, st.x, p.a), "closed-form"
        stop = bool(policy_tau_b(st.t, st.x, p.a))
    elif p.pi == 0.0:
        v, how = st.x + max(p.a, 0.0) * (1.0 - st.t), "no-pinning"
        stop = p.a <= 0.0
    else:
        g = _grid_from(args)
        s = vi_solver.solve(p, g, args.tol, args.omega)
        v, how = s.value_at(st.t, st.x), "pde"
        n = int(np.argmin(np.abs(s.t - st.t)))
        i = int(np.argmin(np.abs(s.x - st.x)))
        stop = bool(s.contact[n, i])
    _emit({"value": float(v), "posterior": float(posterior_value(st.t, st.x, p)),
           "stop_now": stop, "method": how})


def cmd_bounds(args):
    p = _model(args)
    mc = MCConfig(n_paths=args.paths, n_steps=args.steps, seed=args.seed)
    b = bounds.lower_bound(args.t, args.x, p, mc)
    _emit({"lower": b.lower, "stderr": b.lower_stderr, "upper": b.upper, "seed": args.seed})


def cmd_solve(args):
    g = _grid_from(args)
    s = vi_solver.solve(_model(args), g, args.tol, args.omega)
    if args.out:
        if args.out.endswith(".csv"):
            rows = ((t, x, w, v, int(c)) for t, wr, vr, cr in zip(s.t, s.w, s.v, s.contact)
                    for x, w, v, c in zip(s.x, wr, vr, cr))
            figures.write_csv(args.out, ["t", "x", "w", "v", "contact"], rows)
        else:
            np.savez_compressed(args.out, t=s.t, x=s.x, w=s.w, v=s.v, obstacle=s.obstacle,
                                contact=s.contact)
    region = vi_solver.extract_region(s)
    _emit({"a": s.params.a, "pi": s.params.pi, "v00": s.value_at(0.0, 0.0),
           "sweeps": s.sweeps, "residual": vi_solver.complementarity_residual(s),
           "first_contact_t": _num(region.first_contact_time()), "out": args.out})


def cmd_boundary(args):
    g = _grid_from(args)
    region = vi_solver.extract_region(vi_solver.solve(_model(args), g, args.tol, args.omega))
    if args.out:
        region.to_csv(args.out)
        _emit({"out": args.out, "first_contact_t": _num(region.first_contact_time())})
    else:
        region.to_csv(sys.stdout)


def cmd_hplot(args):
    p = _model(args)
    times = [float(v) for v in args.times.split(",")]
    header, rows = figures.fig2_rows(p.a, p.pi, args.n, times)
    if args.out:
        figures.write_csv(args.out, header, rows)
        _emit({"out": args.out})
    else:
        figures.write_csv(sys.stdout, header, rows)


def _policy(args):
    if args.policy == "tau-b":
        return mc_engine.tau_b_rule(args.a)
    if args.policy == "never":
        return mc_engine.never_stop()
    if args.policy == "now":
        return mc_engine.stop_now()
    if args.policy == "boundary-file":
        if not args.boundary_file:
            raise ConfigError("--policy boundary-file needs a file argument")
        data = np.genfromtxt(args.boundary_file, delimiter=",", names=True, dtype=None,
                             encoding="utf-8", missing_values="", filling_values=np.nan)
        return mc_engine.interval_rule(data["t"], data["lower_x"], data["upper_x"])
    raise ConfigError(f"unknown policy {args.policy}")


def cmd_simulate(args):
    p = _model(args)
    mc = MCConfig(n_paths=args.paths, n_steps=args.steps, seed=args.seed)
    r = mc_engine.evaluate_policy(_policy(args), p, TimeState(args.t, args.x), mc)
    _emit({"mean": r.mean, "stderr": r.stderr, "n": r.n, "seed": args.seed})


def cmd_urn(args):
    tab = urn_lab.uncertain_urn_solve(urn_lab.UrnSpec(args.m, args.p, args.prior))
    if args.table:
        figures.write_csv(args.table, ["n", "j", "k", "posterior", "value", "decision"],
                          tab.rows())
    out = {"m": args.m, "p": args.p, "prior": args.prior, "value": float(tab.value[0, 0]),
           "decision": "stop" if tab.stop[0, 0] else "draw"}
    if tab.exact is not None:
        out["value_exact"] = str(tab.value00)
    _emit(out)


def cmd_urn_scaling(args):
    plist = [int(v) for v in args.plist.split(",")]
    rows = urn_lab.scaling_check(plist, args.prior)
    _emit({"prior": args.prior, "limit": rows[0].limit,
           "rows": [{"p": r.p, "scaled_value": r.scaled_value, "gap": r.gap} for r in rows],
           "decreasing": urn_lab.gaps_decreasing(rows)})


def cmd_figures(args):
    paths = figures.write_figures(args.which, args.out)
    _emit({"which": args.which, "files": [str(p) for p in paths]})


def _add_model(sp, required=True):
    sp.add_argument("--a", type=float, required=required, help="pin / drift level")
    sp.add_argument("--pi", type=float, required=required, help="prior that the path is a bridge")


def _add_grid(sp):
    sp.add_argument("--config", help="JSON file with GridSpec / ModelParams fields (eps allowed)")
    sp.add_argument("--x-min", dest="x_min", type=float)
    sp.add_argument("--x-max", dest="x_max", type=float)
    sp.add_argument("--nx", type=int)
    sp.add_argument("--nt", type=int)
    sp.add_argument("--eps", type=float, help="terminal cutoff 1 - t_cutoff")
    sp.add_argument("--omega", type=float, default=1.5)
    sp.add_argument("--tol", type=float, default=1e-9)


def _add_mc(sp, paths, steps):
    sp.add_argument("--paths", type=int, default=paths, help="antithetic pairs")
    sp.add_argument("--steps", type=int, default=steps)
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pinstop", description="Optimal stopping under pinning uncertainty")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sub.add_parser("alpha", help="boundary constant").set_defaults(fn=cmd_alpha)

    sp = sub.add_parser("value", help="value V(t, x, pi)")
    _add_model(sp)
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--x", type=float, default=0.0)
    _add_grid(sp)
    sp.set_defaults(fn=cmd_value)

    sp = sub.add_parser("bounds", help="upper and Monte Carlo lower bound")
    _add_model(sp)
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--x", type=float, default=0.0)
    _add_mc(sp, 200_000, 400)
    sp.set_defaults(fn=cmd_bounds)

    sp = sub.add_parser("solve", help="finite-difference value surface")
    _add_model(sp, required=False)
    _add_grid(sp)
    sp.add_argument("--out", help="output .npz (default format) or .csv")
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("boundary", help="stopping boundary curves as CSV")
    _add_model(sp, required=False)
    _add_grid(sp)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_boundary)

    sp = sub.add_parser("hplot", help="H(t, x) profiles as CSV")
    _add_model(sp)
    sp.add_argument("--times", default="0,0.2,0.4,0.6,0.8")
    sp.add_argument("--n", type=int, default=401)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_hplot)

    sp = sub.add_parser("simulate", help="Monte Carlo value of a stopping rule")
    _add_model(sp)
    sp.add_argument("--policy", choices=["tau-b", "never", "now", "boundary-file"], default="tau-b")
    sp.add_argument("boundary_file", nargs="?", help="CSV from `pinstop boundary`")
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--x", type=float, default=0.0)
    _add_mc(sp, 100_000, 400)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("urn", help="uncertain-replacement urn")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--prior", type=float, required=True)
    sp.add_argument("--table", help="write the full state table as CSV")
    sp.set_defaults(fn=cmd_urn)

    sp = sub.add_parser("urn-scaling", help="scaled balanced-urn values vs the continuous limit")
    sp.add_argument("--prior", type=float, required=True)
    sp.add_argument("--plist", default="25,100,400")
    sp.set_defaults(fn=cmd_urn_scaling)

    sp = sub.add_parser("figures", help="write figure data CSVs")
    sp.add_argument("--which", type=int, choices=[1, 2, 3], required=True)
    sp.add_argument("--out", default="figures")
    sp.set_defaults(fn=cmd_figures)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        args.fn(args)
    except UsageError as e:
        print(f"pinstop: error: {e}", file=sys.stderr)
        return 2
    except (ConfigError, DomainError, ValueError) as e:
        print(f"pinstop: invalid input: {e}", file=sys.stderr)
        return 2
    except (PinstopError, ArithmeticError) as e:
        print(f"pinstop: numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
