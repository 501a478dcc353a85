"""Data behind the three figures: value curves, H profiles and free boundaries."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .belief import indicator_H
from .classical_bridge import boundary_b, value_known_pinning
from .closed_form_a0 import value_a0
from .errors import ConfigError
from .mc_engine import thread_count
from .params import GridSpec, ModelParams
from .vi_solver import extract_region, solve

FIG1_PRIORS = (0.1, 0.5, 0.9)
FIG2_A = (-1.0, 1.0)
FIG2_TIMES = (0.0, 0.2, 0.4, 0.6, 0.8)
FIG3_A = (-2.0, -1.0, -0.5, 0.2, 0.5, 1.0)


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    return "" if np.isnan(v) else f"{v:.17g}"


def write_csv(target, header, rows) -> None:
    """Header plus rows at 17 significant digits, to a path or an open text file."""
    if not hasattr(target, "write"):
        with open(target, "w", newline="") as fh:
            write_csv(fh, header, rows)
        return
    w = csv.writer(target)
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def fig1_rows(n: int = 401):
    x = np.linspace(-2.0, 2.0, n)
    cols = [value_a0(0.0, x, q) for q in FIG1_PRIORS]
    v1 = value_known_pinning(0.0, x, 0.0)
    header = ["x"] + [f"v_p{int(round(100 * q))}" for q in FIG1_PRIORS] + ["v1", "identity"]
    return header, list(zip(x, *cols, v1, x))


def fig2_rows(a: float, pi: float = 0.5, n: int = 401, times=FIG2_TIMES):
    p = ModelParams(a, pi)
    x = np.linspace(a - 3.0, a + 3.0, n)
    if not np.any(x == a):
        x = np.sort(np.append(x, a))
    cols = [indicator_H(t, x, p) for t in times]
    header = ["x"] + [f"H_t{t:g}" for t in times]
    return header, list(zip(x, *cols))


def fig3_region(a: float, pi: float = 0.5, grid: GridSpec | None = None):
    p = ModelParams(a, pi)
    region = extract_region(solve(p, grid or GridSpec.around(a)))
    ref = boundary_b(region.t, a)
    header = ["t", "lower_x", "upper_x", "label", "reference"]
    rows = list(zip(region.t, region.lower, region.upper, region.labels(), ref))
    return region, header, rows


def write_figures(which: int, out_dir, pi: float = 0.5) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if which == 1:
        path = out / "fig1_values.csv"
        write_csv(path, *fig1_rows())
        written.append(path)
    elif which == 2:
        for a in FIG2_A:
            path = out / f"fig2_H_a{a:g}.csv"
            write_csv(path, *fig2_rows(a, pi))
            written.append(path)
    elif which == 3:
        with ThreadPoolExecutor(max_workers=thread_count()) as ex:
            results = list(ex.map(lambda a: fig3_region(a, pi), FIG3_A))
        for a, (_, header, rows) in zip(FIG3_A, results):
            path = out / f"fig3_boundary_a{a:g}.csv"
            write_csv(path, header, rows)
            written.append(path)
    else:
        raise ConfigError(f"no figure {which}")
    return written
