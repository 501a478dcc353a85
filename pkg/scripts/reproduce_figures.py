"""Write the CSV data behind all three figures into ./figures (or argv[1])."""
import sys
import time

from pinstop.figures import write_figures

out = sys.argv[1] if len(sys.argv) > 1 else "figures"
for which in (1, 2, 3):
    t0 = time.perf_counter()
    paths = write_figures(which, out)
    print(f"fig {which}: {len(paths)} file(s) in {time.perf_counter() - t0:.1f}s")
    for p in paths:
        print("  ", p)
