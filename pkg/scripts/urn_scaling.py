"""Balanced-urn values scaled by sqrt(2p) against the continuous a = 0 value."""
import time

from pinstop.urn_lab import gaps_decreasing, scaling_check, shepp_threshold

for prior in (0.0, 0.25, 0.5, 0.75, 1.0):
    t0 = time.perf_counter()
    rows = scaling_check([25, 100, 400, 1600], prior)
    dt = time.perf_counter() - t0
    gaps = " ".join(f"{r.gap:.5f}" for r in rows)
    print(f"prior={prior:.2f} limit={rows[0].limit:.5f} gaps={gaps} "
          f"decreasing={gaps_decreasing(rows)} ({dt:.1f}s)")

print("beta(p), p = 1..20:", [shepp_threshold(p) for p in range(1, 21)])
