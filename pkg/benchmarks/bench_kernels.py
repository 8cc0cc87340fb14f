"""Compare the compiled and pure-numpy ray kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times the two hot operations the localizer leans on: batched ray totals
and batched launch-angle inversion, plus one full localization fix.
"""

import argparse
import math
import timeit

import numpy as np

from anchordeploy import kernels
from anchordeploy.localizer import LocalizerConfig, locate
from anchordeploy.montecarlo import synthesize_measurements, trial_rngs
from anchordeploy.optimize import azimuth_layout, geometry_from_alpha
from anchordeploy.raytrace import min_grazing_angle
from anchordeploy.ssp import builtin_profile, standardize


def _cases(profile, depth):
    s = profile.speeds
    lo = min_grazing_angle(profile, depth) + 1e-7
    thetas = np.radians(np.linspace(15, 89, 64))
    cos0 = np.cos(thetas)
    targets = kernels._pykernels.ray_totals_many(s, depth, cos0)[1]
    return {
        "ray_totals_many (64 rays)": lambda m: m.ray_totals_many(s, depth, cos0),
        "invert_many L (64 targets)": lambda m: m.invert_many(
            s, depth, targets, m.KIND_L, lo, math.pi / 2, 1e-10, 1e-6, 200
        ),
    }


def _locate_case(profile, depth):
    g = geometry_from_alpha(np.array([0.0, 0.0, depth]), math.radians(46.5), azimuth_layout(5))
    rng, _ = trial_rngs(0, 0)
    meas, times = synthesize_measurements(profile, g, 0.01, rng, with_times=True)
    cfg = LocalizerConfig(start_depth=depth + 5)
    return lambda: locate(profile, g.refs, meas, cfg, measured_t=times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--depth", type=float, default=2500.0)
    args = ap.parse_args()

    profile = standardize(builtin_profile("ssp1"))
    found = kernels.backends()
    print(f"backends available: {', '.join(found)}")
    for name, fn in _cases(profile, args.depth).items():
        row = []
        for bname, mod in found.items():
            n, _ = timeit.Timer(lambda: fn(mod)).autorange()
            best = min(timeit.repeat(lambda: fn(mod), number=n, repeat=args.repeat)) / n
            row.append((bname, best))
        cells = "  ".join(f"{b}={t * 1e3:8.3f} ms" for b, t in row)
        speedup = row[0][1] / row[-1][1] if len(row) > 1 else 1.0
        print(f"{name:28s} {cells}  speedup={speedup:5.1f}x")

    fix = _locate_case(profile, args.depth)
    for bname in found:
        prev = kernels.set_backend(bname)
        try:
            best = min(timeit.repeat(fix, number=3, repeat=args.repeat)) / 3
        finally:
            kernels.set_backend(prev)
        print(f"{'locate (J=5, one fix)':28s} {bname}={best * 1e3:8.3f} ms")


if __name__ == "__main__":
    main()
