"""Calibrate the fingerprint-comparison thresholds used by the acceptance suite.

Runs the comparison statistic at k=4, trials=2000 over independent seed
pairs for two null cases (a space against itself) and one alternative
(circle against dyadic ultrametric, both N=64), and writes the observed
distributions to ``sampling_thresholds.json`` next to this script.

The thresholds 0.05 (null) and 0.2 (alternative) are accepted when every
null run stays below 0.05 and every alternative run stays above 0.2.

    python calibration/sampling_thresholds.py
"""

import json
import sys
from pathlib import Path

import numpy as np

from metrepair import InstanceSpec, fingerprint_compare, generate

K, TRIALS, RUNS = 4, 2000, 25
NULL_MAX, ALT_MIN = 0.05, 0.2


def summary(values):
    v = np.asarray(values)
    return {"min": float(v.min()), "median": float(np.median(v)),
            "max": float(v.max()), "values": [float(x) for x in v]}


def main():
    circle = generate(InstanceSpec("circle", 64))
    dyadic = generate(InstanceSpec("dyadic_ultrametric", 64))
    cases = {
        "circle_vs_circle": (circle, circle),
        "dyadic_vs_dyadic": (dyadic, dyadic),
        "circle_vs_dyadic": (circle, dyadic),
    }
    out = {"k": K, "trials": TRIALS, "runs": RUNS, "seed_pairs": "(2r, 2r+1) for r < runs",
           "null_max": NULL_MAX, "alternative_min": ALT_MIN, "cases": {}}
    for name, (a, b) in cases.items():
        stats = [fingerprint_compare(a.kernel, a.space, b.kernel, b.space, K, TRIALS,
                                     2 * r, 2 * r + 1) for r in range(RUNS)]
        out["cases"][name] = summary(stats)
        print(f"{name:18s} min {min(stats):.4f}  max {max(stats):.4f}")
    nulls = [out["cases"][c]["max"] for c in ("circle_vs_circle", "dyadic_vs_dyadic")]
    out["accepted"] = max(nulls) <= NULL_MAX and out["cases"]["circle_vs_dyadic"]["min"] >= ALT_MIN
    path = Path(__file__).with_suffix(".json")
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"accepted: {out['accepted']}  -> {path}")
    return 0 if out["accepted"] else 1


if __name__ == "__main__":
    sys.exit(main())
