#!/usr/bin/env python3
"""Full desk-scale decay study: localized L^r ratios (r = 1, 2), the
non-local piece, and the low-frequency kernel, each against its predicted
exponent.  Writes one JSON report per quantity."""

import pathlib
import sys

from fiolab.experiments import ExperimentConfig, run_decay

OUT = pathlib.Path("reports")


def main() -> int:
    OUT.mkdir(exist_ok=True)
    base = dict(experiment="decay", n=2, N=1024, L=16.0, rho=1.0,
                amplitude="power-rough", phase="halfwave-rough",
                t_low=1.0, t_high=2.0, j_min=2, j_max=6,
                probes_per_axis=8, seed=1)
    runs = [
        dict(quantity="tjb-localized", r=2.0, m=-1.25),
        dict(quantity="tjb-localized", r=1.0, m=-1.75),
        dict(quantity="tjb-maximal", r=2.0, m=-1.25),
        dict(quantity="tja", r=2.0, m=-1.25),
        dict(quantity="k0", L=512.0, m=0.5, probes_per_axis=4),
    ]
    ok = True
    for variant in runs:
        name = f"decay_{variant['quantity']}_r{variant.get('r', 0):g}.json"
        cfg = ExperimentConfig(**{**base, **variant, "out": str(OUT / name)})
        rep = run_decay(cfg)
        r = rep["report"]
        print(f"{variant['quantity']:15s} slope={r['slope']:+.3f} "
              f"bound={r['predicted'] + r['margin']:+.3f} -> "
              f"{'PASS' if rep['passed'] else 'FAIL'}")
        ok &= rep["passed"]
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
