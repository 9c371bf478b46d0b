#!/usr/bin/env python3
"""Run every hypothesis audit for the default rough archetypes in 1-3
dimensions and print the per-audit records."""

import json
import pathlib
import sys

from fiolab.experiments import ExperimentConfig, run_audit

OUT = pathlib.Path("reports")


def main() -> int:
    OUT.mkdir(exist_ok=True)
    ok = True
    for n, jmax in [(1, 6), (2, 6), (3, 4)]:
        cfg = ExperimentConfig(experiment="audit", n=n, N=128, L=6.283185307179586,
                               m=-1.0, rho=1.0, j_min=1, j_max=jmax, seed=0,
                               out=str(OUT / f"audit_n{n}.json"))
        rep = run_audit(cfg)
        print(f"n={n}: {'PASS' if rep['passed'] else 'FAIL'}")
        for rec in rep["records"]:
            print("  " + json.dumps(rec, sort_keys=True))
        ok &= rep["passed"]
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
