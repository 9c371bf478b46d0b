#!/usr/bin/env python3
"""Sparse-domination study at the admissible corner (r = s = 2, m = -1/2)."""

import pathlib
import sys

from fiolab.experiments import ExperimentConfig, run_sparse

OUT = pathlib.Path("reports")


def main() -> int:
    OUT.mkdir(exist_ok=True)
    cfg = ExperimentConfig(experiment="sparse", n=2, N=64, L=6.283185307179586,
                           m=-0.5, rho=1.0, r=2.0, s=2.0, amplitude="power-rough",
                           phase="halfwave-rough", eta_target=0.5, seed=1,
                           out=str(OUT / "sparse.json"))
    rep = run_sparse(cfg)
    a = rep["runs"]["seed_a"]
    print(f"eta={a['eta']:.3f} C_pt={a['C_pointwise']:.4g} C_form={a['C_form']:.4g} "
          f"cubes={a['cube_count']} {'PASS' if rep['passed'] else 'FAIL'}")
    return 0 if rep["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
