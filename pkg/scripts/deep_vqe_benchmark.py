#!/usr/bin/env python3
"""Stochastic end-to-end runs: subsystem VQE references plus weighted
subspace search on the embedded model, compared against the deterministic
exact-backend values.

    python scripts/deep_vqe_benchmark.py [--seed 11] [--cells 2x4:w1,2x4:w2]

Runtime is dominated by the final optimization; expect minutes per cell on
one core.
"""

import argparse
import time

from deepvqe import OptimizerConfig, RunConfig, run_pipeline

CELLS = {
    "2x4:w1": dict(n_sites=8, n_subsystems=2, basis="w1"),
    "2x4:w2": dict(n_sites=8, n_subsystems=2, basis="w2"),
    "3x4:w1": dict(n_sites=12, n_subsystems=3, basis="w1"),
    "3x4:w2": dict(n_sites=12, n_subsystems=3, basis="w2"),
}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--cells", default=",".join(CELLS))
    parser.add_argument("--max-iter", type=int, default=300)
    parser.add_argument("--polish", type=int, default=3000)
    args = parser.parse_args()

    for name in args.cells.split(","):
        extra = dict(CELLS[name])
        t0 = time.time()
        cfg = RunConfig(
            model="heisenberg",
            step1="vqe",
            step3="vqe",
            seed=args.seed,
            penalty_mode="zero",
            optimizer=OptimizerConfig(
                restarts=5,
                max_iterations=args.max_iter,
                tolerance=1e-7,
                polish_iterations=args.polish,
            ),
            **extra,
        )
        stochastic = run_pipeline(cfg)
        exact = run_pipeline(
            RunConfig(model="heisenberg", step1="exact", step3="exact", ed="skip",
                      n_sites=extra["n_sites"], n_subsystems=extra["n_subsystems"],
                      basis=extra["basis"])
        )
        errs = [
            abs(a - b) / abs(b) for a, b in zip(stochastic.energies, exact.energies)
        ]
        print(
            f"{name}: stochastic {[round(e, 4) for e in stochastic.energies]} "
            f"exact-backend {[round(e, 4) for e in exact.energies]} "
            f"rel. err {[f'{e:.2%}' for e in errs]}  ({time.time() - t0:.0f}s)"
        )


if __name__ == "__main__":
    main()
