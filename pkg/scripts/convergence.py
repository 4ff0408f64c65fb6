"""Uniform-acceleration sweep: how fast X^eta / eta approaches the fluid path."""

import argparse
from pathlib import Path

from qoverlap import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--etas", default="1,4,16,64")
    ap.add_argument("--reps", type=int, default=ex.CONVERGE_REPS)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    etas = [int(e) for e in args.etas.split(",")]
    records = ex.run_converge(ex.ExperimentSpec("converge", seed=args.seed, replications=args.reps), etas)
    ex.write_atomic(args.out / "converge.csv", ex.records_csv(records))
    for r in records:
        # sup-error should shrink roughly like 1/sqrt(eta)
        print(f"eta={r['eta']:>4}  sup-error={r['mean_sup_error']:.4f} +- {r['stderr']:.4f}"
              f"  t0_eta={r['mean_t0_eta']:.4f}  fluid t0={r['fluid_t0']:.4f}")


if __name__ == "__main__":
    main()
