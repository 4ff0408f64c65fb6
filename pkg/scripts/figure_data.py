"""Write the data behind the four figures (mean paths, histograms, infinite-server check)."""

import argparse
from pathlib import Path

from qoverlap import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=1000, help="replications per curve/histogram")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--bins", type=int, default=None, help="fixed histogram bins (default Freedman-Diaconis)")
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    for fig in ("figure1", "figure2", "figure4"):
        cols = ex.run_figure_means(fig, ex.ExperimentSpec(fig, seed=args.seed, replications=args.reps))
        ex.write_atomic(args.out / f"{fig}.csv", ex.columns_csv(cols))
        print("wrote", args.out / f"{fig}.csv")
    spec = ex.ExperimentSpec("figure3", seed=args.seed, replications=args.reps)
    for tau, hist in ex.run_figure3(spec, args.bins).items():
        path = args.out / f"figure3_tau{tau:g}.csv"
        ex.write_atomic(path, hist.to_text())
        print("wrote", path, f"({len(hist.counts)} bins)")


if __name__ == "__main__":
    main()
