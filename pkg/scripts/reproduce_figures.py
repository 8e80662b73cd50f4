"""Regenerate the data behind every figure into one directory.

    python scripts/reproduce_figures.py --outdir figdata --figs 1 3 4

Figures 2 and 5 are long runs (large lam*t window, oracle integration).
"""

import argparse
import logging
import time

from jcloss import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--outdir", default="figdata")
    ap.add_argument("--figs", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for fig in args.figs:
        start = time.perf_counter()
        paths = cli.run_figure(fig, args.outdir, args.format, args.workers)
        logging.info("figure %d: %d files in %.1f s", fig, len(paths), time.perf_counter() - start)


if __name__ == "__main__":
    main()
