"""Distance between the exact path-sum populations and the large-detuning limit.

For |g,n> initial states, prints the sup-norm population distance over
lam*t in [0, tmax] for a range of detunings. The distance should shrink
roughly like (lam/delta)^2.
"""

import argparse

import numpy as np

from jcloss import model, offresonant
from jcloss.model import ModelParams


def distance(n, delta, gamma, t):
    p = ModelParams(1.0, delta, gamma)
    pops0 = model.fock_state(p, n).diag
    exact = offresonant.evolve_diag_offres(pops0, t, p)
    limit = np.array([np.diag(offresonant.evolve_largedelta(np.diag(pops0), x, p)).real for x in t])
    return float(np.max(np.abs(exact - limit)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--deltas", type=float, nargs="+", default=[1, 3, 10, 30, 100])
    ap.add_argument("--gamma", type=float, default=0.2)
    ap.add_argument("--tmax", type=float, default=30.0)
    args = ap.parse_args()
    t = np.linspace(0, args.tmax, 301)
    print("n,delta,sup_distance")
    for n in args.n:
        for d in args.deltas:
            print(f"{n},{d:g},{distance(n, d, args.gamma, t):.6e}")


if __name__ == "__main__":
    main()
