"""Regenerates the random stable plant stored in scenarios/tracking-sparse.json."""
import argparse
import json

import numpy as np


def random_stable_plant(seed, n=4, m=2, nd=1, pm=3):
    rng = np.random.default_rng(seed)
    poles = -rng.uniform(0.5, 3.0, n)
    S = rng.standard_normal((n, n))
    A = S @ np.diag(poles) @ np.linalg.inv(S)
    B = rng.standard_normal((n, m))
    Bd = rng.standard_normal((n, nd))
    C = rng.standard_normal((pm, n))
    D = np.zeros((pm, m))
    return A, B, Bd, C, D


def mat(M):
    M = np.atleast_2d(M)
    return {"rows": M.shape[0], "cols": M.shape[1],
            "data": [float(f"{v:.12g}") for v in M.ravel()]}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=39)
    args = ap.parse_args()
    A, B, Bd, C, D = random_stable_plant(args.seed)
    n, m = B.shape
    pm = C.shape[0]
    nd = Bd.shape[1]
    # y = (y_m, u), w = (d, r_m)
    blocks = {
        "A": mat(A),
        "B": mat(B),
        "Bw": mat(np.hstack([Bd, np.zeros((n, pm))])),
        "C": mat(np.vstack([C, np.zeros((m, n))])),
        "D": mat(np.vstack([D, np.eye(m)])),
        "Q": mat(np.zeros((pm + m, nd + pm))),
    }
    print(json.dumps(blocks, indent=1))


if __name__ == "__main__":
    main()
