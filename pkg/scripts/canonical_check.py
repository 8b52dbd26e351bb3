"""Closed-form metrics against the generic disc optimizer at random queries.

    python3 scripts/canonical_check.py [--count 25] [--seed 0]
"""

import argparse
import time

import numpy as np

from koblab import models
from koblab.metrics import CanonicalDomain, kobayashi_canonical
from koblab.optimize import disc_upper_bound_optimize


def random_query(kind, rng):
    n = 1 if kind in ("disc", "halfplane") else 2
    X = rng.normal(size=n) + 1j * rng.normal(size=n)
    if kind == "halfplane":
        return np.array([rng.uniform(0.05, 5) + 1j * rng.uniform(-5, 5)]), X
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    if kind == "polydisc":
        return rng.uniform(0, 0.95, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n)), X
    return z / np.linalg.norm(z) * rng.uniform(0, 0.95), X


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    cases = {
        "disc": (models.unit_disc(), CanonicalDomain.disc()),
        "halfplane": (models.right_halfplane(), CanonicalDomain.halfplane()),
        "ball": (models.ball(2), CanonicalDomain.ball()),
        "polydisc": (models.polydisc([1.0, 1.0]), CanonicalDomain.polydisc([1.0, 1.0])),
    }
    for kind, (dom, canon) in cases.items():
        t0 = time.time()
        errs = []
        for _ in range(args.count):
            z, X = random_query(kind, rng)
            exact = kobayashi_canonical(canon, z, X).value
            up = disc_upper_bound_optimize(dom, z, X)[0]
            errs.append(up / exact - 1)
        errs = np.array(errs)
        print(f"{kind:10s} max rel err {errs.max():.2e}  min {errs.min():+.2e}  {time.time() - t0:5.1f}s")


if __name__ == "__main__":
    main()
