"""Alternating products of block projectors on Y for several spin labelings.

For each labeling prints the contraction factor of the deflated pair product,
the number of steps to reach the tolerance and the rank of the common range.

    python scripts/alternating_projections.py --tol 1e-10
"""

import argparse
import itertools
from dataclasses import dataclass

from spinweb import projcalc
from spinweb.projcalc import RepTuple
from spinweb.splitcore import Splitting

V1 = Splitting.of("1100", "0011")
V2 = Splitting.of("1010", "0101")

LABELINGS = ["1/2,1/2,1/2,1/2", "1/2,1/2,1,1", "1,1,1/2,1/2", "1/2,1,1/2,1", "0,1/2,1/2,1"]


@dataclass
class ConvergenceConfig:
    tol: float = 1e-10
    max_iter: int = 400


def run(cfg: ConvergenceConfig):
    print("spins,rank_V1,rank_V2,rank_common,contraction,steps,converged")
    for spins in LABELINGS:
        rep = RepTuple.parse(spins)
        if rep.dim_x > projcalc.MAX_DIM_X:
            continue
        p1, p2 = projcalc.projector_PV(rep, V1), projcalc.projector_PV(rep, V2)
        res = projcalc.product_limit({1: p1, 2: p2}, itertools.cycle([1, 2]), cfg.tol, cfg.max_iter)
        common = projcalc.intersection_projector([p1, p2]).rank
        print(f'"{spins}",{p1.rank},{p2.rank},{common},{res.contraction:.17g},{res.iterations},{res.converged}')


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=400)
    args = p.parse_args(argv)
    run(ConvergenceConfig(args.tol, args.max_iter))


if __name__ == "__main__":
    main()
