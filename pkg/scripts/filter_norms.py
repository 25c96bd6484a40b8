"""Normalized Frobenius norms of degeneracy filters against sqrt(1 - d0/d).

Samples random spin tuples and splittings under the dimension cap and prints
the quadrature norm, the multiplicity formula and their difference.

    python scripts/filter_norms.py --count 20 --seed 1
"""

import argparse
import math
import random

from spinweb import projcalc
from spinweb.projcalc import FilterDescriptor, RepTuple
from spinweb.splitcore import random_splitting
from spinweb.su2rep import Spin


def sample(rng: random.Random) -> FilterDescriptor:
    while True:
        n = rng.randint(1, 5)
        ts = [rng.randint(0, 3) for _ in range(n)]
        if math.prod(t + 1 for t in ts) <= projcalc.MAX_DIM_X:
            return FilterDescriptor(RepTuple(tuple(Spin(t) for t in ts)), random_splitting(n, rng), rng.randint(1, n))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args(argv)
    rng = random.Random(args.seed)
    print("spins,splitting,q,d,d0,norm,formula,diff")
    for _ in range(args.count):
        fd = sample(rng)
        d, d0 = fd.block_dims
        got = projcalc.frobenius_norm(projcalc.filter_descriptor(fd))
        want = math.sqrt(1 - d0 / d)
        print(f'"{fd.rep}",{fd.splitting},{fd.q},{d},{d0},{got:.17g},{want:.17g},{abs(got - want):.3g}')


if __name__ == "__main__":
    main()
