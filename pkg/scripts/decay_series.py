"""Decay of the filtered products along the standard web.

Sweeps the gap-chain length and reports the series s_0..s_L next to the ideal
law (3/4)^(l+1) and the perturbation bound.

    python scripts/decay_series.py --steps 5 --gaps 0 2 6 20
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from spinweb import projcalc, webgeo
from spinweb.projcalc import RepTuple


@dataclass
class DecayConfig:
    steps: int = 5
    gaps: list[int] = field(default_factory=lambda: [0, 2, 6, 20])
    spins: str = "1/2,1/2,1/2,1/2"


def run(cfg: DecayConfig, out=sys.stdout) -> None:
    labels = RepTuple.parse(cfg.spins)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["gap", "bubbles", "step", "norm", "ideal", "bound", "gap_error"])
    for gap in cfg.gaps:
        bubbles = webgeo.bubbles_needed(cfg.steps, gap)
        sw = webgeo.SpinWeb(webgeo.standard_web(bubbles), labels)
        res = projcalc.run_decay(webgeo.degeneracy_schedule(sw, cfg.steps, gap))
        for k in range(cfg.steps + 1):
            writer.writerow([gap, bubbles, k] + [format(x, ".17g") for x in (res.norms[k], res.ideal[k], res.bounds[k], res.gap_errors[k])])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--gaps", type=int, nargs="+", default=[0, 2, 6, 20])
    p.add_argument("--spins", default="1/2,1/2,1/2,1/2")
    args = p.parse_args(argv)
    run(DecayConfig(args.steps, args.gaps, args.spins))


if __name__ == "__main__":
    main()
