"""Write the standard four-strand web as web JSON.

    python scripts/export_standard_web.py --bubbles 2 --spins 1/2,1/2,1/2,1/2 > web.json
"""

import argparse
import json
import sys

from spinweb import webgeo
from spinweb.projcalc import RepTuple


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--bubbles", type=int, default=2)
    p.add_argument("--spins", default="1/2,1/2,1/2,1/2")
    args = p.parse_args(argv)
    web = webgeo.standard_web(args.bubbles)
    json.dump(webgeo.web_to_dict(web, RepTuple.parse(args.spins)), sys.stdout)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
