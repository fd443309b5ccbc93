"""How the drone/truck speed ratio changes the gain over a truck-only tour.

Unlimited endurance and no service times; five instances per ratio.

    python3 demos/speed_ratio.py [family]
"""
import sys

import numpy as np

from fstsp.instance import GeneratorParams, generate
from fstsp.search import hgvns

family = sys.argv[1] if len(sys.argv) > 1 else "uniform"
print(f"{family}, n=30")
for alpha in (1.0, 2.0, 3.0):
    gaps = [hgvns(generate(GeneratorParams(family, 30, s, alpha=alpha))).gap_pct for s in range(5)]
    print(f"  alpha {alpha:.0f}: mean gap {np.mean(gaps):7.2f}%   "
          + " ".join(f"{g:6.2f}" for g in gaps))
