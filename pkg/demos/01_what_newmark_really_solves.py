"""Newmark does not solve the equation you give it.

At a fixed step it tracks a slightly different second-order system, with
distorted damping, stiffness and load. This script integrates the damped
three-mass system with dt = 0.7 and compares the Newmark positions with two
candidates: the accurate solution of the original equation, and the accurate
solution of the distorted equation.

Run:  python demos/01_what_newmark_really_solves.py [out_dir]
"""
import sys
from pathlib import Path

import numpy as np

from newmark_bea import io
from newmark_bea.harness import builtin_scenario, run_scenario

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out/demos")
scn = builtin_scenario("dvf-time")
res = run_scenario(scn)

nm = res["newmark"].q
for other in ("reference", "distorted"):
    gap = np.linalg.norm(nm - res[other].q, axis=1)
    print(f"max |newmark - {other:9s}| = {gap.max():.3e}")

# the distorted system is the better description by orders of magnitude
io.plot_svg(out / "newmark_vs_distorted.svg",
            {k: (res[k].t, res[k].q[:, 0]) for k in ("newmark", "distorted", "reference")},
            "t", "q_1", title="Newmark follows the distorted system")
print("plot written to", out / "newmark_vs_distorted.svg")
