"""Relative slack of the gap bound on the meshed unit disk under ring refinement.

The disk is the equality case, so the slack should go to zero like h^2.
"""

import argparse

from sglgap import meshgen
from sglgap.gap_bound import evaluate_mesh
from sglgap.spaceform import CurvaturePair


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rings", type=int, nargs="+", default=[10, 20, 40, 80])
    args = ap.parse_args()

    print(f"{'rings':>6} {'vertices':>9} {'lambda1':>12} {'gap':>12} {'rel slack':>12} {'ratio':>7}")
    prev = None
    for n in args.rings:
        mesh = meshgen.disk(rings=n)
        rep = evaluate_mesh(mesh, 1.0, CurvaturePair(0.0, 0.0)).report
        s = abs(rep.relative_slack)
        ratio = f"{prev / s:7.2f}" if prev else " " * 7
        print(f"{n:>6} {len(mesh.vertices):>9} {rep.lambda1:>12.6f} {rep.gap:>12.6f} {s:>12.3e} {ratio}")
        prev = s


if __name__ == "__main__":
    main()
