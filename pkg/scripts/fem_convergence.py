"""FEM eigenvalue errors on the unit square and the hyperbolic unit disk against exact references."""

import math

from sglgap import meshgen
from sglgap.fem_eig import solve
from sglgap.radial_eig import ball_spectrum
from sglgap.spaceform import Spaceform


def main():
    exact_sq = (2 * math.pi**2, 5 * math.pi**2)
    print("unit square, grid n x n")
    for n in (16, 32, 64, 128):
        r = solve(meshgen.square(n=n))
        print(f"  n={n:<4} err1={r.lambda1 - exact_sq[0]:.3e}  err2={r.lambda2 - exact_sq[1]:.3e}")

    ball = ball_spectrum(Spaceform(2, -1.0), 1.0)
    print(f"hyperbolic disk R=1, radial reference {ball.lambda1:.10f} {ball.lambda2:.10f}")
    for rings in (10, 20, 40, 80):
        r = solve(meshgen.geodesic_disk(-1.0, 1.0, rings=rings))
        print(f"  rings={rings:<3} rel1={r.lambda1 / ball.lambda1 - 1:.3e}  rel2={r.lambda2 / ball.lambda2 - 1:.3e}")


if __name__ == "__main__":
    main()
