"""Regenerate the shipped angular tables for the crossed standing-wave geometry.

E' is x-polarized (E1 operator x), E'' is z-polarized and propagates along x,
so the quadrupole operator is ~xz. Both are the q = +1/-1 combination
(-T_{+1} + T_{-1})/sqrt(2) of a spherical tensor; the matrix element between
|1/2 m> and |J m'> follows from the Wigner-Eckart theorem up to a reduced
element that the calibration absorbs.

The D5/2 PNC (nuclear-spin-dependent) table is not a rank-1 object in J-space;
it is modelled as the rank-2 pattern with the m = +1/2 column sign-flipped,
which keeps the interference antisymmetric in m.

Usage: python scripts/make_geometry_tables.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np
from sympy import Rational
from sympy.physics.quantum.cg import CG

from apvsim.species import GeometryFactors, dump_geometry, sublevels

HALF = Rational(1, 2)
XZ_COMBO = {+1: -1 / np.sqrt(2), -1: 1 / np.sqrt(2)}


def wigner_eckart_table(upper, rank):
    J = Rational(int(2 * max(sublevels(upper))), 2)
    g = np.zeros((len(sublevels(upper)), 2))
    for j, m in enumerate((-HALF, HALF)):
        for i, mp in enumerate(sublevels(upper)):
            mp = Rational(mp.numerator, mp.denominator)
            g[i, j] = sum(c * float(CG(HALF, m, rank, q, J, mp).doit()) for q, c in XZ_COMBO.items())
    return g / np.sqrt((g**2).sum(axis=0))


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    # overall sign of the PNC table is a phase convention; chosen so a positive
    # scale gives a positive shift of m = +1/2
    tables = {
        "d32_pnc_crossed.txt": GeometryFactors("S1/2", "D3/2", "pnc", "crossed", -wigner_eckart_table("D3/2", 1)),
        "d32_quad_crossed.txt": GeometryFactors("S1/2", "D3/2", "quad", "crossed", wigner_eckart_table("D3/2", 2)),
    }
    q52 = wigner_eckart_table("D5/2", 2)
    tables["d52_quad_crossed.txt"] = GeometryFactors("S1/2", "D5/2", "quad", "crossed", q52)
    tables["d52_pnc_crossed.txt"] = GeometryFactors("S1/2", "D5/2", "pnc", "crossed", q52 * np.array([1.0, -1.0]))
    for name, table in tables.items():
        (outdir / name).write_text(dump_geometry(table))
        print(f"wrote {outdir / name}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parents[1] / "src/apvsim/data/geometry")
