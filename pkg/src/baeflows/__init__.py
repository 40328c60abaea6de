"""Bethe ansatz equations for the XXX sl_N chain as an integrable system.

Modules:

- exactcore: exact polynomial arithmetic, shifts, discrete Wronskians, determinants.
- bethe: solution tuples and the Bethe equations.
- generation: building solutions from the trivial tuple by discrete Wronskian steps.
- linearproblem: the gauge-stripped Baker-Akhiezer family of a solution.
- rs_spectral: Ruijsenaars-Schneider Lax matrices and the direct/inverse spectral maps.
- rs_hierarchy: the higher commuting flows and their Lax pairs.
- periodic_inverse: periodic solutions built from a spectral matrix or a nilpotent seed.
- toda_ops: pseudo-difference operators and the discrete Toda flows.
- grassmann: Grassmannian points, tau functions and flags of KdV subspaces.
- cli: the ``baeflows`` command line.
"""

__version__ = "0.1.0"
