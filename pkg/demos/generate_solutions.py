"""Build Bethe solutions for sl_3 from the trivial tuple and inspect them.

Run: python demos/generate_solutions.py
"""

import warnings
from fractions import Fraction

from baeflows.bethe import SolutionTuple, compute_Q, verify_bae
from baeflows.generation import GenerationPath, degree_increasing_paths, multistep
from baeflows.linearproblem import build_psi_family, q_agrees, verify_laxdd

warnings.simplefilter("ignore")


def show(label, y):
    rep = verify_bae(y)
    print(f"{label:>28}: {[str(p.as_expr()) for p in y.polys]}")
    print(f"{'':>28}  degrees {y.degrees}, Bethe equations {rep.satisfied}, generic {rep.generic}, Q = {compute_Q(y.degrees)}")


def main():
    y = SolutionTuple.empty(3)
    show("trivial tuple", y)

    # each step replaces one polynomial by a discrete-Wronskian partner plus c times the old one
    path = GenerationPath((1, 2, 3, 1), (Fraction(1, 2), -2, Fraction(3, 7), 5))
    show("after path (1, 2, 3, 1)", multistep(path, 3))

    print("\ndegree-increasing paths of length <= 3 for N = 3:")
    for J in degree_increasing_paths(3, 3):
        if J:
            y = multistep(GenerationPath(J, tuple(Fraction(k + 1, 3) for k in range(len(J)))), 3)
            print(f"  {J}: degrees {y.degrees}")

    # every generic solution carries a family of gauge-stripped Baker-Akhiezer functions
    y = multistep(GenerationPath((1, 2), (Fraction(1, 3), Fraction(-5, 2))), 3)
    psis = build_psi_family(y)
    ok, _ = verify_laxdd(y, psis)
    print("\nlinear problem for", [str(p.as_expr()) for p in y.polys])
    for p in psis:
        print(f"  R_{p.n} = {p.R.as_expr()}")
    print(f"  linear problem holds: {ok}; normalizing factor agrees across n: {q_agrees(psis)}")


if __name__ == "__main__":
    main()
