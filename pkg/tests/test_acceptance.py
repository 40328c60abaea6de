"""Acceptance criteria, one test per criterion.

Each test records a single "criterion N: PASS/FAIL" line; the lines are
printed in the terminal summary by conftest.py.
"""

import random
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from baeflows import cli
from baeflows.bethe import SolutionTuple, compute_Q, is_generic, verify_bae
from baeflows.errors import (
    BAENotSatisfied,
    DegenerateSpectrum,
    DegreeNotIncreasing,
    FlagInvalid,
    InconsistentWave,
    NoSolution,
    NotNilpotent,
    PeriodicityFailure,
)
from baeflows.exactcore import solve_linear
from baeflows.generation import degree_increasing_paths, generate, is_degree_increasing
from baeflows.grassmann import (
    GrassmannPoint,
    MKdVSubspaceTuple,
    flow_tau_defect,
    generate_flag,
    wronskian_identity_holds,
)
from baeflows.linearproblem import (
    action_multiplier,
    build_psi_family,
    generation_action,
    q_agrees,
    riccati_residual,
    verify_laxdd,
)
from baeflows.periodic_inverse import (
    NilpotentSeed,
    SpectralMatrixA,
    bethe_from_A,
    build_family,
    check_periodicity,
    seed_to_A,
    unipotency_defect,
)
from baeflows.rs_hierarchy import lax_flow_check
from baeflows.rs_spectral import (
    GenericSpectrum,
    aligned_points,
    direct_transform,
    displacement_residual,
    extended_direct,
    extended_from_generic,
    extended_inverse,
    generic_subspace,
    inverse_transform,
    match_order,
    monic_coefficients,
    subspace_angle,
)
from baeflows.toda_ops import WaveFamily, extract_L, vflow_check, wave_from_family

from rs_points import random_exact_point, random_generic_point
from seeds import FIXED_SEED, random_seed

ONE_ROOT_SEED = NilpotentSeed(3, 1, ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)))

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS[n] = line
    print(line)
    assert ok, line


def rel_err(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(np.abs(a - b).max() / max(1.0, float(np.abs(b).max())))


def _squarefree(y: SolutionTuple) -> bool:
    return all(p.degree(0) <= 0 or p.gcd(p.diff(p.ring.gens[0])).degree(0) == 0 for p in y.polys)


# --- shared populations -------------------------------------------------------

_CACHE: dict = {}


def generated_population():
    """Every degree-increasing path of length <= 5 for N = 3, 4, with random rational c, 20 seeds.

    Each seed walks the path tree once, so a prefix shared by several paths is
    generated and checked a single time.
    """
    if "gen" in _CACHE:
        return _CACHE["gen"]
    start = time.perf_counter()
    pop, bad = [], []

    def walk(y, depth, rng, path):
        if depth == 5:
            return
        for j in range(1, y.N + 1):
            if not is_degree_increasing(y.degrees, j):
                continue
            c = Fraction(rng.randint(-30, 30), rng.randint(1, 9))
            new = generate(y, j, c)
            rep = verify_bae(new)
            if not (rep.satisfied and compute_Q(new.degrees) == 0):
                bad.append((path + (j,), new))
            pop.append(new)
            walk(new, depth + 1, rng, path + (j,))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for N in (3, 4):
            for s in range(20):
                walk(SolutionTuple.empty(N), 0, random.Random(1000 * N + s), ())
    _CACHE["gen"] = (pop, bad, time.perf_counter() - start)
    return _CACHE["gen"]


def periodic_population():
    """20 random nilpotent seeds for each nu in (1, 2), N = 3."""
    if "per" in _CACHE:
        return _CACHE["per"]
    rng = random.Random(808)
    out, failures, resampled = [], [], 0
    for nu in (1, 2):
        kept = 0
        while kept < 20:
            _, A = random_seed(rng, N=3, nu=nu, span=200, den=11)
            fam = build_family(A)
            periodic = check_periodicity(fam)
            y = bethe_from_A(A) if periodic else None
            ok = periodic and verify_bae(y).satisfied
            if not ok:
                failures.append(A)
            elif not _squarefree(y):
                resampled += 1
                continue
            out.append((A, y))
            kept += 1
    _CACHE["per"] = (out, failures, resampled)
    return _CACHE["per"]


# --- criteria -----------------------------------------------------------------


def test_criterion_1_generation_soundness():
    pop, bad, elapsed = generated_population()
    ok = not bad and elapsed <= 60
    record(1, ok, f"{len(pop)} tuples, {len(bad)} failures, {elapsed:.1f}s")


def test_criterion_2_linear_problem_identity():
    pop, _, _ = generated_population()
    # the residue conditions are only defined on generic tuples
    candidates = [y for y in pop if sum(y.degrees) <= 8]
    small = [y for y in candidates if is_generic(y)]
    start = time.perf_counter()
    failures = 0
    for y in small:
        psis = build_psi_family(y)
        if not (verify_laxdd(y, psis)[0] and q_agrees(psis)):
            failures += 1
    elapsed = time.perf_counter() - start
    detail = f"{len(small)} generic tuples, {len(candidates) - len(small)} non-generic skipped, {failures} failures, {elapsed:.1f}s"
    record(2, failures == 0 and elapsed <= 120, detail)


def test_criterion_3_generation_action():
    pop, _, _ = generated_population()
    rng = random.Random(303)
    small = [y for y in pop if sum(y.degrees) <= 8 and is_generic(y)]
    failures = done = 0
    while done < 20:
        y = rng.choice(small)
        dirs = [m for m in range(1, y.N + 1) if is_degree_increasing(y.degrees, m)]
        m = rng.choice(dirs)
        c = Fraction(rng.randint(-20, 20), rng.randint(1, 7))
        new, g = action_multiplier(y, m, c)
        if not verify_bae(new).generic:
            continue
        psis = generation_action(y, build_psi_family(y), m, c)
        if riccati_residual(y, m, g) != 0 or not verify_laxdd(new, psis)[0]:
            failures += 1
        done += 1
    record(3, failures == 0, f"{done} extensions, {failures} failures")


def test_criterion_4_displacement():
    rng = random.Random(404)
    failures = 0
    for i in range(50):
        p = random_exact_point(rng, 1 + i % 5)
        if any(v != 0 for row in displacement_residual(p) for v in row):
            failures += 1
    record(4, failures == 0, f"50 exact points, {failures} nonzero residuals")


def test_criterion_5_spectral_round_trip():
    rng = random.Random(505)
    worst = 0.0
    for i in range(50):
        p = random_generic_point(rng, 1 + i % 5)
        s = direct_transform(p)
        _, q = inverse_transform(s)
        up, gp, uq, gq = aligned_points(p, q)
        worst = max(worst, rel_err(uq, up), rel_err(gq, gp))
        s2 = direct_transform(q)
        mu2 = match_order(s.mu, s2.mu)
        a2 = [s2.a[list(s2.mu).index(m)] for m in mu2]
        worst = max(worst, rel_err(mu2, s.mu), rel_err(a2, s.a))
    record(5, worst <= 1e-8, f"50 points, worst relative error {worst:.2e}")


def test_criterion_6_extended_transforms():
    rng = random.Random(606)
    worst_angle = worst_inverse = 0.0
    for i in range(10):
        p = random_generic_point(rng, 1 + i % 5)
        s = direct_transform(p)
        ext = extended_direct(p)
        for mu, W in zip(ext.mu, ext.W):
            j = int(np.argmin(np.abs(np.asarray(s.mu) - mu)))
            worst_angle = max(worst_angle, subspace_angle(W, generic_subspace(s.a[j])))
        for t in [(), (0.2, -0.1)]:
            y1, p1 = inverse_transform(s, t)
            y2, p2 = extended_inverse(extended_from_generic(s), t)
            worst_inverse = max(worst_inverse, rel_err(monic_coefficients(y2), monic_coefficients(y1)))
    ok = worst_angle <= 1e-8 and worst_inverse <= 1e-10
    record(6, ok, f"max angle {worst_angle:.2e}, extended vs generic inverse {worst_inverse:.2e}")


def test_criterion_7_hierarchy_flows():
    rng = random.Random(707)
    worst = drift = 0.0
    for k in (2, 3):
        for _ in range(10):
            s = direct_transform(random_generic_point(rng, k))
            for m in (1, 2):
                rep = lax_flow_check(s, m, h=1e-5)
                worst = max(worst, rep.lax_residual, rep.velocity_residual)
                drift = max(drift, rep.conservation)
    record(7, worst <= 1e-5 and drift <= 1e-8, f"flow residual {worst:.2e}, trace drift {drift:.2e}")


def test_criterion_8_periodic_construction():
    out, failures, resampled = periodic_population()
    record(8, not failures, f"{len(out)} seeds, {len(failures)} failures, {resampled} non-squarefree resampled")


def test_criterion_9_unipotency():
    pop, _, _ = generated_population()
    periodic, _, _ = periodic_population()
    tuples = list(pop) + [y for _, y in periodic]
    worst, skipped = 0.0, 0
    for y in tuples:
        # (u, gamma) needs simple roots and a generic tuple
        if not (_squarefree(y) and is_generic(y)):
            skipped += 1
            continue
        for n in range(1, y.N + 1):
            worst = max(worst, unipotency_defect(y, n))
    record(9, worst <= 1e-8, f"{len(tuples) - skipped} tuples, worst defect {worst:.2e}, {skipped} non-generic or with repeated roots skipped")


def test_criterion_10_toda_flows():
    worst = 0.0
    for seed in (FIXED_SEED, ONE_ROOT_SEED):
        fam = build_family(seed_to_A(seed))
        for m in (1, 2):
            worst = max(worst, vflow_check(fam, m))
    record(10, worst <= 1e-5, f"2 families, worst relative residual {worst:.2e}")


def _random_flag(rng, N=3, steps=3):
    flag = MKdVSubspaceTuple.trivial(N)
    for _ in range(steps):
        flag = generate_flag(flag, rng.randint(1, N), Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
    return flag


def _random_point(rng, depth):
    vectors = [
        {p: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for p in range(-depth, depth + 1)}
        for _ in range(depth + 1)
    ]
    while True:
        try:
            return GrassmannPoint.from_basis(vectors, depth)
        except ValueError:
            vectors[-1][-depth] = vectors[-1].get(-depth, 0) + 1


def test_criterion_11_tau_identities():
    rng = random.Random(1111)
    wronskian_fail = 0
    for _ in range(20):
        flag = _random_flag(rng, steps=rng.randint(0, 3))
        i = rng.randint(1, 3)
        if not wronskian_identity_holds(flag, i, Fraction(rng.randint(-9, 9), rng.randint(1, 4))):
            wronskian_fail += 1
    flow_fail = 0
    for n in range(10):
        P = _random_point(rng, 1 + n % 3)
        t = tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(3))
        if not flow_tau_defect(P, t):
            flow_fail += 1
    cross_fail = checked = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for N in (3, 4):
            for J in degree_increasing_paths(N, 4):
                if not J:
                    continue
                c = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in J]
                r = cli.crosscheck_path(N, J, c)
                if sum(r["degrees"]) > 6:
                    continue
                checked += 1
                if not cli._passed(r):
                    cross_fail += 1
    ok = wronskian_fail == 0 and flow_fail == 0 and cross_fail == 0
    record(11, ok, f"wronskian {wronskian_fail}/20 failed, flow {flow_fail}/10 failed, crosscheck {cross_fail}/{checked} failed")


def _rejects(fn, error) -> bool:
    try:
        fn()
    except error:
        return True
    return False


def test_criterion_12_negative_controls():
    x = SolutionTuple.empty(3).y(1).ring.gens[0]
    good = generate(generate(SolutionTuple.empty(3), 1, 2), 2, 3)
    # adding a constant would only move the generation parameter; perturb the linear coefficient
    perturbed = good.replace(2, good.y(2) + x)
    fam = build_family(seed_to_A(FIXED_SEED))
    wave = wave_from_family(fam)
    rows = [list(r) for r in wave.xi]
    rows[1][0] = rows[1][0] + 1
    rng = random.Random(6)
    random_rows = tuple(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(6)) for _ in range(4))
    checks = {
        "exactcore": _rejects(lambda: solve_linear([[1, 1], [2, 2]], [1, 3]), NoSolution),
        "bethe": not verify_bae(perturbed).satisfied,
        "generation": _rejects(lambda: generate(SolutionTuple.of([x, 1, 1]), 1, 0), DegreeNotIncreasing),
        "linearproblem": _rejects(lambda: build_psi_family(perturbed), BAENotSatisfied),
        "rs_spectral": _rejects(lambda: inverse_transform(GenericSpectrum((2, 2), (0, 1))), DegenerateSpectrum),
        "rs_hierarchy": _rejects(lambda: lax_flow_check(GenericSpectrum((2, 2), (0, 1)), 1), DegenerateSpectrum),
        "periodic_inverse (nilpotency)": _rejects(
            lambda: seed_to_A(NilpotentSeed(3, 1, ((1, 0, 0, 1), (0, 0, 1, 0), (0, 0, 0, 1), (0, 1, 0, 0)))),
            NotNilpotent,
        ),
        "periodic_inverse (periodicity)": _rejects(
            lambda: bethe_from_A(SpectralMatrixA(3, 1, random_rows)), PeriodicityFailure
        ),
        "toda_ops": _rejects(lambda: extract_L(WaveFamily(wave.N, tuple(map(tuple, rows))), 3), InconsistentWave),
        "grassmann": _rejects(
            lambda: MKdVSubspaceTuple(3, GrassmannPoint.trivial(), ({2: 1}, {2: 1}, {0: 1})), FlagInvalid
        ),
        "cli": cli.main(["gen", "--J", "1,1", "--c", "0,0"]) == 1,
    }
    missed = [name for name, ok in checks.items() if not ok]
    record(12, not missed, f"{len(checks) - len(missed)}/{len(checks)} controls rejected" + (f", missed {missed}" if missed else ""))
