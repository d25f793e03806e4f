"""Acceptance criteria, one test per criterion.

Each test appends a ``ACCEPTANCE n PASS/FAIL`` line that is printed in the
pytest terminal summary (and directly when run as ``python tests/test_acceptance.py``).
"""

from fractions import Fraction
from math import exp

import numpy as np
import pytest

from carnot_mehler import (apply_dilation_generator, apply_N, apply_sublaplacian,
                           asymmetry_witness, check_energy_identities, check_intertwining,
                           check_rotation_identity, get_group, gradient_squared, hermite_basis,
                           mehler_poly, moment, monomial_basis, parse_polynomial, poincare_gap)
from carnot_mehler.hermite import generating_hermite, membership_check
from carnot_mehler.kernel import (KernelEvaluator, kernel_eval, normalization_integral,
                                  pde_residual, scaling_residual)
from carnot_mehler.sampling import mc_expectation, mehler_mc, sample_heat
from carnot_mehler.verify import random_real_polynomials

from conftest import ACCEPTANCE_LINES
from oracles import central_moment_h1, gaussian_moment

CIRCLE = (Fraction(3, 5), Fraction(4, 5))
CIRCLE2 = (Fraction(5, 13), Fraction(12, 13))
SAMPLES = 1_000_000
STEPS = 1024
SEED = 42
Z_LIMIT = 4.0


def record(number: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def proportional(h, target) -> bool:
    if not h or not target:
        return False
    key = next(iter(target.terms))
    if key not in h.terms:
        return False
    return h * (target.terms[key] / h.terms[key]) == target


@pytest.fixture(scope="module")
def h1():
    return get_group("h1")


@pytest.fixture(scope="module")
def heat_batch(h1):
    return sample_heat(h1, SAMPLES, seed=SEED, walk_steps=STEPS)


def test_acceptance_1_eigenfunctions():
    cases = {"h1": 6, "h2": 4, "free2-3": 6, "engel": 4, "free3-2": 4}
    checked, bad = 0, []
    for name, top in cases.items():
        alg = get_group(name)
        for n in range(top + 1):
            for h in hermite_basis(alg, n):
                checked += 1
                if apply_N(h) != h * n:
                    bad.append((name, n, str(h)))
    ok = not bad
    record(1, ok, f"N h = n h for {checked} basis polynomials on {', '.join(cases)}"
           + ("" if ok else f"; first failure {bad[0]}"))
    assert ok


def test_acceptance_2_operator_identities(h1):
    c, s = CIRCLE
    failures = []
    count = 0
    for d in range(7):
        for m in monomial_basis(h1, d):
            count += 1
            lm = apply_sublaplacian(m)
            if apply_sublaplacian(apply_dilation_generator(m)) - apply_dilation_generator(lm) \
                    != lm * 2:
                failures.append(("[L,A]", str(m)))
            if apply_dilation_generator(m, "grading") != \
                    apply_dilation_generator(m, "vector_field"):
                failures.append(("A methods", str(m)))
            for t in (2, 3):
                if not check_intertwining(m, c, s, t, strict=False).equal:
                    failures.append(("intertwining", str(m), t))
    ok = not failures
    record(2, ok, f"[L,A]=2L, A methods and intertwining (t=2,3) on {count} monomials of B_6"
           + ("" if ok else f"; first failure {failures[0]}"))
    assert ok


def test_acceptance_3_measure_identities(h1):
    one_ok = moment(h1.ring.one()) == 1
    panel = random_real_polynomials(h1, 20, 5, seed=SEED)
    energy_ok = all(check_energy_identities(f, strict=False).equal for f in panel)
    # cross-check the energy identity directly from its definition
    direct_ok = all(moment(apply_N(f)) == 0
                    and moment(apply_N(f) * f) == moment(gradient_squared(f)) for f in panel)
    c, s = CIRCLE
    monos = [m for d in range(7) for m in monomial_basis(h1, d)]
    rotation_ok = all(check_rotation_identity(m, c, s).equal for m in monos)
    ok = one_ok and energy_ok and direct_ok and rotation_ok
    record(3, ok, f"moment(1)=1 {one_ok}; energy identities on 20 seeded polynomials "
           f"{energy_ok and direct_ok}; rotation identity on {len(monos)} monomials {rotation_ok}")
    assert ok


def test_acceptance_4_semigroup_and_contraction(h1):
    panel = random_real_polynomials(h1, 20, 5, seed=SEED)
    composed = all(mehler_poly(mehler_poly(f, circle=CIRCLE), circle=CIRCLE2)
                   == mehler_poly(f, decay=CIRCLE[0] * CIRCLE2[0]) for f in panel)
    reverse = all(mehler_poly(mehler_poly(f, circle=CIRCLE2), circle=CIRCLE)
                  == mehler_poly(f, decay=CIRCLE[0] * CIRCLE2[0]) for f in panel)
    contraction = all(moment(mehler_poly(f, circle=c) ** 2) <= moment(f * f)
                      for f in panel for c in (CIRCLE, CIRCLE2))
    ok = composed and reverse and contraction
    record(4, ok, f"composition (3/5,4/5)o(5/13,12/13) = decay 3/13 {composed and reverse}; "
           f"L2 contraction on 20 polynomials {contraction}")
    assert ok


def test_acceptance_5_asymmetry_witness(h1):
    w = asymmetry_witness(h1, 4)
    abelian = asymmetry_witness(get_group("r2"), 4)
    ok = w is not None and w.nf_h != w.f_nh and abelian is None
    detail = "no witness on H_1" if w is None else f"f={w.f}, h={w.h}: {w.nf_h} != {w.f_nh}"
    record(5, ok, f"{detail}; abelian R^2 witness: {abelian}")
    assert ok


def _generating_scan(h1):
    rows = []
    for mu in range(4):
        for mu_p in range(4):
            for n in range(7):
                rows.append((mu, mu_p, n, generating_hermite(mu, mu_p, n, h1)))
    return rows


def test_acceptance_6_generating_eigenvectors(h1):
    rows = _generating_scan(h1)
    differing_nonzero = [(m, mp, n) for m, mp, n, h in rows
                         if (n - abs(m - mp)) % 2 and h]
    nonzero_bad = [(m, mp, n) for m, mp, n, h in rows
                   if h and (apply_N(h) != h * n or membership_check(h, n) is None)]
    matching_zero = [(m, mp, n) for m, mp, n, h in rows
                     if (n - abs(m - mp)) % 2 == 0 and not h]
    r = h1.ring
    spot_00 = proportional(generating_hermite(0, 0, 2, h1),
                           parse_polynomial("x^2 + y^2 + i*u - 2", r))
    spot_01 = proportional(generating_hermite(0, 1, 1, h1), parse_polynomial("x - i*y", r))
    ok = not differing_nonzero and not nonzero_bad and spot_00 and spot_01
    record(6, ok, f"{len(rows)} outputs: zero whenever parities differ, every nonzero output "
           f"is in E_n with N h = n h; spot values h_2^(0,0) {spot_00}, h_1^(0,1) {spot_01}")
    converse = not matching_zero
    record(6, converse, "converse 'zero only if parities differ': "
           + ("holds" if converse else f"zero with matching parity at {matching_zero}"))
    assert ok


@pytest.mark.xfail(strict=True, reason="zero outputs with matching parity exist when n < |mu-mu'|")
def test_acceptance_6_converse_literal(h1):
    for mu, mu_p, n, h in _generating_scan(h1):
        parity_differs = bool((n - abs(mu - mu_p)) % 2)
        assert (not h) == parity_differs, (mu, mu_p, n)


def test_acceptance_7_kernel_numerics():
    ev = KernelEvaluator()
    p0 = kernel_eval([0.0, 0.0, 0.0], ev)
    mass = normalization_integral(ev)
    axis = np.array([-1.0, 0.0, 1.0])
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    pde = float(np.max(pde_residual(grid, ev)))
    scaling = float(np.max(scaling_residual(grid, 4.0, ev)))
    ok = abs(p0 - 1 / 16) <= 1e-6 and abs(mass - 1) <= 1e-4 and pde < 1e-6 and scaling < 1e-8
    record(7, ok, f"p(0)={p0!r} (|err|={abs(p0 - 1 / 16):.1e}); int p - 1 = {mass - 1:.1e}; "
           f"max PDE residual on 27 grid points {pde:.1e}; max scaling residual at t=4 "
           f"{scaling:.1e}")
    assert ok


@pytest.mark.slow
def test_acceptance_8_sampler_agreement(h1, heat_batch):
    r = h1.ring
    # independent oracles: x, y are standard normal, u has characteristic function
    # sech(2 lambda), and (x, y, u) -> (y, x, -u) is a measure-preserving automorphism
    oracle = {"x^2": gaussian_moment(2), "x^4": gaussian_moment(4), "u^2": central_moment_h1(1),
              "x^2*y^2": gaussian_moment(2) ** 2, "u*x*y": 0, "x^6": gaussian_moment(6)}
    parts, ok = [], True
    for text, expected in oracle.items():
        P = parse_polynomial(text, r)
        exact = moment(P)
        est = mc_expectation(P, heat_batch)
        z = est.z_score(float(exact))
        ok &= exact == expected and abs(z) <= Z_LIMIT
        parts.append(f"{text}: {est.value:.4f} vs {exact} (z={z:+.2f})")
    record(8, ok, f"{SAMPLES} samples, {STEPS} steps, seed {SEED}; " + "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_acceptance_9_spectral_decay(h1, heat_batch):
    h = parse_polynomial("x*u - 2*y", h1.ring)
    exact_eigen = apply_N(h) == h * 3
    t = 0.5
    est = mehler_mc(h, t, (1.0, 1.0, 1.0), SAMPLES, seed=SEED, walk_steps=STEPS,
                    sample=heat_batch)
    target = -exp(-3 * t)
    z = est.z_score(target)
    decay_exact = all(mehler_poly(h, circle=c) == h * c[0] ** 3 for c in (CIRCLE, CIRCLE2)) \
        and mehler_poly(h, decay=Fraction(1, 7)) == h * Fraction(1, 343)
    ok = exact_eigen and abs(z) <= Z_LIMIT and decay_exact
    record(9, ok, f"T_0.5 h(1,1,1) = {est.value:.5f} +- {est.stderr:.5f} vs {target:.5f} "
           f"(z={z:+.2f}); exact path gives c^3 h {decay_exact}")
    assert ok


def test_acceptance_10_poincare(h1):
    rep = poincare_gap(h1, 4)
    x = parse_polynomial("x", h1.ring)
    attained = moment(gradient_squared(x)) == moment(x * x) - moment(x) ** 2
    ok = 0.0 < rep.min_quotient <= 1.0 + 1e-9 and attained
    record(10, ok, f"min Rayleigh quotient on B_4 (dim {rep.dimension}) = "
           f"{rep.min_quotient!r}, certified as a bound on polynomials of degree <= 4; "
           f"quotient of x equals 1 {attained}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
