from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnot_mehler import (apply_N, asymmetry_witness, check_energy_identities,
                           check_intertwining, check_rotation_identity, get_group,
                           heat_op, hermite_basis, mehler_poly, moment, poincare_gap,
                           rayleigh_quotient)
from carnot_mehler.errors import IdentityViolated, NotOnCircle
from carnot_mehler.spectral import monomial_basis

from conftest import polynomials
from oracles import central_moment_h1, gaussian_moment, hermite_e

H1 = get_group("h1")
R = H1.ring
x, y, u = R.gens()
C, S = Fraction(3, 5), Fraction(4, 5)


def pythagorean():
    return st.fractions(min_value=0, max_value=3, max_denominator=7).map(
        lambda m: ((1 - m * m) / (1 + m * m), 2 * m / (1 + m * m))).filter(lambda cs: cs[0] >= 0)


def test_heat_op_examples():
    assert heat_op(x ** 2) == x ** 2 + 1
    assert heat_op(x ** 2, sign="backward") == x ** 2 - 1
    assert heat_op(u) == u


@given(polynomials(H1, 5))
def test_heat_forward_backward_inverse(f):
    assert heat_op(heat_op(f), sign="backward") == f


def test_hermite_basis_h1():
    assert list(hermite_basis(H1, 2)) == [x ** 2 - 1, x * y, y ** 2 - 1, u]
    e3 = list(hermite_basis(H1, 3))
    assert x * u - y * 2 in e3 and y * u + x * 2 in e3
    assert len(e3) == 6


@pytest.mark.parametrize("n", range(6))
def test_abelian_basis_is_probabilists_hermite(n):
    alg = get_group("r2")
    a, b = alg.ring.gens()
    pts = np.array([[0.3, -1.1], [2.0, 0.5], [-0.7, 1.9]])
    for h, m in zip(hermite_basis(alg, n), monomial_basis(alg, n)):
        i, j = next(iter(m.terms))
        want = hermite_e(i, pts[:, 0]) * hermite_e(j, pts[:, 1])
        assert np.allclose(h.evaluate_batch(pts).real, want)


def test_moment_examples():
    assert moment(R.one()) == 1
    assert moment(x ** 2) == 1
    assert moment(u ** 2) == 4
    assert moment(x ** 4) == 3
    assert moment(u * x * y) == 0
    assert heat_op(u * x * y) == u * x * y - x ** 2 * 2 + y ** 2 * 2
    assert moment(x ** 2 * y ** 2) == 1


@pytest.mark.parametrize("k", range(4))
def test_central_moments_match_sech(k):
    assert moment(u ** (2 * k)) == central_moment_h1(k)
    assert moment(u ** (2 * k + 1)) == 0


def test_mixed_moment_from_characteristic_function():
    # E[x^2 e^{i s u}] = tanh(2s) / (2s cosh 2s)
    assert moment(x ** 2 * u ** 2) == Fraction(20, 3)


@pytest.mark.parametrize("k", range(5))
def test_first_layer_moments_are_gaussian(k):
    for name in ("h1", "h2", "engel", "free2-3"):
        alg = get_group(name)
        assert moment(alg.ring.var(0) ** k) == gaussian_moment(k)


def test_mehler_example():
    assert mehler_poly(x ** 2, circle=(C, S)) == x ** 2 * Fraction(9, 25) + Fraction(16, 25)
    with pytest.raises(NotOnCircle):
        mehler_poly(x, circle=(Fraction(1, 2), Fraction(1, 2)))
    assert mehler_poly(x ** 2 + u, t=0) == x ** 2 + u


@given(pythagorean())
def test_mehler_eigen_decay(cs):
    c, s = cs
    for n in range(4):
        for h in hermite_basis(H1, n):
            assert mehler_poly(h, circle=(c, s)) == h * c ** n


@given(polynomials(H1, 4))
def test_mehler_composition(f):
    two = mehler_poly(mehler_poly(f, circle=(C, S)), circle=(Fraction(5, 13), Fraction(12, 13)))
    assert two == mehler_poly(f, decay=C * Fraction(5, 13))


@given(polynomials(H1, 4))
def test_mehler_invariance_and_limit(f):
    assert moment(mehler_poly(f, circle=(C, S))) == moment(f)
    assert mehler_poly(f, circle=(0, 1)) == R.constant(moment(f))


@given(polynomials(H1, 4))
def test_contraction(f):
    tf = mehler_poly(f, circle=(C, S))
    assert moment(tf * tf) <= moment(f * f)


def test_rotation_identity_example():
    lhs, rhs, equal = check_rotation_identity(u ** 2, C, S)
    assert equal and lhs == rhs == 4


def test_rotation_identity_all_monomials():
    for d in range(5):
        for m in monomial_basis(H1, d):
            assert check_rotation_identity(m, C, S).equal


def test_energy_examples():
    rep = check_energy_identities(u)
    assert rep.invariance == 0
    assert rep.energy_lhs == rep.energy_rhs == 8


@given(polynomials(H1, 5))
def test_energy_identities_property(f):
    assert check_energy_identities(f).equal


def test_intertwining_example():
    assert check_intertwining(u * x, C, S, 2).equal
    assert check_intertwining(x ** 2 * y, C, S, 3).equal


def test_intertwining_failure_reports(monkeypatch):
    import carnot_mehler.spectral as spectral

    real = spectral.heat_op
    monkeypatch.setattr(spectral, "heat_op", lambda f, tau=1, sign="forward": real(f, tau, sign) + 1)
    rep = spectral.check_intertwining(x * u, C, S, 2, strict=False)
    assert not rep.equal
    with pytest.raises(IdentityViolated):
        spectral.check_intertwining(x * u, C, S, 2)


def test_asymmetry_witness():
    w = asymmetry_witness(H1, 4)
    assert w is not None and w.nf_h != w.f_nh
    assert (w.f, w.h, w.nf_h, w.f_nh) == (x, y * u, 0, 4)
    assert asymmetry_witness(get_group("r2"), 4) is None


def test_poincare():
    assert rayleigh_quotient(x) == 1
    assert rayleigh_quotient(x ** 2 - 1) == 2
    assert abs(poincare_gap(H1, 1).min_quotient - 1.0) < 1e-12
    rep = poincare_gap(H1, 4)
    assert 0 < rep.min_quotient <= 1 + 1e-9
    assert rep.dimension == 21


@pytest.mark.parametrize("name,top", [("h1", 6), ("h2", 4), ("free2-3", 5), ("engel", 4),
                                      ("free3-2", 4), ("r2", 6)])
def test_eigenbasis_members(name, top):
    alg = get_group(name)
    for n in range(top + 1):
        basis = hermite_basis(alg, n)
        assert len(basis) == len(monomial_basis(alg, n))
        for h, m in zip(basis, basis.monomials):
            assert apply_N(h) == h * n
            assert h.homogeneous_part(n) == m
