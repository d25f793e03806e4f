import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnot_mehler import (apply_dilation_generator, apply_N, apply_sublaplacian, dilate,
                           get_group, gradient_squared, left_invariant_field)
from carnot_mehler.diffops import dilation_generator_field, horizontal_fields
from carnot_mehler.errors import NonRealInput
from carnot_mehler.poly import I
from carnot_mehler.spectral import monomial_basis

from conftest import GROUPS, polynomials

H1 = get_group("h1")
x, y, u = H1.ring.gens()


def test_h1_fields_closed_form():
    X, Y = horizontal_fields(H1)
    assert X.coeffs == (H1.ring.one(), H1.ring.zero(), y * 2)
    assert Y.coeffs == (H1.ring.zero(), H1.ring.one(), x * -2)
    U = left_invariant_field(H1, 2)
    assert X.commutator(Y).coeffs == tuple(c * -4 for c in U.coeffs)


def test_h1_sublaplacian_examples():
    assert apply_sublaplacian(x ** 2) == H1.ring.constant(-2)
    assert apply_sublaplacian(u ** 2) == (x ** 2 + y ** 2) * -8
    assert apply_sublaplacian(x * u) == y * -4
    assert apply_sublaplacian(x) == H1.ring.zero()


def test_h1_dilation_field():
    A = dilation_generator_field(H1)
    assert A.coeffs == (x, y, u * 2)


def test_eigenvector_example():
    h = x * u - y * 2
    assert apply_N(h) == h * 3


def test_gradient_squared_rejects_complex():
    with pytest.raises(NonRealInput):
        gradient_squared(x + I * y)
    assert gradient_squared(u) == (x ** 2 + y ** 2) * 4


@pytest.mark.parametrize("name", GROUPS)
def test_commutator_identity_on_monomials(name):
    alg = get_group(name)
    top = 6 if name in ("h1", "r2", "engel") else 5
    for d in range(top + 1):
        for m in monomial_basis(alg, d):
            lm = apply_sublaplacian(m)
            lhs = apply_sublaplacian(apply_dilation_generator(m)) - apply_dilation_generator(lm)
            assert lhs == lm * 2


@pytest.mark.parametrize("name", GROUPS)
def test_dilation_generator_methods_agree(name):
    alg = get_group(name)
    top = 6 if name in ("h1", "r2", "engel") else 5
    for d in range(top + 1):
        for m in monomial_basis(alg, d):
            assert apply_dilation_generator(m, "grading") == \
                apply_dilation_generator(m, "vector_field")


@pytest.mark.parametrize("name", GROUPS)
def test_sublaplacian_lowers_degree_by_two(name):
    alg = get_group(name)
    for d in range(6):
        for m in monomial_basis(alg, d):
            lm = apply_sublaplacian(m)
            assert lm.is_zero() or (lm.is_homogeneous() and lm.degree() == d - 2)
            if d < 2:
                assert lm.is_zero()


@pytest.mark.parametrize("name", GROUPS)
@given(data=st.data())
def test_fields_are_derivations(name, data):
    alg = get_group(name)
    f = data.draw(polynomials(alg, 3))
    g = data.draw(polynomials(alg, 3))
    for j in range(alg.dim):
        Z = left_invariant_field(alg, j)
        assert Z(f * g) == Z(f) * g + f * Z(g)


@given(polynomials(H1, 5), st.fractions(min_value=-3, max_value=3, max_denominator=5))
def test_sublaplacian_scaling(f, t):
    assert apply_sublaplacian(dilate(t, f)) == dilate(t, apply_sublaplacian(f)) * t * t


@pytest.mark.parametrize("name", GROUPS)
def test_left_invariance(name):
    # X_j f at g equals d/ds f(g exp(s Z_j)) at s = 0: check on f = coordinate functions
    from carnot_mehler import symbolic_product

    alg = get_group(name)
    comps = symbolic_product(alg)
    n = alg.dim
    for j in range(n):
        Z = left_invariant_field(alg, j)
        for m in range(n):
            coord = alg.ring.var(m)
            d = comps[m].diff(n + j)
            sub = list(alg.ring.gens()) + [alg.ring.zero()] * n
            assert Z(coord) == d.substitute(sub, target=alg.ring)


def test_apply_to_non_group_ring():
    from carnot_mehler.errors import AlgebraMismatch
    from carnot_mehler.hermite import PLANE

    with pytest.raises(AlgebraMismatch):
        apply_sublaplacian(PLANE.var("x"))
