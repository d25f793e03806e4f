"""Left-invariant vector fields and the operators L, A and N = L + A.

All operators act on :class:`~carnot_mehler.poly.Polynomial` exactly. The
sub-Laplacian and the vector-field form of the dilation generator are
memoized per monomial on the algebra, since the moment oracle and the
eigenbasis construction apply them to the same monomials over and over.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .algebra import StratifiedAlgebra, symbolic_product
from .errors import AlgebraMismatch, NonRealInput
from .poly import Polynomial

__all__ = [
    "VectorField",
    "left_invariant_field",
    "horizontal_fields",
    "apply_sublaplacian",
    "apply_dilation_generator",
    "dilation_generator_field",
    "apply_N",
    "gradient_squared",
    "horizontal_gradient",
]


@dataclass(frozen=True)
class VectorField:
    """First-order operator ``sum_j coeffs[j] * d/dz_j``."""

    algebra: StratifiedAlgebra
    coeffs: tuple[Polynomial, ...]

    def __call__(self, f: Polynomial) -> Polynomial:
        return self.apply(f)

    def apply(self, f: Polynomial) -> Polynomial:
        if f.ring != self.algebra.ring:
            raise AlgebraMismatch(f"polynomial on {f.ring.tag!r}, field on {self.algebra.name!r}")
        out = f.ring.zero()
        for j, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            d = f.diff(j)
            if not d.is_zero():
                out = out + c * d
        return out

    def commutator(self, other: "VectorField") -> "VectorField":
        coeffs = tuple(self.apply(b) - other.apply(a) for a, b in zip(self.coeffs, other.coeffs))
        return VectorField(self.algebra, coeffs)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.algebra, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, p) -> "VectorField":
        return VectorField(self.algebra, tuple(c * p for c in self.coeffs))

    def __str__(self):
        parts = []
        for name, c in zip(self.algebra.names, self.coeffs):
            if c.is_zero():
                continue
            parts.append(f"d_{name}" if c == 1 else f"({c})*d_{name}")
        return " + ".join(parts) or "0"


def left_invariant_field(alg: StratifiedAlgebra, j: int) -> VectorField:
    """Field of basis vector ``Z_j``: d/dt f(g exp(t Z_j)) at t = 0."""
    key = ("field", j)
    hit = alg._cache.get(key)
    if hit is not None:
        return hit
    n = alg.dim
    ring = alg.ring
    coeffs = []
    for comp in symbolic_product(alg):
        d = comp.diff(n + j)
        terms = {}
        for e, c in d.terms.items():
            if any(e[n:]):
                continue
            terms[e[:n]] = c
        coeffs.append(Polynomial(ring, terms, _trusted=True))
    hit = VectorField(alg, tuple(coeffs))
    alg._cache[key] = hit
    return hit


def horizontal_fields(alg: StratifiedAlgebra) -> list[VectorField]:
    return [left_invariant_field(alg, j) for j in alg.first_layer]


def _monomial_image(alg: StratifiedAlgebra, key: str, exp: tuple, compute) -> Polynomial:
    cache = alg._cache.setdefault(key, {})
    hit = cache.get(exp)
    if hit is None:
        hit = compute(Polynomial.monomial(alg.ring, exp))
        cache[exp] = hit
    return hit


def _linear_extension(f: Polynomial, image) -> Polynomial:
    acc: dict = {}
    for e, c in f.terms.items():
        for te, tc in image(e).terms.items():
            v = acc.get(te)
            acc[te] = tc * c if v is None else v + tc * c
    return Polynomial(f.ring, {e: c for e, c in acc.items() if c != 0}, _trusted=True)


def _algebra_of(f: Polynomial) -> StratifiedAlgebra:
    alg = f.ring.algebra
    if alg is None:
        raise AlgebraMismatch("polynomial is not defined on a group")
    return alg


def apply_sublaplacian(f: Polynomial) -> Polynomial:
    """``L f = -sum_i X_i^2 f`` over the first-layer basis."""
    alg = _algebra_of(f)
    fields = horizontal_fields(alg)

    def compute(m):
        out = m.ring.zero()
        for X in fields:
            out = out - X.apply(X.apply(m))
        return out

    return _linear_extension(f, lambda e: _monomial_image(alg, "L", e, compute))


def dilation_generator_field(alg: StratifiedAlgebra) -> VectorField:
    """A as a vector field, from the derivative of ``s -> exp(Z(s))`` at s = 1.

    With ``Z(s) = sum s^{d_j} z_j Z_j``,
    ``A = Z' + sum_{l=1}^{k-1} (-1)^l / (l+1)! (ad Z)^l Z'`` read as a
    combination of left-invariant fields with polynomial coefficients.
    """
    hit = alg._cache.get("A_field")
    if hit is not None:
        return hit
    ring = alg.ring
    z = list(ring.gens())
    zp = [g * d for g, d in zip(z, alg.degrees)]
    total = list(zp)
    ad = list(zp)
    for level in range(1, alg.step):
        ad = alg.bracket(z, ad)
        ad = [a if isinstance(a, Polynomial) else ring.constant(a) for a in ad]
        coef = Fraction((-1) ** level, factorial(level + 1))
        total = [t + a * coef for t, a in zip(total, ad)]
    coeffs = [ring.zero() for _ in range(alg.dim)]
    for j, a_j in enumerate(total):
        if a_j.is_zero():
            continue
        Z = left_invariant_field(alg, j)
        coeffs = [c + a_j * zc for c, zc in zip(coeffs, Z.coeffs)]
    hit = VectorField(alg, tuple(coeffs))
    alg._cache["A_field"] = hit
    return hit


def apply_dilation_generator(f: Polynomial, method: str = "grading") -> Polynomial:
    """Generator of ``s -> f o delta_{e^s}``.

    ``method="grading"`` multiplies each homogeneous component by its degree;
    ``method="vector_field"`` applies :func:`dilation_generator_field`.
    """
    if method == "grading":
        ring = f.ring
        return Polynomial(ring, {e: c * ring.monomial_degree(e) for e, c in f.terms.items()
                                 if ring.monomial_degree(e)}, _trusted=True)
    if method == "vector_field":
        return dilation_generator_field(_algebra_of(f)).apply(f)
    raise ValueError(f"unknown method {method!r}")


def apply_N(f: Polynomial) -> Polynomial:
    return apply_sublaplacian(f) + apply_dilation_generator(f)


def horizontal_gradient(f: Polynomial) -> list[Polynomial]:
    return [X.apply(f) for X in horizontal_fields(_algebra_of(f))]


def gradient_squared(f: Polynomial) -> Polynomial:
    """``|grad f|^2 = sum_i (X_i f)^2`` for real ``f``."""
    if not f.is_real():
        raise NonRealInput("gradient_squared requires real coefficients")
    out = f.ring.zero()
    for g in horizontal_gradient(f):
        out = out + g * g
    return out
