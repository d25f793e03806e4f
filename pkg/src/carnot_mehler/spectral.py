"""Exact heat operator, Mehler operators and Hermite eigenspaces on polynomials.

On polynomials of bounded homogeneous degree, ``L`` is nilpotent (it lowers
the degree by 2), so every operator built from ``exp(c L)`` is a finite sum
and all computations are exact over Q(i). Heat-kernel moments are read off
the identity ``int f p dg = (exp(-L/2) f)(e)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np
import scipy.linalg

from .algebra import StratifiedAlgebra, dilate, symbolic_product
from .diffops import (
    apply_N,
    apply_sublaplacian,
    gradient_squared,
    horizontal_fields,
)
from .errors import DegenerateGram, EigenCheckFailed, IdentityViolated, NonRealInput, NotOnCircle
from .poly import Polynomial, as_coefficient

__all__ = [
    "EigenBasis",
    "monomial_basis",
    "homogeneous_components",
    "heat_op",
    "hermite_basis",
    "mehler_poly",
    "moment",
    "check_rotation_identity",
    "check_energy_identities",
    "check_intertwining",
    "asymmetry_witness",
    "poincare_gap",
    "rayleigh_quotient",
]


def monomial_basis(alg: StratifiedAlgebra, n: int) -> list[Polynomial]:
    """Monomials of homogeneous degree ``n`` in lex-descending order."""
    return [Polynomial.monomial(alg.ring, e) for e in alg.ring.exponents_of_degree(n)]


def homogeneous_components(f: Polynomial) -> dict[int, Polynomial]:
    return f.homogeneous_components()


def _power_series_op(f: Polynomial, coef, apply_op) -> Polynomial:
    """``sum_k coef^k / k! * op^k f`` for a nilpotent ``op``.

    A polynomial ``coef`` (formal parameter) lifts the result to its ring.
    """
    formal = isinstance(coef, Polynomial)
    total = f.embed(coef.ring) if formal else f
    term = f
    k = 0
    while True:
        term = apply_op(term)
        if term.is_zero():
            return total
        k += 1
        if formal:
            total = total + term.embed(coef.ring) * coef ** k * Fraction(1, factorial(k))
        else:
            total = total + term * (coef ** k / factorial(k))


def heat_op(f: Polynomial, tau=1, sign: str = "forward") -> Polynomial:
    """``exp(-tau L / 2) f`` (forward) or ``exp(+tau L / 2) f`` (backward).

    ``tau`` is a rational number, or a formal parameter given as a
    :class:`Polynomial` in a ring extending ``f``'s variables.
    """
    if sign not in ("forward", "backward"):
        raise ValueError("sign must be 'forward' or 'backward'")
    s = -1 if sign == "forward" else 1
    if isinstance(tau, Polynomial):
        coef = tau * Fraction(s, 2)
    else:
        tau = as_coefficient(tau)
        if tau == 0:
            return f
        coef = tau * Fraction(s, 2)
    return _power_series_op(f, coef, apply_sublaplacian)


@dataclass(frozen=True)
class EigenBasis:
    """Basis of the eigenspace ``E_n`` of N, indexed like ``monomial_basis(n)``."""

    degree: int
    members: tuple[Polynomial, ...]
    monomials: tuple[Polynomial, ...] = field(repr=False)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]


def hermite_basis(alg: StratifiedAlgebra, n: int) -> EigenBasis:
    """``exp(L/2)`` applied to the degree-``n`` monomials, each verified ``N h = n h``."""
    key = ("hermite", n)
    hit = alg._cache.get(key)
    if hit is not None:
        return hit
    monos = monomial_basis(alg, n)
    members = []
    for m in monos:
        h = heat_op(m, 1, "backward")
        if apply_N(h) != h * n:
            raise EigenCheckFailed(f"N h != {n} h for h = exp(L/2)({m})")
        members.append(h)
    hit = EigenBasis(n, tuple(members), tuple(monos))
    alg._cache[key] = hit
    return hit


def _check_circle(c, s):
    c, s = as_coefficient(c), as_coefficient(s)
    if c * c + s * s != 1:
        raise NotOnCircle(f"({c})^2 + ({s})^2 != 1")
    return c, s


def mehler_poly(f: Polynomial, t=None, *, circle: tuple | None = None, decay=None) -> Polynomial:
    """Mehler operator ``T_t f = (exp(-(1 - r^2) L / 2) f) o delta_r`` with ``r = e^{-t}``.

    Exactly one of:

    * ``circle=(c, s)``: rational point on the unit circle, ``r = c``
      (the operator ``cos^N theta``);
    * ``decay=r``: the factor ``e^{-t}`` itself, rational in ``[0, 1]``;
    * ``t``: a time; ``e^{-t}`` is replaced by the exact rational value of its
      double precision rounding (``t = 0`` gives the identity exactly).
    """
    given = sum(x is not None for x in (t, circle, decay))
    if given != 1:
        raise ValueError("give exactly one of t, circle, decay")
    if circle is not None:
        c, s = _check_circle(*circle)
        s2 = s * s
    else:
        if decay is None:
            decay = Fraction(1) if t == 0 else Fraction(float(np.exp(-float(t))))
        c = as_coefficient(decay)
        s2 = 1 - c * c
    return dilate(c, heat_op(f, s2, "forward"))


def moment(f: Polynomial):
    """``int f p dg`` computed as ``(exp(-L/2) f)(e)``.

    Per monomial of homogeneous degree ``d`` only the ``L^{d/2}`` term reaches
    the constants, so moments are memoized per exponent.
    """
    alg = f.ring.algebra
    total = Fraction(0)
    for e, c in f.terms.items():
        total = total + c * _monomial_moment(alg, e)
    return as_coefficient(total)


def _monomial_moment(alg: StratifiedAlgebra, exp: tuple) -> Fraction:
    cache = alg._cache.setdefault("moment", {})
    hit = cache.get(exp)
    if hit is not None:
        return hit
    d = alg.ring.monomial_degree(exp)
    if d % 2:
        val = Fraction(0)
    else:
        k = d // 2
        p = Polynomial.monomial(alg.ring, exp)
        for _ in range(k):
            p = apply_sublaplacian(p)
            if p.is_zero():
                break
        val = Fraction(p.constant_term()) * Fraction((-1) ** k, 2 ** k * factorial(k))
    cache[exp] = val
    return val


# ---------------------------------------------------------------------------
# identity checks


@dataclass(frozen=True)
class RotationCheck:
    lhs: object
    rhs: object

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.equal))


def _product_moment(alg: StratifiedAlgebra, f: Polynomial):
    """Moment of a polynomial in two independent heat-distributed points."""
    n = alg.dim
    total = Fraction(0)
    for e, c in f.terms.items():
        m1 = _monomial_moment(alg, e[:n])
        if not m1:
            continue
        total = total + c * m1 * _monomial_moment(alg, e[n:])
    return as_coefficient(total)


def check_rotation_identity(P: Polynomial, c, s) -> RotationCheck:
    """``E[P(delta_c gamma . delta_s g)] == E[P(g)]`` for independent heat points."""
    c, s = _check_circle(c, s)
    alg = P.ring.algebra
    n = alg.dim
    prod = symbolic_product(alg)
    factors = [c] * n + [s] * n
    # delta_c acts on the first point, delta_s on the second.
    scaled = [comp.scale_variables([f ** w for f, w in zip(factors, comp.ring.weights)])
              for comp in prod]
    composed = P.substitute(scaled, target=alg.product_ring)
    return RotationCheck(_product_moment(alg, composed), moment(P))


@dataclass(frozen=True)
class EnergyReport:
    f: Polynomial
    invariance: object          # moment(N f), must be 0
    energy_lhs: object          # moment(N f . f)
    energy_rhs: object          # moment(|grad f|^2)

    @property
    def equal(self) -> bool:
        return self.invariance == 0 and self.energy_lhs == self.energy_rhs


def check_energy_identities(f: Polynomial, strict: bool = True) -> EnergyReport:
    """``int N f p = 0`` and ``int (N f) f p = int |grad f|^2 p`` for real ``f``."""
    if not f.is_real():
        raise NonRealInput("energy identities are checked on real polynomials")
    nf = apply_N(f)
    rep = EnergyReport(f, moment(nf), moment(nf * f), moment(gradient_squared(f)))
    if strict and not rep.equal:
        raise IdentityViolated(f"energy identities fail for {f}: {rep}")
    return rep


@dataclass(frozen=True)
class IntertwiningReport:
    P: Polynomial
    rotation_lhs: Polynomial    # exp(-L/2)(cos^N theta P)
    rotation_rhs: Polynomial    # (exp(-L/2) P) o delta_c
    scaling_lhs: Polynomial     # exp(-t^2 L/2) P
    scaling_rhs: Polynomial     # delta_{1/t} exp(-L/2) delta_t P

    @property
    def equal(self) -> bool:
        return self.rotation_lhs == self.rotation_rhs and self.scaling_lhs == self.scaling_rhs


def check_intertwining(P: Polynomial, c, s, t, strict: bool = True) -> IntertwiningReport:
    c, s = _check_circle(c, s)
    t = as_coefficient(t)
    if t == 0:
        raise ValueError("t must be nonzero")
    rot_l = heat_op(mehler_poly(P, circle=(c, s)), 1)
    rot_r = dilate(c, heat_op(P, 1))
    sc_l = heat_op(P, t * t)
    sc_r = dilate(1 / t, heat_op(dilate(t, P), 1))
    rep = IntertwiningReport(P, rot_l, rot_r, sc_l, sc_r)
    if strict and not rep.equal:
        raise IdentityViolated(f"intertwining fails for {P}")
    return rep


@dataclass(frozen=True)
class AsymmetryWitness:
    f: Polynomial
    h: Polynomial
    nf_h: object    # <N f, h>_p
    f_nh: object    # <f, N h>_p


def asymmetry_witness(alg: StratifiedAlgebra, max_degree: int) -> AsymmetryWitness | None:
    """First monomial pair in ``B_max_degree`` with ``<Nf, h>_p != <f, Nh>_p``.

    Returns ``None`` when no pair exists (N symmetric on the scanned space).
    """
    basis = [m for d in range(max_degree + 1) for m in monomial_basis(alg, d)]
    images = [apply_N(m) for m in basis]
    for (f, nf), (h, nh) in itertools.product(zip(basis, images), repeat=2):
        if f == h:
            continue
        a, b = moment(nf * h), moment(f * nh)
        if a != b:
            return AsymmetryWitness(f, h, a, b)
    return None


def rayleigh_quotient(f: Polynomial) -> Fraction:
    """Exact ``int |grad f|^2 p / Var_p(f)`` for real ``f``."""
    var = moment(f * f) - moment(f) ** 2
    if var == 0:
        raise DegenerateGram("zero variance")
    return Fraction(moment(gradient_squared(f))) / Fraction(var)


@dataclass(frozen=True)
class PoincareReport:
    degree: int
    dimension: int
    min_quotient: float
    eigenvalues: tuple[float, ...]
    minimizer: tuple[float, ...]
    basis: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"degree": self.degree, "dimension": self.dimension,
                "min_quotient": self.min_quotient, "eigenvalues": list(self.eigenvalues),
                "minimizer": list(self.minimizer), "basis": list(self.basis),
                "note": "upper bound on the optimal Poincare constant 1/C over polynomials "
                        "of the stated degree"}


def poincare_gap(alg: StratifiedAlgebra, n: int) -> PoincareReport:
    """Minimum Rayleigh quotient of the Dirichlet form over centred ``B_n``.

    Gram and Dirichlet matrices are exact; only the generalized eigenproblem
    is solved in floating point.
    """
    basis = [m for d in range(1, n + 1) for m in monomial_basis(alg, d)]
    if not basis:
        raise DegenerateGram("B_n contains only constants")
    grads = [[X.apply(b) for X in horizontal_fields(alg)] for b in basis]
    means = [moment(b) for b in basis]
    size = len(basis)
    gram = np.zeros((size, size))
    dirichlet = np.zeros((size, size))
    for i, j in itertools.combinations_with_replacement(range(size), 2):
        g = Fraction(moment(basis[i] * basis[j])) - Fraction(means[i]) * Fraction(means[j])
        d = sum((Fraction(moment(a * b)) for a, b in zip(grads[i], grads[j])), Fraction(0))
        gram[i, j] = gram[j, i] = float(g)
        dirichlet[i, j] = dirichlet[j, i] = float(d)
    gev = np.linalg.eigvalsh(gram)
    if gev[0] <= 1e-12 * max(gev[-1], 1.0):
        raise DegenerateGram("centred basis is linearly dependent")
    evals, evecs = scipy.linalg.eigh(dirichlet, gram)
    return PoincareReport(n, size, float(evals[0]), tuple(float(v) for v in evals),
                          tuple(float(v) for v in evecs[:, 0]), tuple(str(b) for b in basis))
