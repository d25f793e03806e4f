"""Hermite functions, Schrodinger coefficients and generating-function eigenvectors.

Coefficient functions of irreducible representations have the form
``P(z) * exp(E(z))`` with polynomials ``P`` and ``E``: a Gaussian envelope in
the first-layer variables and an imaginary linear phase. They are handled by
:class:`GaussianEnvelopeFunction`, on which the left-invariant fields act
exactly. All such functions are managed up to a nonzero scalar: the norms of
the Hermite functions, powers of ``sqrt(pi)`` and ``nu_j^{-1/2}`` factors are
dropped.

Conventions: on H_k, ``[X_j, Y_j] = -4U``, the Schrodinger representation
sends ``U`` to ``-i/4``, and
``Phi_{m,m'}(x, y) = int exp(i y xi) F_m(xi + x/2) F_m'(xi - x/2) d xi``
with ``F_m(xi) = H_m(xi) exp(-xi^2/2)``. Evaluating that integral gives the
envelope ``exp(-(x^2 + y^2)/4)``, which is the one used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

import numpy as np
import scipy.linalg

from .algebra import StratifiedAlgebra
from .diffops import VectorField, apply_N, horizontal_fields
from .errors import EigenCheckFailed, EigenToleranceExceeded, ZeroRank
from .poly import I, Polynomial, PolyRing
from .spectral import hermite_basis

__all__ = [
    "PLANE",
    "hermite_poly",
    "GaussianEnvelopeFunction",
    "special_hermite",
    "angular_orders",
    "schrodinger_coefficient",
    "generating_hermite",
    "generating_series",
    "membership_check",
    "RepData",
    "step2_rep_data",
    "step2_coefficient",
    "step2_generating_hermite",
    "eigen_residual",
]

XI = PolyRing(("xi",), (1,), "xi")
PLANE = PolyRing(("x", "y"), (1, 1), "plane")
_XI_PLANE = PolyRing(("xi", "x", "y"), (1, 1, 1), "xi-plane")


def hermite_poly(mu: int) -> Polynomial:
    """Physicists' Hermite polynomial ``H_mu`` in the variable ``xi``."""
    if mu < 0:
        raise ValueError("mu >= 0")
    xi = XI.var(0)
    prev, cur = XI.zero(), XI.one()
    for m in range(mu):
        prev, cur = cur, xi * cur * 2 - prev * (2 * m)
    return cur


@dataclass(frozen=True)
class GaussianEnvelopeFunction:
    """``poly * exp(exponent)``; both polynomials live in the same ring.

    For coefficient functions the exponent is ``-q(x, y) + i <lambda, u> + ...``:
    its real part is minus the envelope quadratic form, its imaginary part the
    phase.
    """

    poly: Polynomial
    exponent: Polynomial

    @property
    def ring(self) -> PolyRing:
        return self.poly.ring

    @property
    def envelope_form(self) -> Polynomial:
        return -self.exponent.real_part()

    @property
    def phase_form(self) -> Polynomial:
        return self.exponent.imag_part()

    def apply_field(self, V: VectorField) -> "GaussianEnvelopeFunction":
        return GaussianEnvelopeFunction(V.apply(self.poly) + self.poly * V.apply(self.exponent),
                                        self.exponent)

    def sublaplacian(self) -> "GaussianEnvelopeFunction":
        alg = self.ring.algebra
        out = self.ring.zero()
        for X in horizontal_fields(alg):
            out = out - self.apply_field(X).apply_field(X).poly
        return GaussianEnvelopeFunction(out, self.exponent)

    def eigenvalue(self):
        """Return ``lam`` with ``L phi = lam phi``, or ``None``."""
        lphi = self.sublaplacian().poly
        if self.poly.is_zero():
            return None
        e, c = next(iter(self.poly.terms.items()))
        lam = lphi.coefficient(e) / c
        if lphi == self.poly * lam:
            return lam
        return None

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self.poly.evaluate_batch(pts) * np.exp(self.exponent.evaluate_batch(pts))


def _gaussian_moment(j: int) -> Fraction:
    """``int eta^j exp(-eta^2) d eta / sqrt(pi)``."""
    if j % 2:
        return Fraction(0)
    half = j // 2
    return Fraction(factorial(j), factorial(half) * 4 ** half)


def special_hermite(mu: int, mu_p: int) -> GaussianEnvelopeFunction:
    """Special Hermite function ``Phi_{mu,mu'}`` on the plane, up to scalar.

    The xi-integral is done symbolically: with ``b = i y``,
    ``int xi^m exp(-xi^2 + b xi) = sqrt(pi) exp(b^2/4) sum_j C(m,j) (b/2)^{m-j} M_j``.
    """
    ring = _XI_PLANE
    xi, x, _ = ring.gens()
    half = Fraction(1, 2)
    hm = hermite_poly(mu).substitute([xi + x * half], target=ring)
    hmp = hermite_poly(mu_p).substitute([xi - x * half], target=ring)
    integrand = hm * hmp
    half_iy = PLANE.var("y") * (I * half)
    powers = [PLANE.one()]
    out = PLANE.zero()
    for (m, a, b), c in integrand.terms.items():
        moment_m = PLANE.zero()
        for j in range(0, m + 1, 2):
            while len(powers) <= m - j:
                powers.append(powers[-1] * half_iy)
            moment_m = moment_m + powers[m - j] * (comb(m, j) * _gaussian_moment(j))
        out = out + moment_m * Polynomial.monomial(PLANE, (a, b), c)
    x2, y2 = PLANE.var("x") ** 2, PLANE.var("y") ** 2
    return GaussianEnvelopeFunction(out, (x2 + y2) * Fraction(-1, 4))


def angular_orders(p: Polynomial) -> set[int]:
    """Set of ``a - b`` over monomials ``w^a wbar^b`` of a plane polynomial, ``w = x + iy``."""
    wr = PolyRing(("w", "wb"), (1, 1), "w")
    w, wb = wr.gens()
    q = p.substitute([(w + wb) * Fraction(1, 2), (w - wb) * (I * Fraction(-1, 2))], target=wr)
    return {a - b for (a, b) in q.terms}


# ---------------------------------------------------------------------------
# Heisenberg groups


def _heisenberg_pairs(alg: StratifiedAlgebra) -> tuple[list[tuple[int, int]], int]:
    """Return ``[(x_j, y_j)]`` index pairs and the centre index, checking ``[X_j, Y_j] = -4U``."""
    if alg.step != 2 or alg.layer_dims[1] != 1 or alg.layer_dims[0] % 2:
        raise ValueError(f"{alg.name} is not a Heisenberg group")
    k = alg.layer_dims[0] // 2
    centre = alg.dim - 1
    pairs = [(2 * j, 2 * j + 1) for j in range(k)]
    expected = {(a, b, centre, Fraction(-4)) for a, b in pairs} | \
               {(b, a, centre, Fraction(4)) for a, b in pairs}
    if set(alg.brackets) != expected:
        raise ValueError(f"{alg.name} does not follow the [X_j, Y_j] = -4U convention")
    return pairs, centre


def _as_multi(mu, k: int) -> tuple[int, ...]:
    if isinstance(mu, int):
        mu = (mu,)
    mu = tuple(int(m) for m in mu)
    if len(mu) != k or min(mu) < 0:
        raise ValueError(f"expected a multi-index of length {k}")
    return mu


def schrodinger_coefficient(alg: StratifiedAlgebra, mu, mu_p, check: bool = True
                            ) -> GaussianEnvelopeFunction:
    """``exp(-iu/4) prod_j Phi_{mu_j, mu'_j}(x_j, y_j)`` on H_k, eigen-checked."""
    pairs, centre = _heisenberg_pairs(alg)
    k = len(pairs)
    mu, mu_p = _as_multi(mu, k), _as_multi(mu_p, k)
    ring = alg.ring
    gens = ring.gens()
    poly = ring.one()
    exponent = gens[centre] * (I * Fraction(-1, 4))
    for (a, b), m, mp in zip(pairs, mu, mu_p):
        phi = special_hermite(m, mp)
        poly = poly * phi.poly.substitute([gens[a], gens[b]], target=ring)
        exponent = exponent + phi.exponent.substitute([gens[a], gens[b]], target=ring)
    out = GaussianEnvelopeFunction(poly, exponent)
    if check:
        lam = out.eigenvalue()
        expected = sum(2 * m + 1 for m in mu)
        if lam != expected:
            raise EigenCheckFailed(f"L phi != {expected} phi for mu={mu}, mu'={mu_p} (got {lam})")
    return out


def generating_series(phi: GaussianEnvelopeFunction, lam, n: int) -> Polynomial:
    """``d^n/dt^n at 0 of exp(t^2 lam / 2) * phi(delta_t z)`` as a polynomial.

    ``phi(delta_t z) = sum_d t^d P_d * exp(sum_d t^d E_d)``; the exponential is
    expanded as a truncated power series through ``F' = W' F``.
    """
    ring = phi.ring
    pcomp = phi.poly.homogeneous_components()
    ecomp = phi.exponent.homogeneous_components()
    if 0 in ecomp:
        raise ValueError("exponent must vanish at the identity")
    w = {d: e for d, e in ecomp.items()}
    w[2] = w.get(2, ring.zero()) + ring.constant(lam) * Fraction(1, 2)
    series = [ring.one()]
    for m in range(1, n + 1):
        acc = ring.zero()
        for j in range(1, m + 1):
            wj = w.get(j)
            if wj is None or wj.is_zero():
                continue
            acc = acc + wj * series[m - j] * j
        series.append(acc * Fraction(1, m))
    out = ring.zero()
    for d, pd in pcomp.items():
        if d <= n:
            out = out + pd * series[n - d]
    return out * factorial(n)


def generating_hermite(mu, mu_p, n: int, alg: StratifiedAlgebra) -> Polynomial:
    """Polynomial eigenvector ``h_n`` of N built from a Schrodinger coefficient on H_k."""
    phi = schrodinger_coefficient(alg, mu, mu_p)
    k = len(_heisenberg_pairs(alg)[0])
    lam = sum(2 * m + 1 for m in _as_multi(mu, k))
    return generating_series(phi, lam, n)


def membership_check(h: Polynomial, n: int) -> list | None:
    """Coordinates of ``h`` in ``hermite_basis(n)``, or ``None`` if ``h`` is not in ``E_n``.

    The basis is triangular: member ``i`` has top-degree part equal to
    monomial ``i``, so the coordinates are the top-degree coefficients of
    ``h``; the remainder must then vanish exactly.
    """
    alg = h.ring.algebra
    basis = hermite_basis(alg, n)
    coords = [h.coefficient(next(iter(m.terms))) for m in basis.monomials]
    residual = h
    for c, b in zip(coords, basis.members):
        if c != 0:
            residual = residual - b * c
    return coords if residual.is_zero() else None


# ---------------------------------------------------------------------------
# general step-two groups


@dataclass(frozen=True)
class RepData:
    """Canonical form of ``A_lambda[j, h] = <lambda, [chi_j, chi_h]>`` on the first layer.

    ``omega`` columns are ``X_1, Y_1, ..., X_k, Y_k, S_1, ..., S_{n-2k}`` in
    first-layer coordinates; ``omega.T @ A @ omega`` has blocks
    ``nu_j [[0, 1], [-1, 0]]``.
    """

    lam: tuple[float, ...]
    nu: tuple[float, ...]
    omega: np.ndarray
    residual_dim: int
    l_s: tuple[float, ...]
    a_lambda: np.ndarray

    @property
    def k(self) -> int:
        return len(self.nu)

    def to_dict(self) -> dict:
        return {"lambda": list(self.lam), "nu": list(self.nu), "k": self.k,
                "residual_dim": self.residual_dim, "l_S": list(self.l_s)}


def step2_rep_data(alg: StratifiedAlgebra, l: Sequence, tol: float = 1e-12) -> RepData:
    """Symplectic data of the generic representation attached to the covector ``l``."""
    if alg.step != 2:
        raise ValueError("step2_rep_data requires a step-two algebra")
    first = list(alg.first_layer)
    central = [j for j, d in enumerate(alg.degrees) if d == 2]
    l = np.array([float(v) for v in l])
    if l.shape != (alg.dim,):
        raise ValueError("covector has the wrong dimension")
    n = len(first)
    pos = {j: p for p, j in enumerate(first)}
    a_mat = np.zeros((n, n))
    for i, j, m, c in alg.brackets:
        if i in pos and j in pos:
            a_mat[pos[i], pos[j]] += float(c) * l[m]
    scale = max(np.abs(a_mat).max(), 1.0)
    if np.abs(a_mat).max() <= tol * scale:
        raise ZeroRank("lambda annihilates every bracket")
    t_mat, z_mat = scipy.linalg.schur(a_mat, output="real")
    blocks, singles = [], []
    i = 0
    while i < n:
        if i + 1 < n and abs(t_mat[i + 1, i]) > 1e-9 * scale:
            b = t_mat[i, i + 1]
            xcol, ycol = z_mat[:, i], z_mat[:, i + 1]
            if b < 0:
                xcol, ycol = ycol, xcol
            blocks.append((abs(b), xcol, ycol))
            i += 2
        else:
            singles.append(z_mat[:, i])
            i += 1
    blocks.sort(key=lambda blk: -blk[0])
    cols = [c for _, x, y in blocks for c in (x, y)] + singles
    omega = np.column_stack(cols)
    nu = tuple(float(b[0]) for b in blocks)
    canon = np.zeros((n, n))
    for j, v in enumerate(nu):
        canon[2 * j, 2 * j + 1] = v
        canon[2 * j + 1, 2 * j] = -v
    if np.abs(omega.T @ omega - np.eye(n)).max() > 1e-12:
        raise ValueError("change of basis is not orthogonal")
    if np.abs(omega.T @ a_mat @ omega - canon).max() > 1e-10 * scale:
        raise ValueError("canonical form check failed")
    l_first = l[first]
    l_s = tuple(float(l_first @ s) for s in singles)
    return RepData(tuple(float(l[m]) for m in central), nu, omega, len(singles), l_s, a_mat)


def step2_coefficient(alg: StratifiedAlgebra, rep: RepData, mu, mu_p
                      ) -> tuple[GaussianEnvelopeFunction, float]:
    """Coefficient function of the representation in original coordinates, and its L-eigenvalue.

    ``exp(i<lambda,u>) exp(i sum s_h <l,S_h>) prod_j Phi(sqrt(nu_j) x_j, sqrt(nu_j) y_j)``,
    where ``(x, y, s)`` are the first-layer coordinates in the basis ``omega``.
    """
    k = rep.k
    mu, mu_p = _as_multi(mu, k), _as_multi(mu_p, k)
    ring = alg.ring
    gens = ring.gens()
    first = list(alg.first_layer)
    central = [j for j, d in enumerate(alg.degrees) if d == 2]

    def linear(col):
        acc = ring.zero()
        for coef, j in zip(col, first):
            if coef != 0.0:
                acc = acc + gens[j] * float(coef)
        return acc

    coords = [linear(rep.omega[:, c]) for c in range(rep.omega.shape[1])]
    poly = ring.one()
    exponent = ring.zero()
    for m_idx, m in enumerate(central):
        if rep.lam[m_idx] != 0.0:
            exponent = exponent + gens[m] * complex(0.0, rep.lam[m_idx])
    for h, ls in enumerate(rep.l_s):
        if ls != 0.0:
            exponent = exponent + coords[2 * k + h] * complex(0.0, ls)
    for j in range(k):
        root = float(np.sqrt(rep.nu[j]))
        xj, yj = coords[2 * j] * root, coords[2 * j + 1] * root
        phi = special_hermite(mu[j], mu_p[j])
        poly = poly * phi.poly.substitute([xj, yj], target=ring)
        exponent = exponent + phi.exponent.substitute([xj, yj], target=ring)
    lam_mu = sum(v * (2 * m + 1) for v, m in zip(rep.nu, mu)) + sum(v * v for v in rep.l_s)
    return GaussianEnvelopeFunction(poly, exponent), float(lam_mu)


def eigen_residual(h: Polynomial, n: int) -> float:
    """``max|N h - n h| / max|h|`` over coefficients (0 for h = 0)."""
    scale = h.max_abs_coefficient()
    if scale == 0.0:
        return 0.0
    return (apply_N(h) - h * n).max_abs_coefficient() / scale


def step2_generating_hermite(alg: StratifiedAlgebra, rep: RepData, mu, mu_p, n: int,
                             tol: float = 1e-9) -> Polynomial:
    """Float-coefficient eigenvector ``h_n`` from a general step-two representation."""
    phi, lam = step2_coefficient(alg, rep, mu, mu_p)
    h = generating_series(phi, lam, n)
    h = h.chop(1e-14 * max(h.max_abs_coefficient(), 1e-300))
    res = eigen_residual(h, n)
    if res > tol:
        raise EigenToleranceExceeded(f"relative eigen residual {res:.3e} > {tol:.1e}")
    return h
