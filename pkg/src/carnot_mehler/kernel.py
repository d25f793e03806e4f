"""Heat kernel of the Heisenberg groups H_k (float mode).

With ``R = sum_j (x_j^2 + y_j^2)``, ``a(s) = 2s / sinh 2s`` and
``b(s) = s / tanh 2s`` the time-one kernel is the cosine transform

    p(x, y, u) = 2 c_k int_0^inf cos(s u) a(s)^k exp(-b(s) R) ds,
    c_k = (2 pi)^{-(k+1)}.

The integrand is even in ``s``, so only the half line is integrated, with
the double-exponential rule of :func:`scipy.integrate.tanhsinh` on
``[0, cutoff]``. The cutoff comes from the bound ``a(s) <= 4 s exp(-2 s)``
and is chosen so the discarded tail is below ``1e-3 * tol``.

Spatial derivatives are taken under the integral sign. For ``L = -sum X_j^2 + Y_j^2``
with ``X_j = d_xj + 2 y_j d_u`` and ``Y_j = d_yj - 2 x_j d_u`` the mixed
``d_x d_u`` terms cancel, and ``b^2 - s^2 = a^2 / 4``, so

    (L - Q - A) p = 2 c_k int_0^inf a^k exp(-bR) [cos(su) (4kb - a^2 R + 2bR - Q)
                                                  + 2 s u sin(su)] ds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log, pi

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import tanhsinh
from scipy.special import gammaln

from .algebra import StratifiedAlgebra, get_group
from .errors import TruncationInsufficient

__all__ = [
    "KernelEvaluator",
    "kernel_eval",
    "pde_residual",
    "scaling_residual",
    "pde_and_scaling_residuals",
    "normalization_integral",
    "box_probability",
]

_MAX_CUTOFF = 340.0


def _profile(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``a(s) = 2s/sinh 2s`` and ``b(s) = s/tanh 2s``, stable at 0 and for large s."""
    s = np.asarray(s, dtype=float)
    w = 2.0 * np.abs(s)
    small = w < 1e-4
    e = np.exp(-w)
    e2 = e * e
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(small, 1.0 - w * w / 6.0, 2.0 * w * e / (-np.expm1(-2.0 * w)))
        b = np.where(small, 0.5 + w * w / 6.0, 0.5 * w * (1.0 + e2) / (-np.expm1(-2.0 * w)))
    return a, b


@dataclass
class KernelEvaluator:
    """Quadrature settings for the H_k heat kernel.

    ``cutoff`` may be fixed by hand; by default it is derived per call from
    the tail bound. ``max_level`` is the tanh-sinh refinement limit.
    """

    group: StratifiedAlgebra = field(default_factory=lambda: get_group("h1"))
    cutoff: float | None = None
    max_level: int = 12
    tol: float = 1e-12

    def __post_init__(self):
        alg = self.group
        if alg.step != 2 or alg.layer_dims[1] != 1 or alg.layer_dims[0] % 2:
            raise ValueError(f"kernel evaluation needs a Heisenberg group, got {alg.name}")
        self.k = alg.layer_dims[0] // 2
        self.Q = 2 * self.k + 2
        self.c_k = (2 * pi) ** (-(self.k + 1))

    def tail_cutoff(self, weight: float = 1.0) -> float:
        """Smallest ``S`` with ``weight * int_S^inf (4s)^k (1+s)^2 exp(-2ks) ds < 1e-3 tol``."""
        if self.cutoff is not None:
            return self.cutoff
        k = self.k
        target = log(1e-3 * self.tol) - log(max(weight, 1.0)) - log(2 * self.c_k)
        s = 1.0
        while s < _MAX_CUTOFF:
            # tail <= (4s)^k (1+s)^2 exp(-2ks) / (2k - (k+2)/s) for s > (k+2)/(2k)
            slope = 2 * k - (k + 2) / s
            if slope > 0:
                bound = k * log(4 * s) + 2 * log(1 + s) - 2 * k * s - log(slope)
                if bound < target:
                    return s
            s *= 1.05
        raise TruncationInsufficient(f"no cutoff below {_MAX_CUTOFF} meets tol {self.tol:g}")

    def _integrate(self, integrand, args: tuple, weight: float) -> np.ndarray:
        cutoff = self.tail_cutoff(weight)
        res = tanhsinh(integrand, 0.0, cutoff, args=args, atol=1e-3 * self.tol,
                       rtol=1e-14, maxlevel=self.max_level)
        bad = (res.status != 0) & (res.error > self.tol)
        if np.any(bad):
            raise TruncationInsufficient(
                f"quadrature did not converge at {int(bad.sum())} point(s); max error "
                f"{float(np.max(res.error)):.3e}")
        return 2.0 * self.c_k * np.asarray(res.integral)

    def split(self, points) -> tuple[np.ndarray, np.ndarray]:
        """``(R, u)`` for an array of points of shape (..., 2k+1)."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != 2 * self.k + 1:
            raise ValueError(f"points must have {2 * self.k + 1} coordinates")
        return np.sum(pts[..., :-1] ** 2, axis=-1), pts[..., -1]

    def density_radial(self, R, u, t: float = 1.0) -> np.ndarray:
        """``p_t`` as a function of ``R = |first layer|^2`` and ``u``."""
        R, u = np.broadcast_arrays(np.asarray(R, dtype=float), np.asarray(u, dtype=float))
        k = self.k

        def f(s, R, u):
            a, b = _profile(s * t)
            return np.cos(s * u) * a ** k * np.exp(-b * R / t)

        return self._integrate(f, (R, u), 1.0) * t ** (-k)

    def __call__(self, points, t: float = 1.0) -> np.ndarray:
        R, u = self.split(points)
        return self.density_radial(R, u, t)


def kernel_eval(points, evaluator: KernelEvaluator | None = None, t: float = 1.0):
    """Heat kernel ``p_t`` at one point (returns float) or a batch (returns array)."""
    ev = evaluator or KernelEvaluator()
    pts = np.asarray(points, dtype=float)
    out = ev(pts, t)
    return float(out) if pts.ndim == 1 else out


def pde_residual(points, evaluator: KernelEvaluator | None = None) -> np.ndarray:
    """``|(L - Q - A) p|`` at the given points, from one combined integrand."""
    ev = evaluator or KernelEvaluator()
    R, u = ev.split(points)
    k, Q = ev.k, ev.Q

    def f(s, R, u):
        a, b = _profile(s)
        env = a ** k * np.exp(-b * R)
        return env * (np.cos(s * u) * (4 * k * b - a * a * R + 2 * b * R - Q)
                      + 2 * s * u * np.sin(s * u))

    weight = float(np.max(4 * k + 3 * R + Q + 2 * np.abs(u), initial=1.0))
    return np.abs(ev._integrate(f, (R, u), weight))


def scaling_residual(points, t: float, evaluator: KernelEvaluator | None = None) -> np.ndarray:
    """``|p_t(g) - t^{-Q/2} p(delta_{1/sqrt t} g)|``; both sides from separate quadratures."""
    ev = evaluator or KernelEvaluator()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    direct = ev(pts, t)
    scaled = pts.copy()
    scaled[:, :-1] /= np.sqrt(t)
    scaled[:, -1] /= t
    return np.abs(direct - t ** (-ev.Q / 2) * ev(scaled))


def pde_and_scaling_residuals(point, t: float, evaluator: KernelEvaluator | None = None
                              ) -> tuple[float, float]:
    ev = evaluator or KernelEvaluator()
    pt = np.asarray(point, dtype=float)[None, :]
    return float(pde_residual(pt, ev)[0]), float(scaling_residual(pt, t, ev)[0])


def _panels(lo: float, hi: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def normalization_integral(evaluator: KernelEvaluator | None = None, radius2: float = 40.0,
                           u_max: float = 24.0, panels: tuple[int, int] = (8, 16),
                           order: int = 12) -> float:
    """``int p`` over ``{R <= radius2} x [-u_max, u_max]`` by tensor Gauss-Legendre.

    ``p`` depends on the first layer only through ``R``; the volume element
    there is ``pi^k R^{k-1} / (k-1)! dR``.
    """
    ev = evaluator or KernelEvaluator()
    k = ev.k
    r_nodes, r_w = _panels(0.0, radius2, panels[0], order)
    u_nodes, u_w = _panels(0.0, u_max, panels[1], order)
    R, U = np.meshgrid(r_nodes, u_nodes, indexing="ij")
    dens = ev.density_radial(R, U)
    shell = np.exp(k * log(pi) + (k - 1) * np.log(r_nodes) - gammaln(k))
    return float(2.0 * np.einsum("i,j,ij->", r_w * shell, u_w, dens))


def box_probability(center, half_width, evaluator: KernelEvaluator | None = None,
                    order: int = 6) -> float:
    """``int p`` over the axis-aligned box ``center +- half_width`` (tensor Gauss-Legendre)."""
    ev = evaluator or KernelEvaluator()
    center = np.asarray(center, dtype=float)
    hw = np.broadcast_to(np.asarray(half_width, dtype=float), center.shape)
    x, w = leggauss(order)
    grids = np.meshgrid(*[c + h * x for c, h in zip(center, hw)], indexing="ij")
    weights = np.ones_like(grids[0])
    for axis, h in enumerate(hw):
        shape = [1] * len(hw)
        shape[axis] = order
        weights = weights * (h * w).reshape(shape)
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return float(np.sum(weights.ravel() * ev(pts)))
