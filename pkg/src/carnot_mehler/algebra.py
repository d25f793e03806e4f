"""Stratified Lie algebras and their groups in exponential coordinates.

A :class:`StratifiedAlgebra` is given by a graded basis ``Z_1..Z_N`` and exact
structure constants ``[Z_i, Z_j] = sum_m c[i,j,m] Z_m``. The simply connected
group is identified with R^N through ``(z_j) -> exp(sum z_j Z_j)``; the group
law is the BCH series truncated at the step, which is exact.

Indices are 0-based in the Python API and 1-based in JSON configuration files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bch import bch_combine
from .errors import (
    AlgebraMismatch,
    AntisymmetryViolation,
    GradingViolation,
    JacobiViolation,
    NotStratified,
    UnknownGroup,
)
from .poly import Polynomial, PolyRing, as_coefficient

__all__ = [
    "StratifiedAlgebra",
    "GroupPoint",
    "validate_algebra",
    "load_algebra",
    "get_group",
    "registered_groups",
    "heisenberg",
    "free_step2",
    "engel",
    "free_step3_rank2",
    "abelian",
    "group_product",
    "inverse",
    "identity",
    "symbolic_product",
    "dilate",
    "homogeneous_dimension",
]


@dataclass(frozen=True, eq=False)
class StratifiedAlgebra:
    """Validated stratified Lie algebra.

    ``brackets`` holds every nonzero ``(i, j, m, c)`` with ``i != j``, in both
    orders. Construct through :func:`validate_algebra` or the builtins.
    """

    name: str
    layer_dims: tuple[int, ...]
    degrees: tuple[int, ...]
    brackets: tuple[tuple[int, int, int, Fraction], ...]
    names: tuple[str, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.degrees)

    @property
    def step(self) -> int:
        return len(self.layer_dims)

    @property
    def first_layer(self) -> tuple[int, ...]:
        return tuple(j for j, d in enumerate(self.degrees) if d == 1)

    @property
    def is_abelian(self) -> bool:
        return not self.brackets

    @cached_property
    def ring(self) -> PolyRing:
        return PolyRing(self.names, self.degrees, self.name, algebra=self)

    @cached_property
    def product_ring(self) -> PolyRing:
        """Ring in 2N variables (coordinates of two points)."""
        names = tuple(f"{n}_1" for n in self.names) + tuple(f"{n}_2" for n in self.names)
        return PolyRing(names, self.degrees + self.degrees, self.name + "^2", algebra=None)

    @cached_property
    def _bracket_float(self):
        if not self.brackets:
            return (np.zeros(0, dtype=np.int32),) * 3 + (np.zeros(0),)
        i, j, m, c = zip(*self.brackets)
        return (np.array(i, dtype=np.int32), np.array(j, dtype=np.int32),
                np.array(m, dtype=np.int32), np.array([float(x) for x in c]))

    def structure_constant(self, i: int, j: int, m: int) -> Fraction:
        for a, b, k, c in self.brackets:
            if (a, b, k) == (i, j, m):
                return c
        return Fraction(0)

    def bracket(self, u: Sequence, v: Sequence) -> list:
        """Bracket of two coordinate vectors (entries: scalars, polynomials or arrays)."""
        out: list = [0] * self.dim
        touched = [False] * self.dim
        for i, j, m, c in self.brackets:
            ui, vj = u[i], v[j]
            if _is_zero(ui) or _is_zero(vj):
                continue
            term = ui * vj * c
            if touched[m]:
                out[m] = out[m] + term
            else:
                out[m] = term
                touched[m] = True
        return out

    def bracket_float(self, u: Sequence, v: Sequence) -> list:
        out: list = [0.0] * self.dim
        for i, j, m, c in self.brackets:
            out[m] = out[m] + u[i] * v[j] * float(c)
        return out

    def basis_vector(self, j: int) -> list[Fraction]:
        v = [Fraction(0)] * self.dim
        v[j] = Fraction(1)
        return v

    def to_config(self) -> dict:
        entries = []
        grouped: dict[tuple[int, int], list] = {}
        for i, j, m, c in self.brackets:
            if i < j:
                grouped.setdefault((i, j), []).append({"m": m + 1, "c": str(c)})
        for (i, j), terms in sorted(grouped.items()):
            entries.append({"i": i + 1, "j": j + 1, "terms": terms})
        return {"name": self.name, "layer_dims": list(self.layer_dims),
                "names": list(self.names), "brackets": entries}

    def __repr__(self):
        return f"StratifiedAlgebra({self.name!r}, layer_dims={self.layer_dims})"


def _is_zero(x) -> bool:
    if isinstance(x, Polynomial):
        return x.is_zero()
    if isinstance(x, np.ndarray):
        return False
    return x == 0


# ---------------------------------------------------------------------------
# validation


def _default_names(layer_dims: Sequence[int]) -> tuple[str, ...]:
    letters = "xyuvwabc"
    names = []
    for h, d in enumerate(layer_dims):
        base = letters[h] if h < len(letters) else f"z{h + 1}_"
        if d == 1:
            names.append(base)
        else:
            names.extend(f"{base}{i + 1}" for i in range(d))
    return tuple(names)


def _rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][col]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / p
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def validate_algebra(config: Mapping) -> StratifiedAlgebra:
    """Build a :class:`StratifiedAlgebra` from a raw table, checking it exactly.

    ``config`` follows the JSON config layout: ``name``, ``layer_dims``,
    optional ``names`` and ``brackets`` (1-based ``i``, ``j``, ``m``; rational
    strings ``"p/q"`` for ``c``). Brackets given only for ``(i, j)`` are
    extended antisymmetrically.
    """
    name = str(config.get("name", "custom"))
    layer_dims = tuple(int(d) for d in config["layer_dims"])
    if not layer_dims or min(layer_dims) < 1:
        raise ValueError("layer_dims must be a nonempty list of positive integers")
    degrees = tuple(h + 1 for h, d in enumerate(layer_dims) for _ in range(d))
    n = len(degrees)
    names = tuple(config.get("names") or _default_names(layer_dims))
    if len(names) != n or len(set(names)) != n:
        raise ValueError("names must be distinct and match the dimension")

    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for entry in config.get("brackets", []):
        i, j = int(entry["i"]) - 1, int(entry["j"]) - 1
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"bracket index out of range: {entry}")
        vec = table.setdefault((i, j), {})
        for term in entry.get("terms", []):
            m = int(term["m"]) - 1
            if not 0 <= m < n:
                raise ValueError(f"bracket target out of range: {entry}")
            c = Fraction(str(term["c"]))
            vec[m] = vec.get(m, Fraction(0)) + c

    # antisymmetry
    full: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (i, j), vec in table.items():
        vec = {m: c for m, c in vec.items() if c}
        if i == j:
            if vec:
                m = next(iter(vec))
                raise AntisymmetryViolation(f"[Z{i + 1}, Z{i + 1}] != 0", (i, i, m))
            continue
        if (j, i) in table:
            other = {m: c for m, c in table[(j, i)].items() if c}
            for m in set(vec) | set(other):
                if vec.get(m, 0) != -other.get(m, 0):
                    raise AntisymmetryViolation(
                        f"c[{i + 1},{j + 1}]^{m + 1} != -c[{j + 1},{i + 1}]^{m + 1}", (i, j, m))
        full[(i, j)] = vec
        full[(j, i)] = {m: -c for m, c in vec.items()}

    # grading
    for (i, j), vec in sorted(full.items()):
        for m in vec:
            if degrees[m] != degrees[i] + degrees[j]:
                raise GradingViolation(
                    f"[Z{i + 1}, Z{j + 1}] has a Z{m + 1} component but "
                    f"deg {degrees[i]} + {degrees[j]} != {degrees[m]}", (i, j, m))

    brackets = tuple(
        (i, j, m, c) for (i, j), vec in sorted(full.items()) for m, c in sorted(vec.items())
    )
    alg = StratifiedAlgebra(name, layer_dims, degrees, brackets, names)

    # Jacobi
    for i, j, k in combinations(range(n), 3):
        if degrees[i] + degrees[j] + degrees[k] > len(layer_dims):
            continue
        ei, ej, ek = (alg.basis_vector(t) for t in (i, j, k))
        s1 = alg.bracket(ei, alg.bracket(ej, ek))
        s2 = alg.bracket(ej, alg.bracket(ek, ei))
        s3 = alg.bracket(ek, alg.bracket(ei, ej))
        if any(a + b + c != 0 for a, b, c in zip(s1, s2, s3)):
            raise JacobiViolation(f"Jacobi identity fails on (Z{i + 1}, Z{j + 1}, Z{k + 1})",
                                  (i, j, k))

    # stratification: [V_1, V_h] spans V_{h+1}
    for h in range(1, len(layer_dims)):
        target = [m for m, d in enumerate(degrees) if d == h + 1]
        rows = []
        for i in (a for a, d in enumerate(degrees) if d == 1):
            for j in (b for b, d in enumerate(degrees) if d == h):
                v = full.get((i, j), {})
                rows.append([v.get(m, Fraction(0)) for m in target])
        if not rows or _rank(rows) < len(target):
            raise NotStratified(f"[V_1, V_{h}] does not span V_{h + 1}", (0, h, h + 1))
    return alg


def load_algebra(path: str | Path) -> StratifiedAlgebra:
    with open(path) as fh:
        return validate_algebra(json.load(fh))


# ---------------------------------------------------------------------------
# builtin groups


def heisenberg(k: int = 1) -> StratifiedAlgebra:
    """H_k with basis X_1, Y_1, ..., X_k, Y_k, U and [X_j, Y_j] = -4U."""
    if k < 1:
        raise ValueError("k >= 1")
    if k == 1:
        names = ["x", "y", "u"]
    else:
        names = [f"{c}{j}" for j in range(1, k + 1) for c in "xy"] + ["u"]
    n = 2 * k + 1
    brackets = [{"i": 2 * j + 1, "j": 2 * j + 2, "terms": [{"m": n, "c": "-4"}]}
                for j in range(k)]
    return validate_algebra({"name": f"h{k}", "layer_dims": [2 * k, 1],
                             "names": names, "brackets": brackets})


def free_step2(n: int = 3) -> StratifiedAlgebra:
    """Free step-2 nilpotent algebra on n generators, [X_i, X_j] = U_ij (i < j)."""
    pairs = list(combinations(range(n), 2))
    names = [f"x{i + 1}" for i in range(n)] + [f"u{i + 1}{j + 1}" for i, j in pairs]
    brackets = [{"i": i + 1, "j": j + 1, "terms": [{"m": n + p + 1, "c": "1"}]}
                for p, (i, j) in enumerate(pairs)]
    return validate_algebra({"name": f"free2-{n}", "layer_dims": [n, len(pairs)],
                             "names": names, "brackets": brackets})


def engel() -> StratifiedAlgebra:
    """Engel algebra: [X1, X2] = Y, [X1, Y] = W (dims 2, 1, 1)."""
    return validate_algebra({
        "name": "engel", "layer_dims": [2, 1, 1], "names": ["x1", "x2", "y", "w"],
        "brackets": [{"i": 1, "j": 2, "terms": [{"m": 3, "c": "1"}]},
                     {"i": 1, "j": 3, "terms": [{"m": 4, "c": "1"}]}],
    })


def free_step3_rank2() -> StratifiedAlgebra:
    """Free step-3 algebra on two generators (dims 2, 1, 2)."""
    return validate_algebra({
        "name": "free3-2", "layer_dims": [2, 1, 2], "names": ["x1", "x2", "y", "w1", "w2"],
        "brackets": [{"i": 1, "j": 2, "terms": [{"m": 3, "c": "1"}]},
                     {"i": 1, "j": 3, "terms": [{"m": 4, "c": "1"}]},
                     {"i": 2, "j": 3, "terms": [{"m": 5, "c": "1"}]}],
    })


def abelian(n: int = 2) -> StratifiedAlgebra:
    names = ["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]
    return validate_algebra({"name": f"r{n}", "layer_dims": [n], "names": names})


_BUILTIN_CACHE: dict[str, StratifiedAlgebra] = {}


def registered_groups() -> list[str]:
    return ["h1", "h2", "free2-3", "engel", "free3-2", "r2"]


def get_group(name: str) -> StratifiedAlgebra:
    """Resolve a builtin name (``h<k>``, ``free2-<n>``, ``engel``, ``free3-2``,
    ``r<n>``) or a path to a JSON config file."""
    if name in _BUILTIN_CACHE:
        return _BUILTIN_CACHE[name]
    alg = None
    if m := re.fullmatch(r"h(\d+)", name):
        alg = heisenberg(int(m.group(1)))
    elif m := re.fullmatch(r"free2-(\d+)", name):
        alg = free_step2(int(m.group(1)))
    elif name == "engel":
        alg = engel()
    elif name == "free3-2":
        alg = free_step3_rank2()
    elif m := re.fullmatch(r"r(\d+)", name):
        alg = abelian(int(m.group(1)))
    elif Path(name).is_file():
        return load_algebra(name)
    if alg is None:
        raise UnknownGroup(f"unknown group {name!r}")
    _BUILTIN_CACHE[name] = alg
    return alg


# ---------------------------------------------------------------------------
# group law


@dataclass(frozen=True)
class GroupPoint:
    """``exp(sum coords[j] Z_j)`` on ``algebra``."""

    algebra: StratifiedAlgebra
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise ValueError("coordinate count does not match the algebra dimension")
        object.__setattr__(self, "coords", tuple(_scalar(c) for c in self.coords))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)

    def __mul__(self, other: "GroupPoint") -> "GroupPoint":
        return group_product(self, other)

    def inverse(self) -> "GroupPoint":
        return inverse(self)

    def __iter__(self):
        return iter(self.coords)


def _scalar(c):
    if isinstance(c, (int, Fraction, str)):
        return Fraction(c)
    return float(c)


def identity(alg: StratifiedAlgebra) -> GroupPoint:
    return GroupPoint(alg, (Fraction(0),) * alg.dim)


def inverse(g: GroupPoint) -> GroupPoint:
    return GroupPoint(g.algebra, tuple(-c for c in g.coords))


def group_product(a: GroupPoint, b: GroupPoint) -> GroupPoint:
    if a.algebra is not b.algebra:
        raise AlgebraMismatch(f"{a.algebra.name} vs {b.algebra.name}")
    alg = a.algebra
    if a.is_exact and b.is_exact:
        coords = bch_combine(a.coords, b.coords, alg.bracket, alg.step)
    else:
        coords = bch_combine([float(x) for x in a.coords], [float(x) for x in b.coords],
                             alg.bracket_float, alg.step, cast=float)
    return GroupPoint(alg, tuple(coords))


def product_batch(alg: StratifiedAlgebra, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Float group product of matching rows of ``a`` and ``b`` (shape (m, N))."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    cols = bch_combine([a[:, j] for j in range(alg.dim)], [b[:, j] for j in range(alg.dim)],
                       alg.bracket_float, alg.step, cast=float)
    return np.stack([np.broadcast_to(c, a.shape[:1]) for c in cols], axis=1)


def symbolic_product(alg: StratifiedAlgebra) -> tuple[Polynomial, ...]:
    """Components of ``exp(sum z1_j Z_j) exp(sum z2_j Z_j)`` as polynomials in 2N variables."""
    hit = alg._cache.get("symbolic_product")
    if hit is None:
        ring = alg.product_ring
        gens = ring.gens()
        n = alg.dim
        hit = tuple(bch_combine(gens[:n], gens[n:], alg.bracket, alg.step))
        hit = tuple(p if isinstance(p, Polynomial) else ring.constant(p) for p in hit)
        alg._cache["symbolic_product"] = hit
    return hit


def dilate(t, obj):
    """Dilation ``delta_t`` of a group point or pull-back ``f o delta_t`` of a polynomial.

    ``t`` may be a scalar or, for polynomials, a formal parameter given as a
    degree-one :class:`Polynomial` in an extended ring.
    """
    if isinstance(obj, GroupPoint):
        t = _scalar(t)
        return GroupPoint(obj.algebra, tuple(c * t ** d for c, d in zip(obj.coords, obj.algebra.degrees)))
    if isinstance(obj, Polynomial):
        ring = obj.ring
        if isinstance(t, Polynomial):
            target = t.ring
            images = [target.var(name) * t ** w for name, w in zip(ring.names, ring.weights)]
            return obj.substitute(images, target=target)
        t = as_coefficient(t)
        return _dilate_numeric(obj, t)
    raise TypeError(f"cannot dilate {type(obj).__name__}")


def _dilate_numeric(f: Polynomial, t) -> Polynomial:
    res = {}
    powers: dict[int, object] = {}
    for e, c in f.terms.items():
        d = f.ring.monomial_degree(e)
        if d not in powers:
            powers[d] = t ** d
        v = c * powers[d]
        if v != 0:
            res[e] = v
    return Polynomial(f.ring, res, _trusted=True)


def homogeneous_dimension(alg: StratifiedAlgebra) -> int:
    return sum((h + 1) * d for h, d in enumerate(alg.layer_dims))
