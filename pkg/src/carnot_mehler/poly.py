"""Sparse multivariate polynomials over the Gaussian rationals.

Coefficients are stored as :class:`fractions.Fraction` when real and as
:class:`GaussianRational` when the imaginary part is nonzero, so that the
(overwhelmingly common) real computations run at plain ``Fraction`` speed.
A polynomial may also carry ``float``/``complex`` coefficients ("float mode");
the same code paths then apply with ordinary floating point arithmetic.

Monomials are dense exponent tuples over a :class:`PolyRing`. Every variable
has an integer weight (its layer index), and the homogeneous degree of
``z**alpha`` is ``sum(alpha[j] * weight[j])``.
"""

from __future__ import annotations

import ast
import itertools
import json
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlgebraMismatch

__all__ = [
    "GaussianRational",
    "I",
    "PolyRing",
    "Polynomial",
    "as_coefficient",
    "coefficient_to_str",
    "parse_coefficient",
    "parse_polynomial",
]


class GaussianRational:
    """Exact element ``re + i*im`` of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # Fraction exposes .real/.imag/.conjugate(); mirror that interface so the
    # two coefficient types can be used interchangeably.
    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def conjugate(self):
        return _gauss(self.re, -self.im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return coefficient_to_str(self)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __neg__(self):
        return _gauss(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return _gauss(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return _gauss(self.re + other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return _gauss(self.re * other.re - self.im * other.im,
                          self.re * other.im + self.im * other.re)
        if isinstance(other, (int, Fraction)):
            return _gauss(self.re * other, self.im * other)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GaussianRational):
            den = other.re * other.re + other.im * other.im
            num = self * other.conjugate()
            return _gauss(Fraction(num.real) / den, Fraction(num.imag) / den)
        if isinstance(other, (int, Fraction)):
            return _gauss(self.re / other, self.im / other)
        if isinstance(other, (float, complex)):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        return GaussianRational(other) / self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Fraction(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out


I = GaussianRational(0, 1)


def _gauss(re, im):
    if im:
        return GaussianRational(re, im)
    return re if isinstance(re, Fraction) else Fraction(re)


def as_coefficient(c):
    """Normalize a scalar to the canonical stored coefficient type."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, GaussianRational):
        return _gauss(c.re, c.im)
    if isinstance(c, (bool, np.bool_)):
        return Fraction(int(c))
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, (float, np.floating)):
        return float(c)
    if isinstance(c, (complex, np.complexfloating)):
        c = complex(c)
        return c.real if c.imag == 0 else c
    if isinstance(c, str):
        return parse_coefficient(c)
    if isinstance(c, numbers.Rational):
        return Fraction(c.numerator, c.denominator)
    raise TypeError(f"unsupported coefficient {c!r}")


def _is_exact(c):
    return isinstance(c, (Fraction, GaussianRational))


def parse_coefficient(text: str, im: str | None = None):
    """Parse rational strings ``"p/q"`` (and an optional imaginary part)."""
    re_part = Fraction(text)
    return _gauss(re_part, Fraction(im) if im is not None else 0)


def coefficient_to_str(c) -> str:
    if isinstance(c, GaussianRational):
        if not c.re:
            return f"{c.im}i" if c.im != 1 else "i"
        sign = "+" if c.im > 0 else "-"
        mag = abs(c.im)
        return f"({c.re}{sign}{'' if mag == 1 else mag}i)"
    if isinstance(c, complex):
        return f"({c.real:.12g}{c.imag:+.12g}i)"
    if isinstance(c, float):
        return f"{c:.12g}"
    return str(c)


@dataclass(frozen=True)
class PolyRing:
    """Variable names and weights of a polynomial ring.

    ``tag`` distinguishes rings with identical variable names built on
    different algebras. ``algebra`` is a back-reference used by the
    differential operators; it does not take part in equality.
    """

    names: tuple[str, ...]
    weights: tuple[int, ...]
    tag: str = ""
    algebra: object = field(default=None, compare=False, repr=False, hash=False)

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r} in ring {self.names}") from None

    def var(self, name_or_index) -> "Polynomial":
        i = name_or_index if isinstance(name_or_index, int) else self.index(name_or_index)
        exp = [0] * self.nvars
        exp[i] = 1
        return Polynomial(self, {tuple(exp): Fraction(1)}, _trusted=True)

    def gens(self) -> tuple["Polynomial", ...]:
        return tuple(self.var(i) for i in range(self.nvars))

    def zero(self) -> "Polynomial":
        return Polynomial(self, {}, _trusted=True)

    def one(self) -> "Polynomial":
        return self.constant(1)

    def constant(self, c) -> "Polynomial":
        c = as_coefficient(c)
        terms = {(0,) * self.nvars: c} if c != 0 else {}
        return Polynomial(self, terms, _trusted=True)

    def extended(self, extra: Sequence[str], weights: Sequence[int] | None = None,
                 tag: str | None = None) -> "PolyRing":
        """Ring with additional variables appended (default weight 0)."""
        w = tuple(weights) if weights is not None else (0,) * len(extra)
        return PolyRing(self.names + tuple(extra), self.weights + w,
                        tag if tag is not None else self.tag + "+" + ",".join(extra))

    def monomial_degree(self, exp: Sequence[int]) -> int:
        return sum(a * w for a, w in zip(exp, self.weights))

    def exponents_of_degree(self, n: int) -> list[tuple[int, ...]]:
        """All exponent vectors of homogeneous degree ``n``, lex-descending.

        Variables of weight 0 are excluded (their degree would be unbounded).
        """
        if n < 0:
            return []
        nv = self.nvars
        out: list[tuple[int, ...]] = []
        cur = [0] * nv

        def rec(j, remaining):
            if j == nv:
                if remaining == 0:
                    out.append(tuple(cur))
                return
            w = self.weights[j]
            if w <= 0:
                cur[j] = 0
                rec(j + 1, remaining)
                return
            for a in range(remaining // w, -1, -1):
                cur[j] = a
                rec(j + 1, remaining - a * w)
            cur[j] = 0

        rec(0, n)
        return out


def _term_sort_key(ring: PolyRing):
    def key(item):
        exp = item[0]
        return (-ring.monomial_degree(exp), tuple(-a for a in exp))
    return key


class Polynomial:
    """Immutable sparse polynomial: ``terms`` maps exponent tuples to coefficients."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: PolyRing, terms: Mapping | None = None, *, _trusted=False):
        self.ring = ring
        self._hash = None
        if _trusted:
            self.terms = terms if terms is not None else {}
            return
        clean = {}
        nv = ring.nvars
        for exp, c in (terms or {}).items():
            exp = tuple(int(a) for a in exp)
            if len(exp) != nv or min(exp, default=0) < 0:
                raise ValueError(f"bad exponent {exp} for ring with {nv} variables")
            c = as_coefficient(c)
            if c != 0:
                clean[exp] = clean.get(exp, 0) + c
        self.terms = {e: c for e, c in clean.items() if c != 0}

    # ---- constructors --------------------------------------------------
    @classmethod
    def monomial(cls, ring: PolyRing, exp: Sequence[int], coeff=1) -> "Polynomial":
        c = as_coefficient(coeff)
        return cls(ring, {tuple(exp): c} if c != 0 else {}, _trusted=True)

    # ---- basic queries -------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.terms.values())

    def is_real(self) -> bool:
        return all(not c.imag for c in self.terms.values())

    def degree(self) -> int:
        """Homogeneous degree (``-1`` for the zero polynomial)."""
        if not self.terms:
            return -1
        return max(self.ring.monomial_degree(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({self.ring.monomial_degree(e) for e in self.terms}) <= 1

    def constant_term(self):
        return self.terms.get((0,) * self.ring.nvars, Fraction(0))

    def coefficient(self, exp: Sequence[int]):
        return self.terms.get(tuple(exp), Fraction(0))

    def sorted_terms(self) -> list[tuple[tuple[int, ...], object]]:
        """Terms in canonical order: degree descending, then lex descending."""
        return sorted(self.terms.items(), key=_term_sort_key(self.ring))

    def max_abs_coefficient(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    # ---- equality ------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational, float, complex)):
            other = as_coefficient(other)
            if other == 0:
                return not self.terms
            return self.terms == {(0,) * self.ring.nvars: other}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    # ---- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise AlgebraMismatch(f"ring mismatch: {self.ring.names} vs {other.ring.names}")
            return other
        return self.ring.constant(other)

    def __add__(self, other):
        if not isinstance(other, (Polynomial, numbers.Number, GaussianRational)):
            return NotImplemented
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        res = dict(big)
        for e, c in small.items():
            v = res.get(e)
            if v is None:
                res[e] = c
            else:
                v = v + c
                if v == 0:
                    del res[e]
                else:
                    res[e] = v
        return Polynomial(self.ring, res, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, (Polynomial, numbers.Number, GaussianRational)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        c = as_coefficient(c)
        if c == 0:
            return self.ring.zero()
        return Polynomial(self.ring, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (numbers.Number, GaussianRational)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        other = self._coerce(other)
        res: dict = {}
        get = res.get
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple([a + b for a, b in zip(e1, e2)])
                v = get(e)
                res[e] = c1 * c2 if v is None else v + c1 * c2
        return Polynomial(self.ring, {e: c for e, c in res.items() if c != 0}, _trusted=True)

    def __rmul__(self, other):
        if isinstance(other, (numbers.Number, GaussianRational)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (numbers.Number, GaussianRational)):
            if isinstance(other, (int, Fraction)):
                return self.scale(Fraction(1) / Fraction(other))
            if isinstance(other, GaussianRational):
                return self.scale(Fraction(1) / other)
            return self.scale(1.0 / other)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "Polynomial":
        return Polynomial(self.ring, {e: c.conjugate() for e, c in self.terms.items()},
                          _trusted=True)

    def real_part(self) -> "Polynomial":
        return Polynomial(self.ring, {e: as_coefficient(c.real) for e, c in self.terms.items()
                                      if c.real != 0}, _trusted=True)

    def imag_part(self) -> "Polynomial":
        return Polynomial(self.ring, {e: as_coefficient(c.imag) for e, c in self.terms.items()
                                      if c.imag != 0}, _trusted=True)

    def to_float(self) -> "Polynomial":
        return Polynomial(self.ring, {e: as_coefficient(complex(c)) for e, c in self.terms.items()},
                          _trusted=True)

    def chop(self, tol: float) -> "Polynomial":
        """Drop float coefficients with modulus below ``tol``."""
        return Polynomial(self.ring, {e: c for e, c in self.terms.items() if abs(complex(c)) > tol},
                          _trusted=True)

    # ---- calculus and composition -------------------------------------
    def diff(self, var) -> "Polynomial":
        i = var if isinstance(var, int) else self.ring.index(var)
        res = {}
        for e, c in self.terms.items():
            a = e[i]
            if a:
                ne = e[:i] + (a - 1,) + e[i + 1:]
                res[ne] = c * a
        return Polynomial(self.ring, res, _trusted=True)

    def scale_variables(self, factors: Sequence) -> "Polynomial":
        """Substitute ``z_j -> factors[j] * z_j`` with scalar factors."""
        res = {}
        for e, c in self.terms.items():
            v = c
            for a, f in zip(e, factors):
                if a:
                    v = v * f ** a
            if v != 0:
                res[e] = v
        return Polynomial(self.ring, res, _trusted=True)

    def substitute(self, assignment: Sequence["Polynomial"] | Mapping[str, "Polynomial"],
                   target: PolyRing | None = None) -> "Polynomial":
        """Compose with ``z_j -> assignment[j]``.

        ``assignment`` is a sequence indexed like the ring variables, or a
        mapping from variable names (unmapped variables map to themselves,
        which requires them to exist in the target ring). All images must live
        in one target ring, which may differ from ``self.ring``.
        """
        if isinstance(assignment, Mapping):
            if target is None:
                first = next(iter(assignment.values()))
                target = first.ring
            seq = []
            for name in self.ring.names:
                if name in assignment:
                    seq.append(assignment[name])
                else:
                    seq.append(target.var(name))
            assignment = seq
        assignment = list(assignment)
        if len(assignment) != self.ring.nvars:
            raise ValueError("assignment must cover every variable")
        if target is None:
            target = next((a.ring for a in assignment if isinstance(a, Polynomial)), self.ring)
        images = [a if isinstance(a, Polynomial) else target.constant(a) for a in assignment]
        for im in images:
            if im.ring != target:
                raise AlgebraMismatch("substitution images live in different rings")
        powers: list[dict[int, Polynomial]] = [{0: target.one(), 1: im} for im in images]

        def power(j, a):
            cache = powers[j]
            if a not in cache:
                cache[a] = power(j, a - 1) * images[j]
            return cache[a]

        acc: dict = {}
        for e, c in self.terms.items():
            term = None
            for j, a in enumerate(e):
                if a:
                    p = power(j, a)
                    term = p if term is None else term * p
            if term is None:
                term = target.one()
            for te, tc in term.terms.items():
                v = acc.get(te)
                acc[te] = tc * c if v is None else v + tc * c
        return Polynomial(target, {e: c for e, c in acc.items() if c != 0}, _trusted=True)

    def embed(self, target: PolyRing) -> "Polynomial":
        """Re-express in a ring containing all of this ring's variable names."""
        idx = [target.index(n) for n in self.ring.names]
        res = {}
        for e, c in self.terms.items():
            ne = [0] * target.nvars
            for j, a in zip(idx, e):
                ne[j] = a
            res[tuple(ne)] = c
        return Polynomial(target, res, _trusted=True)

    def homogeneous_components(self) -> dict[int, "Polynomial"]:
        parts: dict[int, dict] = {}
        for e, c in self.terms.items():
            parts.setdefault(self.ring.monomial_degree(e), {})[e] = c
        return {d: Polynomial(self.ring, t, _trusted=True) for d, t in sorted(parts.items())}

    def homogeneous_part(self, n: int) -> "Polynomial":
        return Polynomial(self.ring, {e: c for e, c in self.terms.items()
                                      if self.ring.monomial_degree(e) == n}, _trusted=True)

    # ---- evaluation ----------------------------------------------------
    def __call__(self, *point):
        """Exact evaluation at a point (sequence of scalars)."""
        if len(point) == 1 and isinstance(point[0], (list, tuple)):
            point = tuple(point[0])
        if len(point) != self.ring.nvars:
            raise ValueError("point dimension mismatch")
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for a, x in zip(e, point):
                if a:
                    v = v * x ** a
            total = total + v
        return total

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Float evaluation at the rows of ``points`` (shape ``(m, nvars)``)."""
        points = np.asarray(points, dtype=float)
        m = points.shape[0]
        complex_out = not self.is_real()
        out = np.zeros(m, dtype=complex if complex_out else float)
        if not self.terms:
            return out
        maxdeg = [0] * self.ring.nvars
        for e in self.terms:
            for j, a in enumerate(e):
                if a > maxdeg[j]:
                    maxdeg[j] = a
        pow_cache: list[list[np.ndarray]] = []
        for j, d in enumerate(maxdeg):
            col = points[:, j]
            pows = [np.ones(m)]
            for _ in range(d):
                pows.append(pows[-1] * col)
            pow_cache.append(pows)
        for e, c in self.sorted_terms():
            term = None
            for j, a in enumerate(e):
                if a:
                    term = pow_cache[j][a] if term is None else term * pow_cache[j][a]
            if term is None:
                term = np.ones(m)
            coef = complex(c) if complex_out else float(c)
            out += coef * term
        return out

    # ---- presentation and serialization ---------------------------------
    def __repr__(self):
        return f"Polynomial({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (n if a == 1 else f"{n}^{a}") for n, a in zip(self.ring.names, e) if a
            )
            cs = coefficient_to_str(c)
            if not mono:
                pieces.append(cs)
            elif c == 1:
                pieces.append(mono)
            elif c == -1:
                pieces.append("-" + mono)
            else:
                pieces.append(f"{cs}*{mono}")
        text = " + ".join(pieces)
        return text.replace("+ -", "- ")

    def to_json_dict(self) -> dict:
        exact = self.is_exact
        terms = []
        for e, c in self.sorted_terms():
            if exact:
                terms.append({"exp": list(e), "re": str(Fraction(c.real)), "im": str(Fraction(c.imag))})
            else:
                z = complex(c)
                terms.append({"exp": list(e), "re": repr(z.real), "im": repr(z.imag)})
        out = {"alg": self.ring.tag, "vars": list(self.ring.names), "terms": terms}
        if not exact:
            out["exact"] = False
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data: Mapping, ring: PolyRing) -> "Polynomial":
        if data.get("alg", ring.tag) != ring.tag:
            raise AlgebraMismatch(f"polynomial for {data.get('alg')!r}, ring is {ring.tag!r}")
        exact = data.get("exact", True)
        terms = {}
        for t in data["terms"]:
            if exact:
                c = parse_coefficient(t["re"], t.get("im", "0"))
            else:
                c = as_coefficient(complex(float(t["re"]), float(t.get("im", 0.0))))
            terms[tuple(t["exp"])] = c
        return cls(ring, terms)

    @classmethod
    def from_json(cls, text: str, ring: PolyRing) -> "Polynomial":
        return cls.from_json_dict(json.loads(text), ring)


def linear_combination(ring: PolyRing, coeffs: Iterable, polys: Iterable[Polynomial]) -> Polynomial:
    acc = ring.zero()
    for c, p in zip(coeffs, polys):
        if c != 0:
            acc = acc + p.scale(c)
    return acc


def all_exponents_up_to(ring: PolyRing, n: int) -> list[tuple[int, ...]]:
    return list(itertools.chain.from_iterable(ring.exponents_of_degree(d) for d in range(n + 1)))


def parse_polynomial(text: str, ring: PolyRing) -> Polynomial:
    """Parse an expression such as ``"x*u - 2*y + 1/2*x^2 + i*u"`` over ``ring``.

    ``^`` and ``**`` both mean power; ``i`` is the imaginary unit unless the
    ring has a variable of that name. Numbers are read exactly.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse polynomial {text!r}") from exc

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return ring.constant(Fraction(str(node.value)))
        if isinstance(node, ast.Name):
            if node.id in ring.names:
                return ring.var(node.id)
            if node.id == "i":
                return ring.constant(I)
            raise ValueError(f"unknown variable {node.id!r}; ring has {list(ring.names)}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if right.degree() > 0:
                    raise ValueError("division by a non-constant")
                return left / right.constant_term()
            if isinstance(node.op, ast.Pow):
                if right.degree() > 0 or right.constant_term() != int(right.constant_term().real):
                    raise ValueError("exponents must be non-negative integers")
                return left ** int(right.constant_term().real)
        raise ValueError(f"unsupported syntax in {text!r}")

    return walk(tree)
