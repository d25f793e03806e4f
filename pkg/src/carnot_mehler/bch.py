"""Baker-Campbell-Hausdorff series for nilpotent Lie algebras.

``log(exp(a) exp(b))`` is computed once in the truncated free associative
algebra on two letters with exact rational coefficients. The homogeneous
degree-``n`` part is a Lie polynomial, so by the Dynkin-Specht-Wever lemma it
equals ``(1/n) * sum_w c_w [w_1, [w_2, [..., w_n]]]``. The resulting table of
(word, coefficient) pairs is evaluated with the bracket of a concrete algebra,
which makes the truncated series exact whenever the algebra is nilpotent of
step <= ``order``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

Word = tuple[int, ...]


def _mul(p: dict[Word, Fraction], q: dict[Word, Fraction], order: int) -> dict[Word, Fraction]:
    out: dict[Word, Fraction] = {}
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            if len(w1) + len(w2) > order:
                continue
            w = w1 + w2
            out[w] = out.get(w, Fraction(0)) + c1 * c2
    return {w: c for w, c in out.items() if c}


@lru_cache(maxsize=None)
def bch_table(order: int) -> tuple[tuple[Word, Fraction], ...]:
    """Right-nested bracket words and weights of the BCH series up to ``order``.

    Letter 0 stands for the left factor ``a``, letter 1 for ``b``. Words whose
    nested bracket vanishes identically (last two letters equal) are dropped.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    exp_a = {(0,) * n: Fraction(1, factorial(n)) for n in range(order + 1)}
    exp_b = {(1,) * n: Fraction(1, factorial(n)) for n in range(order + 1)}
    prod = _mul(exp_a, exp_b, order)
    w_part = {w: c for w, c in prod.items() if w}
    log: dict[Word, Fraction] = {}
    power = dict(w_part)
    for m in range(1, order + 1):
        sign = Fraction((-1) ** (m + 1), m)
        for w, c in power.items():
            log[w] = log.get(w, Fraction(0)) + sign * c
        power = _mul(power, w_part, order)
    table = []
    for w, c in sorted(log.items(), key=lambda item: (len(item[0]), item[0])):
        if not c:
            continue
        n = len(w)
        if n >= 2 and w[-1] == w[-2]:
            continue
        table.append((w, c / n))
    return tuple(table)


def bch_combine(a: Sequence[T], b: Sequence[T], bracket: Callable[[Sequence[T], Sequence[T]], list],
                order: int, cast: Callable = lambda c: c) -> list:
    """Evaluate ``log(exp(a) exp(b))`` given a bracket on coordinate vectors.

    ``a`` and ``b`` are coordinate sequences whose entries support ``+`` and
    multiplication by ``Fraction`` (scalars, polynomials). Pass ``cast=float``
    for floating point data such as numpy arrays.
    """
    letters = (list(a), list(b))
    nested: dict[Word, list] = {}

    def r(word: Word) -> list:
        if len(word) == 1:
            return letters[word[0]]
        hit = nested.get(word)
        if hit is None:
            hit = bracket(letters[word[0]], r(word[1:]))
            nested[word] = hit
        return hit

    out = [x + y for x, y in zip(letters[0], letters[1])]
    for word, c in bch_table(order):
        if len(word) == 1:
            continue
        vec = r(word)
        cc = cast(c)
        out = [o + v * cc for o, v in zip(out, vec)]
    return out
