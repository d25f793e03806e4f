"""Verification suites and report rendering.

The exact suite aggregates the identities of the exact layer (group law,
operators, eigenbasis, measure). The Monte Carlo suite compares the sampler
and the heat kernel against the exact moment oracle. Each check yields one
:class:`ReportItem`; a report passes when every item does.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import exp, pi
from typing import Iterable

import numpy as np

from .algebra import GroupPoint, StratifiedAlgebra, dilate, group_product
from .diffops import apply_dilation_generator, apply_N, apply_sublaplacian, horizontal_fields
from .errors import DegenerateGram
from .poly import Polynomial, PolyRing, coefficient_to_str
from .spectral import (asymmetry_witness, check_energy_identities, check_intertwining,
                       check_rotation_identity, hermite_basis, mehler_poly, moment, monomial_basis,
                       poincare_gap)

__all__ = [
    "ReportItem",
    "Report",
    "random_real_polynomials",
    "exact_suite",
    "mc_suite",
    "report_render",
    "H1_PANEL",
]

CIRCLE = (Fraction(3, 5), Fraction(4, 5))
CIRCLE2 = (Fraction(5, 13), Fraction(12, 13))
Z_LIMIT = 4.0
H1_PANEL = ("x^2", "x^4", "y^2", "u^2", "x^2*y^2", "u*x*y", "x^6")


@dataclass(frozen=True)
class ReportItem:
    identity: str
    group: str
    input: str
    lhs: str
    rhs: str
    equal: bool
    paper_ref: str
    degree: int | None = None
    extra: dict = field(default_factory=dict)

    def sort_key(self):
        return (self.group, self.identity, -1 if self.degree is None else self.degree, self.input)


@dataclass
class Report:
    items: list[ReportItem] = field(default_factory=list)

    def add(self, item: ReportItem) -> None:
        self.items.append(item)

    def extend(self, items: Iterable[ReportItem]) -> None:
        self.items.extend(items)

    @property
    def passed(self) -> bool:
        return all(it.equal for it in self.items)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self) -> dict:
        items = sorted(self.items, key=ReportItem.sort_key)
        return {"passed": self.passed, "n_items": len(items),
                "n_failed": sum(not it.equal for it in items),
                "items": [asdict(it) for it in items]}

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls([ReportItem(**it) for it in data.get("items", [])])


def report_render(report: Report, fmt: str = "json") -> str:
    """Deterministic rendering, ordered by (group, identity, degree)."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = []
    for it in sorted(report.items, key=ReportItem.sort_key):
        deg = "" if it.degree is None else f" deg={it.degree}"
        status = "PASS" if it.equal else "FAIL"
        line = f"{status} {it.group} {it.identity}{deg} [{it.input}]"
        if not it.equal or it.extra:
            line += f" lhs={it.lhs} rhs={it.rhs}"
        for key in sorted(it.extra):
            line += f" {key}={it.extra[key]}"
        lines.append(line)
    total = len(report.items)
    failed = sum(not it.equal for it in report.items)
    lines.append(f"{total - failed}/{total} passed")
    return "\n".join(lines)


def random_real_polynomials(alg: StratifiedAlgebra, count: int, max_degree: int, seed: int,
                            terms: int = 6) -> list[Polynomial]:
    """Seeded panel of real polynomials with small rational coefficients."""
    rng = np.random.default_rng(seed)
    ring = alg.ring
    exps = [e for d in range(max_degree + 1) for e in ring.exponents_of_degree(d)]
    out = []
    for _ in range(count):
        picks = rng.choice(len(exps), size=min(terms, len(exps)), replace=False)
        poly_terms = {}
        for p in sorted(picks):
            num = int(rng.integers(-5, 6)) or 1
            den = int(rng.integers(1, 4))
            poly_terms[exps[p]] = Fraction(num, den)
        out.append(Polynomial(ring, poly_terms))
    return out


def _random_points(alg: StratifiedAlgebra, count: int, seed: int) -> list[GroupPoint]:
    rng = np.random.default_rng(seed)
    return [GroupPoint(alg, tuple(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5)))
                                  for _ in range(alg.dim))) for _ in range(count)]


def _monomials_up_to(alg: StratifiedAlgebra, n: int) -> dict[int, list[Polynomial]]:
    return {d: monomial_basis(alg, d) for d in range(n + 1)}


def _first_mismatch(pairs) -> tuple[bool, str, str, str]:
    """``pairs`` yields (input, lhs, rhs); returns (ok, input, lhs, rhs) for the first failure."""
    count = 0
    for inp, lhs, rhs in pairs:
        count += 1
        if lhs != rhs:
            return False, str(inp), str(lhs), str(rhs)
    return True, f"{count} cases", "equal", "equal"


def _item(identity, alg, degree, result, ref, extra=None) -> ReportItem:
    ok, inp, lhs, rhs = result
    return ReportItem(identity, alg.name, inp, lhs, rhs, ok, ref, degree, extra or {})


def _group_law_items(alg: StratifiedAlgebra, seed: int) -> list[ReportItem]:
    pts = _random_points(alg, 60, seed)
    triples = [pts[i:i + 3] for i in range(0, 60, 3)]

    def assoc():
        for a, b, c in triples:
            yield (a.coords, b.coords, c.coords), (a * b) * c, a * (b * c)

    def automorphism():
        for a, b, c in triples:
            t = c.coords[0] or Fraction(1, 2)
            yield (t, a.coords, b.coords), dilate(t, group_product(a, b)), \
                group_product(dilate(t, a), dilate(t, b))

    return [_item("group associativity", alg, None, _first_mismatch(assoc()),
                  "the group law is associative"),
            _item("dilation is an automorphism", alg, None, _first_mismatch(automorphism()),
                  "delta_t(ab) = delta_t(a) delta_t(b)")]


def _operator_items(alg: StratifiedAlgebra, max_degree: int, seed: int) -> list[ReportItem]:
    items = []
    ring = alg.ring
    formal = ring.extended(["t"])
    t = formal.var("t")
    for d, monos in _monomials_up_to(alg, max_degree).items():
        def commutator():
            for m in monos:
                lm = apply_sublaplacian(m)
                yield m, apply_sublaplacian(apply_dilation_generator(m)) - \
                    apply_dilation_generator(lm), lm * 2

        def methods():
            for m in monos:
                yield m, apply_dilation_generator(m, "grading"), \
                    apply_dilation_generator(m, "vector_field")

        def grading():
            for m in monos:
                lm = apply_sublaplacian(m)
                yield m, sorted(lm.homogeneous_components()), [d - 2] if d >= 2 and lm else []

        def scaling():
            for m in monos:
                yield m, _l_formal(dilate(t, m), alg, formal), \
                    dilate(t, apply_sublaplacian(m)) * t ** 2

        items.append(_item("commutator [L,A]=2L", alg, d, _first_mismatch(commutator()),
                           "L and A commute up to 2L"))
        items.append(_item("dilation generator methods agree", alg, d, _first_mismatch(methods()),
                           "grading form of A equals its vector-field form"))
        items.append(_item("L lowers degree by 2", alg, d, _first_mismatch(grading()),
                           "L maps P_n into P_(n-2)"))
        items.append(_item("L scales by t^2 under dilation", alg, d, _first_mismatch(scaling()),
                           "L(f o delta_t) = t^2 (Lf) o delta_t"))
    polys = random_real_polynomials(alg, 10, min(max_degree, 4), seed)

    def derivation():
        for X in horizontal_fields(alg):
            for f, g in zip(polys[::2], polys[1::2]):
                yield (str(X), str(f), str(g)), X(f * g), X(f) * g + f * X(g)

    items.append(_item("left-invariant fields are derivations", alg, None,
                       _first_mismatch(derivation()), "X(fg) = X(f) g + f X(g)"))
    return items


def _l_formal(f: Polynomial, alg: StratifiedAlgebra, formal: PolyRing) -> Polynomial:
    """Apply L to a polynomial whose coefficients involve the extra formal variable ``t``."""
    n = alg.dim
    out = formal.zero()
    by_t: dict[int, dict] = {}
    for e, c in f.terms.items():
        by_t.setdefault(e[n], {})[e[:n]] = c
    for k, terms in by_t.items():
        lf = apply_sublaplacian(Polynomial(alg.ring, terms))
        out = out + lf.embed(formal) * formal.var("t") ** k
    return out


def _spectral_items(alg: StratifiedAlgebra, max_degree: int, seed: int,
                    eigen_degree: int) -> list[ReportItem]:
    items = []
    c, s = CIRCLE
    for n in range(eigen_degree + 1):
        basis = hermite_basis(alg, n)

        def eigen():
            for h in basis:
                yield h, apply_N(h), h * n

        def decay():
            for h in basis:
                yield h, mehler_poly(h, circle=CIRCLE), h * c ** n

        items.append(_item("eigen N h = n h", alg, n, _first_mismatch(eigen()),
                           "generalized Hermite polynomials diagonalize N"))
        items.append(_item("Mehler eigen decay", alg, n, _first_mismatch(decay()),
                           "T h = c^n h on E_n"))
    for d, monos in _monomials_up_to(alg, max_degree).items():
        def rotation():
            for m in monos:
                res = check_rotation_identity(m, c, s)
                yield m, res.lhs, res.rhs

        def intertwining():
            for m in monos:
                for t in (2, 3):
                    rep = check_intertwining(m, c, s, t, strict=False)
                    yield (str(m), t), (rep.rotation_lhs, rep.scaling_lhs), \
                        (rep.rotation_rhs, rep.scaling_rhs)

        items.append(_item("rotation invariance", alg, d, _first_mismatch(rotation()),
                           "(delta_c gamma) (delta_s g) has the law of g"))
        items.append(_item("intertwining", alg, d, _first_mismatch(intertwining()),
                           "heat and Mehler operators intertwine under dilation"))
    return items


def _measure_items(alg: StratifiedAlgebra, seed: int, panel_degree: int) -> list[ReportItem]:
    items = []
    one = alg.ring.one()
    items.append(_item("moment of 1", alg, 0, (moment(one) == 1, "1", str(moment(one)), "1"),
                       "p dg is a probability measure"))
    panel = random_real_polynomials(alg, 20, panel_degree, seed)

    def energy():
        for f in panel:
            rep = check_energy_identities(f, strict=False)
            yield f, (rep.invariance, rep.energy_lhs), (0, rep.energy_rhs)

    def composition():
        for f in panel:
            two = mehler_poly(mehler_poly(f, circle=CIRCLE), circle=CIRCLE2)
            yield f, two, mehler_poly(f, decay=CIRCLE[0] * CIRCLE2[0])

    def contraction():
        for f in panel:
            tf = mehler_poly(f, circle=CIRCLE)
            lhs, rhs = moment(tf * tf), moment(f * f)
            yield f, lhs <= rhs, True

    def invariance():
        for f in panel:
            yield f, moment(mehler_poly(f, circle=CIRCLE)), moment(f)

    def long_time():
        for f in panel:
            yield f, mehler_poly(f, circle=(0, 1)), alg.ring.constant(moment(f))

    items.append(_item("energy identities", alg, None, _first_mismatch(energy()),
                       "mean of Nf vanishes and the mean of f Nf is the Dirichlet energy"))
    items.append(_item("Mehler semigroup composition", alg, None, _first_mismatch(composition()),
                       "T_(c1) T_(c2) = T_(c1 c2)"))
    items.append(_item("L2 contraction", alg, None, _first_mismatch(contraction()),
                       "Mehler operators contract L2(p)"))
    items.append(_item("invariant measure", alg, None, _first_mismatch(invariance()),
                       "p dg is invariant under the Mehler semigroup"))
    items.append(_item("long-time limit", alg, None, _first_mismatch(long_time()),
                       "T_t f tends to the mean of f"))
    return items


def _structure_items(alg: StratifiedAlgebra, witness_degree: int,
                     poincare_degree: int) -> list[ReportItem]:
    items = []
    w = asymmetry_witness(alg, witness_degree)
    expect = not alg.is_abelian
    if w is None:
        inp, lhs, rhs = "none found", "-", "-"
    else:
        inp, lhs, rhs = f"f={w.f}, h={w.h}", coefficient_to_str(w.nf_h), coefficient_to_str(w.f_nh)
    items.append(ReportItem("N is not symmetric", alg.name, inp, lhs, rhs,
                            (w is not None) == expect, "asymmetry witness for <Nf,h>",
                            witness_degree, {"expected_witness": expect}))
    try:
        rep = poincare_gap(alg, poincare_degree)
        ok = 0.0 < rep.min_quotient <= 1.0 + 1e-9
        items.append(ReportItem("Poincare bound on polynomials", alg.name,
                                f"B_{poincare_degree}", repr(rep.min_quotient), "(0, 1]", ok,
                                "Dirichlet energy controls the variance", poincare_degree,
                                {"dimension": rep.dimension}))
    except DegenerateGram as exc:
        items.append(ReportItem("Poincare bound on polynomials", alg.name,
                                f"B_{poincare_degree}", str(exc), "(0, 1]", False,
                                "Dirichlet energy controls the variance", poincare_degree))
    return items


def exact_suite(alg: StratifiedAlgebra, max_degree: int = 6, seed: int = 42,
                eigen_degree: int | None = None) -> Report:
    """All exact identities up to ``max_degree``."""
    report = Report()
    eigen_degree = max_degree if eigen_degree is None else eigen_degree
    report.extend(_group_law_items(alg, seed))
    report.extend(_operator_items(alg, max_degree, seed))
    report.extend(_spectral_items(alg, max_degree, seed, eigen_degree))
    report.extend(_measure_items(alg, seed, min(max_degree, 5)))
    report.extend(_structure_items(alg, min(max_degree, 4), min(max_degree, 4)))
    return report


def _mc_item(identity: str, alg: StratifiedAlgebra, inp: str, est, exact: float, ref: str,
             degree: int | None = None) -> ReportItem:
    z = est.z_score(exact)
    return ReportItem(identity, alg.name, inp, repr(est.value), repr(float(exact)),
                      abs(z) <= Z_LIMIT, ref, degree,
                      {"z": round(z, 6), "stderr": est.stderr, "seed": est.seed,
                       "n_samples": est.n_samples, "walk_steps": est.walk_steps})


def _default_panel(alg: StratifiedAlgebra) -> list[Polynomial]:
    from .poly import parse_polynomial

    if alg.name == "h1":
        return [parse_polynomial(p, alg.ring) for p in H1_PANEL]
    gens = alg.ring.gens()
    first = [gens[j] for j in alg.first_layer]
    panel = [g * g for g in gens] + [first[0] ** 4, first[0] ** 6]
    if len(first) > 1:
        panel.append(first[0] ** 2 * first[1] ** 2)
    return panel


def mc_suite(alg: StratifiedAlgebra, samples: int = 1_000_000, steps: int = 1024,
             seed: int = 42) -> Report:
    """Sampler, Mehler Monte Carlo and (on H_k) kernel checks."""
    from .kernel import KernelEvaluator, box_probability, kernel_eval, normalization_integral, \
        pde_residual, scaling_residual
    from .sampling import mc_expectation, mehler_mc, rotation_invariance_mc, sample_heat

    report = Report()
    batch = sample_heat(alg, samples, seed, steps)
    for P in _default_panel(alg):
        report.add(_mc_item("sampler moment", alg, str(P), mc_expectation(P, batch),
                            float(moment(P)), "heat-kernel moments", P.degree()))
    gamma = tuple(1.0 for _ in range(alg.dim))
    for n in (1, 2, 3):
        h = next(b for b in hermite_basis(alg, n) if b.is_real())
        exact_at_gamma = float(h(*[Fraction(1)] * alg.dim).real)
        for t in (0.25, 0.5, 1.0):
            est = mehler_mc(h, t, gamma, samples, seed, steps, sample=batch)
            report.add(_mc_item("Mehler decay e^(-nt)", alg, f"h={h}, t={t}", est,
                                exp(-n * t) * exact_at_gamma, "T_t h = e^(-nt) h on E_n", n))
    for theta in (0.0, pi / 4, pi / 2):
        small = min(samples, 200_000)
        for row in rotation_invariance_mc(theta, _default_panel(alg)[:4], small, seed, steps):
            est = row["estimate"]
            report.add(ReportItem("rotation invariance (MC)", alg.name,
                                  f"P={row['polynomial']}, theta={theta:.6f}", repr(est["value"]),
                                  row["exact"], abs(row["z"]) <= Z_LIMIT,
                                  "(delta_c gamma) (delta_s g) has the law of g", None,
                                  {"z": round(row["z"], 6), "stderr": est["stderr"],
                                   "seed": est["seed"], "n_samples": est["n_samples"],
                                   "walk_steps": est["walk_steps"]}))
    heis = alg.step == 2 and alg.layer_dims[1] == 1 and alg.layer_dims[0] % 2 == 0 and \
        alg.layer_dims[0] >= 2 and not alg.is_abelian
    if heis:
        report.extend(_kernel_items(alg, batch, KernelEvaluator(alg), kernel_eval,
                                    normalization_integral, pde_residual, scaling_residual,
                                    box_probability))
    return report


def _kernel_items(alg, batch, ev, kernel_eval, normalization_integral, pde_residual,
                  scaling_residual, box_probability) -> list[ReportItem]:
    items = []
    dim = alg.dim
    origin = np.zeros(dim)
    k = ev.k
    # p(0) = c_k int a(s)^k ds over R, closed form for k = 1
    if k == 1:
        p0 = kernel_eval(origin, ev)
        items.append(ReportItem("kernel at identity", alg.name, "p(0)", repr(p0), repr(1 / 16),
                                abs(p0 - 1 / 16) <= 1e-6, "p(0) = 1/16 on H_1", None))
    total = normalization_integral(ev)
    items.append(ReportItem("kernel normalization", alg.name, "int p", repr(total), "1.0",
                            abs(total - 1.0) <= 1e-4, "p is a probability density", None))
    grid = np.array(np.meshgrid(*[[-1.0, 0.0, 1.0]] * dim, indexing="ij")).reshape(dim, -1).T
    res = float(np.max(pde_residual(grid, ev)))
    items.append(ReportItem("kernel PDE residual", alg.name, f"{len(grid)} points in [-1,1]^{dim}",
                            repr(res), "< 1e-6", res < 1e-6, "(L - Q - A) p = 0", None))
    point = np.ones((1, dim))
    sres = float(scaling_residual(point, 4.0, ev)[0])
    items.append(ReportItem("kernel scaling residual", alg.name, "t=4, g=(1,...,1)", repr(sres),
                            "< 1e-8", sres < 1e-8, "p_t = t^(-Q/2) p o delta_(1/sqrt t)", None))
    sym_pts = np.random.default_rng(0).normal(size=(5, dim))
    sym = float(np.max(np.abs(kernel_eval(sym_pts, ev) - kernel_eval(-sym_pts, ev))))
    items.append(ReportItem("kernel symmetry", alg.name, "5 random points", repr(sym), "< 1e-10",
                            sym < 1e-10, "p(g) = p(g^-1)", None))
    probes = [origin, np.eye(dim)[0], np.eye(dim)[-1], 0.5 * np.ones(dim) * (-1) ** np.arange(dim),
              -np.ones(dim)]
    half = 0.2
    n = len(batch)
    for c in probes:
        kern = box_probability(c, half, ev)
        inside = float(np.mean(np.all(np.abs(batch.coords - c) <= half, axis=1)))
        se = float(np.sqrt(max(inside * (1 - inside), kern * (1 - kern)) / n))
        z = (inside - kern) / se
        items.append(ReportItem("kernel/sampler box probability", alg.name,
                                "center=" + ",".join(f"{v:g}" for v in c), repr(inside),
                                repr(kern), abs(z) <= Z_LIMIT, "walk law matches the kernel",
                                None, {"z": round(z, 6), "stderr": se, "seed": batch.seed,
                                       "n_samples": n, "walk_steps": batch.walk_steps,
                                       "half_width": half}))
    return items
