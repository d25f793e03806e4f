"""Heat-kernel sampling by horizontal random walks and Monte Carlo estimators.

A sample is ``exp(b_1) ... exp(b_M)`` with i.i.d. first-layer increments
``b_m ~ N(0, I / M)``, folded with the step-<=3 BCH formula. Samples are
produced in fixed chunks of :data:`CHUNK`; chunk ``c`` of stream ``s`` draws
from ``SeedSequence(seed, spawn_key=(s, c))``, so a batch depends only on
``(seed, count, walk_steps, stream)`` and never on the worker count.

Set ``CARNOT_MEHLER_WORKERS`` to override the number of sampling threads and
``CARNOT_MEHLER_PURE_PYTHON=1`` to force the NumPy accumulation kernel.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import cos, exp, sin, sqrt
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import GroupPoint, StratifiedAlgebra, dilate, get_group, product_batch
from .poly import Polynomial
from .spectral import moment

if os.environ.get("CARNOT_MEHLER_PURE_PYTHON", "") not in ("", "0"):
    from ._walk_py import accumulate
    BACKEND = "numpy"
else:
    try:
        from ._walk import accumulate
        BACKEND = "compiled"
    except ImportError:
        from ._walk_py import accumulate
        BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "CHUNK",
    "HeatSample",
    "MCEstimate",
    "sample_heat",
    "walk_chunk",
    "mc_expectation",
    "mehler_mc",
    "rotation_invariance_mc",
    "worker_count",
]

CHUNK = 2048


def worker_count() -> int:
    """Threads used for sampling: ``CARNOT_MEHLER_WORKERS`` or the usable CPU count."""
    raw = os.environ.get("CARNOT_MEHLER_WORKERS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


@dataclass(frozen=True)
class HeatSample:
    algebra: StratifiedAlgebra
    coords: np.ndarray
    seed: int
    walk_steps: int
    stream: int = 0

    def __len__(self) -> int:
        return self.coords.shape[0]

    def points(self) -> list[GroupPoint]:
        return [GroupPoint(self.algebra, tuple(float(v) for v in row)) for row in self.coords]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.algebra.names)
            for row in self.coords:
                writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int
    walk_steps: int

    def z_score(self, exact: float) -> float:
        diff = self.value - float(exact)
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else float("inf") * np.sign(diff)
        return diff / self.stderr

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "n_samples": self.n_samples,
                "seed": self.seed, "walk_steps": self.walk_steps}


def walk_chunk(alg: StratifiedAlgebra, n: int, walk_steps: int, rng: np.random.Generator,
               kernel=None) -> np.ndarray:
    """``n`` walk endpoints (shape (n, dim)) from one generator."""
    first = np.asarray(alg.first_layer, dtype=np.int32)
    increments = rng.standard_normal((n, walk_steps, len(first))) * sqrt(1.0 / walk_steps)
    bi, bj, bm, bc = alg._bracket_float
    kernel = kernel or accumulate
    return kernel(np.ascontiguousarray(increments), first, bi, bj, bm, bc, alg.dim, alg.step)


def sample_heat(group: StratifiedAlgebra | str, count: int, seed: int = 42,
                walk_steps: int = 1024, stream: int = 0, kernel=None) -> HeatSample:
    """Approximate samples of the time-one heat kernel ``p(g) dg``."""
    alg = get_group(group) if isinstance(group, str) else group
    if count < 1 or walk_steps < 1:
        raise ValueError("count and walk_steps must be >= 1")
    if alg.step > 3:
        raise ValueError("sampling supports groups of step <= 3")
    sizes = [min(CHUNK, count - start) for start in range(0, count, CHUNK)]

    def run(c: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, c)))
        return walk_chunk(alg, sizes[c], walk_steps, rng, kernel)

    workers = worker_count()
    if workers == 1:
        parts = [run(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    return HeatSample(alg, np.concatenate(parts, axis=0), seed, walk_steps, stream)


def _estimate(values: np.ndarray, sample: HeatSample) -> MCEstimate:
    n = values.shape[0]
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return MCEstimate(mean, std / sqrt(n), n, sample.seed, sample.walk_steps)


def mc_expectation(f: Polynomial, sample: HeatSample) -> MCEstimate:
    """Empirical mean of a real polynomial over the sample."""
    if not f.is_real():
        raise ValueError("mc_expectation needs a real polynomial")
    if f.degree() <= 0:
        return MCEstimate(float(f.constant_term().real), 0.0, len(sample), sample.seed,
                          sample.walk_steps)
    return _estimate(np.real(f.evaluate_batch(sample.coords)), sample)


def mehler_mc(f: Polynomial, t: float, gamma: Sequence[float], count: int, seed: int = 42,
              walk_steps: int = 1024, sample: HeatSample | None = None) -> MCEstimate:
    """Estimate ``T_t f(gamma) = E f(delta_{e^-t} gamma . delta_{sqrt(1 - e^-2t)} g)``."""
    if t < 0:
        raise ValueError("t >= 0")
    alg = f.ring.algebra
    if sample is None:
        sample = sample_heat(alg, count, seed, walk_steps)
    c, s = exp(-t), sqrt(-np.expm1(-2.0 * t))
    base = np.asarray(dilate(c, GroupPoint(alg, tuple(float(v) for v in gamma))).coords, float)
    pts = product_batch(alg, base[None, :], _dilate_rows(alg, sample.coords, s))
    return _estimate(np.real(f.evaluate_batch(pts)), sample)


def _dilate_rows(alg: StratifiedAlgebra, coords: np.ndarray, s: float) -> np.ndarray:
    return coords * np.array([s ** d for d in alg.degrees])


def rotation_invariance_mc(theta: float, panel: Sequence[Polynomial], count: int, seed: int = 42,
                           walk_steps: int = 1024) -> list[dict]:
    """z-scores of ``E P(delta_cos gamma . delta_sin g)`` against the exact moment of each P."""
    if not 0.0 <= theta <= np.pi / 2:
        raise ValueError("theta must lie in [0, pi/2]")
    alg = panel[0].ring.algebra
    gamma = sample_heat(alg, count, seed, walk_steps, stream=0)
    g = sample_heat(alg, count, seed, walk_steps, stream=1)
    pts = product_batch(alg, _dilate_rows(alg, gamma.coords, cos(theta)),
                        _dilate_rows(alg, g.coords, sin(theta)))
    out = []
    for P in panel:
        est = _estimate(np.real(P.evaluate_batch(pts)), gamma)
        exact = moment(P)
        out.append({"polynomial": str(P), "exact": str(exact), "estimate": est.to_dict(),
                    "z": est.z_score(float(exact))})
    return out
