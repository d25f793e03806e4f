import os
import subprocess
import sys
from math import exp

import numpy as np
import pytest

from carnot_mehler import get_group, moment
from carnot_mehler import _walk_py
from carnot_mehler.sampling import (BACKEND, CHUNK, mc_expectation, mehler_mc,
                                    rotation_invariance_mc, sample_heat, walk_chunk)

H1 = get_group("h1")
x, y, u = H1.ring.gens()


@pytest.fixture(scope="module")
def batch():
    return sample_heat(H1, 60_000, seed=7, walk_steps=256)


def test_compiled_backend_available():
    assert BACKEND == "compiled"


@pytest.mark.parametrize("name", ["h1", "h2", "free2-3", "engel", "free3-2", "r2"])
def test_backends_agree(name):
    from carnot_mehler import _walk

    alg = get_group(name)
    a = walk_chunk(alg, 300, 40, np.random.default_rng(5), _walk.accumulate)
    b = walk_chunk(alg, 300, 40, np.random.default_rng(5), _walk_py.accumulate)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


def test_single_step_walk_is_exact():
    # one step: the endpoint is the Gaussian increment itself
    rng = np.random.default_rng(0)
    out = walk_chunk(H1, 1000, 1, rng)
    assert np.all(out[:, 2] == 0)


def test_two_step_matches_group_law():
    from carnot_mehler.algebra import product_batch

    rng = np.random.default_rng(2)
    inc = rng.standard_normal((50, 2, 2)) / np.sqrt(2)
    first = np.array([0, 1], dtype=np.int32)
    bi, bj, bm, bc = H1._bracket_float
    z = _walk_py.accumulate(inc, first, bi, bj, bm, bc, 3, 2)
    a = np.column_stack([inc[:, 0, :], np.zeros(50)])
    b = np.column_stack([inc[:, 1, :], np.zeros(50)])
    assert np.allclose(z, product_batch(H1, a, b))


def test_determinism_and_workers(monkeypatch):
    monkeypatch.setenv("CARNOT_MEHLER_WORKERS", "1")
    a = sample_heat(H1, CHUNK * 2 + 17, seed=11, walk_steps=16).coords
    monkeypatch.setenv("CARNOT_MEHLER_WORKERS", "3")
    b = sample_heat(H1, CHUNK * 2 + 17, seed=11, walk_steps=16).coords
    assert np.array_equal(a, b)
    c = sample_heat(H1, CHUNK * 2 + 17, seed=12, walk_steps=16).coords
    assert not np.array_equal(a, c)


def test_prefix_stability():
    a = sample_heat(H1, 100, seed=3, walk_steps=8).coords
    b = sample_heat(H1, 5000, seed=3, walk_steps=8).coords
    assert np.array_equal(a, b[:100])


def test_pure_python_switch():
    code = "import carnot_mehler.sampling as s; print(s.BACKEND)"
    env = dict(os.environ, CARNOT_MEHLER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"


def _z(est, exact):
    return abs(est.z_score(float(exact)))


def test_first_layer_and_central_moments(batch):
    for P in (x ** 2, y ** 2, x ** 4, u, u * x * y, x ** 2 * y ** 2):
        assert _z(mc_expectation(P, batch), moment(P)) <= 4
    # walk bias of E[u^2] is 4 (M - 1) / M, far inside the band at this size
    assert _z(mc_expectation(u ** 2, batch), 4) <= 4


def test_constant_expectation(batch):
    est = mc_expectation(H1.ring.constant(3), batch)
    assert est.value == 3.0 and est.stderr == 0.0


def test_stderr_definition(batch):
    est = mc_expectation(x ** 2, batch)
    vals = batch.coords[:, 0] ** 2
    assert est.stderr == pytest.approx(vals.std(ddof=1) / np.sqrt(len(vals)))


def test_mehler_mc(batch):
    est = mehler_mc(x, 0.7, (2.0, 1.0, 1.0), 0, sample=batch)
    assert _z(est, 2 * exp(-0.7)) <= 4
    est = mehler_mc(x * u - y * 2, 0.5, (1, 1, 1), 0, sample=batch)
    assert _z(est, -exp(-1.5)) <= 4
    est = mehler_mc(u ** 2, 20.0, (1, 1, 1), 0, sample=batch)
    assert _z(est, 4) <= 4


def test_rotation_invariance_mc():
    rows = rotation_invariance_mc(np.pi / 4, [u ** 2, x ** 2, x * y], 30_000, 5, 128)
    assert all(abs(r["z"]) <= 4 for r in rows)
    for theta in (0.0, np.pi / 2):
        rows = rotation_invariance_mc(theta, [x ** 2], 10_000, 5, 64)
        assert abs(rows[0]["z"]) <= 4
    with pytest.raises(ValueError):
        rotation_invariance_mc(2.0, [x], 10, 1, 4)


def test_csv_export(tmp_path):
    s = sample_heat(get_group("engel"), 10, seed=1, walk_steps=4)
    path = tmp_path / "s.csv"
    s.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,x2,y,w"
    assert np.allclose(np.loadtxt(path, delimiter=",", skiprows=1), s.coords, rtol=0, atol=0)


def test_points_are_group_points():
    s = sample_heat(H1, 3, seed=1, walk_steps=4)
    pts = s.points()
    assert len(pts) == 3 and not pts[0].is_exact
