import math

import numpy as np
import pytest

import minkflow as mf


def test_grid_and_sphere():
    g = mf.Grid(2, 16)
    assert len(g) == 16 * 32
    assert g.nodes().shape == (len(g), 3)
    assert g.weights().sum() == pytest.approx(4 * math.pi, rel=1e-12)
    b = mf.Body.from_shape(g, "sphere(1)")
    assert np.allclose(b.u, 1.0)
    assert b.volume() == pytest.approx(4 * math.pi, rel=1e-12)


def test_entropy_flow_rounds_an_ellipsoid():
    g = mf.Grid(2, 16)
    start = mf.Body.from_shape(g, "ellipsoid(1, 1, 1.5)")
    out = mf.flow(g, 0.0, 1.0, initial=start)
    assert out["status"] == "converged"
    assert out["regime"] == "C"
    assert out["monotonicity_violations"] == 0
    assert np.max(np.abs(out["body"].u - 1.0)) < 2e-3
    assert out["rows"].shape[1] == len(mf.TRAJECTORY_COLUMNS)


def test_lp_round_trip(tmp_path):
    g = mf.Grid(2, 16)
    e = mf.Body.from_shape(g, "ellipsoid(1, 1, 1.3)")
    phi = mf.manufactured_phi(e, 4.0)
    assert mf.lp_residual(e, phi, 4.0) < 1e-12
    sol = mf.lp_solve(4.0, g, phi)
    assert sol["body"].sup_distance(e) < 5e-3
    mf.write_body(sol["body"], str(tmp_path / "s.body"))
    back = mf.read_body(str(tmp_path / "s.body"))
    assert np.array_equal(back.u, sol["body"].u)


def test_verify_and_errors():
    rows = mf.verify(mf.Grid(2, 32), samples=3, checks=["polar", "holder"])
    assert {r["check"] for r in rows} == {"polar", "holder"}
    assert all(r["pass"] for r in rows)
    with pytest.raises(mf.Error, match="alpha = 1 - beta"):
        mf.flow(mf.Grid(2, 16), 0.5, 0.5)
    with pytest.raises(ValueError):
        mf.Body(mf.Grid(2, 16), np.ones(3))
