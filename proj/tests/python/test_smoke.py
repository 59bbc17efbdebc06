import math

import numpy as np
import pytest

regpos = pytest.importorskip("regpos")


def test_gauge_and_polar():
    b1 = regpos.ConvexBody.unit_ball(1.0, 3)
    x = np.array([0.5, -2.0, 1.0])
    assert b1.gauge(x) == pytest.approx(3.5)
    assert b1.polar().gauge(x) == pytest.approx(2.0)
    assert regpos.scaled(2.0, b1).gauge(x) == pytest.approx(1.75)


def test_json_bodies_and_errors():
    e = regpos.ConvexBody.from_json('{"family":"ellipsoid","diagonal":[4,1]}')
    assert e.gauge(np.array([1.0, 0.0])) == pytest.approx(2.0)
    with pytest.raises(regpos.RegposError):
        regpos.ConvexBody.from_json('{"family":"torus"}')


def test_interpolation_closed_form():
    j = regpos.interpolate(regpos.ConvexBody.unit_ball(1.0, 4), regpos.ConvexBody.unit_ball(math.inf, 4), 0.5)
    x = np.array([1.0, 2.0, -2.0, 4.0])
    assert j.gauge(x) == pytest.approx(np.linalg.norm(x))
    assert regpos.theta_of_alpha(1.0) == 0.5


def test_ell_position_of_ellipsoid():
    v = np.array([4.0, 1.0, 0.25])
    g = regpos.GaussianSample(1, 2000, 3, moment_match=True)
    r = regpos.ell_position(regpos.ConvexBody.ellipsoid(np.diag(v)), g, tol=1e-8)
    t = np.sqrt(v) / np.exp(np.mean(np.log(np.sqrt(v))))
    assert np.allclose(np.diag(r["T"]), t, atol=1e-6)


def test_regular_position_of_ellipsoid():
    r = regpos.find_regular_position(regpos.ConvexBody.ellipsoid(np.diag([4.0, 1.0])), 1.0, samples=4096)
    assert r["converged"]
    assert r["T"] == pytest.approx([math.sqrt(2), 1 / math.sqrt(2)], rel=1e-4)


def test_gelfand_of_ball_is_one():
    curve = regpos.random_gelfand_curve(regpos.ConvexBody.unit_ball(2.0, 6), [1, 2, 3], samples=100)
    assert [c["value"] for c in curve] == pytest.approx([1.0, 1.0, 1.0])
