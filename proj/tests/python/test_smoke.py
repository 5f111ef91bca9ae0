import math
import os
import random
from pathlib import Path

import numpy as np
import pytest

import stormreach as sr


@pytest.fixture
def workdir(tmp_path):
    root = os.environ.get("STORMREACH_TEST_TMP")
    if root:
        path = Path(root) / tmp_path.name
        path.mkdir(parents=True, exist_ok=True)
        return path
    return tmp_path


def test_projection_round_trip():
    frame = sr.PlanarFrame()
    x, y = frame.project(-98.0, 38.0)
    assert abs(x) < 1e-9 and abs(y) < 1e-9
    lon, lat = frame.unproject(*frame.project(-90.5, 41.25))
    assert lon == pytest.approx(-90.5, abs=1e-9)
    assert lat == pytest.approx(41.25, abs=1e-9)
    with pytest.raises(sr.DomainError):
        frame.project(0.0, 90.0)


def test_logistic_fit_and_bic():
    rng = random.Random(3)
    xs = []
    for _ in range(5000):
        u = rng.random()
        xs.append(1.5 + 0.7 * math.log(u / (1 - u)))
    m, s = sr.fit_logistic(xs)
    assert abs(m - 1.5) < 0.05 and abs(s - 0.7) < 0.05
    fits = sr.compare_fits(xs)
    assert fits["bic_logistic"] < fits["bic_normal"]
    with pytest.raises(sr.DegenerateError):
        sr.fit_logistic([1.0, 1.0, 1.0])


def test_ellipse_and_merge():
    e = sr.min_volume_ellipse([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert e["area"] == pytest.approx(math.pi / 2, rel=1e-2)
    assert e["center"][0] == pytest.approx(0.5, abs=1e-3)
    assert sr.merge_probabilities([0.5, 0.5]) == 0.75
    labels, sse = sr.kmeans([(0, 0, 0), (0, 1, 0), (50, 50, 0), (50, 51, 0)], 2, seed=1)
    assert labels[0] == labels[1] != labels[2] == labels[3]
    assert sse == pytest.approx(1.0)


def test_reach_avoid_values():
    v = sr.solve_reach_avoid((0, 100), 10, (0, 100), 10, 8, 1.0, 6, (70, 90, 40, 60),
                             airspeed_kmh=600, turn_rate=math.pi / 4, wind_u_kmh=0, wind_v_kmh=0,
                             sigma2_xy=9.0, sigma2_heading=0.02)
    assert v.shape == (7, 10, 10, 8)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(v[-1, 4:6, 7:9, :] == 1.0)
    blocked = sr.solve_reach_avoid((0, 100), 10, (0, 100), 10, 8, 1.0, 6, (70, 90, 40, 60),
                                   obstacle=np.full((10, 10), 0.2), airspeed_kmh=600,
                                   turn_rate=math.pi / 4, wind_u_kmh=0, wind_v_kmh=0,
                                   sigma2_xy=9.0, sigma2_heading=0.02)
    assert np.all(blocked <= v + 1e-12)
    with pytest.raises(sr.DimensionError):
        sr.solve_reach_avoid((0, 100), 10, (0, 100), 10, 8, 1.0, 6, (70, 90, 40, 60),
                             obstacle=np.zeros((3, 3)))


def test_pipeline_on_clear_scenario(workdir):
    assert "gap" in sr.scenario_kinds()
    config = sr.gen_scenario("clear", 4, workdir / "clear")
    horizons, log = sr.fit(config)
    assert horizons >= 4 and "bic_logistic" in log
    plan = sr.plan(config, seed=9)
    assert 0.0 <= plan["v0"] <= 1.0
    report = sr.simulate(config, seed=9)
    assert report["reached"] + report["storm-hit"] + report["lost"] + report["timed-out"] == report["n"]
    again = sr.simulate(config, seed=9)
    assert again == report
    with pytest.raises(sr.ParseError):
        sr.simulate(config, seed=9, out=workdir / "nothing_here")
