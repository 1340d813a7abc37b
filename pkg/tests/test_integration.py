"""
End-to-end checks of the reproducible experiments at desk scale.
"""
import pytest
import pytest_asyncio
import math
from fractions import Fraction

import numpy as np

from subdiff_lab.system import create_lab
from subdiff_lab.core.config import ExperimentConfig
from subdiff_lab.core.cvx_cx import ConvexScenario, CvxGeometry, bump_d1, bump_d2, eval_f, eval_g
from subdiff_lab.core.dyadic import BitStream, K_bound

pytestmark = pytest.mark.integration


@pytest_asyncio.fixture(scope="function")
async def lab():
    """Fixture to create a lab with a small worker pool"""
    yield await create_lab(log_level="INFO")


@pytest.mark.asyncio
async def test_lipschitz_gap_is_half(lab):
    """nu = 8 over 100 trials: the event is found and every gap is exactly 1/2"""
    report = await lab.run(ExperimentConfig("gap-lip", nu=8, trials=100, seed=1, workers=4))
    summary = report.summary

    assert summary["success_rate"] >= 0.95
    assert summary["all_gaps_exact_half"]
    assert all(row.gap == Fraction(1, 2) for row in report.rows if row.found)
    assert summary["failure_bound"] == Fraction(1, 81)
    assert report.wall_time_s < 60


@pytest.mark.asyncio
async def test_convex_gap_and_perturbed_bound(lab):
    """Same protocol in the plane, with the ball-perturbation lower bound"""
    report = await lab.run(ExperimentConfig("gap-cvx", nu=8, trials=100, seed=2, workers=4))
    summary = report.summary
    delta = Fraction(1, 2240 * K_bound(8) ** 4)

    assert summary["success_rate"] >= 0.95
    assert summary["all_gaps_exact_half"]
    assert summary["delta"] == delta
    assert summary["lower_bound"] == Fraction(1, 2) - 140 * delta
    assert summary["eps_lower_bound"] == Fraction(1, 2) - 142 * delta

    # exact fraction survives serialization
    document = report.to_dict()
    assert document["summary"]["lower_bound"] == str(Fraction(1, 2) - 140 * delta)


@pytest.mark.asyncio
async def test_event_finder_failure_frequency(lab):
    """nu = 6 over 2000 trials stays within 3 sigma of the 1/49 bound"""
    report = await lab.run(ExperimentConfig("gadget-stats", nu=6, trials=2000, seed=3, workers=4))
    summary = report.summary

    assert summary["failure_bound"] == Fraction(1, 49)
    assert summary["threshold_3sigma"] == pytest.approx(1 / 49 + 3 * math.sqrt((1 / 49) / 2000))
    assert summary["failure_fraction"] <= summary["threshold_3sigma"]
    assert summary["within_threshold"]
    assert report.wall_time_s < 60


def test_convexity_and_constant_bounds():
    """Sampled convexity of f(xi, .), Lipschitz ratios of g and the bump derivative bounds"""
    rng = np.random.default_rng(4)
    scenario = ConvexScenario(xi=BitStream(seed=4))
    samples = 10 ** 5
    a = np.column_stack([rng.uniform(-0.5, 0.5, samples), rng.uniform(0.01, 1.2, samples)])
    b = a + rng.uniform(-2e-3, 2e-3, size=(samples, 2))
    lam = rng.uniform(0.0, 1.0, samples)

    for i in range(samples):
        x, y, t = tuple(a[i]), tuple(b[i]), lam[i]
        z = (t * x[0] + (1 - t) * y[0], t * x[1] + (1 - t) * y[1])
        assert eval_f(scenario, z) <= t * eval_f(scenario, x) + (1 - t) * eval_f(scenario, y) + 1e-9

        gap = math.hypot(x[0] - y[0], x[1] - y[1])
        assert abs(eval_g(scenario, x) - eval_g(scenario, y)) <= 70 * (1 + 1e-9) * gap

    for t in rng.uniform(-1.0, 1.0, samples // 10):
        assert abs(bump_d1(t)) <= 30 * (1 + 1e-9)
        assert abs(bump_d2(t)) <= 30 * (1 + 1e-9)


def test_convexity_on_long_and_crossing_chords():
    """Global chords, and chords across the bump supports and the kink g = 0"""
    rng = np.random.default_rng(5)
    scenario = ConvexScenario(xi=BitStream(seed=5))

    def chord_is_convex(x, y, t):
        z = (t * x[0] + (1 - t) * y[0], t * x[1] + (1 - t) * y[1])
        return eval_f(scenario, z) <= t * eval_f(scenario, x) + (1 - t) * eval_f(scenario, y) + 1e-9

    for _ in range(10 ** 4):
        x = (rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.2))
        y = (rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.2))
        assert chord_is_convex(x, y, rng.uniform())

    for k in range(1, 101):
        center, r = 1 / k, float(CvxGeometry.r(k))
        eta = float(CvxGeometry.eta(k))
        for _ in range(200):
            # endpoints outside the support, x1 straddling the kink
            x = (rng.uniform(-2, 2) * eta, center - rng.uniform(0.4, 1.3) * r)
            y = (rng.uniform(-2, 2) * eta, center + rng.uniform(0.4, 1.3) * r)
            assert chord_is_convex(x, y, rng.uniform())
            assert chord_is_convex((-eta, x[1]), (eta, y[1]), rng.uniform())


@pytest.mark.asyncio
async def test_median_example_convergence(lab):
    """Per-nu medians of sup_x gap decrease across nu = 2^6 .. 2^14"""
    nu_list = [2 ** 6, 2 ** 8, 2 ** 10, 2 ** 12, 2 ** 14]
    report = await lab.run(ExperimentConfig("ulln-1d", nu_list=nu_list, trials=20, seed=5, workers=4))
    per_nu = report.summary["per_nu"]
    medians = [entry["median_gap"] for entry in per_nu]

    assert [entry["nu"] for entry in per_nu] == nu_list
    assert report.summary["non_increasing"]
    assert medians[-1] <= 0.05
    assert medians[-1] <= medians[0] / 4
    assert report.wall_time_s < 120


@pytest.mark.asyncio
async def test_two_atom_eps_convergence(lab):
    """Fixed epsilon = 0.1: medians decrease and reach 0.05 by nu = 10^4"""
    config = ExperimentConfig(
        "eps-ulln", nu_list=[100, 1000, 10000], epsilon=0.1, trials=10, seed=6, workers=4
    )
    report = await lab.run(config)
    per_nu = report.summary["per_nu"]

    assert report.summary["non_increasing"]
    assert per_nu[-1]["median_gap"] <= 0.05
    assert report.summary["epsilon"] == 0.1
    assert all(row.grid_error_bound is not None for row in report.rows)


@pytest.mark.asyncio
async def test_shattering_width_three(lab):
    """Every pattern in {0,1}^3 is realized at some k <= 8"""
    report = await lab.run(ExperimentConfig("shatter", n=3))

    assert report.summary["all_patterns_realized"]
    assert len(report.rows) == 8
    assert all(1 <= row.k <= 8 for row in report.rows)
    assert {row.pattern for row in report.rows} == {format(i, "03b") for i in range(8)}
