import math

import numpy as np
import pytest

from anchordeploy.errors import DomainError, InsufficientNodes, SingularGeometry, UninvertibleMeasurement
from anchordeploy.localizer import (
    LocalizerConfig,
    horizontal_fix,
    lengths_from_times,
    locate,
    time_cost,
)
from anchordeploy.montecarlo import synthesize_measurements, trial_rngs, true_paths
from anchordeploy.optimize import azimuth_layout, geometry_from_alpha

from conftest import ring_refs


def test_time_cost():
    assert time_cost([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert time_cost([1.0, 2.0], [1.1, 1.9]) == pytest.approx(0.02, rel=1e-12)
    assert time_cost([1.0, 2.0], [2.0, 1.0]) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        time_cost([1.0], [1.0, 2.0])


def test_config_validation():
    LocalizerConfig(start_depth=100)
    with pytest.raises(DomainError):
        LocalizerConfig(start_depth=0)
    with pytest.raises(DomainError):
        LocalizerConfig(start_depth=100, step_threshold=3)
    with pytest.raises(DomainError):
        LocalizerConfig(start_depth=100, initial_direction=0)


def test_iso_symmetric_fix(iso, backend):
    refs = ring_refs(1000.0, 3)
    xy, cost = horizontal_fix(iso, refs, [1000 * math.sqrt(2)] * 3, 1000)
    np.testing.assert_allclose(xy, [0, 0], atol=1e-6)
    assert cost < 1e-18


def _noiseless(profile, depth, alpha_deg, J, anchor_xy=(0.0, 0.0)):
    anchor = np.array([*anchor_xy, depth])
    g = geometry_from_alpha(anchor, math.radians(alpha_deg), azimuth_layout(J, 0.3))
    L = np.array([p.L for p in true_paths(profile, g)])
    t = np.array([p.t for p in true_paths(profile, g)])
    return g, L, t


def test_noiseless_true_depth(ssp1, backend):
    g, L, _ = _noiseless(ssp1, 2500.0, 46.5, 5, (120.0, -40.0))
    xy, cost = horizontal_fix(ssp1, g.refs, L, 2500.0)
    assert np.hypot(*(xy - g.anchor[:2])) < 1e-3
    assert cost < 1e-16


def test_insufficient_nodes(ssp1):
    g, L, _ = _noiseless(ssp1, 2500.0, 46.5, 3)
    L[0] = 1.0  # shorter than the depth: no ray matches it
    with pytest.raises(InsufficientNodes):
        horizontal_fix(ssp1, g.refs, L, 2500.0)


def test_drop_one_node(ssp1):
    g, L, t = _noiseless(ssp1, 2500.0, 46.5, 5)
    L[0] = 1.0
    xy, cost = horizontal_fix(ssp1, g.refs, L, 2500.0, measured_t=t)
    assert np.hypot(*(xy - g.anchor[:2])) < 1e-3


def test_collinear_refs(iso):
    refs = np.array([[0.0, 0, 0], [500.0, 0, 0], [1000.0, 0, 0]])
    L = np.array([1500.0, 1200.0, 1500.0])
    with pytest.raises((SingularGeometry, UninvertibleMeasurement)):
        horizontal_fix(iso, refs, L, 1000.0)


def test_measurement_count_mismatch(iso):
    with pytest.raises(DomainError):
        horizontal_fix(iso, ring_refs(100.0, 3), [1.0, 2.0], 50.0)


@pytest.mark.parametrize("alpha_deg", [12.5, 46.5, 80.0])
def test_locate_noiseless(ssp1, backend, alpha_deg):
    g, L, t = _noiseless(ssp1, 2500.0, alpha_deg, 5, (30.0, 70.0))
    cfg = LocalizerConfig(start_depth=2505.0)
    fix = locate(ssp1, g.refs, L, cfg, measured_t=t)
    assert abs(fix.position[2] - 2500.0) <= cfg.step_threshold
    assert np.linalg.norm(fix.position - g.anchor) < 0.5
    assert np.hypot(*(fix.position[:2] - g.anchor[:2])) < 1e-2
    assert fix.converged


def test_locate_without_measured_times(ssp1):
    g, L, _ = _noiseless(ssp1, 2500.0, 46.5, 5)
    fix = locate(ssp1, g.refs, L, LocalizerConfig(start_depth=2495.0))
    assert np.linalg.norm(fix.position - g.anchor) < 0.5


def test_locate_from_times(ssp1):
    g, _, t = _noiseless(ssp1, 2500.0, 46.5, 5)
    fix = locate(ssp1, g.refs, t, LocalizerConfig(start_depth=2505.0), kind="t")
    assert np.linalg.norm(fix.position - g.anchor) < 0.5


def test_lengths_from_times(ssp1):
    g, L, t = _noiseless(ssp1, 2500.0, 46.5, 5)
    np.testing.assert_allclose(lengths_from_times(ssp1, t, 2500.0), L, rtol=1e-9)
    with pytest.raises(UninvertibleMeasurement):
        lengths_from_times(ssp1, [1e-6], 2500.0)


def test_locate_bookkeeping(ssp1):
    g = geometry_from_alpha(np.array([0, 0, 2500.0]), math.radians(46.5), azimuth_layout(5))
    rng, _ = trial_rngs(4, 0)
    L, t = synthesize_measurements(ssp1, g, 0.01, rng, with_times=True)
    cfg = LocalizerConfig(start_depth=2505.0)
    fix = locate(ssp1, g.refs, L, cfg, measured_t=t)
    costs = [c for _, c in fix.visited]
    assert fix.cost == min(costs)
    start_cost = fix.visited[0][1]
    assert fix.cost <= start_cost
    assert fix.flips <= math.ceil(math.log2(cfg.initial_step / cfg.step_threshold)) + 1
    assert fix.iterations <= cfg.max_outer_iterations


def test_locate_probes_when_start_unusable(ssp1):
    # at 88.5 deg every path length is shorter than the start depth
    g, L, t = _noiseless(ssp1, 2500.0, 88.5, 5)
    assert np.all(L < 2505.0)
    fix = locate(ssp1, g.refs, L, LocalizerConfig(start_depth=2505.0), measured_t=t)
    assert math.isinf(fix.visited[0][1])
    assert np.linalg.norm(fix.position - g.anchor) < 0.5


def test_locate_all_fail(ssp1):
    refs = ring_refs(1000.0, 3)
    with pytest.raises(InsufficientNodes):
        locate(ssp1, refs, [1.0, 1.0, 1.0], LocalizerConfig(start_depth=2505.0, max_outer_iterations=5))
