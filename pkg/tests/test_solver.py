"""Solver semantics: oracles, event location, priorities, horizons, guards."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hybridkit.core import HybridSystem, Termination, check_is_solution
from hybridkit.errors import InitialConditionOutsideCD
from hybridkit.geometry import box_set, coords_set, empty_set, full_space
from hybridkit.solver import Priority, SolverConfig, SolveError, solve, solve_batch
from hybridkit.systems import estimator_diagnostics


def test_pure_flow_matches_exponential():
    sys = HybridSystem(1, full_space(1), lambda x: -x, empty_set(1),
                       lambda x: x, name="decay")
    arc = solve(sys, [1.0], SolverConfig(t_max=5.0))
    assert arc.termination is Termination.COMPLETE_T
    assert abs(arc.final_state()[0] - math.exp(-5.0)) < 1e-6


def test_lti_flow_matches_closed_form_along_arc():
    a = np.array([[-1.0, 1.0], [0.0, -1.0]])
    sys = HybridSystem(2, full_space(2), lambda x: a @ x, empty_set(2),
                       lambda x: x, name="lti")
    arc = solve(sys, [1.0, 1.0], SolverConfig(t_max=10.0))
    for t, j, x in arc.samples():
        exact = np.array([math.exp(-t) * (1.0 + t), math.exp(-t)])
        assert np.linalg.norm(x - exact) < 1e-6


def test_observer_first_jump_time(cat, obs_params):
    fx = cat["observer"]
    cfg = SolverConfig(**fx.solver_overrides)
    arc = solve(fx.system, fx.presets["fig3"], cfg)
    d = estimator_diagnostics(arc, obs_params)
    t1_oracle = math.acos(-obs_params.sigma / 2.0) / obs_params.omega
    assert abs(d.jump_times[0] - t1_oracle) < 1e-6
    from hybridkit.core import is_complete
    assert is_complete(arc)  # the reference run persistently flows and jumps


def test_observer_half_period_timer(cat, obs_params):
    fx = cat["observer"]
    cfg = SolverConfig(**fx.solver_overrides)
    arc = solve(fx.system, fx.presets["fig3"], cfg)
    d = estimator_diagnostics(arc, obs_params)
    half = math.pi / obs_params.omega
    assert np.max(np.abs(d.tau_at_jumps[1:] - half)) < 2 * cfg.event_tol


def test_event_bracketing_gap(cat):
    fx = cat["observer"]
    cfg = SolverConfig(**fx.solver_overrides)
    arc = solve(fx.system, fx.presets["fig3"], cfg)
    gaps = [e["bracket_gap"] for e in arc.meta["events"] if e["kind"] == "flow_exit"]
    assert gaps and max(gaps) <= cfg.event_tol


def test_jump_maps_applied_exactly(cat):
    fx = cat["circles"]
    arc = solve(fx.system, [1.0, 0.0, 1.0, 1.0],
                SolverConfig(t_max=10.0, store_max_dt=0.01))
    assert arc.n_jumps >= 2
    for t, j, pre, post in arc.jump_transitions():
        expected = fx.system.jump_map(pre)
        assert np.array_equal(post, expected)       # exact, not integrated
        assert post[2] == pre[2] / 2.0              # halving is exact
        assert post[3] == -pre[3]                   # toggle is exact


def test_zeno_guard_trips_on_toggle_plane(cat):
    fx = cat["circles"]
    cfg = SolverConfig(t_max=10.0)
    arc = solve(fx.system, [0.0, 1.0, 1.0, 1.0], cfg)
    assert arc.termination is Termination.ZENO
    # zeno_k short intervals have occurred: zeno_k - 1 jumps plus the open one
    assert arc.n_jumps == cfg.zeno_k - 1
    assert arc.domain.total_flow_time() == 0.0


def test_initial_condition_outside_cd_raises(cat):
    fx = cat["circles"]
    with pytest.raises(InitialConditionOutsideCD):
        solve(fx.system, [1.0, 0.0, 0.0, -1.0], SolverConfig())


def test_numerical_failure_on_finite_escape():
    sys = HybridSystem(1, full_space(1), lambda x: x * x, empty_set(1),
                       lambda x: x, name="blowup")
    arc = solve(sys, [1.0], SolverConfig(t_max=5.0, max_step=0.5))
    assert arc.termination is Termination.NUMERICAL_FAILURE


def test_flow_priority_still_jumps_from_d_only_states(cat):
    fx = cat["circles"]
    cfg = SolverConfig(t_max=10.0, priority=Priority.FLOW)
    arc = solve(fx.system, [1.0, 0.0, 1.0, 1.0], cfg)
    assert arc.n_jumps >= 1  # boundary stall resolves by jumping, not error


def test_priority_resolves_c_cap_d(cat):
    # on the toggle plane with x2 != 0 both priorities end up jumping; the
    # flow attempt just produces a zero-length interval first
    fx = cat["circles"]
    arc_j = solve(fx.system, [0.0, -1.0, 0.5, 1.0],
                  SolverConfig(t_max=5.0, priority=Priority.JUMP))
    arc_f = solve(fx.system, [0.0, -1.0, 0.5, 1.0],
                  SolverConfig(t_max=5.0, priority=Priority.FLOW))
    assert arc_j.termination is Termination.ZENO
    assert arc_f.termination is Termination.ZENO


def test_j_max_horizon():
    sys = HybridSystem(1, empty_set(1), lambda x: 0 * x, full_space(1),
                       lambda x: 0.5 * x, name="pure-jumps")
    arc = solve(sys, [1.0], SolverConfig(t_max=1.0, j_max=7, zeno_k=100))
    assert arc.termination is Termination.COMPLETE_J
    assert arc.n_jumps == 7
    assert arc.final_state()[0] == pytest.approx(0.5 ** 7)


def test_solver_is_deterministic(cat):
    fx = cat["observer"]
    cfg = SolverConfig(**fx.solver_overrides)
    a1 = solve(fx.system, fx.presets["fig3"], cfg)
    a2 = solve(fx.system, fx.presets["fig3"], cfg)
    assert a1.to_csv() == a2.to_csv()


def test_batch_of_one_equals_solve(cat):
    fx = cat["circles"]
    cfg = SolverConfig(t_max=8.0)
    x0 = [1.0, 0.2, 0.5, 1.0]
    single = solve(fx.system, x0, cfg)
    batch = solve_batch(fx.system, [x0], cfg)
    assert batch[0].to_csv() == single.to_csv()


def test_batch_observer_arcs_all_check_out(cat):
    fx = cat["observer"]
    gen = np.random.default_rng(99)
    x0s = fx.system.state_sampler(gen, 10)
    arcs = solve_batch(fx.system, list(x0s), SolverConfig(t_max=10.0))
    for arc in arcs:
        assert check_is_solution(fx.system, arc, 1e-3) == []


def test_batch_permutation_equivariance(cat):
    fx = cat["circles"]
    cfg = SolverConfig(t_max=6.0)
    gen = np.random.default_rng(13)
    x0s = fx.system.state_sampler(gen, 6)
    fwd = solve_batch(fx.system, list(x0s), cfg)
    perm = [5, 3, 0, 4, 1, 2]
    rev = solve_batch(fx.system, [x0s[i] for i in perm], cfg)
    for k, i in enumerate(perm):
        assert rev[k].to_csv() == fwd[i].to_csv()


def test_batch_collects_errors(cat):
    fx = cat["circles"]
    good = [1.0, 0.0, 0.5, 1.0]
    bad = [1.0, 0.0, 0.5, -1.0]  # outside C u D
    out = solve_batch(fx.system, [good, bad, good], SolverConfig(t_max=2.0),
                      on_error="collect")
    assert isinstance(out[1], SolveError)
    assert out[1].index == 1
    assert out[0].to_csv() == out[2].to_csv()
    with pytest.raises(InitialConditionOutsideCD):
        solve_batch(fx.system, [bad], SolverConfig(t_max=2.0))


def test_default_max_step_tracks_horizon():
    cfg = SolverConfig(t_max=30.0)
    assert cfg.effective_max_step == pytest.approx(0.3)
    assert SolverConfig(t_max=30.0, max_step=0.05).effective_max_step == 0.05


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(t_max=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(j_max=0)
    with pytest.raises(ValueError):
        SolverConfig(rtol=0.0)


def test_not_extendable_on_flow_set_exit_without_jump():
    # flow pushes x out of the box and no jump set is available
    sys = HybridSystem(1, box_set([[0.0, 1.0]]), lambda x: np.ones(1),
                       empty_set(1), lambda x: x, name="ramp")
    arc = solve(sys, [0.5], SolverConfig(t_max=5.0))
    assert arc.termination is Termination.NOT_EXTENDABLE
    assert arc.final_state()[0] == pytest.approx(1.0, abs=1e-6)
    assert arc.final_time()[0] == pytest.approx(0.5, abs=1e-6)


def test_escape_when_jump_lands_outside(cat):
    # a jump map that throws the state out of C u D ends the arc cleanly
    sys = HybridSystem(1, box_set([[0.0, 1.0]]), lambda x: np.ones(1),
                       coords_set(1, {0: ("interval", 1.0, 1.0)}),
                       lambda x: x + 5.0, name="eject")
    arc = solve(sys, [0.0], SolverConfig(t_max=5.0))
    assert arc.termination is Termination.ESCAPED
    assert arc.final_state()[0] == pytest.approx(6.0, abs=1e-6)
    assert arc.n_jumps == 1
