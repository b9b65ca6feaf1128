"""Empirical stability checkers and reduction reports on the fixture catalog:
paper verdicts, witness replayability, budget monotonicity, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from hybridkit.analysis import (
    CONSISTENT,
    FALSIFIED,
    PropertyQuery,
    check_attractivity,
    check_boundedness,
    check_invariance,
    check_local_stability_near,
    check_output_convergence,
    check_stability,
    detectability_report,
    recursive_reduction_report,
    reduction_report,
    replay_clause,
)
from hybridkit.composition import with_output
from hybridkit.core import check_is_solution
from hybridkit.errors import ApproximateDistance, ChainNotNested
from hybridkit.geometry import Window, inflate, intersect, point_set
from hybridkit.solver import SolverConfig
from hybridkit.systems import Q_IDX


def q_for(fx, **kw):
    base = dict(target=next(iter(fx.gammas.values())), window=fx.window,
                sample_budget=12, seed=2024)
    base.update(kw)
    return PropertyQuery(**base)


# -- stability ---------------------------------------------------------------


def test_contraction_stability_delta_equals_eps(cat):
    fx = cat["contraction"]
    rep = check_stability(fx.system, fx.gammas["origin"],
                          q_for(fx, target=fx.gammas["origin"], t_max=20.0))
    assert rep.verdict == CONSISTENT
    for eps, delta in rep.measured["delta_for_eps"].items():
        assert delta == eps


def test_drift_line_stability_falsified(cat):
    fx = cat["drift-line"]
    rep = check_stability(fx.system, fx.gammas["origin"],
                          q_for(fx, target=fx.gammas["origin"], t_max=50.0))
    assert rep.verdict == FALSIFIED
    assert rep.witness is not None
    assert rep.witness_clause["sup_distance"] > rep.witness_clause["eps"]


def test_settling_nonlinearity_origin_stable(cat):
    fx = cat["sigma-bump"]
    rep = check_stability(fx.system, fx.gammas["origin"],
                          q_for(fx, target=fx.gammas["origin"], t_max=50.0))
    assert rep.verdict == CONSISTENT


def test_stability_refuses_lower_bound_distance(cat):
    lens = intersect(inflate(point_set([0.0, 0.0]), 1.0),
                     inflate(point_set([0.5, 0.0]), 1.0))
    fx = cat["sigma-bump"]
    with pytest.raises(ApproximateDistance):
        check_stability(fx.system, lens, q_for(fx, target=lens))


def test_budget_monotonicity_of_falsification(cat):
    fx = cat["drift-line"]
    small = check_stability(fx.system, fx.gammas["origin"],
                            q_for(fx, target=fx.gammas["origin"],
                                  sample_budget=4, t_max=50.0))
    big = check_stability(fx.system, fx.gammas["origin"],
                          q_for(fx, target=fx.gammas["origin"],
                                sample_budget=16, t_max=50.0))
    assert small.verdict == FALSIFIED
    assert big.verdict == FALSIFIED


def test_reports_are_seed_deterministic(cat):
    fx = cat["circles"]
    g1 = fx.gammas["gamma1"]
    q = q_for(fx, target=g1, t_max=20.0, sample_budget=6,
              solver=SolverConfig(store_max_dt=0.01))
    r1 = check_stability(fx.system, g1, q)
    r2 = check_stability(fx.system, g1, q)
    assert r1.to_json_dict() == r2.to_json_dict()
    assert r1.witness.to_csv() == r2.witness.to_csv()


# -- attractivity ------------------------------------------------------------


def test_contraction_globally_attractive(cat):
    fx = cat["contraction"]
    rep = check_attractivity(fx.system, fx.gammas["origin"],
                             q_for(fx, target=fx.gammas["origin"], t_max=30.0))
    assert rep.verdict == CONSISTENT
    assert rep.measured["pass_fraction"] == 1.0


def test_circles_dichotomy(cat):
    # globally attractive at budget while stability is falsified
    fx = cat["circles"]
    g1 = fx.gammas["gamma1"]
    cfgkw = dict(t_max=25.0, solver=SolverConfig(store_max_dt=0.01))
    attract = check_attractivity(fx.system, g1, q_for(fx, target=g1, **cfgkw))
    stab = check_stability(fx.system, g1, q_for(fx, target=g1, **cfgkw))
    assert attract.verdict == CONSISTENT
    assert stab.verdict == FALSIFIED


def test_limit_circles_attractivity_falsified(cat):
    fx = cat["limit-circles"]
    g1 = fx.gammas["gamma1"]
    rep = check_attractivity(
        fx.system, g1,
        q_for(fx, target=g1, t_max=60.0, sample_budget=10,
              solver=SolverConfig(store_max_dt=0.004)))
    assert rep.verdict == FALSIFIED
    assert rep.witness_clause["type"] == "attractivity_terminal"


def test_unbounded_solutions_falsify_attractivity(cat):
    # the drift-free growth region: x2 blows up, boundedness clause trips
    fx = cat["sigma-bump"]
    g1 = fx.gammas["origin"]
    window = Window.from_bounds([[2.0, 3.0], [0.5, 1.0]])
    rep = check_attractivity(fx.system, g1,
                             q_for(fx, target=g1, window=window, t_max=15.0,
                                   bound_radius=100.0))
    assert rep.verdict == FALSIFIED
    assert rep.witness_clause["type"] == "unbounded"


# -- local stability near ----------------------------------------------------


def test_local_stability_near_on_settling_nonlinearity(cat):
    fx = cat["sigma-bump"]
    rep = check_local_stability_near(
        fx.system, fx.gammas["origin"], fx.gammas["gamma2"], 1.0,
        q_for(fx, target=fx.gammas["origin"], t_max=50.0))
    assert rep.verdict == CONSISTENT


def test_outer_set_unstable_far_away_but_locally_fine(cat):
    # sampled in the growth region the line is unstable; the near-check at
    # r = 1 still passes because x2 is frozen while |x1| <= 1
    fx = cat["sigma-bump"]
    g2 = fx.gammas["gamma2"]
    far_window = Window.from_bounds([[2.0, 3.0], [-0.5, 0.5]])
    unstable = check_stability(fx.system, g2,
                               q_for(fx, target=g2, window=far_window,
                                     t_max=15.0))
    assert unstable.verdict == FALSIFIED
    near = check_local_stability_near(
        fx.system, fx.gammas["origin"], g2, 1.0,
        q_for(fx, target=fx.gammas["origin"], t_max=50.0))
    assert near.verdict == CONSISTENT


def test_containment_makes_near_check_trivial(cat):
    fx = cat["settle-line"]
    g1 = fx.gammas["origin"]
    g2 = inflate(g1, 2.0)
    rep = check_local_stability_near(
        fx.system, g1, g2, 1.0,
        q_for(fx, target=g1, eps_grid=(1.5, 2.0), t_max=20.0))
    assert rep.verdict == CONSISTENT


# -- invariance --------------------------------------------------------------


def test_amplitude_shell_strongly_invariant(cat):
    fx = cat["observer"]
    w = fx.gammas["w-shell"]
    rep = check_invariance(
        fx.system, w, "strong",
        q_for(fx, target=w, t_max=20.0, sample_budget=8,
              sampler=fx.system.state_sampler))
    assert rep.verdict == CONSISTENT
    assert rep.measured["max_excursion"] < 1e-6


def test_noninvariant_slab_falsified_immediately():
    from hybridkit.core import HybridSystem
    from hybridkit.geometry import box_set, empty_set, full_space

    sys = HybridSystem(1, full_space(1), lambda x: np.ones(1), empty_set(1),
                       lambda x: x, name="drift")
    slab = box_set([[-1.0, 1.0]])
    rep = check_invariance(sys, slab, "strong",
                           PropertyQuery(target=slab, t_max=5.0,
                                         sample_budget=5, seed=1,
                                         window=Window.cube(1, 1.0)))
    assert rep.verdict == FALSIFIED
    assert rep.witness_clause["type"] == "invariance_exit"


def test_synchronized_set_invariant_along_runs(cat):
    fx = cat["observer"]
    g3 = fx.gammas["gamma3"]
    rep = check_invariance(fx.system, g3, "strong",
                           q_for(fx, target=g3, t_max=15.0, sample_budget=6,
                                 inv_tol=1e-6))
    assert rep.verdict == CONSISTENT


def test_weak_invariance_retries_other_priority(cat):
    # on the toggle plane: jump-priority arcs stay (Zeno), so the check holds
    # "under available selections"
    fx = cat["circles"]
    g2 = fx.gammas["gamma2"]
    rep = check_invariance(fx.system, g2, "weak",
                           q_for(fx, target=g2, t_max=10.0, sample_budget=8))
    assert rep.verdict == CONSISTENT
    assert any("selection" in n for n in rep.notes)


# -- output convergence and boundedness --------------------------------------


def test_output_convergence_on_circles(cat):
    fx = cat["circles"]
    osys = with_output(fx.system, lambda x: np.array([x[0]]))
    rep = check_output_convergence(
        osys, q_for(fx, target=fx.gammas["gamma1"], t_max=25.0))
    assert rep.verdict == CONSISTENT


def test_boundedness_flags_growth(cat):
    fx = cat["sigma-bump"]
    window = Window.from_bounds([[2.0, 3.0], [0.5, 1.0]])
    rep = check_boundedness(fx.system,
                            q_for(fx, target=fx.gammas["origin"],
                                  window=window, t_max=15.0,
                                  bound_radius=100.0))
    assert rep.verdict == FALSIFIED


# -- witnesses ---------------------------------------------------------------


def test_falsification_witnesses_replay(cat):
    cases = []
    fx = cat["drift-line"]
    cases.append((fx, fx.gammas["origin"], check_stability(
        fx.system, fx.gammas["origin"],
        q_for(fx, target=fx.gammas["origin"], t_max=50.0))))
    fx = cat["limit-circles"]
    cases.append((fx, fx.gammas["gamma1"], check_attractivity(
        fx.system, fx.gammas["gamma1"],
        q_for(fx, target=fx.gammas["gamma1"], t_max=60.0, sample_budget=10,
              solver=SolverConfig(store_max_dt=0.004)))))
    fx = cat["circles"]
    cases.append((fx, fx.gammas["gamma1"], check_stability(
        fx.system, fx.gammas["gamma1"],
        q_for(fx, target=fx.gammas["gamma1"], t_max=25.0,
              solver=SolverConfig(store_max_dt=0.01)))))
    for fx, gamma, rep in cases:
        assert rep.verdict == FALSIFIED
        assert check_is_solution(fx.system, rep.witness, 1e-3) == []
        assert replay_clause(rep.witness, rep.witness_clause, gamma)


def test_restriction_agreement_with_interior_outer_set(cat):
    # a fat outer set containing the target in its interior: verdicts for the
    # full system and the restriction agree at equal seed and budget
    fx = cat["settle-line"]
    g1 = fx.gammas["origin"]
    ball = inflate(g1, 2.0)
    q = q_for(fx, target=g1, t_max=40.0, sample_budget=10)
    full = check_stability(fx.system, g1, q)
    from hybridkit.composition import restrict

    restricted = check_stability(restrict(fx.system, ball), g1, q,
                                 project=ball.project)
    assert full.verdict == restricted.verdict == CONSISTENT


# -- reduction reports -------------------------------------------------------


def test_reduction_report_settling_line_stability_bundle(cat):
    # the origin is stable but not attractive (the drift level is frozen), so
    # the stability implication engages and holds while the asymptotic
    # stability bundle correctly reports failed hypotheses
    fx = cat["settle-line"]
    rep = reduction_report(fx.system, fx.gammas["origin"], fx.gammas["gamma2"],
                           q_for(fx, target=fx.gammas["origin"], t_max=40.0,
                                 sample_budget=8),
                           scope="local", r=1.0)
    thm = {t.name: t for t in rep.theorems}
    assert thm["stability"].hypotheses_consistent
    assert thm["stability"].conclusion_consistent
    assert rep.conclusions["stability"].verdict == CONSISTENT
    assert rep.sub_reports["relative_stability"].verdict == CONSISTENT
    assert rep.sub_reports["relative_attractivity"].verdict == CONSISTENT
    assert rep.sub_reports["local_stability_near"].verdict == CONSISTENT
    assert rep.sound


def test_reduction_report_limit_circles_counterexample(cat):
    # relative stability fails and so does the conclusion; the attractivity
    # implication never engages, so the report stays sound.  The relative
    # escape crawls at speed ~ delta^2, so the horizon must scale like the
    # reciprocal of the smallest probed delta.
    fx = cat["limit-circles"]
    q = q_for(fx, target=fx.gammas["gamma1"], t_max=600.0, sample_budget=10,
              conv_tol=0.05, solver=SolverConfig(store_max_dt=0.05))
    rep = reduction_report(fx.system, fx.gammas["gamma1"], fx.gammas["gamma2"],
                           q, scope="global")
    assert rep.sub_reports["relative_stability"].verdict == FALSIFIED
    assert rep.sub_reports["relative_attractivity"].verdict == CONSISTENT
    assert rep.sub_reports["global_attractivity_gamma2"].verdict == CONSISTENT
    assert rep.conclusions["attractivity"].verdict == FALSIFIED
    assert rep.sound
    thm = {t.name: t for t in rep.theorems}
    assert not thm["attractivity"].hypotheses_consistent


def test_recursive_chain_of_one_matches_plain_checks(cat):
    fx = cat["contraction"]
    g = fx.gammas["origin"]
    q = q_for(fx, target=g, t_max=30.0, sample_budget=8)
    rep = recursive_reduction_report(fx.system, [g], q, scope="global")
    assert rep.all_consistent
    plain_s = check_stability(fx.system, g, q)
    plain_a = check_attractivity(fx.system, g, q)
    assert rep.sub_reports["link1_stability_rel_statespace"].verdict == plain_s.verdict
    assert rep.sub_reports["link1_attractivity_rel_statespace"].verdict == plain_a.verdict


def test_recursive_chain_circles_distinguishes_attractivity_from_as(cat):
    fx = cat["circles"]
    g1, g2 = fx.gammas["gamma1"], fx.gammas["gamma2"]
    q = q_for(fx, target=g1, t_max=25.0, sample_budget=8,
              solver=SolverConfig(store_max_dt=0.01))
    rep = recursive_reduction_report(fx.system, [g1, g2], q, scope="global")
    assert rep.sub_reports["link1_stability_rel_gamma2"].verdict == CONSISTENT
    assert rep.sub_reports["link1_attractivity_rel_gamma2"].verdict == CONSISTENT
    assert rep.sub_reports["link2_stability_rel_statespace"].verdict == FALSIFIED
    assert rep.sub_reports["link2_attractivity_rel_statespace"].verdict == CONSISTENT
    thm = {t.name: t for t in rep.theorems}
    assert thm["attractivity"].hypotheses_consistent
    assert thm["attractivity"].conclusion_consistent
    assert not thm["asymptotic_stability"].hypotheses_consistent
    assert rep.sound


def test_chain_nesting_enforced(cat):
    fx = cat["circles"]
    q = q_for(fx, target=fx.gammas["gamma2"], sample_budget=4)
    with pytest.raises(ChainNotNested):
        recursive_reduction_report(fx.system,
                                   [fx.gammas["gamma2"], fx.gammas["gamma1"]],
                                   q, scope="global")


# -- detectability -----------------------------------------------------------


def test_detectability_circles_consistent(cat):
    fx = cat["circles"]
    osys = with_output(fx.system, lambda x: np.array([x[0]]))
    rep = detectability_report(
        osys, fx.gammas["gamma1"], fx.gammas["gamma2"],
        q_for(fx, target=fx.gammas["gamma1"], t_max=25.0, sample_budget=8,
              solver=SolverConfig(store_max_dt=0.01)))
    assert rep.all_consistent
    assert rep.sound


def test_detectability_trivial_zero_output(cat):
    fx = cat["contraction"]
    from hybridkit.geometry import full_space

    osys = with_output(fx.system, lambda x: np.array([0.0]))
    rep = detectability_report(
        osys, fx.gammas["origin"], full_space(1),
        q_for(fx, target=fx.gammas["origin"], t_max=30.0, sample_budget=8))
    assert rep.all_consistent


def test_detectability_limit_circles_needs_relative_gas(cat):
    fx = cat["limit-circles"]
    osys = with_output(fx.system, lambda x: np.array([x[2]]))
    rep = detectability_report(
        osys, fx.gammas["gamma1"], fx.gammas["gamma2"],
        q_for(fx, target=fx.gammas["gamma1"], t_max=600.0, sample_budget=10,
              conv_tol=0.05, solver=SolverConfig(store_max_dt=0.05)))
    assert rep.sub_reports["boundedness"].verdict == CONSISTENT
    assert rep.sub_reports["output_convergence"].verdict == CONSISTENT
    assert rep.sub_reports["relative_stability"].verdict == FALSIFIED
    assert rep.conclusions["global_attractivity"].verdict == FALSIFIED
    assert rep.sound
