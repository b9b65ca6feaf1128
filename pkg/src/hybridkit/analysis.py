"""Sampling-based empirical checkers for set-stability notions, plus
reduction-theorem consistency reports.

Every verdict here is falsify-or-consistent-at-budget, never a proof: a
Falsified report ships a witness arc that reproduces the violated inequality
exactly; ConsistentAtBudget records the budgets, grids, and seed under which
no violation was found.  Per-sample generators are keyed (seed, context,
index), so growing the budget replays the same early samples and can never
flip Falsified back to consistent, and verdicts are independent of scheduling.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace as _dc_replace
from typing import Callable

import numpy as np

from .composition import OutputSystem, restrict
from .core import HybridArc, HybridSystem, Termination, is_complete
from .errors import ApproximateDistance, ChainNotNested
from .geometry import ClosedSet, Window
from .solver import SolverConfig, solve

_MAX_DRAW_TRIES = 80

FALSIFIED = "Falsified"
CONSISTENT = "ConsistentAtBudget"

PROPERTIES = (
    "Stability",
    "Attractivity",
    "GlobalAttractivity",
    "AsymptoticStability",
    "GlobalAsymptoticStability",
    "LocalStabilityNear",
    "LocalAttractivityNear",
    "WeakForwardInvariance",
    "StrongForwardInvariance",
    "Boundedness",
    "OutputConvergence",
)


@dataclass(frozen=True)
class PropertyQuery:
    """What to check, where to sample, and at which budgets."""

    prop: str = "Stability"
    target: ClosedSet | None = None
    relative_to: ClosedSet | None = None
    near: ClosedSet | None = None
    near_radius: float | None = None
    eps_grid: tuple[float, ...] = (0.25, 0.5, 1.0)
    sample_budget: int = 50
    t_max: float = 50.0
    j_max: int = 200
    conv_tol: float = 1e-3
    inv_tol: float = 1e-6
    seed: int = 0
    window: Window | None = None
    bound_radius: float | None = None
    delta_shrinks: int = 5
    solver: SolverConfig | None = None
    sampler: Callable | None = None
    arc_hook: Callable | None = None  # called (system, arc) for every solve

    def __post_init__(self):
        if self.prop not in PROPERTIES:
            raise ValueError(f"unknown property {self.prop!r}")
        eps = tuple(float(e) for e in self.eps_grid)
        if not eps or any(e <= 0 for e in eps) or list(eps) != sorted(eps):
            raise ValueError("eps_grid must be strictly positive and sorted")
        object.__setattr__(self, "eps_grid", eps)
        object.__setattr__(self, "seed", int(self.seed))
        if self.sample_budget < 1:
            raise ValueError("sample_budget must be >= 1")

    def replace(self, **kw) -> "PropertyQuery":
        return _dc_replace(self, **kw)

    def solver_config(self) -> SolverConfig:
        base = self.solver or SolverConfig()
        return base.replace(t_max=self.t_max, j_max=self.j_max)

    def effective_bound_radius(self) -> float:
        if self.bound_radius is not None:
            return self.bound_radius
        if self.window is not None:
            return 50.0 * max(1.0, float(np.max(np.abs(np.concatenate(
                [self.window.lo, self.window.hi])))))
        return 1e3

    def provenance(self) -> dict:
        return {
            "property": self.prop,
            "target": self.target.name if self.target is not None else None,
            "relative_to": self.relative_to.name if self.relative_to is not None else None,
            "eps_grid": list(self.eps_grid),
            "sample_budget": self.sample_budget,
            "horizon": {"t_max": self.t_max, "j_max": self.j_max},
            "conv_tol": self.conv_tol,
            "seed": self.seed,
            "delta_shrinks": self.delta_shrinks,
            "near_radius": self.near_radius,
            "window": self.window.to_config() if self.window is not None else None,
        }


@dataclass
class AnalysisReport:
    """Verdict plus everything needed to reproduce it."""

    verdict: str
    prop: str
    measured: dict
    provenance: dict
    witness: HybridArc | None = None
    witness_clause: dict | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict == FALSIFIED and self.witness is None:
            raise ValueError("Falsified verdicts must carry a witness arc")

    @property
    def consistent(self) -> bool:
        return self.verdict == CONSISTENT

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "query": _plain(self.provenance),
            "verdict": self.verdict,
            "property": self.prop,
            "measured": _plain(self.measured),
            "witness_clause": _plain(self.witness_clause),
            "notes": list(self.notes),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# seeding and sampling
# ---------------------------------------------------------------------------


def _rng(seed: int, *ctx) -> np.random.Generator:
    parts = [int(seed) & 0xFFFFFFFF]
    for c in ctx:
        if isinstance(c, (int, np.integer)):
            parts.append(int(c) & 0xFFFFFFFF)
        else:
            parts.append(zlib.crc32(str(c).encode()))
    return np.random.default_rng(parts)


def _require_distance(gamma: ClosedSet):
    if gamma.distance_kind == "lower_bound":
        raise ApproximateDistance(
            f"set '{gamma.name}' only offers a lower-bound distance; provide an "
            "exact descriptor or a declared surrogate"
        )


def _draw_initial(
    sys: HybridSystem,
    rng: np.random.Generator,
    *,
    near: ClosedSet | None = None,
    delta: float = 0.0,
    window: Window | None = None,
    project: Callable | None = None,
    sampler: Callable | None = None,
    tol: float = 1e-9,
) -> np.ndarray | None:
    """One initial condition in (B_delta(near) if near else region) n (C u D)."""
    for _ in range(_MAX_DRAW_TRIES):
        if sampler is not None:
            x = np.asarray(sampler(rng, 1), dtype=float).reshape(-1)
        elif near is not None and near.can_sample:
            if delta > 0:
                x = near.sample_near(rng, 1, delta, window,
                                     frozen=sys.discrete_coords)[0]
            else:
                x = near.sample(rng, 1, window)[0]
        elif window is not None:
            x = window.uniform(rng, 1)[0]
            if near is not None and float(near.distance(x)) > delta:
                continue
        else:
            raise ValueError("no sampling region: need a sampler, a samplable "
                             "set, or a window")
        if project is not None:
            x = np.asarray(project(x), dtype=float).reshape(-1)
            if near is not None and float(near.distance(x)) > delta + 1e-9:
                continue
        if not bool(sys.in_cd(x, tol)):
            continue
        return x
    return None


def _region_sampler(sys: HybridSystem, query: PropertyQuery):
    """Sampler for 'global at budget' draws: explicit override, then the
    system's own sampler, then uniform-window rejection."""
    if query.sampler is not None:
        return dict(sampler=query.sampler)
    if sys.state_sampler is not None:
        return dict(sampler=sys.state_sampler)
    return dict(window=query.window)


# ---------------------------------------------------------------------------
# core checks
# ---------------------------------------------------------------------------


def check_stability(sys: HybridSystem, gamma: ClosedSet, query: PropertyQuery,
                    project: Callable | None = None) -> AnalysisReport:
    """epsilon-delta stability of ``gamma``: for each epsilon a shrinking-delta
    search over initial conditions in B_delta(gamma) n (C u D)."""
    _require_distance(gamma)
    cfg = query.solver_config()
    notes = []
    if not gamma.bounded:
        notes.append("target not declared compact: the uniform notion is "
                     "tested inside the sampling window")
    measured: dict = {"delta_for_eps": {}, "worst_amplification": {}}
    witness = None
    clause = None
    n_solved = 0
    for ei, eps in enumerate(query.eps_grid):
        surviving = None
        last_escape = None
        for k in range(query.delta_shrinks + 1):
            delta = eps * 2.0 ** (-k)
            all_ok = True
            for i in range(query.sample_budget):
                rng = _rng(query.seed, "stab", ei, k, i)
                x0 = _draw_initial(sys, rng, near=gamma, delta=delta,
                                   window=query.window, project=project,
                                   sampler=query.sampler, tol=cfg.tol_set)
                if x0 is None:
                    continue
                n_solved += 1
                arc = solve(sys, x0, cfg)
                if query.arc_hook:
                    query.arc_hook(sys, arc)
                supd = arc.sup_distance(gamma)
                if supd > eps:
                    all_ok = False
                    last_escape = (arc, eps, delta, supd)
                    break
            if all_ok:
                surviving = delta
                break
        if surviving is None:
            arc, eps_w, delta_w, supd = last_escape
            witness = arc
            clause = {
                "type": "stability_escape",
                "eps": eps_w,
                "delta": delta_w,
                "sup_distance": supd,
                "x0": arc.meta["x0"],
            }
            measured["delta_for_eps"][eps] = None
            break
        measured["delta_for_eps"][eps] = surviving
        measured["worst_amplification"][eps] = eps / surviving
    if n_solved == 0:
        raise RuntimeError(
            f"stability check of '{gamma.name}' on '{sys.name}' drew no valid "
            "initial conditions; provide a sampler or a wider window"
        )
    verdict = FALSIFIED if witness is not None else CONSISTENT
    return AnalysisReport(verdict, "Stability", measured,
                          {**query.provenance(), "system": sys.name,
                           "target": gamma.name},
                          witness, clause, notes)


def _arc_converges(arc: HybridArc, gamma: ClosedSet, conv_tol: float,
                   bound_radius: float) -> tuple[bool, dict | None]:
    """Basin-membership test for one arc: bounded, and convergent when it is
    complete at horizon (Zeno-truncated arcs are held to the same terminal
    test; maximal-but-incomplete arcs pass vacuously)."""
    supn = arc.sup_norm()
    if supn > bound_radius:
        return False, {"type": "unbounded", "sup_norm": supn,
                       "bound_radius": bound_radius, "x0": arc.meta.get("x0")}
    if is_complete(arc) or arc.termination is Termination.ZENO:
        td = arc.terminal_distance(gamma)
        if td > conv_tol:
            return False, {"type": "attractivity_terminal",
                           "terminal_distance": td, "conv_tol": conv_tol,
                           "x0": arc.meta.get("x0")}
    return True, None


def check_attractivity(sys: HybridSystem, gamma: ClosedSet, query: PropertyQuery,
                       project: Callable | None = None) -> AnalysisReport:
    """Attractivity at budget: every sampled arc must be bounded and, when
    complete at horizon, end within conv_tol of the target.

    The sampling region decides the flavor: query.near (+ near_radius) tests
    the local notion, otherwise the window/state sampler stands in for
    'global at budget'.
    """
    _require_distance(gamma)
    cfg = query.solver_config()
    bound_radius = query.effective_bound_radius()
    measured: dict = {"n_pass": 0, "n_vacuous": 0, "n_total": 0,
                      "max_terminal_distance": 0.0}
    witness = None
    clause = None
    local = query.near is not None
    for i in range(query.sample_budget):
        rng = _rng(query.seed, "attr", i)
        if local:
            x0 = _draw_initial(sys, rng, near=query.near,
                               delta=query.near_radius or max(query.eps_grid),
                               window=query.window, project=project,
                               sampler=query.sampler, tol=cfg.tol_set)
        else:
            x0 = _draw_initial(sys, rng, project=project, tol=cfg.tol_set,
                               **_region_sampler(sys, query))
        if x0 is None:
            continue
        arc = solve(sys, x0, cfg)
        if query.arc_hook:
            query.arc_hook(sys, arc)
        measured["n_total"] += 1
        ok, bad = _arc_converges(arc, gamma, query.conv_tol, bound_radius)
        if not ok:
            witness, clause = arc, bad
            break
        if is_complete(arc) or arc.termination is Termination.ZENO:
            measured["n_pass"] += 1
            measured["max_terminal_distance"] = max(
                measured["max_terminal_distance"], arc.terminal_distance(gamma))
        else:
            measured["n_vacuous"] += 1
    if measured["n_total"]:
        measured["pass_fraction"] = (
            (measured["n_pass"] + measured["n_vacuous"]) / measured["n_total"])
    else:
        raise RuntimeError(
            f"attractivity check of '{gamma.name}' on '{sys.name}' drew no "
            "valid initial conditions; provide a sampler or a wider window"
        )
    verdict = FALSIFIED if witness is not None else CONSISTENT
    prop = "LocalAttractivityNear" if local else "GlobalAttractivity"
    return AnalysisReport(verdict, prop, measured,
                          {**query.provenance(), "system": sys.name,
                           "target": gamma.name},
                          witness, clause)


def _prefix_escape(arc: HybridArc, g1: ClosedSet, g2: ClosedSet,
                   r: float, eps: float) -> dict | None:
    """First sample whose whole prefix stayed in B_r(g1) but which leaves
    B_eps(g2); None when the quoted conditional holds along the arc."""
    for j, (t, x) in enumerate(zip(arc.times, arc.states)):
        d1 = np.asarray(g1.distance(x))
        d2 = np.asarray(g2.distance(x))
        leave = np.flatnonzero(d1 >= r)
        stop = leave[0] if leave.size else d1.shape[0]
        bad = np.flatnonzero(d2[:stop] > eps)
        if bad.size:
            k = int(bad[0])
            return {"t": float(t[k]), "j": j, "dist_gamma2": float(d2[k])}
        if leave.size:
            return None
    return None


def check_local_stability_near(sys: HybridSystem, g1: ClosedSet, g2: ClosedSet,
                               r: float, query: PropertyQuery,
                               project: Callable | None = None) -> AnalysisReport:
    """Conditional epsilon-delta check: prefixes confined to B_r(g1) must stay
    within B_eps(g2)."""
    _require_distance(g1)
    _require_distance(g2)
    cfg = query.solver_config()
    measured: dict = {"r": r, "delta_for_eps": {}}
    witness = None
    clause = None
    for ei, eps in enumerate(query.eps_grid):
        surviving = None
        last_escape = None
        for k in range(query.delta_shrinks + 1):
            delta = eps * 2.0 ** (-k)
            all_ok = True
            for i in range(query.sample_budget):
                rng = _rng(query.seed, "lsn", ei, k, i)
                x0 = _draw_initial(sys, rng, near=g1, delta=delta,
                                   window=query.window, project=project,
                                   sampler=query.sampler, tol=cfg.tol_set)
                if x0 is None:
                    continue
                arc = solve(sys, x0, cfg)
                if query.arc_hook:
                    query.arc_hook(sys, arc)
                esc = _prefix_escape(arc, g1, g2, r, eps)
                if esc is not None:
                    all_ok = False
                    last_escape = (arc, eps, delta, esc)
                    break
            if all_ok:
                surviving = delta
                break
        if surviving is None:
            arc, eps_w, delta_w, esc = last_escape
            witness = arc
            clause = {"type": "local_stability_escape", "eps": eps_w,
                      "delta": delta_w, "r": r, "x0": arc.meta["x0"], **esc}
            measured["delta_for_eps"][eps] = None
            break
        measured["delta_for_eps"][eps] = surviving
    verdict = FALSIFIED if witness is not None else CONSISTENT
    return AnalysisReport(verdict, "LocalStabilityNear", measured,
                          {**query.provenance(), "system": sys.name,
                           "target": g1.name, "relative_to": g2.name},
                          witness, clause)


def check_invariance(sys: HybridSystem, gamma: ClosedSet, mode: str,
                     query: PropertyQuery) -> AnalysisReport:
    """Forward invariance from on-set samples.

    strong: every produced arc stays within inv_tol of the set.  weak: the
    produced arc may be retried under the other jump/flow priority; verdicts
    are therefore only 'under available selections' of this single-valued
    solver.
    """
    if mode not in ("strong", "weak"):
        raise ValueError("mode must be 'strong' or 'weak'")
    _require_distance(gamma)
    cfg = query.solver_config()
    from .solver import Priority  # local to avoid cycle noise

    measured: dict = {"n_total": 0, "max_excursion": 0.0}
    notes = []
    if mode == "weak":
        notes.append("weak invariance is selection-wise: verified under the "
                     "available solver priorities only")
    witness = None
    clause = None
    for i in range(query.sample_budget):
        rng = _rng(query.seed, "inv", i)
        x0 = _draw_initial(sys, rng, near=gamma, delta=0.0, window=query.window,
                           sampler=query.sampler, tol=cfg.tol_set)
        if x0 is None:
            continue
        measured["n_total"] += 1
        arc = solve(sys, x0, cfg)
        if query.arc_hook:
            query.arc_hook(sys, arc)
        exc = arc.sup_distance(gamma)
        if exc > query.inv_tol and mode == "weak":
            alt = (Priority.FLOW if cfg.priority is Priority.JUMP
                   else Priority.JUMP)
            arc = solve(sys, x0, cfg.replace(priority=alt))
            if query.arc_hook:
                query.arc_hook(sys, arc)
            exc = arc.sup_distance(gamma)
        measured["max_excursion"] = max(measured["max_excursion"], exc)
        if exc > query.inv_tol:
            witness = arc
            clause = {"type": "invariance_exit", "mode": mode,
                      "excursion": exc, "inv_tol": query.inv_tol,
                      "x0": arc.meta["x0"]}
            break
    verdict = FALSIFIED if witness is not None else CONSISTENT
    prop = ("StrongForwardInvariance" if mode == "strong"
            else "WeakForwardInvariance")
    return AnalysisReport(verdict, prop, measured,
                          {**query.provenance(), "system": sys.name,
                           "target": gamma.name},
                          witness, clause, notes)


def check_boundedness(sys: HybridSystem, query: PropertyQuery) -> AnalysisReport:
    """All sampled solutions stay within the declared bound radius."""
    cfg = query.solver_config()
    bound_radius = query.effective_bound_radius()
    measured: dict = {"n_total": 0, "max_sup_norm": 0.0,
                      "bound_radius": bound_radius}
    witness = None
    clause = None
    for i in range(query.sample_budget):
        rng = _rng(query.seed, "bnd", i)
        x0 = _draw_initial(sys, rng, tol=cfg.tol_set,
                           **_region_sampler(sys, query))
        if x0 is None:
            continue
        measured["n_total"] += 1
        arc = solve(sys, x0, cfg)
        if query.arc_hook:
            query.arc_hook(sys, arc)
        supn = arc.sup_norm()
        measured["max_sup_norm"] = max(measured["max_sup_norm"], supn)
        if supn > bound_radius:
            witness = arc
            clause = {"type": "unbounded", "sup_norm": supn,
                      "bound_radius": bound_radius, "x0": arc.meta["x0"]}
            break
    verdict = FALSIFIED if witness is not None else CONSISTENT
    return AnalysisReport(verdict, "Boundedness", measured,
                          {**query.provenance(), "system": sys.name},
                          witness, clause)


def check_output_convergence(osys: OutputSystem, query: PropertyQuery) -> AnalysisReport:
    """Complete sampled arcs must end with |h(x)| <= conv_tol."""
    sys = osys.sys
    cfg = query.solver_config()
    measured: dict = {"n_total": 0, "max_terminal_output": 0.0}
    witness = None
    clause = None
    for i in range(query.sample_budget):
        rng = _rng(query.seed, "out", i)
        x0 = _draw_initial(sys, rng, tol=cfg.tol_set,
                           **_region_sampler(sys, query))
        if x0 is None:
            continue
        measured["n_total"] += 1
        arc = solve(sys, x0, cfg)
        if query.arc_hook:
            query.arc_hook(sys, arc)
        if not (is_complete(arc) or arc.termination is Termination.ZENO):
            continue
        hval = float(np.linalg.norm(osys.output(arc.final_state())))
        measured["max_terminal_output"] = max(measured["max_terminal_output"], hval)
        if hval > query.conv_tol:
            witness = arc
            clause = {"type": "output_not_converged", "terminal_output": hval,
                      "conv_tol": query.conv_tol, "x0": arc.meta["x0"]}
            break
    verdict = FALSIFIED if witness is not None else CONSISTENT
    return AnalysisReport(verdict, "OutputConvergence", measured,
                          {**query.provenance(), "system": sys.name},
                          witness, clause)


# ---------------------------------------------------------------------------
# relative properties and reduction reports
# ---------------------------------------------------------------------------


def _relative_reports(sys: HybridSystem, g1: ClosedSet, g2: ClosedSet | None,
                      query: PropertyQuery, scope: str,
                      tag: str = "rel") -> dict[str, AnalysisReport]:
    """(G)AS of g1 relative to g2: stability plus attractivity of g1 for the
    restriction, sampling through g2 (projection when available)."""
    if g2 is None:
        rsys, project, amb_sampler = sys, None, None
    else:
        rsys = restrict(sys, g2)
        project = g2.project if g2.can_project else None
        amb_sampler = (lambda rng, n: g2.sample(rng, n, query.window)) \
            if g2.can_sample else None
    if g2 is not None and amb_sampler is None and project is not None \
            and query.window is not None:
        w = query.window
        amb_sampler = lambda rng, n: np.atleast_2d(g2.project(w.uniform(rng, n)))
    sub_seed = query.replace(seed=int(_rng(query.seed, tag).integers(2 ** 31)),
                             near=None, sampler=None)
    stab = check_stability(rsys, g1, sub_seed, project=project)
    if scope == "global":
        attr_q = sub_seed.replace(sampler=amb_sampler)
        attr = check_attractivity(rsys, g1, attr_q, project=project)
    else:
        attr_q = sub_seed.replace(
            near=g1, near_radius=query.near_radius or max(query.eps_grid))
        attr = check_attractivity(rsys, g1, attr_q, project=project)
    return {"stability": stab, "attractivity": attr}


@dataclass
class TheoremCheck:
    """Observed status of one implication: hypothesis bundle vs conclusion."""

    name: str
    hypotheses: dict[str, str]
    conclusion: dict[str, str]
    hypotheses_consistent: bool
    conclusion_consistent: bool
    sound: bool

    def to_json_dict(self) -> dict:
        return {
            "theorem": self.name,
            "hypotheses": dict(self.hypotheses),
            "conclusion": dict(self.conclusion),
            "hypotheses_consistent": self.hypotheses_consistent,
            "conclusion_consistent": self.conclusion_consistent,
            "sound": self.sound,
        }


@dataclass
class ReductionReport:
    """All sub-reports of a reduction check plus per-theorem consistency."""

    scope: str
    sub_reports: dict[str, AnalysisReport]
    conclusions: dict[str, AnalysisReport]
    theorems: list[TheoremCheck]
    provenance: dict

    @property
    def all_consistent(self) -> bool:
        return all(r.consistent for r in self.sub_reports.values()) and \
            all(r.consistent for r in self.conclusions.values())

    @property
    def sound(self) -> bool:
        return all(t.sound for t in self.theorems)

    def reports(self) -> dict[str, AnalysisReport]:
        out = dict(self.sub_reports)
        out.update({f"conclusion_{k}": v for k, v in self.conclusions.items()})
        return out

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "scope": self.scope,
            "query": _plain(self.provenance),
            "sub_reports": {k: v.to_json_dict() for k, v in self.sub_reports.items()},
            "conclusions": {k: v.to_json_dict() for k, v in self.conclusions.items()},
            "theorems": [t.to_json_dict() for t in self.theorems],
            "all_consistent": self.all_consistent,
            "sound": self.sound,
        }


def _theorem(name: str, hyp_reports: dict[str, AnalysisReport],
             conc_reports: dict[str, AnalysisReport]) -> TheoremCheck:
    hyp_ok = all(r.consistent for r in hyp_reports.values())
    conc_ok = all(r.consistent for r in conc_reports.values())
    # every witness we produce starts inside our own sampled region, so a
    # falsified conclusion under all-consistent hypotheses is a soundness hit
    sound = not (hyp_ok and not conc_ok)
    return TheoremCheck(
        name,
        {k: v.verdict for k, v in hyp_reports.items()},
        {k: v.verdict for k, v in conc_reports.items()},
        hyp_ok, conc_ok, sound,
    )


def reduction_report(sys: HybridSystem, g1: ClosedSet, g2: ClosedSet,
                     query: PropertyQuery, scope: str = "local",
                     r: float | None = None) -> ReductionReport:
    """Two-set reduction: relative asymptotic stability on g2, the local
    stability/attractivity conditions near g1, and the conclusion checks on
    g1, with the implication directions evaluated for soundness."""
    if scope not in ("local", "global"):
        raise ValueError("scope must be 'local' or 'global'")
    r = r if r is not None else (query.near_radius or max(query.eps_grid))
    sub: dict[str, AnalysisReport] = {}
    rel = _relative_reports(sys, g1, g2, query, scope)
    sub["relative_stability"] = rel["stability"]
    sub["relative_attractivity"] = rel["attractivity"]
    sub["local_stability_near"] = check_local_stability_near(
        sys, g1, g2, r, query.replace(seed=_rng(query.seed, "lsn-seed").integers(2 ** 31)))
    if scope == "local":
        q_near = query.replace(near=g1, near_radius=r,
                               seed=_rng(query.seed, "lan-seed").integers(2 ** 31))
        sub["local_attractivity_near"] = check_attractivity(sys, g2, q_near)
    else:
        q_g2 = query.replace(near=None,
                             seed=_rng(query.seed, "ga2-seed").integers(2 ** 31))
        sub["global_attractivity_gamma2"] = check_attractivity(sys, g2, q_g2)
        sub["boundedness"] = check_boundedness(
            sys, query.replace(seed=_rng(query.seed, "bnd-seed").integers(2 ** 31)))

    conclusions = {
        "stability": check_stability(
            sys, g1, query.replace(seed=_rng(query.seed, "conc-s").integers(2 ** 31))),
        "attractivity": check_attractivity(
            sys, g1,
            query.replace(near=None if scope == "global" else g1,
                          near_radius=r,
                          seed=_rng(query.seed, "conc-a").integers(2 ** 31))),
    }

    if scope == "local":
        theorems = [
            _theorem("stability",
                     {k: sub[k] for k in ("relative_stability",
                                          "relative_attractivity",
                                          "local_stability_near")},
                     {"stability": conclusions["stability"]}),
            _theorem("asymptotic_stability", dict(sub), dict(conclusions)),
        ]
    else:
        attr_hyps = {k: sub[k] for k in ("relative_stability",
                                         "relative_attractivity",
                                         "global_attractivity_gamma2",
                                         "boundedness")}
        theorems = [
            _theorem("attractivity", attr_hyps,
                     {"attractivity": conclusions["attractivity"]}),
            _theorem("global_asymptotic_stability", dict(sub), dict(conclusions)),
        ]

    return ReductionReport(scope, sub, conclusions, theorems,
                           {**query.provenance(), "system": sys.name,
                            "gamma1": g1.name, "gamma2": g2.name, "r": r})


def recursive_reduction_report(sys: HybridSystem, chain: list[ClosedSet],
                               query: PropertyQuery, scope: str = "local",
                               nesting_samples: int = 64) -> ReductionReport:
    """Chain reduction: pairwise relative (G)AS along nested targets, plus
    boundedness at global scope, against the conclusion on the innermost set."""
    if scope not in ("local", "global"):
        raise ValueError("scope must be 'local' or 'global'")
    if not chain:
        raise ValueError("empty chain")
    # sampled nesting check
    rng = _rng(query.seed, "nest")
    for i in range(len(chain) - 1):
        if not chain[i].can_sample:
            continue
        pts = chain[i].sample(rng, nesting_samples, query.window)
        ok = np.asarray(chain[i + 1].member(pts, 1e-6), dtype=bool)
        if not ok.all():
            bad = pts[~ok][0]
            raise ChainNotNested(
                f"sampled point of {chain[i].name} lies outside "
                f"{chain[i + 1].name}: {bad.tolist()}"
            )

    sub: dict[str, AnalysisReport] = {}
    links = []
    for i, g in enumerate(chain):
        amb = chain[i + 1] if i + 1 < len(chain) else None
        rel = _relative_reports(sys, g, amb, query, scope, tag=f"link{i}")
        label = amb.name if amb is not None else "statespace"
        sub[f"link{i + 1}_stability_rel_{label}"] = rel["stability"]
        sub[f"link{i + 1}_attractivity_rel_{label}"] = rel["attractivity"]
        links.append(rel)
    if scope == "global":
        sub["boundedness"] = check_boundedness(
            sys, query.replace(seed=_rng(query.seed, "bnd-seed").integers(2 ** 31)))

    g1 = chain[0]
    conclusions = {
        "stability": check_stability(
            sys, g1, query.replace(seed=_rng(query.seed, "conc-s").integers(2 ** 31))),
        "attractivity": check_attractivity(
            sys, g1,
            query.replace(near=None if scope == "global" else g1,
                          near_radius=query.near_radius or max(query.eps_grid),
                          seed=_rng(query.seed, "conc-a").integers(2 ** 31))),
    }

    as_hyps = dict(sub)
    attr_hyps = {k: v for k, v in sub.items()
                 if not k.startswith(f"link{len(chain)}_stability")}
    theorems = [
        _theorem("asymptotic_stability", as_hyps, dict(conclusions)),
        _theorem("attractivity", attr_hyps,
                 {"attractivity": conclusions["attractivity"]}),
    ]
    return ReductionReport(scope, sub, conclusions, theorems,
                           {**query.provenance(), "system": sys.name,
                            "chain": [g.name for g in chain]})


def detectability_report(osys: OutputSystem, g1: ClosedSet,
                         g2_declared: ClosedSet, query: PropertyQuery) -> ReductionReport:
    """Output-zeroing bundle: boundedness, output convergence, relative GAS of
    g1 inside the declared zero-output invariant set, and the global
    attractivity conclusion on g1."""
    sys = osys.sys
    sub: dict[str, AnalysisReport] = {}
    sub["boundedness"] = check_boundedness(
        sys, query.replace(seed=_rng(query.seed, "det-b").integers(2 ** 31)))
    sub["output_convergence"] = check_output_convergence(
        osys, query.replace(seed=_rng(query.seed, "det-o").integers(2 ** 31)))
    rel = _relative_reports(sys, g1, g2_declared, query, "global", tag="det")
    sub["relative_stability"] = rel["stability"]
    sub["relative_attractivity"] = rel["attractivity"]
    conclusions = {
        "global_attractivity": check_attractivity(
            sys, g1, query.replace(near=None,
                                   seed=_rng(query.seed, "det-c").integers(2 ** 31))),
    }
    theorems = [_theorem("detectability_attractivity", dict(sub), dict(conclusions))]
    return ReductionReport("global", sub, conclusions, theorems,
                           {**query.provenance(), "system": sys.name,
                            "gamma1": g1.name,
                            "gamma2_declared": g2_declared.name})


# ---------------------------------------------------------------------------
# witness replay
# ---------------------------------------------------------------------------


def replay_clause(arc: HybridArc, clause: dict, gamma: ClosedSet | None,
                  g2: ClosedSet | None = None,
                  output: Callable | None = None) -> bool:
    """Re-evaluate a witness clause on a stored arc; True iff the recorded
    violation reproduces."""
    kind = clause.get("type")
    if kind == "stability_escape":
        return arc.sup_distance(gamma) > clause["eps"]
    if kind == "attractivity_terminal":
        return arc.terminal_distance(gamma) > clause["conv_tol"]
    if kind == "unbounded":
        return arc.sup_norm() > clause["bound_radius"]
    if kind == "local_stability_escape":
        return _prefix_escape(arc, gamma, g2, clause["r"], clause["eps"]) is not None
    if kind == "invariance_exit":
        return arc.sup_distance(gamma) > clause["inv_tol"]
    if kind == "output_not_converged":
        if output is None:
            raise ValueError("replaying an output clause needs the output map")
        val = float(np.linalg.norm(np.atleast_1d(output(arc.final_state()))))
        return val > clause["conv_tol"]
    raise ValueError(f"unknown witness clause type {kind!r}")


def summarize(report) -> str:
    """Human-readable one-screen summary of an analysis or reduction report."""
    lines = []
    if isinstance(report, AnalysisReport):
        lines.append(f"{report.prop}: {report.verdict}")
        for k, v in report.measured.items():
            lines.append(f"  {k}: {v}")
        if report.witness_clause:
            lines.append(f"  witness: {report.witness_clause}")
        for n in report.notes:
            lines.append(f"  note: {n}")
    elif isinstance(report, ReductionReport):
        lines.append(f"reduction report (scope={report.scope})")
        for k, v in report.sub_reports.items():
            lines.append(f"  [hyp] {k}: {v.verdict}")
        for k, v in report.conclusions.items():
            lines.append(f"  [conclusion] {k}: {v.verdict}")
        for t in report.theorems:
            status = "sound" if t.sound else "SOUNDNESS VIOLATION"
            lines.append(
                f"  [theorem {t.name}] hypotheses "
                f"{'consistent' if t.hypotheses_consistent else 'falsified'}, "
                f"conclusion "
                f"{'consistent' if t.conclusion_consistent else 'falsified'} "
                f"-> {status}")
    else:
        raise TypeError(f"cannot summarize {type(report)!r}")
    return "\n".join(lines)
