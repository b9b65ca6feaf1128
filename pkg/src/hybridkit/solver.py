"""Hybrid solver: event-located flow integration plus jump application.

The continuous stages ride on scipy's adaptive RK45 (Dormand-Prince, dense
output); everything hybrid -- flow-set exit location, jump application,
flow/jump priority on C n D, horizons, and the Zeno guard -- is implemented
here.  Exits are located by bisecting flow-set membership on the dense output,
which subsumes sign bisection of a scalar guard and also copes with band sets
and boundary starts.

Determinism contract: identical (system, x0, config) produce bitwise-identical
arcs; no randomness is involved anywhere in the solve path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace as _dc_replace

import numpy as np
from scipy.integrate import RK45

from .core import HybridArc, HybridSystem, Termination
from .errors import (
    DimensionMismatch,
    FlowMapEvaluationFailure,
    InitialConditionOutsideCD,
)

_INTERIOR_PROBES = 3  # dense-output membership probes per accepted step
_MIN_SUBDIV = 6       # stored samples per accepted step, besides the dt cap


class Priority(enum.Enum):
    JUMP = "jump"
    FLOW = "flow"


@dataclass(frozen=True)
class SolverConfig:
    """Step control, event tolerance, horizons, priority, and Zeno guards.

    ``zeno_k`` consecutive flow intervals shorter than ``zeno_dt_min`` trip the
    Zeno guard.  Stored sample spacing is at most ``store_max_dt`` and at most
    one sixth of each accepted integrator step, which bounds the
    finite-difference residual floor seen by the independent solution checker.
    """

    t_max: float = 50.0
    j_max: int = 200
    priority: Priority = Priority.JUMP
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float | None = None  # None -> 0.01 * t_max
    event_tol: float = 1e-10
    zeno_k: int = 50
    zeno_dt_min: float = 1e-7
    tol_set: float = 1e-9
    store_max_dt: float = 0.05

    def __post_init__(self):
        for field_name in ("t_max", "rtol", "atol", "event_tol", "tol_set", "store_max_dt"):
            if getattr(self, field_name) <= 0:
                raise ValueError(f"{field_name} must be strictly positive")
        if self.j_max < 1:
            raise ValueError("j_max must be >= 1")
        if self.zeno_k < 1 or self.zeno_dt_min < 0:
            raise ValueError("invalid zeno window")
        if self.max_step is not None and self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if isinstance(self.priority, str):
            object.__setattr__(self, "priority", Priority(self.priority))

    @property
    def effective_max_step(self) -> float:
        return self.max_step if self.max_step is not None else 0.01 * self.t_max

    def replace(self, **kw) -> "SolverConfig":
        return _dc_replace(self, **kw)

    def to_config(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["priority"] = self.priority.value
        return d

    @staticmethod
    def from_config(cfg: dict) -> "SolverConfig":
        cfg = dict(cfg)
        if "priority" in cfg:
            cfg["priority"] = Priority(cfg["priority"])
        return SolverConfig(**cfg)


@dataclass
class _FlowEnd:
    reason: str  # "exit" | "horizon" | "failed"
    t: float
    x: np.ndarray
    bracket_gap: float = 0.0


def _flow_segment(sys: HybridSystem, t0: float, x0: np.ndarray, cfg: SolverConfig):
    """Integrate the flow from (t0, x0) until flow-set exit, t_max, or failure.

    Returns (stored_times, stored_states, _FlowEnd); the stored samples exclude
    (t0, x0) itself and end exactly at the segment end point.
    """
    member = lambda pts: np.asarray(sys.flow_set.member(pts, cfg.tol_set), dtype=bool)

    fx0 = np.asarray(sys.flow_map(x0), dtype=float)
    if fx0.shape != x0.shape:
        raise DimensionMismatch(
            f"flow map returned shape {fx0.shape} for state of shape {x0.shape}"
        )
    if not np.all(np.isfinite(fx0)):
        raise FlowMapEvaluationFailure(
            f"flow map non-finite at segment start (t={t0:.6g})"
        )

    rk = RK45(
        lambda t, y: sys.flow_map(y),
        t0,
        x0,
        t_bound=cfg.t_max,
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=cfg.effective_max_step,
    )

    times: list[float] = []
    states: list[np.ndarray] = []

    def store(dense, a: float, b: float):
        if b <= a:
            return
        # spacing tracks the integrator's own step, so the finite-difference
        # residual floor of the solution checker scales with local dynamics
        m = max(_MIN_SUBDIV, math.ceil((b - a) / cfg.store_max_dt))
        ts = np.linspace(a, b, m + 1)[1:]
        xs = dense(ts).T
        times.extend(ts.tolist())
        states.extend(np.asarray(xs, dtype=float))

    def segment_end(reason: str, gap: float = 0.0) -> tuple[list, list, _FlowEnd]:
        if times:
            return times, states, _FlowEnd(reason, times[-1],
                                           np.asarray(states[-1], dtype=float), gap)
        return times, states, _FlowEnd(reason, t0, np.array(x0, dtype=float), gap)

    t_prev = t0
    while True:
        if rk.status == "finished":
            return segment_end("horizon")
        rk.step()
        if rk.status == "failed" or not np.all(np.isfinite(rk.y)):
            return segment_end("failed")
        dense = rk.dense_output()
        probes = np.linspace(t_prev, rk.t, _INTERIOR_PROBES + 2)[1:]
        probe_states = dense(probes).T
        inside = member(probe_states)
        if inside.all():
            store(dense, t_prev, rk.t)
            t_prev = rk.t
            continue
        # bracket the first exit and bisect membership down to event_tol / 8,
        # leaving slack in the 2*event_tol budgets downstream
        k = int(np.argmin(inside))  # first False
        lo = t_prev if k == 0 else float(probes[k - 1])
        hi = float(probes[k])
        tol_bis = cfg.event_tol / 8.0
        while hi - lo > tol_bis:
            mid = 0.5 * (lo + hi)
            if member(dense(mid)):
                lo = mid
            else:
                hi = mid
        if lo > t_prev:
            store(dense, t_prev, lo)  # stored samples end exactly at lo
        return segment_end("exit", gap=hi - lo)


def solve(sys: HybridSystem, x0, cfg: SolverConfig | None = None) -> HybridArc:
    """Compute one maximal-up-to-horizon hybrid arc from x0.

    Raises InitialConditionOutsideCD when x0 sits outside C u D (within
    tol_set) and FlowMapEvaluationFailure when F cannot be evaluated at the
    start of a flow segment; numerical breakdown mid-flow terminates the arc
    with Termination.NUMERICAL_FAILURE instead.
    """
    cfg = cfg or SolverConfig()
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    if x.shape != (sys.dim,):
        raise DimensionMismatch(f"x0 has shape {x.shape}, system dim is {sys.dim}")
    in_c = bool(sys.flow_set.member(x, cfg.tol_set))
    in_d = bool(sys.jump_set.member(x, cfg.tol_set))
    if not (in_c or in_d):
        raise InitialConditionOutsideCD(
            f"x0 = {x.tolist()} is outside C u D "
            f"(distances {float(sys.flow_set.distance(x)):.3e} / "
            f"{float(sys.jump_set.distance(x)):.3e})"
        )

    interval_times: list[list[float]] = [[0.0]]
    interval_states: list[list[np.ndarray]] = [[x.copy()]]
    events: list[dict] = []
    t = 0.0
    j = 0
    zeno_run = 0
    termination: Termination | None = None

    while termination is None:
        in_c = bool(sys.flow_set.member(x, cfg.tol_set))
        in_d = bool(sys.jump_set.member(x, cfg.tol_set))
        take_jump = in_d and (cfg.priority is Priority.JUMP or not in_c)

        if not take_jump:
            if not in_c:
                # not in C, not jumping: the state escaped C u D
                termination = Termination.ESCAPED
                break
            if t >= cfg.t_max:
                termination = Termination.COMPLETE_T
                break
            seg_t, seg_x, end = _flow_segment(sys, t, x, cfg)
            interval_times[-1].extend(seg_t)
            interval_states[-1].extend(seg_x)
            t, x = end.t, end.x
            if end.reason == "horizon":
                termination = Termination.COMPLETE_T
                break
            if end.reason == "failed":
                termination = Termination.NUMERICAL_FAILURE
                break
            events.append({"kind": "flow_exit", "t": t, "j": j,
                           "bracket_gap": end.bracket_gap})
            if bool(sys.jump_set.member(x, cfg.tol_set)):
                take_jump = True
            elif bool(sys.flow_set.member(x, cfg.tol_set)):
                termination = Termination.NOT_EXTENDABLE
                break
            else:
                termination = Termination.ESCAPED
                break

        if take_jump:
            # close the current flow interval, applying the Zeno accounting
            duration = interval_times[-1][-1] - interval_times[-1][0]
            zeno_run = zeno_run + 1 if duration < cfg.zeno_dt_min else 0
            if zeno_run >= cfg.zeno_k:
                termination = Termination.ZENO
                break
            x_new = np.atleast_1d(np.asarray(sys.jump_map(x), dtype=float))
            if x_new.shape != x.shape:
                raise DimensionMismatch(
                    f"jump map returned shape {x_new.shape} for state {x.shape}"
                )
            events.append({"kind": "jump", "t": t, "j": j})
            j += 1
            interval_times.append([t])
            interval_states.append([x_new.copy()])
            x = x_new
            if not np.all(np.isfinite(x)):
                termination = Termination.NUMERICAL_FAILURE
                break
            if j >= cfg.j_max:
                termination = Termination.COMPLETE_J
                break
            if not bool(sys.in_cd(x, cfg.tol_set)):
                termination = Termination.ESCAPED
                break

    return HybridArc(
        [np.asarray(ts) for ts in interval_times],
        [np.vstack(xs) for xs in interval_states],
        termination,
        meta={
            "system": sys.name,
            "x0": interval_states[0][0].tolist(),
            "events": events,
            "termination": termination.value,
            "config": cfg.to_config(),
        },
    )


@dataclass(frozen=True)
class SolveError:
    """Captured per-element failure from solve_batch."""

    index: int
    x0: np.ndarray
    error: Exception


def solve_batch(sys: HybridSystem, x0s, cfg: SolverConfig | None = None,
                on_error: str = "raise") -> list:
    """Elementwise solve, order preserving, independent of any partitioning.

    With on_error="collect", failed entries appear as SolveError records in
    place of arcs; "raise" propagates the first failure.
    """
    if on_error not in ("raise", "collect"):
        raise ValueError("on_error must be 'raise' or 'collect'")
    out = []
    for i, x0 in enumerate(x0s):
        try:
            out.append(solve(sys, x0, cfg))
        except Exception as exc:  # noqa: BLE001 - collected per element
            if on_error == "raise":
                raise
            out.append(SolveError(i, np.asarray(x0, dtype=float), exc))
    return out
