"""PID gain tuning against simulated step-response cost.

A coarse grid over the gain box seeds a bounded Nelder-Mead simplex search.
Everything is deterministic for a given spec: fixed grid order, tie-breaks
by lexicographic gain comparison, and a pinned noise seed for the
underlying simulations.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from buoysim.control import ControlGains
from buoysim.engine import run_scenario
from buoysim.scenario import (
    Scenario,
    ScenarioValidationError,
    scenario_from_dict,
    scenario_to_dict,
)

__all__ = [
    "Evaluation",
    "FAILURE_COST",
    "GainBounds",
    "TuneResult",
    "TuneSpec",
    "TuneWeights",
    "UNATTAINED_SETTLING_PENALTY_S",
    "evaluate_gains",
    "load_tune_spec",
    "tune",
    "write_trace_csv",
    "write_tune_result",
]

# Charged in place of the settling term when the trajectory never settles;
# large enough to dominate any attainable settling time.
UNATTAINED_SETTLING_PENALTY_S = 1000.0
FAILURE_COST = 1e9

# Standard simplex coefficients: reflection, expansion, contraction, shrink.
NM_ALPHA, NM_GAMMA, NM_RHO, NM_SIGMA = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True, slots=True)
class GainBounds:
    kp: tuple[float, float] = (0.5, 20.0)
    ki: tuple[float, float] = (0.0, 2.0)
    kd: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} bounds: min {lo} > max {hi}")
            if lo < 0.0:
                raise ValueError(f"{name} bounds must be >= 0")

    def clip(self, point: Sequence[float]) -> tuple[float, float, float]:
        (kp_lo, kp_hi), (ki_lo, ki_hi), (kd_lo, kd_hi) = self.kp, self.ki, self.kd
        return (
            min(max(point[0], kp_lo), kp_hi),
            min(max(point[1], ki_lo), ki_hi),
            min(max(point[2], kd_lo), kd_hi),
        )


@dataclass(frozen=True, slots=True)
class TuneWeights:
    overshoot: float = 1.0  # per mm
    settling: float = 5.0  # per s
    itae: float = 0.1  # per normalized ITAE

    def __post_init__(self) -> None:
        if min(self.overshoot, self.settling, self.itae) < 0.0:
            raise ValueError("weights must be >= 0")
        if self.overshoot == self.settling == self.itae == 0.0:
            raise ValueError("at least one weight must be positive")


@dataclass(frozen=True, slots=True)
class TuneSpec:
    scenario_template: Scenario
    bounds: GainBounds = field(default_factory=GainBounds)
    weights: TuneWeights = field(default_factory=TuneWeights)
    budget: int = 300
    seed: int = 0

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


@dataclass(frozen=True, slots=True)
class Evaluation:
    gains: tuple[float, float, float]
    cost: float
    overshoot: float | None = None  # mm
    settling: float | None = None  # s
    itae_norm: float | None = None
    failed: bool = False


@dataclass(frozen=True, slots=True)
class TuneResult:
    best_gains: tuple[float, float, float]
    best_cost: float
    trace: list[Evaluation]
    truncated: bool


def _with_gains(scenario: Scenario, gains: tuple[float, float, float]) -> Scenario:
    doc = scenario_to_dict(scenario)
    doc["gains"] = {"kp": gains[0], "ki": gains[1], "kd": gains[2]}
    return scenario_from_dict(doc)


def _evaluate(gains: tuple[float, float, float], spec: TuneSpec) -> Evaluation:
    scenario = spec.scenario_template
    try:
        result = run_scenario(_with_gains(scenario, gains), seed=spec.seed)
        if not result.metrics:
            raise ValueError("tuning scenario produced no metrics segment")
        m = result.metrics[0]
    except (ValueError, ScenarioValidationError):
        return Evaluation(gains=gains, cost=FAILURE_COST, failed=True)
    step_mm = abs(scenario.initial_depth - m.target) * 1000.0
    span = m.t_end - m.t_start
    norm = step_mm * span * span
    itae_norm = m.itae / norm if norm > 0 else 0.0
    settling = m.settling_time_5pct
    w = spec.weights
    cost = (
        w.overshoot * m.overshoot
        + w.settling * (settling if settling is not None else UNATTAINED_SETTLING_PENALTY_S)
        + w.itae * itae_norm
    )
    return Evaluation(
        gains=gains, cost=cost, overshoot=m.overshoot, settling=settling, itae_norm=itae_norm
    )


def evaluate_gains(gains: ControlGains, spec: TuneSpec) -> float:
    """Cost of one gain set under the spec's weights (lower is better)."""
    point = spec.bounds.clip((gains.kp, gains.ki, gains.kd))
    if point != (gains.kp, gains.ki, gains.kd):
        raise ValueError("gains outside the tuning bounds")
    return _evaluate(point, spec).cost


def _grid_points(bounds: GainBounds) -> list[tuple[float, float, float]]:
    # 5 x 4 x 4 seed grid: kp log-spaced (it spans a decade-plus), ki and kd
    # linear; collapsed bounds dedupe to fewer points.
    kp_lo, kp_hi = bounds.kp
    if kp_lo > 0.0 and kp_hi > kp_lo:
        kp_values = [
            math.exp(math.log(kp_lo) + i * (math.log(kp_hi) - math.log(kp_lo)) / 4)
            for i in range(5)
        ]
    elif kp_hi > kp_lo:
        kp_values = [kp_lo + i * (kp_hi - kp_lo) / 4 for i in range(5)]
    else:
        kp_values = [kp_lo]
    ki_lo, ki_hi = bounds.ki
    ki_values = [ki_lo + i * (ki_hi - ki_lo) / 3 for i in range(4)] if ki_hi > ki_lo else [ki_lo]
    kd_lo, kd_hi = bounds.kd
    kd_values = [kd_lo + i * (kd_hi - kd_lo) / 3 for i in range(4)] if kd_hi > kd_lo else [kd_lo]
    points = []
    seen = set()
    for kp in kp_values:
        for ki in ki_values:
            for kd in kd_values:
                p = (kp, ki, kd)
                if p not in seen:
                    seen.add(p)
                    points.append(p)
    return points


def _order_key(entry: tuple[tuple[float, float, float], float]) -> tuple:
    point, cost = entry
    return (cost, point)


def tune(
    spec: TuneSpec,
    objective: Callable[[tuple[float, float, float]], float] | None = None,
) -> TuneResult:
    """Grid seed plus Nelder-Mead refinement within the gain bounds.

    `objective` replaces the simulation-backed cost, used for self-checks
    against problems with known optima.  The returned trace holds every
    evaluation in order; best cost is non-increasing along the search.
    """
    trace: list[Evaluation] = []

    def measure(point: tuple[float, float, float]) -> float:
        point = spec.bounds.clip(point)
        if objective is not None:
            cost = float(objective(point))
            trace.append(Evaluation(gains=point, cost=cost))
            return cost
        evaluation = _evaluate(point, spec)
        trace.append(evaluation)
        return evaluation.cost

    evaluated: list[tuple[tuple[float, float, float], float]] = []

    def budget_left() -> int:
        return spec.budget - len(trace)

    for point in _grid_points(spec.bounds):
        if budget_left() <= 0:
            break
        evaluated.append((point, measure(point)))

    # Nelder-Mead from the grid optimum.
    if budget_left() > 0 and evaluated:
        best_point = min(evaluated, key=_order_key)[0]
        ranges = [hi - lo for lo, hi in (spec.bounds.kp, spec.bounds.ki, spec.bounds.kd)]
        simplex: list[tuple[tuple[float, float, float], float]] = [
            (best_point, min(evaluated, key=_order_key)[1])
        ]
        for dim in range(3):
            if ranges[dim] == 0.0:
                continue
            vertex = list(best_point)
            step = 0.15 * ranges[dim]
            vertex[dim] = vertex[dim] + step
            clipped = spec.bounds.clip(vertex)
            if clipped == best_point:  # stepped out of the box; go the other way
                vertex[dim] = best_point[dim] - step
                clipped = spec.bounds.clip(vertex)
            if budget_left() <= 0:
                break
            simplex.append((clipped, measure(clipped)))

        while budget_left() > 0 and len(simplex) >= 2:
            simplex.sort(key=_order_key)
            spread = max(abs(v[1] - simplex[0][1]) for v in simplex)
            if spread < 1e-9:
                break
            worst_point, worst_cost = simplex[-1]
            centroid = tuple(
                sum(v[0][dim] for v in simplex[:-1]) / (len(simplex) - 1) for dim in range(3)
            )
            reflected = spec.bounds.clip(
                tuple(centroid[d] + NM_ALPHA * (centroid[d] - worst_point[d]) for d in range(3))
            )
            r_cost = measure(reflected)
            if r_cost < simplex[0][1] and budget_left() > 0:
                expanded = spec.bounds.clip(
                    tuple(centroid[d] + NM_GAMMA * (centroid[d] - worst_point[d]) for d in range(3))
                )
                e_cost = measure(expanded)
                simplex[-1] = (expanded, e_cost) if e_cost < r_cost else (reflected, r_cost)
            elif r_cost < simplex[-2][1]:
                simplex[-1] = (reflected, r_cost)
            elif budget_left() > 0:
                contracted = spec.bounds.clip(
                    tuple(centroid[d] + NM_RHO * (worst_point[d] - centroid[d]) for d in range(3))
                )
                c_cost = measure(contracted)
                if c_cost < worst_cost:
                    simplex[-1] = (contracted, c_cost)
                else:  # shrink toward the best vertex
                    best_vertex = simplex[0][0]
                    new_simplex = [simplex[0]]
                    for point, _ in simplex[1:]:
                        if budget_left() <= 0:
                            break
                        shrunk = spec.bounds.clip(
                            tuple(
                                best_vertex[d] + NM_SIGMA * (point[d] - best_vertex[d])
                                for d in range(3)
                            )
                        )
                        new_simplex.append((shrunk, measure(shrunk)))
                    simplex = new_simplex

    best = min(((e.gains, e.cost) for e in trace), key=_order_key)
    # Truncated means the budget ran out before the search stopped on its own.
    return TuneResult(
        best_gains=best[0], best_cost=best[1], trace=trace, truncated=len(trace) >= spec.budget
    )


# -- serialization -----------------------------------------------------------


def load_tune_spec(path: str | Path) -> TuneSpec:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("tune spec: expected a JSON object")
    unknown = set(data) - {"schema_version", "scenario", "bounds", "weights", "budget", "seed"}
    if unknown:
        raise ValueError(f"tune spec: unknown fields {sorted(unknown)}")
    scenario = scenario_from_dict(data["scenario"])
    bounds_doc = data.get("bounds", {})
    bounds = GainBounds(
        kp=tuple(bounds_doc.get("kp", (0.5, 20.0))),
        ki=tuple(bounds_doc.get("ki", (0.0, 2.0))),
        kd=tuple(bounds_doc.get("kd", (0.0, 1.0))),
    )
    weights_doc = data.get("weights", {})
    weights = TuneWeights(
        overshoot=weights_doc.get("overshoot", 1.0),
        settling=weights_doc.get("settling", 5.0),
        itae=weights_doc.get("itae", 0.1),
    )
    return TuneSpec(
        scenario_template=scenario,
        bounds=bounds,
        weights=weights,
        budget=data.get("budget", 300),
        seed=data.get("seed", 0),
    )


def _trace_rows(result: TuneResult) -> list[dict[str, Any]]:
    return [
        {
            "index": i,
            "kp": e.gains[0],
            "ki": e.gains[1],
            "kd": e.gains[2],
            "cost": e.cost,
            "overshoot_mm": e.overshoot,
            "settling_s": e.settling,
            "itae_norm": e.itae_norm,
            "failed": e.failed,
        }
        for i, e in enumerate(result.trace)
    ]


def write_tune_result(result: TuneResult, path: str | Path) -> None:
    doc = {
        "schema_version": 1,
        "best_gains": {
            "kp": result.best_gains[0],
            "ki": result.best_gains[1],
            "kd": result.best_gains[2],
        },
        "best_cost": result.best_cost,
        "evaluations": len(result.trace),
        "truncated": result.truncated,
        "trace": _trace_rows(result),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_trace_csv(result: TuneResult, path: str | Path) -> None:
    rows = _trace_rows(result)
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()) if rows else ["index"])
    writer.writeheader()
    writer.writerows(rows)
    Path(path).write_text(out.getvalue(), encoding="utf-8")
