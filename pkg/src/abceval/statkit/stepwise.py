"""Backwards stepwise predictor elimination driven by a beam search.

States are predictor subsets; each step removes one predictor from every
kept state, ranks the expansions by adjusted fitness (adjusted R2 for
linear models, adjusted McFadden pseudo-R2 for logistic models), and keeps
the best `beam_width` states. The emitted trace records, per model size,
the best surviving state together with whether all of its predictors
contribute positively to adjusted fitness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .regression import RegressionFit, SeparationError, logistic_fit, ols_fit


@dataclass(frozen=True)
class StepwiseStep:
    predictors: tuple[str, ...]  # surviving predictors, input order
    removed: Optional[str]  # predictor dropped to reach this state
    fitness: float  # unadjusted r2 / mcfadden
    adjusted_fitness: float
    all_positive: bool  # every survivor contributes positively to adjusted fitness


@dataclass
class StepwiseTrace:
    target: str
    kind: str
    beam_width: int
    steps: list[StepwiseStep] = field(default_factory=list)
    discarded: list[str] = field(default_factory=list)  # notes on unfittable states

    @property
    def removal_order(self) -> list[str]:
        return [s.removed for s in self.steps if s.removed is not None]


def _fit_subset(columns: Mapping[str, np.ndarray], subset: tuple[str, ...], y, kind: str):
    x = np.column_stack([columns[name] for name in subset]) if subset else np.empty((len(y), 0))
    try:
        if kind == "linear":
            return ols_fit(x, y, check_rank=False)
        return logistic_fit(x, y)
    except (SeparationError, np.linalg.LinAlgError, ValueError):
        return None


def beam_backward_selection(
    columns: Mapping[str, Sequence[float]],
    y: Sequence[float],
    kind: str = "linear",
    beam_width: int = 100,
    target: str = "",
) -> StepwiseTrace:
    """Run the backwards elimination beam search over named predictor columns."""
    if kind not in ("linear", "logistic"):
        raise ValueError(f"unknown model kind: {kind!r}")
    if not columns:
        raise ValueError("at least one predictor is required")
    names = list(columns)
    cols = {name: np.asarray(columns[name], dtype=float) for name in names}
    y = np.asarray(y, dtype=float)
    order = {name: i for i, name in enumerate(names)}

    trace = StepwiseTrace(target=target, kind=kind, beam_width=beam_width)
    cache: dict[frozenset, Optional[RegressionFit]] = {}

    def fit(state: frozenset):
        if state not in cache:
            subset = tuple(sorted(state, key=order.__getitem__))
            cache[state] = _fit_subset(cols, subset, y, kind)
        return cache[state]

    def record(state: frozenset, removed: Optional[str]) -> None:
        model = fit(state)
        base = model.adjusted_fitness
        all_positive = all(
            (sub := fit(state - {q})) is not None and base > sub.adjusted_fitness
            for q in state
        ) if len(state) > 1 else True
        trace.steps.append(
            StepwiseStep(
                predictors=tuple(sorted(state, key=order.__getitem__)),
                removed=removed,
                fitness=model.fitness,
                adjusted_fitness=base,
                all_positive=all_positive,
            )
        )

    full = frozenset(names)
    if fit(full) is None:
        raise ValueError("the full model could not be fit")
    record(full, removed=None)

    beam: list[frozenset] = [full]
    removed_to_reach: dict[frozenset, str] = {}
    while len(next(iter(beam))) > 1:
        expansions: dict[frozenset, str] = {}
        for state in beam:
            for name in state:
                child = state - {name}
                expansions.setdefault(child, name)
        scored = []
        for child, removed in expansions.items():
            model = fit(child)
            if model is None:
                trace.discarded.append(
                    f"unfittable state after removing {removed}: "
                    + ",".join(sorted(child, key=order.__getitem__))
                )
                continue
            scored.append((model.adjusted_fitness, tuple(sorted(child, key=order.__getitem__)), child, removed))
        if not scored:
            break
        scored.sort(key=lambda item: (-item[0], item[1]))
        beam = [child for _, _, child, _ in scored[:beam_width]]
        best_state, best_removed = scored[0][2], scored[0][3]
        record(best_state, removed=best_removed)
    return trace
