"""Krippendorff's alpha over a coincidence matrix, with missing data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping


class DegenerateAgreementError(ValueError):
    """All observed values are identical: expected disagreement is zero and
    alpha is undefined (not 1.0)."""


@dataclass
class ReliabilityData:
    """A units x coders table of annotation values with missing cells.

    level: "nominal" uses the 0/1 difference function (binary and
    categorical labels); "interval" uses squared differences (Likert
    values).
    """

    units: list[Hashable]
    coders: list[Hashable]
    values: dict[tuple[Hashable, Hashable], float] = field(default_factory=dict)
    level: str = "nominal"

    def add(self, unit: Hashable, coder: Hashable, value) -> None:
        if unit not in self._unit_set:
            self.units.append(unit)
            self._unit_set.add(unit)
        if coder not in self._coder_set:
            self.coders.append(coder)
            self._coder_set.add(coder)
        self.values[(unit, coder)] = value

    def __post_init__(self):
        if self.level not in ("nominal", "interval"):
            raise ValueError(f"unknown measurement level: {self.level!r}")
        self._unit_set = set(self.units)
        self._coder_set = set(self.coders)

    def unit_values(self, unit: Hashable) -> list:
        return [self.values[(unit, c)] for c in self.coders if (unit, c) in self.values]


def krippendorff_alpha(data: ReliabilityData) -> float:
    """Coincidence-matrix Krippendorff's alpha.

    Units with fewer than two coded values do not enter the computation.
    Raises DegenerateAgreementError when every pairable value is identical,
    and ValueError when no unit is shared by two coders.
    """
    pairable = [vals for u in data.units if len(vals := data.unit_values(u)) >= 2]
    if not pairable:
        raise ValueError("alpha requires at least one unit coded by two or more coders")

    domain = sorted({v for vals in pairable for v in vals})
    if len(domain) < 2:
        raise DegenerateAgreementError(
            "all pairable values are identical; expected disagreement is zero"
        )
    index = {v: i for i, v in enumerate(domain)}
    k = len(domain)

    # Coincidence matrix: each ordered pair within a unit contributes
    # 1 / (m_u - 1), so every unit carries total mass m_u.
    coincidence = [[0.0] * k for _ in range(k)]
    for vals in pairable:
        m = len(vals)
        w = 1.0 / (m - 1)
        for i, a in enumerate(vals):
            for j, b in enumerate(vals):
                if i != j:
                    coincidence[index[a]][index[b]] += w

    margins = [sum(row) for row in coincidence]
    n = sum(margins)

    if data.level == "nominal":
        delta = lambda a, b: 0.0 if a == b else 1.0
    else:
        delta = lambda a, b: (a - b) ** 2

    observed = sum(
        coincidence[i][j] * delta(domain[i], domain[j])
        for i in range(k)
        for j in range(k)
        if i != j
    )
    expected = sum(
        margins[i] * margins[j] * delta(domain[i], domain[j])
        for i in range(k)
        for j in range(k)
        if i != j
    ) / (n - 1.0)

    if expected == 0.0:
        raise DegenerateAgreementError("expected disagreement is zero")
    return 1.0 - observed / expected
