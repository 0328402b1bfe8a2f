"""Size universality, crossover/effective lengths and revival visibility."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import ChainParams, build_mode_basis, localization_length
from .curves import fermionic_negativity_curve, time_grid, truncated_negativity_curve
from .entanglement import EntanglementCurve, Partition


@dataclass(frozen=True)
class UniversalityCriterion:
    """Tolerance ``epsilon`` on the integrated distance over ``[0, horizon]`` (in gamma*t)."""

    epsilon: float = 0.05
    horizon: float = 20.0
    reference_L: int = 301
    n_steps: int = 401

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.reference_L < 3 or self.reference_L % 2 == 0:
            raise ValueError(f"reference_L must be odd and >= 3, got {self.reference_L}")

    def grid(self) -> np.ndarray:
        return time_grid(self.horizon, self.n_steps)


@dataclass(frozen=True)
class SweepTemplate:
    """Fixed ingredients of a scan: loss rate and subsystem, with ``g2 = 1``."""

    gamma: float = 0.1
    g2: float = 1.0
    subsystem: tuple = (2,)

    def params(self, L: int, ratio: float) -> ChainParams:
        return ChainParams(L, ratio * self.g2, self.g2, self.gamma * self.g2)

    def partition(self, L: int) -> Partition:
        return Partition(frozenset(self.subsystem), L)

    def curve(self, L: int, ratio: float, grid) -> EntanglementCurve:
        return fermionic_negativity_curve(self.params(L, ratio), self.partition(L), grid)


def curve_distance(c1: EntanglementCurve, c2: EntanglementCurve, crit: UniversalityCriterion | None = None) -> float:
    """``int |c1 - c2| / int c2`` by the trapezoidal rule over the shared grid."""
    if c1.times.shape != c2.times.shape or not np.allclose(c1.times, c2.times, rtol=0, atol=1e-12):
        raise ValueError("curves are sampled on different time grids")
    t = c1.times
    if crit is not None and t[-1] < crit.horizon - 1e-12:
        raise ValueError(f"curves end at {t[-1]}, before the horizon {crit.horizon}")
    if crit is not None:
        keep = t <= crit.horizon + 1e-12
        t, a, b = t[keep], c1.values[keep], c2.values[keep]
    else:
        a, b = c1.values, c2.values
    norm = np.trapezoid(b, t)
    if norm <= 0:
        raise ValueError("reference curve integrates to zero")
    return float(np.trapezoid(np.abs(a - b), t) / norm)


def is_universal(c: EntanglementCurve, reference: EntanglementCurve, crit: UniversalityCriterion) -> bool:
    return curve_distance(c, reference, crit) <= crit.epsilon


@dataclass
class LengthScan:
    """Result of a crossover or effective-length scan."""

    ratio: float
    length: int
    distances: dict = field(default_factory=dict)
    xi: float = float("nan")


def _reference(ratio, crit, template):
    grid = crit.grid()
    return grid, template.curve(crit.reference_L, ratio, grid)


def crossover_length(
    ratio: float,
    crit: UniversalityCriterion | None = None,
    template: SweepTemplate | None = None,
) -> LengthScan:
    """Smallest odd ``L`` beyond which every odd chain up to ``reference_L`` is universal."""
    crit = crit or UniversalityCriterion()
    template = template or SweepTemplate()
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    grid, ref = _reference(ratio, crit, template)
    lengths = range(max(3, max(template.subsystem) + 1) | 1, crit.reference_L + 1, 2)
    distances = {L: curve_distance(template.curve(L, ratio, grid), ref, crit) for L in lengths}
    failing = [L for L, d in distances.items() if d > crit.epsilon]
    L_c = failing[-1] + 2 if failing else min(distances)
    return LengthScan(ratio, L_c, distances, localization_length(ratio))


def effective_length(
    ratio: float,
    crit: UniversalityCriterion | None = None,
    template: SweepTemplate | None = None,
    max_keep: int | None = None,
) -> LengthScan:
    """Smallest odd number of kept sites whose reduced state reproduces the reference curve."""
    crit = crit or UniversalityCriterion()
    template = template or SweepTemplate()
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    grid, ref = _reference(ratio, crit, template)
    basis = build_mode_basis(template.params(crit.reference_L, ratio))
    part = template.partition(crit.reference_L)
    start = max(3, max(template.subsystem) + 1) | 1
    stop = crit.reference_L if max_keep is None else min(max_keep, crit.reference_L)
    distances = {}
    for keep in range(start, stop + 1, 2):
        d = curve_distance(truncated_negativity_curve(basis, keep, part, grid), ref, crit)
        distances[keep] = d
        if d <= crit.epsilon:
            return LengthScan(ratio, keep, distances, localization_length(ratio))
    raise RuntimeError(f"no truncation up to {stop} sites reproduces the reference at ratio {ratio}")


@dataclass(frozen=True)
class RevivalSummary:
    minimum: float
    minimum_time: float
    asymptote: float
    visibility: float
    measure: str = ""


def revival_visibility(curve: EntanglementCurve) -> RevivalSummary:
    """Asymptote (last grid value) minus global minimum, floored at zero."""
    i = int(np.argmin(curve.values))
    asymptote = float(curve.values[-1])
    vis = asymptote - float(curve.values[i]) if i < len(curve.values) - 1 else 0.0
    return RevivalSummary(float(curve.values[i]), float(curve.times[i]), asymptote, max(vis, 0.0), curve.measure)


def visibility_scan(ratios, L: int = 301, crit: UniversalityCriterion | None = None, template: SweepTemplate | None = None):
    """Revival visibility for each coupling ratio."""
    crit = crit or UniversalityCriterion()
    template = template or SweepTemplate()
    grid = crit.grid()
    return [revival_visibility(template.curve(L, float(r), grid)) for r in ratios]
