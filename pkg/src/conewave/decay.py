"""Log-log slope fits along rays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_RADII = 4


def loglog_slope(radii, values) -> float:
    """Least-squares slope of ``log|values|`` against ``log radii``."""
    radii = np.asarray(radii, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if np.any(values <= 0):
        return float("nan")
    return float(np.polyfit(np.log(radii), np.log(values), 1)[0])


@dataclass
class RayFit:
    label: str
    direction: tuple
    radii: np.ndarray
    values: np.ndarray
    slope: float


@dataclass
class DecayReport:
    threshold: float
    fits: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    inconclusive: bool = False
    vacuous: bool = False

    @property
    def worst_slope(self) -> float:
        return max(f.slope for f in self.fits) if self.fits else float("nan")

    @property
    def passed(self) -> bool:
        if self.inconclusive or self.vacuous or not self.fits:
            return False
        return all(np.isfinite(f.slope) and f.slope <= self.threshold for f in self.fits)

    def rows(self):
        """CSV rows: label, direction, radius, value, slope, threshold."""
        for f in self.fits:
            for r, v in zip(f.radii, f.values):
                yield (f.label, f"{f.direction[0]:g}:{f.direction[1]:g}", r, v, f.slope, self.threshold)


def fit_rays(labelled, radii, threshold: float, excluded=()) -> DecayReport:
    """``labelled`` holds ``(label, direction, func)`` with ``func(unit_vector, radii)``."""
    radii = np.asarray(radii, dtype=float)
    report = DecayReport(threshold=threshold, excluded=list(excluded))
    if len(radii) < MIN_RADII:
        report.inconclusive = True
        return report
    for label, direction, func in labelled:
        e = np.asarray(direction, dtype=float)
        e = e / np.linalg.norm(e)
        values = np.asarray(func(e, radii), dtype=float)
        report.fits.append(RayFit(label, tuple(direction), radii, values, loglog_slope(radii, values)))
    return report
