"""Grid post-processing: radius clipping, summary statistics, contour levels,
and the discrete-Laplacian roughness score used by the case studies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .landscape import LandscapeGrid

AUTO = "auto"


@dataclass(frozen=True)
class ClipSpec:
    """Mask grid points farther than `radius` from the origin. "auto" uses
    the inscribed circle of the grid's bounding box: min(max|x|, max|y|)."""

    radius: float | str = AUTO

    def validate(self) -> None:
        if isinstance(self.radius, str):
            if self.radius != AUTO:
                raise ValueError(f"radius must be a positive number or '{AUTO}'")
        elif not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")

    def resolve(self, grid: LandscapeGrid) -> float:
        self.validate()
        if self.radius == AUTO:
            return float(min(np.max(np.abs(grid.x_values)), np.max(np.abs(grid.y_values))))
        return float(self.radius)


@dataclass(frozen=True)
class SummaryStats:
    min_loss: float
    max_loss: float
    mean_loss: float
    center_loss: float | None
    argmin_x: float
    argmin_y: float
    finite_count: int
    masked_count: int

    def as_dict(self) -> dict:
        center = self.center_loss
        if center is not None and not math.isfinite(center):
            center = None
        return {
            "min_loss": self.min_loss,
            "max_loss": self.max_loss,
            "mean_loss": self.mean_loss,
            "center_loss": center,
            "argmin_x": self.argmin_x,
            "argmin_y": self.argmin_y,
            "finite_count": self.finite_count,
            "masked_count": self.masked_count,
        }


def clip_radius(grid: LandscapeGrid, spec: ClipSpec) -> LandscapeGrid:
    """New grid with entries at distance > r from the origin set to NaN.
    The input grid is untouched; clipping twice changes nothing more."""
    r = spec.resolve(grid)
    xx, yy = np.meshgrid(grid.x_values, grid.y_values)
    out = grid.copy()
    out.losses[np.hypot(xx, yy) > r] = np.nan
    return out


def summary_stats(grid: LandscapeGrid) -> SummaryStats:
    """Statistics over the finite entries. Non-finite entries (masked or
    divergent) only contribute to masked_count. Ties for the minimum go to
    the smallest y, then smallest x."""
    losses = grid.losses
    finite = np.isfinite(losses)
    n_finite = int(np.count_nonzero(finite))
    if n_finite == 0:
        raise ValueError("grid has no finite entries")
    values = losses[finite]
    min_loss = float(values.min())
    max_loss = float(values.max())
    # the exact mean always lies in [min, max]; keep the rounded one there too
    mean_loss = min(max(float(values.mean()), min_loss), max_loss)
    # row-major scan: first hit has the smallest y index, then smallest x
    flat = np.flatnonzero(finite.ravel() & (losses.ravel() == min_loss))[0]
    j, i = divmod(int(flat), losses.shape[1])

    center = None
    xi = np.flatnonzero(grid.x_values == 0.0)
    yj = np.flatnonzero(grid.y_values == 0.0)
    if xi.size and yj.size:
        center = float(losses[yj[0], xi[0]])

    return SummaryStats(
        min_loss=min_loss,
        max_loss=max_loss,
        mean_loss=mean_loss,
        center_loss=center,
        argmin_x=float(grid.x_values[i]),
        argmin_y=float(grid.y_values[j]),
        finite_count=n_finite,
        masked_count=int(losses.size - n_finite),
    )


def contour_levels(grid: LandscapeGrid, n: int) -> list[float]:
    """n values uniformly spaced strictly inside (min, max) of the finite
    entries: min + (max-min)*k/(n+1). A flat grid yields one level."""
    if n < 1:
        raise ValueError(f"contour count must be >= 1, got {n}")
    finite = grid.losses[np.isfinite(grid.losses)]
    if finite.size == 0:
        raise ValueError("grid has no finite entries")
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        return [lo]
    return [lo + (hi - lo) * k / (n + 1) for k in range(1, n + 1)]


def laplacian_roughness(grid: LandscapeGrid) -> float:
    """Mean |5-point discrete Laplacian| over interior points (unit index
    spacing): |z[j-1,i] + z[j+1,i] + z[j,i-1] + z[j,i+1] - 4 z[j,i]|.
    Interior points touching a non-finite neighbor are skipped; NaN when no
    interior point qualifies. Lower means a smoother surface."""
    z = grid.losses
    if z.shape[0] < 3 or z.shape[1] < 3:
        return float("nan")
    lap = z[:-2, 1:-1] + z[2:, 1:-1] + z[1:-1, :-2] + z[1:-1, 2:] - 4.0 * z[1:-1, 1:-1]
    valid = np.isfinite(lap)
    if not valid.any():
        return float("nan")
    return float(np.abs(lap[valid]).mean())
