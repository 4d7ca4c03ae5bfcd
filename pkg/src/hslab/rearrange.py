"""Discrete symmetric-decreasing rearrangement and the majorization order.

The grid rearrangement is the equimeasurable one: the multiset of cell values
is kept exactly and re-assigned in decreasing order to cells sorted by
``(distance from origin, row-major index)``. Because values are moved, never
interpolated, ``f`` and ``f*`` have bit-identical sorted values.

``f`` precedes ``g`` (``f < g`` in the majorization sense) when the mass of
``f*`` in every ball around the origin is at most that of ``g*``. On the grid
a "ball" is a prefix of the fixed cell order, so cumulative sums of the sorted
values decide the relation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import Field, GridSpec
from .fracops import SpectralPlan, riesz_potential

__all__ = [
    "cell_order",
    "sd_rearrangement",
    "sorted_values",
    "MajorizationReport",
    "majorizes",
    "ConvexTestFamily",
    "SDTestFamily",
    "CharacterizationResult",
    "check_convex_characterization",
    "check_sd_characterization",
    "hardy_littlewood_gap",
    "riesz_rearrangement_gap",
]

REL_SLACK = 1e-12


@lru_cache(maxsize=32)
def _cell_order(grid: GridSpec) -> np.ndarray:
    key = grid.dist2_key.ravel()
    order = np.lexsort((np.arange(key.size), key))
    order.setflags(write=False)
    return order


def cell_order(grid: GridSpec) -> np.ndarray:
    """Flat cell indices sorted by distance from the origin, then row-major index."""
    return _cell_order(grid)


@lru_cache(maxsize=32)
def _cell_rank(grid: GridSpec) -> np.ndarray:
    rank = np.empty(grid.size, dtype=np.int64)
    rank[_cell_order(grid)] = np.arange(grid.size)
    rank.setflags(write=False)
    return rank


def _require_nonnegative(*fields: Field):
    for f in fields:
        if np.any(f.values < 0):
            raise ValueError("rearrangement needs a non-negative field; pass |f| explicitly")


def _require_same_grid(f: Field, g: Field):
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")


def sorted_values(f: Field) -> np.ndarray:
    """Values of ``f`` in decreasing order (stable), i.e. ``f*`` read along the cell order."""
    v = f.values.ravel()
    return v[np.argsort(-v, kind="stable")]


def sd_rearrangement(f: Field) -> Field:
    _require_nonnegative(f)
    out = np.empty(f.grid.size)
    out[cell_order(f.grid)] = sorted_values(f)
    return Field(f.grid, out.reshape(f.grid.shape))


@dataclass(frozen=True, eq=False)
class MajorizationReport:
    radii: np.ndarray
    cumulative_gap: np.ndarray
    holds: bool
    worst_violation: float
    slack: float

    def to_dict(self) -> dict:
        k = int(np.argmin(self.cumulative_gap))
        return {
            "holds": self.holds,
            "worst_violation": self.worst_violation,
            "slack": self.slack,
            "worst_radius": float(self.radii[k]),
            "min_cumulative_gap": float(self.cumulative_gap[k]),
        }


def _default_slack(g: Field) -> float:
    return REL_SLACK * float(np.sum(np.abs(g.values)) * g.grid.cell_volume)


def majorizes(f: Field, g: Field, slack: float | None = None) -> MajorizationReport:
    """Decide ``f < g``: every innermost-``k`` partial mass of ``g*`` dominates that of ``f*``.

    ``slack`` defaults to ``1e-12 * ||g||_1``.
    """
    _require_same_grid(f, g)
    _require_nonnegative(f, g)
    if slack is None:
        slack = _default_slack(g)
    gap = np.cumsum(sorted_values(g) - sorted_values(f)) * f.grid.cell_volume
    radii = f.grid.radius.ravel()[cell_order(f.grid)]
    worst = min(0.0, float(gap.min()))
    return MajorizationReport(radii, gap, worst >= -slack, worst, float(slack))


@dataclass(frozen=True)
class ConvexTestFamily:
    """Threshold functions ``phi_t(v) = max(v - t, 0)``, one per entry of ``thresholds``."""

    thresholds: tuple

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("need at least one threshold")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("thresholds must be positive and strictly increasing")
        object.__setattr__(self, "thresholds", tuple(t.tolist()))

    @classmethod
    def default(cls, f: Field, g: Field, m: int = 32) -> ConvexTestFamily:
        vals = np.concatenate([f.values.ravel(), g.values.ravel()])
        pos = vals[vals > 0]
        if pos.size == 0:
            return cls((1.0,))
        lo, hi = float(pos.min()), float(pos.max())
        if lo == hi:
            return cls((lo,))
        return cls(tuple(np.unique(np.geomspace(lo, hi, m))))


@dataclass(frozen=True)
class SDTestFamily:
    """Ball indicators ``1_{B}`` used as symmetric-decreasing test functions.

    ``ball_radii`` selects closed balls ``{|x| <= r}``. Left as ``None`` the
    family is every prefix of the cell order, i.e. every discrete ball including
    partially filled shells of equidistant cells; this is the family that makes
    the test equivalent to :func:`majorizes`.
    """

    ball_radii: tuple | None = None

    def __post_init__(self):
        if self.ball_radii is None:
            return
        r = np.asarray(self.ball_radii, dtype=float)
        if r.ndim != 1 or r.size == 0 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("ball radii must be positive and strictly increasing")
        object.__setattr__(self, "ball_radii", tuple(r.tolist()))

    def masks(self, grid: GridSpec, block: int = 256):
        """Yield boolean ``(k, cells)`` blocks, one row per ball."""
        if self.ball_radii is None:
            rank = _cell_rank(grid)
            sizes = np.arange(1, grid.size + 1)
            for i in range(0, sizes.size, block):
                yield rank[None, :] < sizes[i:i + block, None]
        else:
            radius = grid.radius.ravel()
            r = np.asarray(self.ball_radii)
            for i in range(0, r.size, block):
                yield radius[None, :] <= r[i:i + block, None] * (1 + 1e-12)


class CharacterizationResult(NamedTuple):
    holds: bool
    worst_slack: float


def check_convex_characterization(
    f: Field, g: Field, fam: ConvexTestFamily | None = None, slack: float | None = None
) -> CharacterizationResult:
    """``sum phi_t(f*) <= sum phi_t(g*)`` for every threshold ``t`` in ``fam``."""
    _require_same_grid(f, g)
    _require_nonnegative(f, g)
    fam = ConvexTestFamily.default(f, g) if fam is None else fam
    slack = _default_slack(g) if slack is None else slack
    fs = sd_rearrangement(f).values.ravel()
    gs = sd_rearrangement(g).values.ravel()
    t = np.asarray(fam.thresholds)[:, None]
    hv = f.grid.cell_volume
    lhs = np.maximum(fs[None, :] - t, 0.0).sum(axis=1) * hv
    rhs = np.maximum(gs[None, :] - t, 0.0).sum(axis=1) * hv
    worst = float(np.min(rhs - lhs))
    return CharacterizationResult(worst >= -slack, worst)


def check_sd_characterization(
    f: Field, g: Field, fam: SDTestFamily | None = None, slack: float | None = None
) -> CharacterizationResult:
    """``sum f* phi <= sum g* phi`` for every ball indicator ``phi`` in ``fam``."""
    _require_same_grid(f, g)
    _require_nonnegative(f, g)
    fam = SDTestFamily() if fam is None else fam
    slack = _default_slack(g) if slack is None else slack
    fs = sd_rearrangement(f).values.ravel()
    gs = sd_rearrangement(g).values.ravel()
    hv = f.grid.cell_volume
    worst = np.inf
    for mask in fam.masks(f.grid):
        diff = (mask * gs).sum(axis=1) * hv - (mask * fs).sum(axis=1) * hv
        worst = min(worst, float(diff.min()))
    worst = min(0.0, worst)
    return CharacterizationResult(worst >= -slack, worst)


def hardy_littlewood_gap(f: Field, g: Field) -> float:
    """``sum f* g* - sum f g`` (times the cell volume); never negative."""
    _require_same_grid(f, g)
    hv = f.grid.cell_volume
    fs, gs = sd_rearrangement(f), sd_rearrangement(g)
    return float(np.sum(fs.values * gs.values) * hv - np.sum(f.values * g.values) * hv)


def riesz_rearrangement_gap(f: Field, g: Field, alpha: float, plan: SpectralPlan) -> tuple[float, float]:
    """Double integrals ``<f, I_alpha g>`` and ``<f*, I_alpha g*>``.

    Returns ``(original, rearranged)``; the Riesz rearrangement inequality says
    the second is at least the first.
    """
    _require_same_grid(f, g)
    hv = f.grid.cell_volume
    lhs = float(np.sum(f.values * riesz_potential(g, alpha, plan).values) * hv)
    fs, gs = sd_rearrangement(f), sd_rearrangement(g)
    rhs = float(np.sum(fs.values * riesz_potential(gs, alpha, plan).values) * hv)
    return lhs, rhs
