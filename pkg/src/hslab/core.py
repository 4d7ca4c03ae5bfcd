"""Exponents, cell-centered grids, fields, quadrature and field files.

Everything else in :mod:`hslab` is built on the three small value types here:

* :class:`ExponentConfig` -- the admissible ``(n, s, q, beta)`` bundle,
* :class:`GridSpec` -- a cell-centered cube ``[-L, L]^n`` with ``N`` cells per axis,
* :class:`Field` -- one real value per cell, immutable once built.

Cell centers sit at ``-L + (i + 1/2) h`` so no center coincides with the
origin; singular weights and kernels can be evaluated pointwise everywhere.
"""
from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "DecayWarning",
    "FieldFormatError",
    "ExponentConfig",
    "make_exponents",
    "GridSpec",
    "make_grid",
    "Field",
    "RadialProfile",
    "gaussian",
    "cell_average_power",
    "singular_weight",
    "weighted_q_norm",
    "lp_norm",
    "l2_norm",
    "radial_profile",
    "boundary_ratio",
    "check_decay",
    "save_field",
    "load_field",
]

# cells whose center lies closer than this many spacings get a cell-averaged weight
NEAR_ORIGIN_CELLS = 4
SUBSAMPLES = 16


class DecayWarning(UserWarning):
    """A field handed to a rearrangement/potential routine does not decay."""


class FieldFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentConfig:
    n: int
    s: float
    q: float
    beta: float
    q_crit: float
    critical: bool = False

    @property
    def weight_power(self) -> float:
        """Exponent ``beta * q`` of the singular weight ``|x|^(-beta q)``."""
        return self.beta * self.q


def make_exponents(n: int, s: float, q: float, allow_critical: bool = False) -> ExponentConfig:
    """Validate ``(n, s, q)`` and derive ``beta`` and the critical exponent.

    ``beta`` is fixed by ``n/q - beta = n/2 - s``. The critical case
    ``q == 2n/(n-2s)`` (where ``beta = 0``) is only accepted with
    ``allow_critical=True``; it exists for oracle tests against the sharp
    Sobolev constant.
    """
    if isinstance(n, bool) or int(n) != n or int(n) not in (1, 2, 3):
        raise ValueError(f"dimension n={n!r} must be 1, 2 or 3")
    n = int(n)
    s = float(s)
    q = float(q)
    if not (math.isfinite(s) and math.isfinite(q)):
        raise ValueError("s and q must be finite")
    if not 0.0 < s < n / 2:
        raise ValueError(f"order s={s} violates 0 < s < n/2 = {n / 2}")
    q_crit = 2.0 * n / (n - 2.0 * s)
    if q <= 2.0:
        raise ValueError(f"exponent q={q} violates q > 2")
    critical = math.isclose(q, q_crit, rel_tol=1e-12, abs_tol=0.0)
    if q > q_crit and not critical:
        raise ValueError(f"exponent q={q} violates q < 2*_s = {q_crit}")
    if critical and not allow_critical:
        raise ValueError(f"exponent q={q} equals the critical exponent 2*_s; pass allow_critical=True")
    beta = 0.0 if critical else n / q - (n / 2 - s)
    assert 0.0 <= beta < s, (beta, s)
    return ExponentConfig(n=n, s=s, q=q, beta=beta, q_crit=q_crit, critical=critical)


@dataclass(frozen=True)
class GridSpec:
    """Cell-centered grid on ``[-L, L]^ndim`` with ``n_cells`` cells per axis."""

    ndim: int
    n_cells: int
    half_width: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n_cells

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_cells,) * self.ndim

    @property
    def size(self) -> int:
        return self.n_cells ** self.ndim

    @cached_property
    def axis(self) -> np.ndarray:
        h = self.spacing
        return -self.half_width + (np.arange(self.n_cells) + 0.5) * h

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.ndim), indexing="ij"))

    @cached_property
    def dist2_key(self) -> np.ndarray:
        """Exact integer key ``(2|x|/h)^2`` per cell; ties in distance are exact ties here."""
        c = 2 * np.arange(self.n_cells, dtype=np.int64) + 1 - self.n_cells
        key = np.zeros(self.shape, dtype=np.int64)
        for ax in range(self.ndim):
            sh = [1] * self.ndim
            sh[ax] = self.n_cells
            key = key + (c ** 2).reshape(sh)
        key.setflags(write=False)
        return key

    @cached_property
    def radius(self) -> np.ndarray:
        r = 0.5 * self.spacing * np.sqrt(self.dist2_key.astype(float))
        r.setflags(write=False)
        return r

    def boundary_mask(self) -> np.ndarray:
        """Cells in the outermost shell of the box."""
        mask = np.zeros(self.shape, dtype=bool)
        for ax in range(self.ndim):
            idx = [slice(None)] * self.ndim
            idx[ax] = 0
            mask[tuple(idx)] = True
            idx[ax] = -1
            mask[tuple(idx)] = True
        return mask


def make_grid(ndim: int, n_cells: int, half_width: float) -> GridSpec:
    if int(ndim) != ndim or int(ndim) not in (1, 2, 3):
        raise ValueError(f"ndim={ndim!r} must be 1, 2 or 3")
    if int(n_cells) != n_cells or n_cells < 2 or (int(n_cells) & (int(n_cells) - 1)):
        raise ValueError(f"n_cells={n_cells!r} must be a power of two >= 2")
    half_width = float(half_width)
    if not (math.isfinite(half_width) and half_width > 0):
        raise ValueError(f"half_width={half_width!r} must be positive and finite")
    return GridSpec(int(ndim), int(n_cells), half_width)


@dataclass(frozen=True, eq=False)
class Field:
    """Real values on a :class:`GridSpec`; the stored array is read-only."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.size != self.grid.size:
            raise ValueError(f"got {arr.size} values for a grid of {self.grid.size} cells")
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def with_values(self, values) -> Field:
        return Field(self.grid, values)

    def __neg__(self) -> Field:
        return Field(self.grid, -self.values)

    def __mul__(self, c: float) -> Field:
        return Field(self.grid, float(c) * self.values)

    __rmul__ = __mul__

    def abs(self) -> Field:
        return Field(self.grid, np.abs(self.values))


def gaussian(grid: GridSpec, width: float, center=None, amplitude: float = 1.0) -> Field:
    """``amplitude * exp(-|x - center|^2 / (2 width^2))`` sampled at cell centers."""
    center = np.zeros(grid.ndim) if center is None else np.broadcast_to(np.asarray(center, float), (grid.ndim,))
    r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), center))
    return Field(grid, amplitude * np.exp(-r2 / (2.0 * width ** 2)))


def cell_average_power(centers: np.ndarray, h: float, power: float, subsamples: int = SUBSAMPLES) -> np.ndarray:
    """Average of ``|x|^power`` over the cubes of side ``h`` centered at ``centers``.

    Uses ``subsamples**ndim`` midpoint sub-cells per cube. With an even
    ``subsamples`` no sub-cell midpoint is the origin, so negative powers are
    safe as long as no cube is centered off the half-integer lattice.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    ndim = centers.shape[1]
    offs = ((np.arange(subsamples) + 0.5) / subsamples - 0.5) * h
    sub = np.stack(np.meshgrid(*([offs] * ndim), indexing="ij"), axis=-1).reshape(-1, ndim)
    out = np.empty(len(centers))
    for i, c in enumerate(centers):
        r = np.sqrt(np.sum((c + sub) ** 2, axis=1))
        out[i] = np.mean(r ** power)
    return out


@lru_cache(maxsize=32)
def _singular_weight(grid: GridSpec, power: float) -> np.ndarray:
    if power == 0.0:
        w = np.ones(grid.shape)
    else:
        h = grid.spacing
        w = grid.radius ** (-power)
        near = grid.radius < NEAR_ORIGIN_CELLS * h
        centers = np.stack([x[near] for x in grid.mesh()], axis=-1)
        w[near] = cell_average_power(centers, h, -power)
    w.setflags(write=False)
    return w


def singular_weight(grid: GridSpec, power: float) -> np.ndarray:
    """Quadrature weight for ``|x|^(-power)``: cell averages near the origin, center values elsewhere."""
    return _singular_weight(grid, float(power))


def _check_dims(u: Field, cfg: ExponentConfig):
    if u.grid.ndim != cfg.n:
        raise ValueError(f"field dimension {u.grid.ndim} does not match n={cfg.n}")


def weighted_q_norm(u: Field, cfg: ExponentConfig) -> float:
    """``( sum w(x) |u(x)|^q h^n )^(1/q)`` with ``w`` the quadrature of ``|x|^(-beta q)``."""
    _check_dims(u, cfg)
    w = singular_weight(u.grid, cfg.weight_power)
    total = np.sum(w * np.abs(u.values) ** cfg.q) * u.grid.cell_volume
    return float(total ** (1.0 / cfg.q))


def lp_norm(u: Field, p: float) -> float:
    return float((np.sum(np.abs(u.values) ** p) * u.grid.cell_volume) ** (1.0 / p))


def l2_norm(u: Field) -> float:
    return float(np.sqrt(np.sum(u.values * u.values) * u.grid.cell_volume))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Shell averages of a field; bin ``k`` holds cells with ``|x|`` in ``[k h, (k+1) h)``.

    Empty bins carry ``nan`` as their mean.
    """

    bin_edges: np.ndarray
    bin_means: np.ndarray
    bin_counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def nonempty(self) -> np.ndarray:
        return self.bin_counts > 0


def radial_profile(u: Field) -> RadialProfile:
    grid = u.grid
    # floor(|x|/h) == floor(sqrt(key)/2) computed on the exact integer key
    k = (np.floor(np.sqrt(grid.dist2_key.astype(float))).astype(np.int64) // 2).ravel()
    nbins = int(k.max()) + 1
    counts = np.bincount(k, minlength=nbins)
    sums = np.bincount(k, weights=u.values.ravel(), minlength=nbins)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    edges = np.arange(nbins + 1) * grid.spacing
    return RadialProfile(edges, means, counts)


def boundary_ratio(u: Field) -> float:
    """Largest magnitude on the outermost cell shell relative to the overall maximum."""
    peak = np.max(np.abs(u.values))
    if peak == 0.0:
        return 0.0
    return float(np.max(np.abs(u.values[u.grid.boundary_mask()])) / peak)


def check_decay(u: Field, fraction: float = 1e-3, name: str = "field") -> bool:
    """Warn with :class:`DecayWarning` if ``u`` does not vanish near the box boundary."""
    ratio = boundary_ratio(u)
    if ratio > fraction:
        warnings.warn(
            f"{name} does not vanish at the boundary: shell/max = {ratio:.3g} > {fraction:g}",
            DecayWarning,
            stacklevel=3,
        )
        return False
    return True


def save_field(u: Field, path) -> None:
    """Write ``u`` as ``"ndim N L"`` followed by one round-trip decimal per line, last axis fastest."""
    g = u.grid
    lines = [f"{g.ndim} {g.n_cells} {g.half_width!r}"]
    lines.extend(map(repr, u.values.ravel(order="C").tolist()))
    with open(os.fspath(path), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def load_field(path) -> Field:
    try:
        with open(os.fspath(path), "r", encoding="ascii") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise FieldFormatError(f"{path}: not an ASCII field file ({exc.reason})") from None
    lines = text.split("\n")
    header = lines[0].split()
    if len(header) != 3:
        raise FieldFormatError(f"{path}: header must be 'ndim N L', got {lines[0]!r}")
    try:
        ndim, n_cells, half_width = int(header[0]), int(header[1]), float(header[2])
        grid = make_grid(ndim, n_cells, half_width)
    except ValueError as exc:
        raise FieldFormatError(f"{path}: bad header {lines[0]!r}: {exc}") from None
    body = [ln.strip() for ln in lines[1:]]
    while body and body[-1] == "":
        body.pop()
    if len(body) != grid.size:
        raise FieldFormatError(f"{path}: expected {grid.size} values, found {len(body)}")
    try:
        vals = np.array([float(tok) for tok in body])
    except ValueError as exc:
        raise FieldFormatError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(vals)):
        raise FieldFormatError(f"{path}: non-finite entry")
    return Field(grid, vals.reshape(grid.shape))
