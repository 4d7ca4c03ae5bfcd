"""Fourier multipliers ``|xi|^sigma`` and Riesz potentials on a truncated grid.

Conventions (shared by every routine here):

* angular frequencies ``xi = 2 pi k / (box length)``; on the base box this is
  ``pi k / L``, on the padded box ``pi k / (pad L)``;
* :func:`fractional_power` acts on the periodic extension of the field over
  the base box, with the zero mode mapped to 0 for ``sigma > 0``;
* :func:`riesz_potential` is a linear (non-circular) convolution with
  ``C(n, alpha) |x|^(alpha - n)``, done by circulant embedding in the padded box.

The two operators are inverse to each other on ``R^n``; on the truncated box
they only agree up to the tail that the box cuts off.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg
from scipy.special import gamma

from .core import NEAR_ORIGIN_CELLS, Field, GridSpec, cell_average_power

# kernel offsets closer than this many spacings are cell-averaged by sub-sampling (2D/3D)
NEAR_OFFSETS = NEAR_ORIGIN_CELLS

__all__ = [
    "SpectralPlan",
    "make_plan",
    "fractional_power",
    "riesz_constant",
    "riesz_kernel",
    "riesz_kernel_field",
    "riesz_potential",
    "riesz_solve",
    "multiplier_l2_norm",
]


def _freq_magnitude(n_cells: int, ndim: int, h: float, real: bool) -> np.ndarray:
    axes = []
    for ax in range(ndim):
        last = ax == ndim - 1
        f = np.fft.rfftfreq(n_cells, d=h) if (real and last) else np.fft.fftfreq(n_cells, d=h)
        sh = [1] * ndim
        sh[ax] = f.size
        axes.append((2 * np.pi * f).reshape(sh))
    return np.sqrt(sum(a ** 2 for a in axes))


@dataclass(frozen=True, eq=False)
class SpectralPlan:
    """Frequency tables and cached kernel transforms for one grid.

    Immutable from the caller's side; kernel transforms are memoized under a
    lock so one plan can be shared between threads.
    """

    grid: GridSpec
    padded_size: int

    def __post_init__(self):
        object.__setattr__(self, "_lock", threading.Lock())
        object.__setattr__(self, "_kernels", {})

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return (self.padded_size,) * self.grid.ndim

    @cached_property
    def xi(self) -> np.ndarray:
        """``|xi|`` on the base box, laid out for ``rfftn``."""
        return _freq_magnitude(self.grid.n_cells, self.grid.ndim, self.grid.spacing, real=True)

    @cached_property
    def xi_full(self) -> np.ndarray:
        """``|xi|`` on the base box, laid out for ``fftn``."""
        return _freq_magnitude(self.grid.n_cells, self.grid.ndim, self.grid.spacing, real=False)

    @cached_property
    def xi_padded(self) -> np.ndarray:
        """``|xi|`` on the padded box, laid out for ``rfftn``."""
        return _freq_magnitude(self.padded_size, self.grid.ndim, self.grid.spacing, real=True)

    def kernel_hat(self, alpha: float) -> np.ndarray:
        key = float(alpha)
        with self._lock:
            khat = self._kernels.get(key)
            if khat is None:
                khat = _embedded_kernel_hat(self.grid, self.padded_size, key)
                self._kernels[key] = khat
        return khat


def make_plan(grid: GridSpec, pad: int = 2) -> SpectralPlan:
    if pad < 2:
        raise ValueError("padding factor must be at least 2 for a linear convolution")
    return SpectralPlan(grid, int(pad) * grid.n_cells)


def _check_plan(u: Field, plan: SpectralPlan):
    if u.grid != plan.grid:
        raise ValueError("field grid does not match the spectral plan")


def fractional_power(u: Field, sigma: float, plan: SpectralPlan) -> Field:
    """Multiply the (periodic) transform of ``u`` by ``|xi|^sigma``."""
    _check_plan(u, plan)
    n = u.grid.ndim
    if not 0.0 <= sigma <= 2 * n:
        raise ValueError(f"sigma={sigma} outside [0, {2 * n}]")
    mult = plan.xi ** sigma  # 0**0 == 1, so sigma == 0 keeps the mean
    axes = tuple(range(n))
    out = np.fft.irfftn(np.fft.rfftn(u.values) * mult, s=u.grid.shape, axes=axes)
    return Field(u.grid, out)


def multiplier_l2_norm(u: Field, sigma: float, plan: SpectralPlan) -> float:
    """``|| |xi|^sigma u_hat ||_2`` evaluated on the frequency side (Parseval)."""
    _check_plan(u, plan)
    uh = np.fft.fftn(u.values)
    total = np.sum(plan.xi_full ** (2 * sigma) * np.abs(uh) ** 2)
    return float(np.sqrt(total * u.grid.cell_volume / u.grid.size))


def riesz_constant(n: int, alpha: float) -> float:
    """``Gamma((n-alpha)/2) / (2^alpha pi^(n/2) Gamma(alpha/2))``.

    With this constant, convolution with ``C |x|^(alpha-n)`` inverts the
    multiplier ``|xi|^alpha``.
    """
    if not 0.0 < alpha < n:
        raise ValueError(f"alpha={alpha} outside (0, n={n})")
    return float(gamma((n - alpha) / 2) / (2 ** alpha * math.pi ** (n / 2) * gamma(alpha / 2)))


def riesz_kernel(grid: GridSpec, alpha: float, averaged: bool = True) -> np.ndarray:
    """Kernel on the offset lattice ``j h``, ``|j_i| < N``, shape ``(2N-1,)*ndim``.

    Each entry is the mean of ``C |x|^(alpha-n)`` over the cell around ``j h``:
    in closed form in 1D, by sub-cell sampling for offsets within ``4h`` in
    2D/3D and by the center value beyond. With ``averaged=False`` only the
    singular center entry is averaged and the rest are point samples.
    """
    n, N, h = grid.ndim, grid.n_cells, grid.spacing
    c = riesz_constant(n, alpha)
    j = np.arange(-(N - 1), N)
    center = (N - 1,) * n
    if n == 1 and averaged:
        a = np.maximum(np.abs(j) - 0.5, 0.0) * h
        b = (np.abs(j) + 0.5) * h
        k = c * (b ** alpha - a ** alpha) / (alpha * h)
        k[center] *= 2.0  # the center cell spans [-h/2, h/2]
        return k
    r2 = np.zeros((2 * N - 1,) * n)
    for ax in range(n):
        sh = [1] * n
        sh[ax] = j.size
        r2 = r2 + ((j * h) ** 2).reshape(sh)
    r2[center] = 1.0
    k = c * r2 ** ((alpha - n) / 2)
    if n == 1:
        k[center] = c * 2.0 * (h / 2) ** alpha / (alpha * h)
        return k
    near = r2 < (NEAR_OFFSETS * h) ** 2 if averaged else np.zeros(r2.shape, dtype=bool)
    near[center] = True
    offsets = np.stack(np.nonzero(near), axis=-1) - (N - 1)
    k[near] = c * cell_average_power(offsets * h, h, alpha - n)
    return k


def riesz_kernel_field(grid: GridSpec, alpha: float) -> Field:
    """``C |x|^(alpha-n)`` sampled at the cell centers (a symmetric-decreasing field)."""
    c = riesz_constant(grid.ndim, alpha)
    return Field(grid, c * grid.radius ** (alpha - grid.ndim))


def _embedded_kernel_hat(grid: GridSpec, m: int, alpha: float) -> np.ndarray:
    n, N = grid.ndim, grid.n_cells
    k = riesz_kernel(grid, alpha)
    emb = np.zeros((m,) * n)
    idx = np.r_[np.arange(N), np.arange(m - N + 1, m)]  # offsets 0..N-1, then -(N-1)..-1
    src = np.r_[np.arange(N - 1, 2 * N - 1), np.arange(0, N - 1)]
    emb[np.ix_(*([idx] * n))] = k[np.ix_(*([src] * n))]
    khat = np.fft.rfftn(emb)
    khat.setflags(write=False)
    return khat


def _riesz_apply(values: np.ndarray, alpha: float, plan: SpectralPlan) -> np.ndarray:
    g = plan.grid
    axes = tuple(range(g.ndim))
    fh = np.fft.rfftn(values, s=plan.padded_shape, axes=axes)
    out = np.fft.irfftn(fh * plan.kernel_hat(alpha), s=plan.padded_shape, axes=axes)
    return out[(slice(0, g.n_cells),) * g.ndim] * g.cell_volume


def riesz_potential(f: Field, alpha: float, plan: SpectralPlan) -> Field:
    """Linear convolution of ``f`` with the discrete Riesz kernel of order ``alpha``."""
    _check_plan(f, plan)
    if not 0.0 < alpha < f.grid.ndim:
        raise ValueError(f"alpha={alpha} outside (0, n={f.grid.ndim})")
    return Field(f.grid, _riesz_apply(f.values, alpha, plan))


def _padded_multiplier(values: np.ndarray, sigma: float, plan: SpectralPlan) -> np.ndarray:
    g = plan.grid
    axes = tuple(range(g.ndim))
    fh = np.fft.rfftn(values, s=plan.padded_shape, axes=axes)
    out = np.fft.irfftn(fh * plan.xi_padded ** sigma, s=plan.padded_shape, axes=axes)
    return out[(slice(0, g.n_cells),) * g.ndim]


def riesz_solve(u: Field, alpha: float, plan: SpectralPlan, rtol: float = 1e-13, maxiter: int = 2000) -> Field:
    """Density ``g`` on the box with ``riesz_potential(g, alpha) == u``.

    Conjugate gradients on the (symmetric positive definite) box-restricted
    convolution, preconditioned by the zero-extended multiplier ``|xi|^alpha``.
    """
    _check_plan(u, plan)
    shape, size = u.grid.shape, u.grid.size

    def mv(x):
        return _riesz_apply(x.reshape(shape), alpha, plan).ravel()

    def prec(x):
        return _padded_multiplier(x.reshape(shape), alpha, plan).ravel()

    op = LinearOperator((size, size), matvec=mv, dtype=float)
    pre = LinearOperator((size, size), matvec=prec, dtype=float)
    x0 = prec(u.values.ravel())
    sol, info = cg(op, u.values.ravel(), x0=x0, M=pre, rtol=rtol, atol=0.0, maxiter=maxiter)
    if info != 0:
        res = np.linalg.norm(mv(sol) - u.values.ravel()) / max(np.linalg.norm(u.values), 1e-300)
        if res > 1e-9:
            warnings.warn(f"riesz_solve: CG stopped with relative residual {res:.2e}", RuntimeWarning, stacklevel=2)
    return Field(u.grid, sol.reshape(shape))
