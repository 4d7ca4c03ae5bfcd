"""Best constants and minimizers of the weighted fractional Sobolev quotient.

The quotient is

    Q(u) = || (-Delta)^(s/2) u ||_2^2 / || |x|^(-beta) u ||_q^2 .

On the box only ``u`` itself is known, so the numerator is taken as the
whole-space energy of the cheapest extension of ``u``. That extension is the
Riesz potential ``u = I_2s g`` of a density ``g`` supported in the box, and
its energy is ``<u, g>``. With this choice the Euler-Lagrange equation of the
discrete problem is exactly

    u = c * I_2s[ |x|^(-beta q) |u|^(q-2) u ],

so the gradient flow and the fixed-point iteration below minimize the same
discrete functional and can be compared to rounding.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .core import ExponentConfig, Field, GridSpec, gaussian, singular_weight, weighted_q_norm
from .fracops import SpectralPlan, _riesz_apply, riesz_potential, riesz_solve

__all__ = [
    "SolverOptions",
    "SolveReport",
    "default_init",
    "seminorm_squared",
    "rayleigh_quotient",
    "gradient_flow_minimize",
    "fixed_point_minimize",
    "euler_lagrange_residual",
    "sharp_sobolev_constant",
]

GRADIENT_FLOW = "gradient_flow"
FIXED_POINT = "fixed_point"


@dataclass
class SolverOptions:
    tol_q: float = 1e-9
    stall_window: int = 20
    max_iters: int = 5000
    tol_u: float = 1e-8
    tau0: float = 0.5
    tau_grow: float = 1.2
    tau_max: float = 4.0
    max_backtracks: int = 60

    def validate(self):
        if not (self.tol_q > 0 and self.tol_u > 0):
            raise ValueError("tolerances must be positive")
        if self.stall_window < 1 or self.max_iters < 0:
            raise ValueError("stall_window must be >= 1 and max_iters >= 0")


@dataclass(eq=False)
class SolveReport:
    cfg: ExponentConfig
    grid: GridSpec
    method: str
    s_q_estimate: float
    iterations: int
    quotient_history: list
    residual: float
    converged: bool
    minimizer: Field
    accepted_steps: int = 0
    stop_reason: str = ""

    def to_dict(self, minimizer_path: str | None = None) -> dict:
        return {
            "method": self.method,
            "n": self.cfg.n,
            "s": self.cfg.s,
            "q": self.cfg.q,
            "beta": self.cfg.beta,
            "q_crit": self.cfg.q_crit,
            "grid": {"ndim": self.grid.ndim, "n_cells": self.grid.n_cells, "half_width": self.grid.half_width},
            "s_q_estimate": self.s_q_estimate,
            "iterations": self.iterations,
            "accepted_steps": self.accepted_steps,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "residual": self.residual,
            "quotient_history": [float(x) for x in self.quotient_history],
            "minimizer_file": minimizer_path,
        }

    def write_json(self, path, minimizer_path: str | None = None, extra: dict | None = None):
        doc = self.to_dict(minimizer_path)
        if extra:
            doc.update(extra)
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def sharp_sobolev_constant(n: int, s: float) -> float:
    """Best constant of ``S ||u||_{2n/(n-2s)}^2 <= ||(-Delta)^(s/2) u||_2^2`` (beta = 0)."""
    from scipy.special import gamma

    return float(
        2 ** (2 * s) * np.pi ** s * gamma((n + 2 * s) / 2) / gamma((n - 2 * s) / 2)
        * (gamma(n / 2) / gamma(n)) ** (2 * s / n)
    )


def default_init(grid: GridSpec) -> Field:
    """Centered Gaussian of width ``L/8``."""
    return gaussian(grid, grid.half_width / 8)


def _check(u: Field, cfg: ExponentConfig, plan: SpectralPlan):
    if u.grid.ndim != cfg.n:
        raise ValueError(f"field dimension {u.grid.ndim} does not match n={cfg.n}")
    if u.grid != plan.grid:
        raise ValueError("field grid does not match the spectral plan")
    if not np.any(u.values):
        raise ValueError("the zero field has no Rayleigh quotient")


def seminorm_squared(u: Field, s: float, plan: SpectralPlan) -> float:
    """``||(-Delta)^(s/2) U||_2^2`` for the minimal-energy extension ``U`` of ``u`` off the box."""
    g = riesz_solve(u, 2 * s, plan)
    return float(np.sum(u.values * g.values) * u.grid.cell_volume)


def rayleigh_quotient(u: Field, cfg: ExponentConfig, plan: SpectralPlan) -> float:
    _check(u, cfg, plan)
    return seminorm_squared(u, cfg.s, plan) / weighted_q_norm(u, cfg) ** 2


class _Problem:
    """Arrays and maps shared by both iterations."""

    def __init__(self, cfg: ExponentConfig, plan: SpectralPlan):
        self.cfg, self.plan = cfg, plan
        self.grid = plan.grid
        self.hv = self.grid.cell_volume
        self.w = singular_weight(self.grid, cfg.weight_power)
        self.alpha = 2 * cfg.s

    def norm(self, u: np.ndarray) -> float:
        return float(np.sum(self.w * np.abs(u) ** self.cfg.q) * self.hv) ** (1.0 / self.cfg.q)

    def source(self, u: np.ndarray) -> np.ndarray:
        return self.w * np.abs(u) ** (self.cfg.q - 2) * u

    def potential(self, g: np.ndarray) -> np.ndarray:
        return _riesz_apply(g, self.alpha, self.plan)

    def energy(self, u: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(u * g) * self.hv)


def gradient_flow_minimize(
    init: Field, cfg: ExponentConfig, plan: SpectralPlan, opts: SolverOptions | None = None
) -> SolveReport:
    """Preconditioned descent on ``Q`` over the sphere ``||u||_{q,w} = 1``.

    The iterate is carried together with its density ``g`` (``u = I_2s g``), so
    the energy is ``<u, g>`` without any solve after the first one. The
    gradient of ``Q`` at a normalized ``u`` is ``2 (g - Q w |u|^(q-2) u)``;
    preconditioning with ``I_2s`` (the inverse of the energy operator) turns the
    step direction into ``u - Q I_2s[w |u|^(q-2) u]``. Steps are halved until
    ``Q`` does not increase and grown by ``tau_grow`` after acceptance.

    The run stops as converged when the first-order gain of a unit step falls
    below ``tol_q / stall_window`` (a stationary point; no step is taken), when
    ``Q`` moved less than ``tol_q`` (relative) over ``stall_window``
    iterations, or when backtracking finds no non-increasing step. It stops
    unconverged after ``max_iters``.
    """
    opts = opts or SolverOptions()
    opts.validate()
    _check(init, cfg, plan)
    pb = _Problem(cfg, plan)

    u = np.array(init.values, dtype=float)
    g = riesz_solve(init, pb.alpha, plan).values.copy()
    c = pb.norm(u)
    u, g = u / c, g / c
    qk = pb.energy(u, g)
    history = [qk]
    tau = opts.tau0
    accepted = 0
    negligible = opts.tol_q / opts.stall_window
    converged, reason = False, "max_iters"
    it = 0
    for it in range(1, opts.max_iters + 1):
        dg = g - qk * pb.source(u)
        du = pb.potential(dg)
        # first-order decrease of Q for a unit step; below the gain threshold u is stationary
        slope = 2.0 * pb.energy(dg, du)
        if slope <= negligible * qk:
            history.append(qk)
            converged, reason = True, "stationary"
            break
        step_ok = False
        for _ in range(opts.max_backtracks):
            v = u - tau * du
            cv = pb.norm(v)
            if cv > 0:
                v, gv = v / cv, (g - tau * dg) / cv
                qv = pb.energy(v, gv)
                if qv <= qk:
                    step_ok = True
                    break
            tau *= 0.5
        if not step_ok:
            history.append(qk)
            converged, reason = True, "no_descent"
            break
        u, g, qk = v, gv, qv
        accepted += 1
        history.append(qk)
        tau = min(tau * opts.tau_grow, opts.tau_max)
        if len(history) > opts.stall_window and (history[-1 - opts.stall_window] - qk) <= opts.tol_q * qk:
            converged, reason = True, "quotient_stall"
            break
    minimizer = Field(init.grid, u)
    return SolveReport(
        cfg=cfg,
        grid=init.grid,
        method=GRADIENT_FLOW,
        s_q_estimate=qk,
        iterations=it,
        quotient_history=history,
        residual=euler_lagrange_residual(minimizer, cfg, plan),
        converged=converged,
        minimizer=minimizer,
        accepted_steps=accepted,
        stop_reason=reason,
    )


def fixed_point_minimize(
    init: Field, cfg: ExponentConfig, plan: SpectralPlan, opts: SolverOptions | None = None
) -> SolveReport:
    """Picard iteration ``u <- I_2s[w |u|^(q-2) u]``, renormalized every step.

    The undetermined constant in the integral equation is absorbed by the
    normalization. Since each new iterate is a potential of a known density,
    its quotient ``<I_2s z, z> / ||I_2s z||^2`` is available without a solve.
    """
    opts = opts or SolverOptions()
    opts.validate()
    _check(init, cfg, plan)
    if not 0 < 2 * cfg.s < cfg.n:
        raise ValueError("kernel order 2s must lie in (0, n)")
    pb = _Problem(cfg, plan)
    u = init.values / pb.norm(init.values)
    qk = rayleigh_quotient(Field(init.grid, u), cfg, plan)
    history = [qk]
    converged, reason = False, "max_iters"
    it = 0
    for it in range(1, opts.max_iters + 1):
        z = pb.source(u)
        v = pb.potential(z)
        c = pb.norm(v)
        qk = pb.energy(v, z) / c ** 2
        v = v / c
        change = float(np.max(np.abs(v - u)) / np.max(np.abs(v)))
        u = v
        history.append(qk)
        if change < opts.tol_u:
            converged, reason = True, "sup_change"
            break
    minimizer = Field(init.grid, u)
    return SolveReport(
        cfg=cfg,
        grid=init.grid,
        method=FIXED_POINT,
        s_q_estimate=qk,
        iterations=it,
        quotient_history=history,
        residual=euler_lagrange_residual(minimizer, cfg, plan),
        converged=converged,
        minimizer=minimizer,
        accepted_steps=it,
        stop_reason=reason,
    )


def euler_lagrange_residual(u: Field, cfg: ExponentConfig, plan: SpectralPlan) -> float:
    """``min_c ||u - c I_2s[w |u|^(q-2) u]||_2 / ||u||_2``."""
    _check(u, cfg, plan)
    pb = _Problem(cfg, plan)
    v = riesz_potential(Field(u.grid, pb.source(u.values)), pb.alpha, plan).values
    x = u.values
    c = float(np.sum(x * v) / np.sum(v * v))
    return float(np.linalg.norm(x - c * v) / np.linalg.norm(x))
