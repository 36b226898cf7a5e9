"""Closed-form Green's function of H0 in terms of modified Bessel functions.

With nu = (gamma - 1) / 2 the regular and decaying solutions of H0 u = 0 are

    v(x) = sqrt(x/2) I_nu(x^2/2),    w(x) = sqrt(x/2) K_nu(x^2/2),

and K(x, y) = w(max) v(min).  Everything is assembled from scaled Bessel values
with the exponent (min^2 - max^2)/2 <= 0 carried separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .oscillator import OscParams
from .quadrature import QuadratureSpec, integrate_finite
from .specialfn import bessel_i_scaled, bessel_k_scaled

__all__ = [
    "KernelValue",
    "FundamentalPair",
    "NORMALIZATION",
    "fundamental_pair",
    "log_v",
    "kernel_eval",
    "kernel",
    "kernel_diag",
    "second_solution_by_quadrature",
    "m_infinity",
]

#: B = C = 1/sqrt(2); only the product BC = 1/2 enters kernel quantities
NORMALIZATION = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class KernelValue:
    x: float
    y: float
    mantissa: float
    log_scale: float

    @property
    def value(self) -> float:
        return self.mantissa * math.exp(self.log_scale)


@dataclass(frozen=True)
class FundamentalPair:
    """v(x) = v_mantissa * exp(v_log_scale), likewise for w."""

    x: float
    v_mantissa: float
    v_log_scale: float
    w_mantissa: float
    w_log_scale: float
    normalization: float = NORMALIZATION

    @property
    def v(self) -> float:
        return self.v_mantissa * math.exp(self.v_log_scale)

    @property
    def w(self) -> float:
        return self.w_mantissa * math.exp(self.w_log_scale)

    @property
    def log_v(self) -> float:
        return math.log(self.v_mantissa) + self.v_log_scale

    @property
    def log_w(self) -> float:
        return math.log(self.w_mantissa) + self.w_log_scale


def fundamental_pair(params: OscParams, x: float) -> FundamentalPair:
    x = float(x)
    if not x > 0:
        raise ValueError(f"fundamental_pair requires x > 0, got {x!r}")
    z = 0.5 * x * x
    root = NORMALIZATION * math.sqrt(x)
    return FundamentalPair(
        x=x,
        v_mantissa=root * bessel_i_scaled(params.nu, z),
        v_log_scale=z,
        w_mantissa=root * bessel_k_scaled(params.nu, z),
        w_log_scale=-z,
    )


def log_v(params: OscParams, x):
    """log v(x) for x > 0 (vectorized)."""
    x = np.asarray(x, dtype=float)
    z = 0.5 * x * x
    return np.log(NORMALIZATION * np.sqrt(x) * bessel_i_scaled(params.nu, z)) + z


def kernel(params: OscParams, x, y):
    """K(x, y) for broadcastable arrays x, y >= 0."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("kernel arguments must be >= 0")
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    out = np.zeros(x.shape)
    live = lo > 0
    if live.any():
        zh = 0.5 * hi[live] ** 2
        zl = 0.5 * lo[live] ** 2
        out[live] = (
            0.5
            * np.sqrt(x[live] * y[live])
            * bessel_k_scaled(params.nu, zh)
            * bessel_i_scaled(params.nu, zl)
            * np.exp(zl - zh)
        )
    return float(out) if out.ndim == 0 else out


def kernel_eval(params: OscParams, x: float, y: float) -> KernelValue:
    x = float(x)
    y = float(y)
    if x < 0 or y < 0:
        raise ValueError("kernel arguments must be >= 0")
    hi, lo = max(x, y), min(x, y)
    if lo == 0.0:
        return KernelValue(x, y, 0.0, 0.0)
    zh, zl = 0.5 * hi * hi, 0.5 * lo * lo
    mant = 0.5 * math.sqrt(hi * lo) * bessel_k_scaled(params.nu, zh) * bessel_i_scaled(params.nu, zl)
    return KernelValue(x, y, mant, zl - zh)


def kernel_diag(params: OscParams, x):
    """K(x, x) = (x/2) I_nu(x^2/2) K_nu(x^2/2); continuous with K(0, 0) = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("x must be >= 0")
    flat = np.atleast_1d(arr)
    out = np.zeros(flat.shape)
    live = flat > 0
    if live.any():
        z = 0.5 * flat[live] ** 2
        out[live] = 0.5 * flat[live] * bessel_i_scaled(params.nu, z) * bessel_k_scaled(params.nu, z)
    return float(out[0]) if arr.ndim == 0 else out


def second_solution_by_quadrature(params: OscParams, x: float, spec: QuadratureSpec | None = None) -> float:
    """w(x) = v(x) * int_x^inf v(r)^-2 dr, evaluated by quadrature.

    Written with scaled Bessel values, the integrand is
    2 exp(x^2/2 - r^2) / (r ie(r^2/2)^2) and decays like a Gaussian in r.
    """
    x = float(x)
    if not x > 0:
        raise ValueError("x must be > 0")
    nu = params.nu
    half = 0.5 * x * x
    spec = spec or QuadratureSpec(abs_tol=0.0, rel_tol=1e-13)

    def integrand(r):
        return 2.0 * np.exp(half - r * r) / (r * bessel_i_scaled(nu, 0.5 * r * r) ** 2)

    # e^{x^2/2 - r^2} < 1e-30 * e^{-x^2/2} beyond this point
    upper = math.sqrt(x * x + 70.0)
    width = 1.0 / (1.0 + x)
    edges = [x]
    while edges[-1] < upper:
        edges.append(min(upper, edges[-1] + width))
        width *= 1.5
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate_finite(integrand, a, b, spec).value
    v_mant = NORMALIZATION * math.sqrt(x) * bessel_i_scaled(nu, half)
    return v_mant * total


def m_infinity(params: OscParams, lo: float = 1e-3, hi: float = 50.0, points: int = 64):
    """(sup_x K(x, x), argmax) via a log-spaced scan and golden-section refinement."""
    grid = np.logspace(math.log10(lo), math.log10(hi), points)
    vals = kernel_diag(params, grid)
    i = int(np.argmax(vals))
    if i == 0 or i == points - 1:
        raise RuntimeError(f"diagonal maximum not bracketed in [{lo}, {hi}]")
    res = minimize_scalar(
        lambda t: -kernel_diag(params, t),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        tol=1e-10,
    )
    return float(-res.fun), float(res.x)
