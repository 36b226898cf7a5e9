"""Composite Gauss-Legendre quadrature on finite intervals and on [0, inf).

Integrands are vectorized callables: they receive a 1-D array of abscissae
and return an array of the same shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma as _gamma_fn
from scipy.special import gammaincc

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "QuadratureError",
    "GaussianEnvelope",
    "ExponentialEnvelope",
    "PowerEnvelope",
    "gauss_legendre",
    "panel_rule",
    "composite_rule",
    "integrate_finite",
    "integrate_semi_inf",
]

Integrand = Callable[[np.ndarray], np.ndarray]


class QuadratureError(RuntimeError):
    """Adaptive refinement stagnated.

    ``estimates`` holds the last two disagreeing estimates.
    """

    def __init__(self, message, estimates=(math.nan, math.nan)):
        super().__init__(message)
        self.estimates = tuple(estimates)


class QuadResult(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class QuadratureSpec:
    panel_order: int = 32
    x_max: float | None = None
    panel_growth: float = 1.5
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    first_panel: float = 1e-2
    max_depth: int = 40

    def __post_init__(self):
        if self.panel_order < 2:
            raise ValueError("panel_order must be >= 2")
        if self.x_max is not None and not (0 < self.x_max < math.inf):
            raise ValueError("x_max must be finite and positive")
        if self.panel_growth < 1.0:
            raise ValueError("panel_growth must be >= 1")

    def default_x_max(self) -> float:
        return max(12.0, math.sqrt(2.0 * math.log(1.0 / self.abs_tol)) + 6.0)


# ---------------------------------------------------------------------------
# decay envelopes: each bounds |f| beyond some abscissa and integrates the bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianEnvelope:
    """|f(x)| <= scale * x**power * exp(-rate * x**2)."""

    scale: float = 1.0
    power: float = 0.0
    rate: float = 0.5

    def tail(self, x: float) -> float:
        s = 0.5 * (self.power + 1.0)
        return self.scale * 0.5 * self.rate ** (-s) * _gamma_fn(s) * gammaincc(s, self.rate * x * x)


@dataclass(frozen=True)
class ExponentialEnvelope:
    """|f(x)| <= scale * x**power * exp(-rate * x)."""

    scale: float = 1.0
    rate: float = 1.0
    power: float = 0.0

    def tail(self, x: float) -> float:
        s = self.power + 1.0
        return self.scale * self.rate ** (-s) * _gamma_fn(s) * gammaincc(s, self.rate * x)


@dataclass(frozen=True)
class PowerEnvelope:
    """|f(x)| <= scale * x**(-power), power > 1."""

    scale: float = 1.0
    power: float = 2.0

    def tail(self, x: float) -> float:
        if self.power <= 1.0:
            return math.inf
        return self.scale * x ** (1.0 - self.power) / (self.power - 1.0)


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def gauss_legendre(order: int):
    nodes, weights = leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(f: Integrand, a: float, b: float, order: int) -> float:
    t, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * t
    return float(half * np.dot(w, f(x)))


def _graded_edges(x_max: float, spec: QuadratureSpec, breakpoints: Sequence[float] = ()):
    edges = [0.0]
    width = min(spec.first_panel, x_max)
    while edges[-1] < x_max:
        edges.append(min(edges[-1] + width, x_max))
        width *= spec.panel_growth
    extra = [b for b in breakpoints if 0.0 < b < x_max]
    return np.unique(np.concatenate([edges, extra]))


def composite_rule(spec: QuadratureSpec | None = None, breakpoints: Sequence[float] = (), lo: float = 0.0):
    """Nodes and weights of the graded composite rule on [lo, x_max]."""
    spec = spec or QuadratureSpec()
    x_max = spec.x_max if spec.x_max is not None else spec.default_x_max()
    edges = _graded_edges(x_max - lo, spec, [b - lo for b in breakpoints]) + lo
    t, w = gauss_legendre(spec.panel_order)
    a = edges[:-1, None]
    b = edges[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * t
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


def integrate_finite(f: Integrand, lo: float, hi: float, spec: QuadratureSpec | None = None) -> QuadResult:
    """Adaptive bisection on [lo, hi], driven by one-panel vs two-panel disagreement."""
    spec = spec or QuadratureSpec()
    if hi == lo:
        return QuadResult(0.0, 0.0)
    if hi < lo:
        res = integrate_finite(f, hi, lo, spec)
        return QuadResult(-res.value, res.error)
    n = spec.panel_order
    length = hi - lo
    total = 0.0
    err_total = 0.0
    stack = [(lo, hi, panel_rule(f, lo, hi, n), 0)]
    # global magnitude guess used by the relative criterion
    scale = abs(stack[0][2])
    while stack:
        a, b, coarse, depth = stack.pop()
        m = 0.5 * (a + b)
        left = panel_rule(f, a, m, n)
        right = panel_rule(f, m, b, n)
        fine = left + right
        diff = abs(fine - coarse)
        scale = max(scale, abs(fine))
        allowed = max(spec.abs_tol, spec.rel_tol * scale) * (b - a) / length
        if diff <= allowed or diff <= 8 * np.finfo(float).eps * abs(fine):
            total += fine
            err_total += diff
            continue
        if depth >= spec.max_depth:
            raise QuadratureError(
                f"refinement stagnated on [{a:.6g}, {b:.6g}]", (coarse, fine)
            )
        stack.append((a, m, left, depth + 1))
        stack.append((m, b, right, depth + 1))
    if not math.isfinite(total):
        raise QuadratureError("non-finite integral", (total, total))
    return QuadResult(total, err_total)


def integrate_semi_inf(
    f: Integrand,
    spec: QuadratureSpec | None = None,
    envelope=None,
    breakpoints: Sequence[float] = (),
) -> QuadResult:
    """Integrate over [0, inf) as graded panels on [0, x_max] plus a tail bound.

    If ``envelope`` is given (an object with ``tail(x)`` bounding the integral of
    |f| beyond x) and ``spec.x_max`` is unset, x_max is grown until the tail
    bound is at most ``abs_tol / 2``.  The tail bound is added to the error.
    """
    spec = spec or QuadratureSpec()
    x_max = spec.x_max
    tail = 0.0
    if x_max is None:
        x_max = spec.default_x_max()
        if envelope is not None:
            while envelope.tail(x_max) > 0.5 * spec.abs_tol and x_max < 1e6:
                x_max *= 1.25
    if envelope is not None:
        tail = float(envelope.tail(x_max))
    edges = _graded_edges(x_max, spec, breakpoints)
    value = 0.0
    error = tail
    for a, b in zip(edges[:-1], edges[1:]):
        res = integrate_finite(f, float(a), float(b), spec)
        value += res.value
        error += res.error
    return QuadResult(value, error)
