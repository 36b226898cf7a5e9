"""Parameters and orthonormal eigenbasis of H0 = -d^2/dx^2 + x^2 + A/x^2.

The eigenfunctions are evaluated through the orthonormal form of the Laguerre
recurrence.  With alpha = gamma - 1 and q_n = sqrt(n!/Gamma(n+alpha+1)) L_n^alpha,

    sqrt((n+1)(n+1+alpha)) q_{n+1} = (2n+alpha+1-z) q_n - sqrt(n(n+alpha)) q_{n-1},

and psi_n(x) = (-1)^n sqrt(2) x^(gamma-1/2) exp(-x^2/2) q_n(x^2).  The weight
is folded into the starting value in log space, so no factorial ratio is ever
formed explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specialfn import log_gamma

__all__ = [
    "OscParams",
    "EigenIndex",
    "PsiValue",
    "make_params",
    "energy",
    "energies",
    "psi",
    "psi_record",
    "psi_table",
    "psi_stream",
    "LaguerreStream",
]

_RENORM = 1e100
_LOG_RENORM = math.log(_RENORM)


@dataclass(frozen=True)
class OscParams:
    """Coupling A with derived gamma, nu = (gamma-1)/2 and a = A**(1/4)."""

    A: float
    gamma: float
    nu: float
    a: float

    @property
    def alpha(self) -> float:
        """Laguerre index gamma - 1."""
        return self.gamma - 1.0

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        return x * x + self.A / (x * x)


@dataclass(frozen=True)
class EigenIndex:
    n: int
    energy: float


@dataclass(frozen=True)
class PsiValue:
    """psi_n(x) with its log-magnitude; ``underflow`` marks an exact-zero return."""

    n: int
    x: float
    value: float
    log_abs: float
    sign: int
    underflow: bool


def make_params(A: float) -> OscParams:
    A = float(A)
    if not (A > 0 and math.isfinite(A)):
        raise ValueError(f"coupling A must be finite and > 0, got {A!r}")
    root = math.sqrt(1.0 + 4.0 * A)
    gamma = 1.0 + 0.5 * root
    return OscParams(A=A, gamma=gamma, nu=0.5 * (gamma - 1.0), a=A ** 0.25)


def energy(params: OscParams, n: int) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return 4.0 * n + 2.0 * params.gamma


def energies(params: OscParams, count: int) -> np.ndarray:
    return 4.0 * np.arange(count) + 2.0 * params.gamma


class LaguerreStream:
    """Resumable orthonormal Laguerre recurrence at fixed abscissae.

    Row n equals ``s_n * exp(log_start) * q_n(z)`` where q_0 = 1 and
    s_n = (-1)^n when ``signed`` else 1; ``log_start`` carries any weight.
    Mantissas are renormalized so huge or tiny weights never overflow.
    """

    def __init__(self, alpha: float, z, log_start, signed: bool = True):
        self.alpha = float(alpha)
        self.z = np.atleast_1d(np.asarray(z, dtype=float))
        self.scale = np.broadcast_to(np.asarray(log_start, dtype=float), self.z.shape).copy()
        self.sign = -1.0 if signed else 1.0
        self.factor = np.exp(self.scale)
        self.m_prev = np.zeros(self.z.shape)
        self.m_cur = np.where(np.isfinite(self.scale), 1.0, 0.0)
        self.n = 0  # index of the row held in m_cur

    def _step(self):
        k = self.n
        a = self.alpha
        if k == 0:
            nxt = self.sign * (a + 1.0 - self.z) / math.sqrt(a + 1.0) * self.m_cur
        else:
            nxt = (
                self.sign * (2.0 * k + a + 1.0 - self.z) * self.m_cur
                - math.sqrt(k * (k + a)) * self.m_prev
            ) / math.sqrt((k + 1.0) * (k + 1.0 + a))
        self.m_prev, self.m_cur = self.m_cur, nxt
        self.n = k + 1
        if self.n % 16 == 0:
            big = np.abs(nxt) > _RENORM
            if big.any():
                self.m_prev[big] /= _RENORM
                self.m_cur[big] /= _RENORM
                self.scale[big] += _LOG_RENORM
                self.factor = np.exp(self.scale)

    def current(self) -> np.ndarray:
        return self.m_cur * self.factor

    def take(self, count: int) -> np.ndarray:
        """Rows n, n+1, ..., n+count-1 starting at the current row; advances."""
        out = np.empty((count, self.z.size))
        for i in range(count):
            out[i] = self.m_cur * self.factor
            self._step()
        return out


def psi_stream(params: OscParams, x) -> LaguerreStream:
    """Stream of psi_0(x), psi_1(x), ... for x >= 0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0):
        raise ValueError("x must be >= 0")
    log0 = np.full(x.shape, -np.inf)
    pos = x > 0
    log0[pos] = (
        0.5 * math.log(2.0)
        + (params.gamma - 0.5) * np.log(x[pos])
        - 0.5 * x[pos] ** 2
        - 0.5 * log_gamma(params.gamma)
    )
    return LaguerreStream(params.alpha, x * x, log0, signed=True)


def psi_table(params: OscParams, n_max: int, x) -> np.ndarray:
    """Array of shape (n_max + 1, len(x)) with row n holding psi_n(x)."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    return psi_stream(params, x).take(n_max + 1)


def psi(params: OscParams, n: int, x):
    """psi_n(x) including the (-1)^n sign; psi_n(0) = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    stream = psi_stream(params, x)
    for _ in range(n):
        stream._step()
    out = stream.current()
    return float(out[0]) if np.ndim(x) == 0 else out


def psi_record(params: OscParams, n: int, x: float) -> PsiValue:
    x = float(x)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return PsiValue(n, x, 0.0, -math.inf, 0, False)
    stream = psi_stream(params, x)
    for _ in range(n):
        stream._step()
    m = float(stream.m_cur[0])
    if m == 0.0:
        return PsiValue(n, x, 0.0, -math.inf, 0, False)
    v = float(stream.current()[0])
    log_abs = float(stream.scale[0]) + math.log(abs(m))
    return PsiValue(n, x, v, log_abs, 1 if m > 0 else -1, v == 0.0)
