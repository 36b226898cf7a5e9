"""Special functions used throughout the package.

Modified Bessel functions of real order are exposed only in exponentially
scaled form, ``ie = exp(-z) I_nu(z)`` and ``ke = exp(z) K_nu(z)``, because the
arguments met here (``z = x**2 / 2``) overflow ``exp(z)`` already at x ~ 38.

Algorithms
----------
* ``I_nu``: ascending power series for ``z <= max(20, nu**2 / 2)``, Hankel
  large-argument expansion above.  Both accumulate in scaled form.
* ``K_nu``: Temme's series for the fractional order ``mu = nu - round(nu)``
  when ``z <= 2`` and Steed's continued fraction otherwise, followed by the
  (stable) upward order recurrence.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AccuracyWarning",
    "ScaledBesselPair",
    "log_gamma",
    "log_pochhammer",
    "pochhammer",
    "laguerre",
    "laguerre_1f1",
    "hyp1f1_unit",
    "bessel_i_scaled",
    "bessel_k_scaled",
    "bessel_i_exp",
    "bessel_k_exp",
    "bessel_pair_scaled",
    "wronskian_residual",
    "NU_RANGE",
    "Z_MAX",
]

EPS = np.finfo(float).eps

#: validated accuracy envelope for the Bessel routines
NU_RANGE = (0.0, 30.0)
Z_MAX = 1.0e4

# integer-distance below which removable singularities switch to Taylor forms
_NEAR_INTEGER = 1e-4

# Taylor coefficients of 1/Gamma(z) = sum_{k>=1} c_k z**k
_RGAMMA_COEFFS = (
    0.0,
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
    1.7144063219273374334e-20,
)


class AccuracyWarning(UserWarning):
    """Raised (as a warning) when an evaluation leaves the validated envelope."""


@dataclass(frozen=True)
class ScaledBesselPair:
    nu: float
    z: float
    ie: float
    ke: float


# ---------------------------------------------------------------------------
# gamma family
# ---------------------------------------------------------------------------

def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def log_pochhammer(a: float, n: int) -> float:
    """log of the rising factorial (a)_n = Gamma(a + n) / Gamma(a), a > 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.0
    return log_gamma(a + n) - log_gamma(a)


def pochhammer(a: float, n: int) -> float:
    return math.exp(log_pochhammer(a, n))


# ---------------------------------------------------------------------------
# Laguerre / confluent hypergeometric
# ---------------------------------------------------------------------------

def laguerre(n: int, alpha: float, z):
    """Associated Laguerre polynomial L_n^alpha(z) by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    z = np.asarray(z, dtype=float)
    prev = np.ones_like(z)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - z
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - z) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def laguerre_1f1(n: int, gamma: float, z):
    """1F1(-n; gamma; z) = n! / (gamma)_n * L_n^{gamma-1}(z)."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    scale = math.exp(log_gamma(n + 1) - log_pochhammer(gamma, n))
    return scale * laguerre(n, gamma - 1.0, z)


def hyp1f1_unit(gamma: float, z: float, max_terms: int = 100000) -> float:
    """1F1(1; gamma; z) = sum_k z**k / (gamma)_k for z >= 0."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if z < 0:
        raise ValueError("only z >= 0 is supported")
    term = 1.0
    terms = [term]
    for k in range(max_terms):
        term *= z / (gamma + k)
        terms.append(term)
        if term < EPS * 1e-2 * terms[0] and k > z:
            break
    else:
        raise RuntimeError("1F1(1; gamma; z) series did not converge")
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# modified Bessel functions
# ---------------------------------------------------------------------------

def _prepare(nu, z):
    nu = float(nu)
    if nu < 0 or not math.isfinite(nu):
        raise ValueError(f"order must be finite and >= 0, got {nu!r}")
    arr = np.asarray(z, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("Bessel argument must be > 0")
    if not (NU_RANGE[0] <= nu <= NU_RANGE[1]) or np.any(arr > Z_MAX):
        warnings.warn(
            f"Bessel evaluation outside validated envelope "
            f"(nu={nu}, max z={float(arr.max()):.6g})",
            AccuracyWarning,
            stacklevel=3,
        )
    return nu, arr


def _finish(out, scalar):
    if not np.all(np.isfinite(out)):
        warnings.warn("Bessel evaluation overflowed", AccuracyWarning, stacklevel=3)
    return float(out) if scalar else out


def _i_crossover(nu: float) -> float:
    return max(20.0, 0.5 * nu * nu)


def _i_series_scaled(nu: float, z: np.ndarray) -> np.ndarray:
    # sum_k (z/2)^(2k+nu) / (k! Gamma(k+nu+1)), prefactor kept in log form
    q = 0.25 * z * z
    term = np.ones_like(z)
    total = np.ones_like(z)
    log_shift = np.zeros_like(z)
    active = np.ones(z.shape, dtype=bool)
    k = 0
    kmax = int(4 * z.max() + 50) if z.size else 0
    while active.any() and k < kmax:
        k += 1
        term[active] *= q[active] / (k * (k + nu))
        total[active] += term[active]
        active &= term > 0.25 * EPS * total
        big = total > 1e280
        if big.any():
            total[big] *= 1e-280
            term[big] *= 1e-280
            log_shift[big] += 280.0 * math.log(10.0)
    log_pref = nu * np.log(0.5 * z) - math.lgamma(nu + 1.0) - z + log_shift
    return np.exp(log_pref + np.log(total))


def _i_hankel_scaled(nu: float, z: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    term = np.ones_like(z)
    total = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    k = 0
    while active.any() and k < 400:
        k += 1
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        # stop on convergence or once the divergent tail starts growing
        grow = np.abs(new) > np.abs(term)
        active &= ~grow
        term = np.where(active, new, term)
        total = np.where(active, total + new, total)
        active &= np.abs(new) > 0.25 * EPS * np.abs(total)
    return total / np.sqrt(2.0 * math.pi * z)


def _rgamma_parts(mu: float):
    """Return (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)) for |mu| <= 1/2.

    gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu),
    gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2, evaluated from the Taylor
    series of 1/Gamma so that mu -> 0 needs no special casing.
    """
    gam1 = 0.0
    gam2 = 0.0
    for k in range(len(_RGAMMA_COEFFS) - 1, 0, -1):
        c = _RGAMMA_COEFFS[k]
        if k % 2 == 0:
            gam1 = gam1 * mu * mu - c
        else:
            gam2 = gam2 * mu * mu + c
    gampl = gam2 - mu * gam1
    gammi = gam2 + mu * gam1
    return gam1, gam2, gampl, gammi


def _x_over_sin(x: float) -> float:
    if abs(x) < _NEAR_INTEGER:
        return 1.0 + x * x / 6.0
    return x / math.sin(x)


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _NEAR_INTEGER
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(safe) / safe)


def _k_temme(mu: float, z: np.ndarray):
    """Unscaled K_mu(z), K_{mu+1}(z) for z <= 2 and |mu| <= 1/2."""
    x2 = 0.5 * z
    fact = _x_over_sin(math.pi * mu)
    d = -np.log(x2)
    e = mu * d
    fact2 = _sinhc(e)
    gam1, gam2, gampl, gammi = _rgamma_parts(mu)
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(z)
    dd = x2 * x2
    total1 = p.copy()
    for i in range(1, 200):
        ff = (i * ff + p + q) / (i * i - mu * mu)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total += delta
        delta1 = c * (p - i * ff)
        total1 += delta1
        if np.all(np.abs(delta) < np.abs(total) * EPS):
            break
    return total, total1 * 2.0 / z


def _k_steed(mu: float, z: np.ndarray):
    """Scaled exp(z) K_mu(z), exp(z) K_{mu+1}(z) for z > 2 (continued fraction)."""
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(z)
    q2 = np.ones_like(z)
    a1 = 0.25 - mu * mu
    q = np.full_like(z, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 100000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < np.abs(s) * EPS):
            break
    h = a1 * h
    k_mu = np.sqrt(math.pi / (2.0 * z)) / s
    k_mu1 = k_mu * (mu + z + 0.5 - h) / z
    return k_mu, k_mu1


def _k_scaled_pair(nu: float, z: np.ndarray):
    """Return (ke_nu, ke_nu1, log_shift) with K_nu = ke_nu * exp(log_shift - z)."""
    nl = int(nu + 0.5)
    mu = nu - nl
    small = z <= 2.0
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    if small.any():
        zs = z[small]
        a, b = _k_temme(mu, zs)
        ez = np.exp(zs)
        k0[small] = a * ez
        k1[small] = b * ez
    if (~small).any():
        a, b = _k_steed(mu, z[~small])
        k0[~small] = a
        k1[~small] = b
    log_shift = np.zeros_like(z)
    for i in range(1, nl + 1):
        k0, k1 = k1, (mu + i) * (2.0 / z) * k1 + k0
        big = k1 > 1e250
        if big.any():
            k0[big] *= 1e-250
            k1[big] *= 1e-250
            log_shift[big] += 250.0 * math.log(10.0)
    return k0, k1, log_shift


def bessel_i_scaled(nu, z):
    """exp(-z) * I_nu(z) for real order nu >= 0 and z > 0 (array friendly)."""
    scalar = np.ndim(z) == 0
    nu, z = _prepare(nu, z)
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    series = z <= _i_crossover(nu)
    if series.any():
        out[series] = _i_series_scaled(nu, z[series])
    if (~series).any():
        out[~series] = _i_hankel_scaled(nu, z[~series])
    return _finish(out[0] if scalar else out, scalar)


def bessel_k_scaled(nu, z):
    """exp(z) * K_nu(z) for real order nu >= 0 and z > 0 (array friendly)."""
    scalar = np.ndim(z) == 0
    nu, z = _prepare(nu, z)
    z = np.atleast_1d(z)
    k0, _, shift = _k_scaled_pair(nu, z)
    with np.errstate(over="ignore"):
        out = k0 * np.exp(shift)
    return _finish(out[0] if scalar else out, scalar)


def bessel_i_exp(nu, z):
    """I_nu(z) as a (mantissa, exponent) pair: I = mantissa * exp(exponent)."""
    ie = bessel_i_scaled(nu, z)
    return ie, (float(z) if np.ndim(z) == 0 else np.asarray(z, dtype=float).copy())


def bessel_k_exp(nu, z):
    """K_nu(z) as a (mantissa, exponent) pair; survives z -> 0 at large order."""
    scalar = np.ndim(z) == 0
    nu, arr = _prepare(nu, z)
    arr = np.atleast_1d(arr)
    k0, _, shift = _k_scaled_pair(nu, arr)
    expo = shift - arr
    if scalar:
        return float(k0[0]), float(expo[0])
    return k0, expo


def bessel_pair_scaled(nu: float, z: float) -> ScaledBesselPair:
    return ScaledBesselPair(float(nu), float(z), bessel_i_scaled(nu, z), bessel_k_scaled(nu, z))


def _scaled_orders(nu: float, z):
    """(ie, ke) at order nu, allowing nu > -1 via I_{-m} = I_m + (2/pi) sin(m pi) K_m."""
    if nu >= 0:
        return bessel_i_scaled(nu, z), bessel_k_scaled(nu, z)
    m = -nu
    ie, ke = bessel_i_scaled(m, z), bessel_k_scaled(m, z)
    return ie + (2.0 / math.pi) * math.sin(m * math.pi) * ke * np.exp(-2.0 * np.asarray(z)), ke


def wronskian_residual(nu: float, z):
    """z * (I_nu K_nu' - I_nu' K_nu) + 1, which vanishes identically.

    Derivatives come from I' = (I_{nu-1} + I_{nu+1})/2 and
    K' = -(K_{nu-1} + K_{nu+1})/2; the exponential scalings cancel pairwise.
    """
    if not nu > 0.0:
        raise ValueError("nu must be > 0")
    ie0, ke0 = _scaled_orders(nu, z)
    iem, kem = _scaled_orders(nu - 1.0, z)
    iep, kep = _scaled_orders(nu + 1.0, z)
    w = -0.5 * (ie0 * (kem + kep) + (iem + iep) * ke0)
    return np.asarray(z) * w + 1.0
