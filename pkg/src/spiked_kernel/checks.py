"""Verification suite: each check compares two independent routes to a quantity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import polygamma

from .config import RunConfig
from .kernel import fundamental_pair, kernel, kernel_diag, m_infinity
from .oscillator import OscParams, energy, make_params, psi_table
from .quadrature import QuadratureSpec, composite_rule, integrate_finite
from .series import (
    SpectrumCollisionError,
    double_norm_quadrature,
    double_norm_sq,
    partial_diagonal_sums,
    resolvent_kernel_sum,
    resolvent_kernel_values,
    spectral_kernel_grid,
    trace_partial_sums,
    watson_sum,
)
from .solver import (
    GridSpec,
    apply_green,
    apply_kernel,
    bump,
    check_injectivity_asymptotics,
    eigenfunction,
    exp_decay,
    gaussian,
    solve_on_grid,
)
from .specialfn import bessel_i_scaled, bessel_k_scaled, wronskian_residual

__all__ = ["CheckResult", "run_verify", "CHECK_NAMES", "WATSON_CASES", "WRONSKIAN_ORDERS"]

WRONSKIAN_ORDERS = (0.3, 0.5, 0.75, 1.25, 2.5, 7.0)
WATSON_CASES = ((2.0, 1.0, 0.5), (2.5, 2.0, 2.0), (3.5, 3.0, 1.0))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def bessel_quotient_integral(nu: float, z: float) -> float:
    """int_z^inf dxi / (xi I_nu(xi)^2), scaled by exp(2z) so that it equals ke/ie."""
    spec = QuadratureSpec(abs_tol=0.0, rel_tol=1e-13)

    def f(xi):
        return np.exp(2.0 * (z - xi)) / (xi * bessel_i_scaled(nu, xi) ** 2)

    edges = [z]
    width = 0.25 * min(z, 1.0)
    while edges[-1] < z + 40.0:
        edges.append(min(z + 40.0, edges[-1] + width))
        width *= 1.5
    return sum(integrate_finite(f, a, b, spec).value for a, b in zip(edges[:-1], edges[1:]))


def _check_params(p: OscParams):
    dev = max(abs(2 * p.nu - (p.gamma - 1)), abs(p.a ** 4 / p.A - 1))
    ok = p.gamma > 1.5 and dev < 1e-14
    return CheckResult("params_invariants", ok, dev, 1e-14, f"gamma={p.gamma!r}")


def _check_wronskian():
    z = np.logspace(-2, 3, 41)
    worst = max(float(np.max(np.abs(wronskian_residual(nu, z)))) for nu in WRONSKIAN_ORDERS)
    return CheckResult("wronskian", worst <= 1e-10, worst, 1e-10, "nu in {0.3..7}, z in [1e-2, 1e3]")


def _check_quotient_integral():
    worst = 0.0
    for nu in WRONSKIAN_ORDERS:
        for z in (0.05, 0.5, 2.0, 10.0):
            want = bessel_k_scaled(nu, z) / bessel_i_scaled(nu, z)
            worst = max(worst, abs(bessel_quotient_integral(nu, z) / want - 1.0))
    return CheckResult("bessel_quotient_integral", worst <= 1e-8, worst, 1e-8, "K/I = int dxi/(xi I^2)")


def _check_quotient_derivative():
    worst = 0.0
    for nu in WRONSKIAN_ORDERS:
        for z in (0.3, 1.0, 4.0):
            h = 1e-4 * z

            def q(t):
                return bessel_k_scaled(nu, t) / bessel_i_scaled(nu, t) * math.exp(-2.0 * t)

            fd = (q(z + h) - q(z - h)) / (2 * h)
            # d/dz (K/I) = -1/(z I^2)
            want = -math.exp(-2.0 * z) / (z * bessel_i_scaled(nu, z) ** 2)
            worst = max(worst, abs(fd / want - 1.0))
    return CheckResult("quotient_derivative", worst <= 1e-6, worst, 1e-6, "central differences")


def _check_orthonormality(p: OscParams, n_max: int = 20):
    nodes, weights = composite_rule(QuadratureSpec(x_max=16.0))
    table = psi_table(p, n_max, nodes)
    gram = (table * weights) @ table.T
    dev = float(np.max(np.abs(gram - np.eye(n_max + 1))))
    return CheckResult("orthonormality", dev <= 1e-8, dev, 1e-8, f"psi_0..psi_{n_max}")


def _check_eigenrelation(p: OscParams, n_max: int = 10, h: float = 1e-2):
    x = np.linspace(0.3, 6.0, 58)
    offs = np.array([-2, -1, 0, 1, 2]) * h
    tab = psi_table(p, n_max, (x[:, None] + offs).ravel()).reshape(n_max + 1, x.size, 5)
    upp = (-tab[..., 0] + 16 * tab[..., 1] - 30 * tab[..., 2] + 16 * tab[..., 3] - tab[..., 4]) / (12 * h * h)
    worst = 0.0
    for n in range(n_max + 1):
        res = -upp[n] + p.potential(x) * tab[n, :, 2] - energy(p, n) * tab[n, :, 2]
        worst = max(worst, float(np.max(np.abs(res)) / (energy(p, n) * np.max(np.abs(tab[n, :, 2])))))
    return CheckResult("eigenrelation", worst <= 1e-5, worst, 1e-5, "5-point H0 psi_n vs E_n psi_n")


def _series_rows(name, p, xs, ys, cfg: RunConfig):
    reports = spectral_kernel_grid(p, xs, ys, cfg.tolerance, cfg.max_terms)
    worst, unconverged, terms = 0.0, 0, 0
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            r = reports[i][j]
            worst = max(worst, abs(r.value - kernel(p, x, y)))
            unconverged += not r.converged
            terms = max(terms, r.n_terms)
    ok = unconverged == 0 and worst <= cfg.tolerance
    return CheckResult(name, ok, worst, cfg.tolerance, f"unconverged={unconverged} max_terms_used={terms}")


def _check_diag_elementary(p: OscParams):
    x = np.geomspace(0.1, 30.0, 200)
    want = -np.expm1(-x * x) / (2 * x)
    dev = float(np.max(np.abs(kernel_diag(p, x) / want - 1.0)))
    return CheckResult("diag_elementary", dev <= 1e-10, dev, 1e-10, "A=3/4: K(x,x) = (1-exp(-x^2))/(2x)")


def _check_majorization(p: OscParams, xs, n_max: int = 5000):
    sums = partial_diagonal_sums(p, xs, n_max)
    ratio = float(np.max(sums / np.maximum(kernel_diag(p, xs), 1e-300))) if len(xs) else 0.0
    mono = bool(np.all(np.diff(sums, axis=0) >= 0))
    ok = ratio <= 1 + 1e-9 and mono
    return CheckResult("majorization", ok, ratio, 1 + 1e-9, f"N <= {n_max}, monotone={mono}")


def _check_m_infinity(p: OscParams):
    sup, arg = m_infinity(p)
    bound = math.sqrt(2.0) * p.A ** -0.25
    return CheckResult("m_infinity_bound", 0 < sup <= bound, sup, bound, f"argmax={arg:.6g}")


def _check_asymptotics(p: OscParams):
    far = abs(2 * 30.0 * kernel_diag(p, 30.0) - 1.0)
    near = abs(math.sqrt(1 + 4 * p.A) * kernel_diag(p, 1e-3) / 1e-3 - 1.0)
    return [
        CheckResult("diag_large_x", far <= 1e-2, far, 1e-2, "|2x K(x,x) - 1| at x=30"),
        CheckResult("diag_small_x", near <= 1e-3, near, 1e-3, "|sqrt(1+4A) K(x,x)/x - 1| at x=1e-3"),
    ]


def _check_double_norm(p: OscParams):
    oracle = float(polygamma(1, 0.5 * p.gamma)) / 16.0
    series = double_norm_sq(p, 1e-12)
    quad = double_norm_quadrature(p).value
    return [
        CheckResult("double_norm_series", abs(series - oracle) <= 1e-8, abs(series - oracle), 1e-8, "trigamma(gamma/2)/16"),
        CheckResult("double_norm_quadrature", abs(quad / series - 1) <= 1e-5, abs(quad / series - 1), 1e-5, "int int K^2"),
    ]


def _check_trace_divergence(p: OscParams):
    sums = trace_partial_sums(p, 100000)
    gain = float(sums[-1] - sums[999])
    expected = 0.25 * math.log(100.0)
    return CheckResult("trace_divergence", gain > 0.9 * expected, gain, 0.9 * expected, "sum 1/E_n grows like log(N)/4")


def _check_watson(cfg: RunConfig):
    worst, ok = 0.0, True
    for g, x, y in WATSON_CASES:
        res = watson_sum(g, x, y)
        rel = abs(res.lhs - res.rhs) / abs(res.rhs)
        worst = max(worst, rel)
        ok = ok and res.report.converged
    return CheckResult("watson", ok and worst <= 1e-6, worst, 1e-6, "3 cases")


def _check_resolvent(p: OscParams):
    worst = 0.0
    skipped = []
    for lam in (0.0, 2.0, 100.0):
        try:
            resolvent_kernel_sum(p, lam, 1.0, 1.0, max_terms=64)
        except SpectrumCollisionError as exc:
            skipped.append(f"lambda={lam:g} is E_{exc.n}")
            continue
        for x in (0.7, 1.5, 3.0):
            nodes, weights = composite_rule(QuadratureSpec(x_max=14.0), breakpoints=[x])
            row = resolvent_kernel_values(p, lam, x, nodes, 64)
            tab = psi_table(p, 5, np.concatenate([[x], nodes]))
            for n in range(6):
                got = float(np.dot(weights, row * tab[n, 1:]))
                want = tab[n, 0] / (lam - energy(p, n))
                worst = max(worst, abs(got / want - 1.0))
    rows = [CheckResult("resolvent_projection", worst <= 1e-4, worst, 1e-4, "; ".join(skipped) or "lambda in {0,2,100}")]
    try:
        resolvent_kernel_sum(p, energy(p, 2), 1.0, 1.0)
        rows.append(CheckResult("resolvent_collision", False, 0.0, 2, "no error raised at E_2"))
    except SpectrumCollisionError as exc:
        rows.append(CheckResult("resolvent_collision", exc.n == 2, float(exc.n), 2, "error names n"))
    return rows


def _check_solver(p: OscParams):
    family = [exp_decay(), gaussian(), bump()] + [eigenfunction(p, n) for n in range(6)]
    worst_res, worst_ratio, ok_bound = 0.0, 0.0, True
    grid = GridSpec(0.3, 6.0, 12)
    for f in family:
        r = solve_on_grid(p, f, grid)
        worst_res = max(worst_res, r.residual_sup / f.sup_norm)
        worst_ratio = max(worst_ratio, r.sup_ratio)
        ok_bound = ok_bound and r.sup_ratio < r.bound
    bound = 4.0 / math.sqrt(p.A)
    two = max(abs(apply_green(p, f, x) - apply_kernel(p, f, x)) for f in family[:3] for x in (0.5, 1.7, 4.0))
    return [
        CheckResult("solver_residual", worst_res <= 1e-4, worst_res, 1e-4, "||H0 u - f|| / ||f|| on [0.3, 6]"),
        CheckResult("solver_bound", ok_bound, worst_ratio, bound, "||u|| / ||f|| < 4 A^-1/2"),
        CheckResult("solver_two_routes", two <= 1e-9, two, 1e-9, "split integrals vs single integral"),
    ]


def _check_injectivity(p: OscParams):
    rep = check_injectivity_asymptotics(p)
    failed = [k for k, v in rep.checks.items() if not v]
    return CheckResult("injectivity_asymptotics", rep.ok, float(len(failed)), 0.0, ",".join(failed) or "all limits")


CHECK_NAMES = (
    "params_invariants", "wronskian", "bessel_quotient_integral", "quotient_derivative",
    "orthonormality", "eigenrelation", "series_grid", "series_random", "diagonal_sum",
    "diag_elementary", "majorization", "m_infinity_bound", "diag_large_x", "diag_small_x",
    "double_norm_series", "double_norm_quadrature", "trace_divergence", "watson",
    "resolvent_projection", "resolvent_collision", "solver_residual", "solver_bound",
    "solver_two_routes", "injectivity_asymptotics",
)


def run_verify(cfg: RunConfig) -> list:
    """Run every check for ``cfg.A``; diag_elementary only applies at A = 3/4."""
    p = make_params(cfg.A)
    xs = [x for x in np.unique(np.round(np.linspace(cfg.grid.min, cfg.grid.max, cfg.grid.count), 12))]
    if cfg.grid.spacing == "log":
        xs = list(np.geomspace(cfg.grid.min, cfg.grid.max, cfg.grid.count))
    xs = np.array([x for x in xs if x > 0])
    rng = np.random.default_rng(cfg.seed)
    rand_x = np.sort(rng.uniform(0.05, max(cfg.grid.max, 0.1), 4))
    rand_y = np.sort(rng.uniform(0.05, max(cfg.grid.max, 0.1), 4))

    out = [
        _check_params(p),
        _check_wronskian(),
        _check_quotient_integral(),
        _check_quotient_derivative(),
        _check_orthonormality(p),
        _check_eigenrelation(p),
        _series_rows("series_grid", p, xs, xs, cfg),
        _series_rows("series_random", p, rand_x, rand_y, cfg),
    ]
    diag = spectral_kernel_grid(p, xs, xs, cfg.tolerance, cfg.max_terms)
    dev = max(abs(diag[i][i].value - kernel_diag(p, x)) for i, x in enumerate(xs))
    conv = all(diag[i][i].converged for i in range(len(xs)))
    out.append(CheckResult("diagonal_sum", conv and dev <= cfg.tolerance, dev, cfg.tolerance, f"converged={conv}"))
    if cfg.A == 0.75:
        out.append(_check_diag_elementary(p))
    out += [_check_majorization(p, xs), _check_m_infinity(p)]
    out += _check_asymptotics(p)
    out += _check_double_norm(p)
    out.append(_check_trace_divergence(p))
    out.append(_check_watson(cfg))
    out += _check_resolvent(p)
    out += _check_solver(p)
    out.append(_check_injectivity(p))
    return out
