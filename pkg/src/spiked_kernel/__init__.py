"""Green's function of H0 = -d^2/dx^2 + x^2 + A/x^2 on (0, inf).

Closed Bessel form of the kernel, the orthonormal oscillator eigenbasis,
eigenfunction-series evaluations of the kernel and related sums, and a
Green's-function solver checked against the differential operator.
"""
from .kernel import (
    FundamentalPair,
    KernelValue,
    fundamental_pair,
    kernel,
    kernel_diag,
    kernel_eval,
    m_infinity,
    second_solution_by_quadrature,
)
from .oscillator import OscParams, energy, energies, make_params, psi, psi_record, psi_table
from .series import (
    SeriesReport,
    SpectrumCollisionError,
    diagonal_sum,
    double_norm_quadrature,
    double_norm_sq,
    resolvent_kernel_sum,
    spectral_kernel_grid,
    spectral_kernel_sum,
    watson_sum,
)
from .solver import GridSpec, SolveResult, apply_green, apply_kernel, solve_on_grid

__version__ = "0.1.0"

__all__ = [
    "OscParams", "make_params", "energy", "energies", "psi", "psi_record", "psi_table",
    "KernelValue", "FundamentalPair", "fundamental_pair", "kernel", "kernel_eval", "kernel_diag",
    "m_infinity", "second_solution_by_quadrature",
    "SeriesReport", "SpectrumCollisionError", "spectral_kernel_sum", "spectral_kernel_grid",
    "diagonal_sum", "double_norm_sq", "double_norm_quadrature", "resolvent_kernel_sum", "watson_sum",
    "GridSpec", "SolveResult", "apply_green", "apply_kernel", "solve_on_grid",
]
