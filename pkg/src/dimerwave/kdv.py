"""Leading-order long-wave objects: the soliton core and its profile equation.

At leading order the dimer's traveling-wave system collapses to a single
stationary profile equation

    kdv_alpha * f'' - f + sound_speed**2 * gamma * f**2 = 0,
    gamma = (kappa/(kappa+1)) * (beta/kappa**3 + 1),

whose localized even solution is the sech-squared soliton.  The lattice
inherits it as a two-component "stegoton" profile alternating by a factor
kappa between the two spring families.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import DimerParams, derived_constants
from .spectral import LineField, LineGrid


def nonlinear_strength(params: DimerParams) -> float:
    """``gamma = (kappa/(kappa+1))*(beta/kappa**3 + 1)``, the quadratic
    coefficient of the profile equation; nonzero by the model's constraints."""
    kap = params.kappa
    return (kap / (kap + 1)) * (params.beta / kap**3 + 1)


@dataclass(frozen=True)
class Soliton:
    """The closed-form localized core ``sigma(X) = A * sech(X/w)**2``.

    Attributes
    ----------
    A : float
        Amplitude ``(3/(2*sound_speed**2)) * ((kappa+1)/kappa) / (beta/kappa**3 + 1)``;
        finite and nonzero because ``beta + kappa**3 != 0``.
    w : float
        Width ``2*sqrt(kdv_alpha)`` > 0.
    """

    params: DimerParams
    A: float = field(init=False)
    w: float = field(init=False)

    def __post_init__(self):
        c2 = self.params.sound_speed**2
        kap = self.params.kappa
        A = (3 / (2 * c2)) * ((kap + 1) / kap) / (self.params.beta / kap**3 + 1)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "w", 2 * np.sqrt(self.params.kdv_alpha))

    def sigma(self, X):
        """Core profile ``A*sech(X/w)**2``, evaluated analytically."""
        return self.A / np.cosh(np.asarray(X) / self.w) ** 2

    def sigma_prime(self, X):
        """Analytic derivative ``-(2A/w)*sech(X/w)**2*tanh(X/w)`` (odd)."""
        X = np.asarray(X)
        return -(2 * self.A / self.w) * np.tanh(X / self.w) / np.cosh(X / self.w) ** 2

    def as_field(self, grid: LineGrid) -> LineField:
        return LineField(grid, self.sigma(grid.X))


def core_profile(params: DimerParams, grid: LineGrid):
    """Solitary core ``sigma`` and its slope as fields, in the grid's dtype.

    Mirrors ``Soliton`` exactly in double precision, but recomputes the
    amplitude/width constants in ``grid.X.dtype`` so extended-precision
    pipelines (which chase ripple amplitudes near the double rounding floor)
    see no double-rounded constants anywhere.
    """
    dt = grid.X.dtype.type
    c, alpha = derived_constants(params.kappa, dt)
    kap, beta = dt(params.kappa), dt(params.beta)
    gamma = (kap / (kap + 1)) * (beta / kap**3 + 1)
    A = dt(3) / (dt(2) * c * c * gamma)
    w = dt(2) * np.sqrt(alpha)
    y = grid.X / w
    sech2 = 1 / np.cosh(y) ** 2
    core = LineField(grid, A * sech2, even=True)
    slope = LineField(grid, -(2 * A / w) * np.tanh(y) * sech2, even=False)
    return core, slope


def kdv_residual(params: DimerParams, f: LineField) -> LineField:
    """Residual of the profile equation at ``f``; zero (to rounding) at the soliton."""
    fpp = f.grid.derivative(f.values, order=2)
    quad = params.sound_speed**2 * nonlinear_strength(params) * f.values**2
    return LineField(f.grid, params.kdv_alpha * fpp - f.values + quad, even=f.even)


def leading_profiles(params: DimerParams, grid: LineGrid):
    """Leading-order relative-displacement profiles ``(odd_sites, even_sites)``.

    The diagonalizer at wavenumber zero sends the core to the pair
    ``(sigma/kappa, sigma)``: even-numbered (stiff-to-soft) bonds carry kappa
    times the amplitude of odd ones.
    """
    s = Soliton(params).as_field(grid)
    return s * (1 / params.kappa), s


def gmwz_coefficients(params: DimerParams):
    """Coefficients ``(dispersion, nonlinear)`` of the continuum KdV limit.

    ``dispersion = (1/6)*(1 - kappa + kappa**2)/(1 + kappa)**2`` and
    ``nonlinear = gamma``.  The traveling-wave reduction of that KdV matches
    the profile equation through ``kdv_alpha = 2*sound_speed**2*dispersion``.
    """
    kap = params.kappa
    dispersion = (1 - kap + kap**2) / (6 * (1 + kap) ** 2)
    return dispersion, nonlinear_strength(params)
