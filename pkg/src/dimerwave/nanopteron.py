"""Nanopteron construction: localized core plus exponentially small ripple.

The traveling-wave system for the profile pair ``theta`` reads, in
diagonalized components,

    theta_1 + varpi_eps[(B + Q)(theta)]_1           = 0,
    T_eps theta_2 + eps**2 lambda_plus[(B + Q)(theta)]_2 = 0,

where ``T_eps`` has wavenumber symbol ``xi(eps k)`` vanishing exactly at the
resonant frequency ``+-omega_eps``.  The ansatz

    theta = (sigma, 0) + a * phi + eta

(core + amplitude-``a`` ripple from the periodic family + even decaying
corrector) turns the system into a fixed point for ``(eta_1, eta_2, a)``:

* the acoustic equation is preconditioned by the localized linearization
  ``A = I - K1`` about the core (whose kernel is the core's translation
  direction, odd and therefore invisible on even fields);
* the optical equation is solved by ``P_eps``, which subtracts the resonant
  content via the solvability functional ``iota`` before inverting ``T_eps``;
* the amplitude ``a`` is exactly the solvability multiplier
  ``iota[rhs]/(2 upsilon)`` -- this is where "exponentially small but not
  zero" comes from, since ``iota`` of smooth decaying data shrinks beyond
  every power of eps.

Everything is dtype-generic: pass a longdouble ``eps`` (and dtype in the
config) to push the amplitude floor below double rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import Resonance, SymbolSet
from .errors import (
    DegenerateSolvability,
    InvalidParams,
    LinearSolveFailure,
    NearSingularMode,
    NoConvergence,
)
from .kdv import core_profile
from .model import DimerParams, derived_constants
from .nonlinear import B_eps, Q_eps, VectorField
from .periodic import PeriodicConfig, PeriodicWave, solve_periodic
from .spectral import (
    LineField,
    LineGrid,
    PeriodicField,
    sup_norm,
    weighted_norm,
)


def iota_eps(g: LineField, omega) -> float:
    """Solvability functional ``integral of g(X) cos(omega X) dX``.

    Periodic trapezoid rule (= plain Riemann sum on this grid); for smooth
    decaying ``g`` the value shrinks faster than any power of the wavelength,
    which is exactly why the ripple amplitude ends up beyond all orders.
    """
    grid = g.grid
    return grid.dx * (g.values @ np.cos(omega * grid.X))


def gmres(apply_op, b, tol=1e-12, max_iter=400):
    """Solve ``op(x) = b`` by restart-free GMRES, returning ``(x, iterations)``.

    Modified Gram-Schmidt Arnoldi with Givens rotations.  Hand-rolled rather
    than a library call so extended-precision dtypes flow through (LAPACK
    stops at double) and the operator stays matrix-free.

    Raises
    ------
    LinearSolveFailure
        If the relative residual has not reached ``tol`` within ``max_iter``
        Krylov steps.
    """
    b = np.asarray(b)
    norm_b = np.sqrt(b @ b)
    if norm_b == 0:
        return np.zeros_like(b), 0
    V = [b / norm_b]
    H = np.zeros((max_iter + 1, max_iter), dtype=b.dtype)
    cs = np.zeros(max_iter, dtype=b.dtype)
    sn = np.zeros(max_iter, dtype=b.dtype)
    g = np.zeros(max_iter + 1, dtype=b.dtype)
    g[0] = norm_b

    def solution(j):
        y = np.zeros(j + 1, dtype=b.dtype)
        for i in range(j, -1, -1):
            y[i] = (g[i] - H[i, i + 1 : j + 1] @ y[i + 1 : j + 1]) / H[i, i]
        x = np.zeros_like(b)
        for i in range(j + 1):
            x += y[i] * V[i]
        return x

    for j in range(max_iter):
        w = apply_op(V[j])
        for i in range(j + 1):
            H[i, j] = V[i] @ w
            w = w - H[i, j] * V[i]
        h_next = np.sqrt(w @ w)
        H[j + 1, j] = h_next
        for i in range(j):
            hi, hj = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * hi + sn[i] * hj
            H[i + 1, j] = -sn[i] * hi + cs[i] * hj
        r = np.hypot(H[j, j], H[j + 1, j])
        if r == 0:
            raise LinearSolveFailure("Arnoldi produced a zero pivot")
        cs[j], sn[j] = H[j, j] / r, H[j + 1, j] / r
        H[j, j] = r
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        if abs(g[j + 1]) <= tol * norm_b or h_next <= 1e-300:
            return solution(j), j + 1
        V.append(w / h_next)
    raise LinearSolveFailure(
        f"GMRES stalled at relative residual {abs(g[max_iter]) / norm_b:.3e} "
        f"after {max_iter} iterations (grid too coarse for the localized solve?)"
    )


def build_chi_upsilon(symbols: SymbolSet, grid: LineGrid, sigma: LineField,
                      eps, resonance: Resonance):
    """Resonant correction field ``chi`` and its solvability weight ``upsilon``.

    ``chi = lambda_plus^eps [B^eps(core, cos(omega_eps .) j)]_2``: the optical
    component of the core's bilinear pairing with the resonant cosine, an even
    decaying field oscillating at ``omega_eps``.  ``upsilon = iota[chi]`` is
    order one (the cosine rectifies against itself).  Any even decaying chi
    with ``upsilon != 0`` keeps the solvability split exact -- this pairing is
    the mode-matched choice, so it also keeps the iteration well contracted.

    Raises
    ------
    DegenerateSolvability
        If ``|upsilon| <= 1e-6`` (the split would amplify noise).
    """
    dt = grid.X.dtype
    unit = np.zeros(9, dtype=dt)
    unit[1] = 1.0
    nu = VectorField.from_periodic(
        grid, PeriodicField(np.zeros(9, dtype=dt)), PeriodicField(unit), resonance.omega
    )
    core_vec = VectorField.from_line(sigma, LineField.zero(grid))
    b = B_eps(symbols, core_vec, nu, eps)
    table = symbols.lambda_pm(eps * grid.k)[1]
    chi = LineField(grid, grid.irfft(table * grid.rfft(b.line2.values)), even=True)
    ups = iota_eps(chi, resonance.omega)
    if not abs(ups) > 1e-6:
        raise DegenerateSolvability(
            f"solvability weight upsilon = {ups:.3e} too close to zero"
        )
    return chi, ups


@dataclass
class NanopteronState:
    """Corrector pair and ripple amplitude: the unknowns of the fixed point."""

    eta1: LineField
    eta2: LineField
    a: float

    def validate(self, a_max: float = 1e-2, decay_tol: float = 1e-5,
                 symmetry_tol: float = 1e-11):
        """Check evenness, boundary decay, and the amplitude bound.

        The boundary tolerance is "ripple-free" in the discrete sense: the
        optical corrector carries a cosine leftover from the zeroed resonant
        band, of the same size as the residual gate (1e-6 of the core), so
        the default allows ten times that.
        """
        for name, f in (("eta1", self.eta1), ("eta2", self.eta2)):
            peak = float(np.max(np.abs(f.values)))
            if peak == 0:
                continue
            if f.even_defect() > symmetry_tol * peak:
                raise InvalidParams(
                    f"{name} symmetry defect {f.even_defect() / peak:.2e} "
                    f"exceeds {symmetry_tol:.1e}"
                )
            if f.boundary_decay() > decay_tol:
                raise InvalidParams(
                    f"{name} boundary value {f.boundary_decay():.2e} of peak; "
                    "window too short for a ripple-free corrector"
                )
        if not abs(self.a) <= a_max:
            raise InvalidParams(f"|a| = {abs(self.a):.3e} exceeds a_max = {a_max}")
        return self

    def sup(self) -> float:
        return max(sup_norm(self.eta1), sup_norm(self.eta2))


@dataclass(frozen=True)
class NanopteronConfig:
    """Grid, tolerance, and coupling knobs for the nanopteron solve.

    ``fixed_point`` selects which update the acoustic solve uses for the
    cross term: ``"new"`` couples to the freshly computed optical corrector,
    ``"original"`` to the previous iterate's.  Both have the same fixed
    points; "new" contracts slightly faster.
    """

    n: int = 4096
    L: float = 60.0
    tol: float = 1e-10
    max_iter: int = 60
    a_max: float = 1e-2
    fixed_point: str = "new"
    gmres_tol: float = 1e-12
    gmres_max_iter: int = 400
    ripple_update_threshold: float = 0.1
    m_subscript: str = "1/kappa"
    dtype: type = np.float64
    auto_refine_grid: bool = True
    periodic: PeriodicConfig = field(default_factory=PeriodicConfig)

    def __post_init__(self):
        if self.fixed_point not in ("new", "original"):
            raise InvalidParams(f"unknown fixed_point {self.fixed_point!r}")


class SolverOperators:
    """Precomputed linear machinery for one ``(params, eps, grid)`` slice.

    Holds the symbol tables (smoothing ``varpi``, optical ``lambda_plus``,
    traveling ``xi``, diagonalizer entries), the core profile and its slope,
    the localized linearization ``A = I - K1`` with its companion ``K2``, the
    resonant field ``chi``, and the solvability weight ``upsilon``.

    Instances are immutable after construction and safe to share read-only
    across worker threads *at the same eps*.
    """

    def __init__(self, params: DimerParams, eps, grid: LineGrid,
                 resonance: Resonance = None, m_subscript: str = "1/kappa",
                 gmres_tol: float = 1e-12, gmres_max_iter: int = 400,
                 check: bool = True):
        self.params = params
        self.grid = grid
        dt = grid.X.dtype.type
        self.eps = dt(eps)
        self.symbols = SymbolSet(params)
        self.resonance = resonance if resonance is not None else self.symbols.find_resonance(self.eps)
        if not grid.resolves_ripple(self.resonance.omega):
            raise InvalidParams(
                f"grid spacing {grid.dx:.4f} cannot resolve the ripple at "
                f"omega = {float(self.resonance.omega):.2f}; increase n"
            )
        self.m_subscript = m_subscript
        self.gmres_tol = gmres_tol
        self.gmres_max_iter = gmres_max_iter
        self.has_cubic = bool(len(params.n1) or len(params.n2))
        self.sigma, self.sigma_slope = core_profile(params, grid)
        kap, beta = dt(params.kappa), dt(params.beta)
        # couplings of the linearized bilinear about the core:
        # 2 varpi0[B0_1((sigma,0), eta)] = 2 varpi0[sigma (gamma1 eta1 + gamma2 eta2)]
        self.gamma1 = (kap / (kap + 1)) * (beta / kap**3 + 1)
        self.gamma2 = (kap / (kap + 1)) * (beta / kap**2 - 1)
        k = grid.k
        _, self.varpi_eps_table, self.varpi0_table = self.symbols.varpi_symbols(self.eps, k)
        self.lambda_plus_table = self.symbols.lambda_pm(self.eps * k)[1]
        self.xi_table = self.symbols.xi_symbol(self.resonance.c, self.eps * k)
        self.v_minus_table, self.v_plus_table = self.symbols.eigvec_v_pm(self.eps * k)
        # the resonant band where the traveling symbol's zero is removable
        self.band = np.abs(k - self.resonance.omega) < 2 * grid.dk
        off_band = np.abs(self.xi_table[~self.band])
        if np.min(off_band) < 1e-8:
            raise NearSingularMode(
                f"traveling symbol ~ 0 off the resonant band (min {np.min(off_band):.2e}); "
                "a secondary resonance sits on the grid"
            )
        self.chi, self.upsilon = build_chi_upsilon(
            self.symbols, grid, self.sigma, self.eps, self.resonance
        )
        self.last_gmres_iterations = 0
        if check:
            self.self_check()

    # -- elementary applications ------------------------------------------------

    def _apply_table(self, table, f: LineField) -> LineField:
        return LineField(self.grid, self.grid.irfft(table * self.grid.rfft(f.values)), f.even)

    def apply_varpi_eps(self, f: LineField) -> LineField:
        return self._apply_table(self.varpi_eps_table, f)

    def apply_lambda_plus(self, f: LineField) -> LineField:
        return self._apply_table(self.lambda_plus_table, f)

    def _smooth_core_multiply(self, values):
        """varpi0 (sigma * v) at the values level (the K building block)."""
        return self.grid.irfft(self.varpi0_table * self.grid.rfft(self.sigma.values * values))

    def K1(self, f: LineField) -> LineField:
        """Acoustic self-coupling ``K1 f = -2 gamma1 varpi0(sigma f)``."""
        return LineField(self.grid, -2 * self.gamma1 * self._smooth_core_multiply(f.values), f.even)

    def K2(self, f: LineField) -> LineField:
        """Acoustic-optical coupling ``K2 f = +2 gamma2 varpi0(sigma f)``."""
        return LineField(self.grid, 2 * self.gamma2 * self._smooth_core_multiply(f.values), f.even)

    def A_apply(self, f: LineField) -> LineField:
        """The localized linearization ``A f = f - K1 f``."""
        return LineField(self.grid, self._A_values(f.values), f.even)

    def _A_values(self, values):
        return values + 2 * self.gamma1 * self._smooth_core_multiply(values)

    def A_solve(self, f: LineField) -> LineField:
        """``A^{-1} f`` by matrix-free GMRES (records the iteration count)."""
        x, its = gmres(self._A_values, f.values, tol=self.gmres_tol,
                       max_iter=self.gmres_max_iter)
        self.last_gmres_iterations = its
        return LineField(self.grid, x, f.even)

    def iota(self, g: LineField):
        return iota_eps(g, self.resonance.omega)

    def P_eps(self, g: LineField) -> LineField:
        """Solvability-corrected inverse of the traveling-wave operator.

        Subtracts ``(iota[g]/upsilon) chi`` so the corrected field has no
        resonant content, divides by the symbol of ``T_eps``, and zeroes the
        band ``|k - omega_eps| < 2 dk`` where the quotient is 0/0 by
        construction (the dropped content is measured by the residual gate,
        not extrapolated).
        """
        corrected = g.values - (self.iota(g) / self.upsilon) * self.chi.values
        F = self.grid.rfft(corrected) / self.xi_table
        F[self.band] = 0.0
        return LineField(self.grid, self.grid.irfft(F), even=g.even)

    def self_check(self):
        """Construction-time invariants.

        * The core's translation direction is annihilated by ``A`` (relative
          sup residual <= 1e-6): this certifies that sigma, the smoothing
          symbol, and the coupling constant all belong to the same continuum
          limit.
        * ``|upsilon| > 1e-6`` was already enforced by ``build_chi_upsilon``.
        """
        slope = self.sigma_slope
        defect = sup_norm(self.A_apply(slope)) / sup_norm(slope)
        if not defect <= 1e-6:
            raise InvalidParams(
                f"kernel residual |A sigma'|/|sigma'| = {defect:.2e} > 1e-6; "
                "grid does not support the localized linearization"
            )
        return self


@dataclass
class TermCollection:
    """Right-hand sides of the fixed point at one iterate.

    ``r1/r2`` are the aggregate fields the solver consumes; the ``_mod``
    variants carry the contraction-restoring corrections (the linearized
    bilinear on the acoustic side, the resonant ``2 a chi`` on the optical
    side).  ``labels``, when requested, holds the individual bilinear
    families for diagnostics, keyed ``j{family}{1=B,2=Q}`` /
    ``l{family}{1,2}`` with families 1..5 = core*core, core*eta, core*ripple,
    eta*ripple, eta*eta, plus ``j6/l6`` for the ripple-squared cubic
    correction and the modified entries ``j21_mod``, ``l31_mod``.
    """

    r1: LineField
    r2: LineField
    r1_mod: LineField
    r2_mod: LineField
    labels: dict = None


def _full_ansatz(ops: SolverOperators, state: NanopteronState, wave: PeriodicWave):
    core_vec = VectorField.from_line(ops.sigma, LineField.zero(ops.grid))
    eta_vec = VectorField.from_line(state.eta1, state.eta2)
    ripple_vec = wave.as_vector(ops.grid, amplitude=state.a)
    return core_vec + eta_vec + ripple_vec, core_vec, eta_vec, ripple_vec


def _combined_nonlinearity(ops: SolverOperators, v: VectorField, third: VectorField = None):
    """``B(v, v) + Q(v, v, third)`` with ``third`` defaulting to ``v``."""
    out = B_eps(ops.symbols, v, v, ops.eps)
    if ops.has_cubic:
        out = out + Q_eps(ops.symbols, v, v, third if third is not None else v,
                          ops.eps, m_subscript=ops.m_subscript)
    return out


def assemble_terms(ops: SolverOperators, state: NanopteronState,
                   wave: PeriodicWave, detail: bool = False) -> TermCollection:
    """Evaluate the fixed point's right-hand sides at ``state``.

    The aggregate ``(B+Q)`` of the full ansatz is exact and cheap; with
    ``detail=True`` the bilinear families are additionally evaluated one by
    one (their sum reproduces the aggregate, a property the tests pin down).
    """
    ansatz, core_vec, eta_vec, ripple_vec = _full_ansatz(ops, state, wave)
    W = _combined_nonlinearity(ops, ansatz)
    r1 = -ops.sigma - ops.apply_varpi_eps(W.line1)
    r2 = (-1.0) * ops.apply_lambda_plus(W.line2)
    correction = LineField(
        ops.grid,
        2 * ops._smooth_core_multiply(
            ops.gamma1 * state.eta1.values + ops.gamma2 * state.eta2.values
        ),
        even=True,
    )
    r1_mod = r1 + correction
    r2_mod = r2 + (2 * state.a) * ops.chi

    labels = None
    if detail:
        labels = {}
        fams = {
            1: (1.0, core_vec, core_vec),
            2: (2.0, core_vec, eta_vec),
            3: (2.0, core_vec, ripple_vec),
            4: (2.0, eta_vec, ripple_vec),
            5: (1.0, eta_vec, eta_vec),
        }
        for fam, (cf, x, y) in fams.items():
            bxy = B_eps(ops.symbols, x, y, ops.eps)
            labels[f"j{fam}1"] = cf * ops.apply_varpi_eps(bxy.line1)
            labels[f"l{fam}1"] = cf * ops.apply_lambda_plus(bxy.line2)
            if ops.has_cubic:
                qxy = Q_eps(ops.symbols, x, y, ansatz, ops.eps, m_subscript=ops.m_subscript)
                labels[f"j{fam}2"] = cf * ops.apply_varpi_eps(qxy.line1)
                labels[f"l{fam}2"] = cf * ops.apply_lambda_plus(qxy.line2)
            else:
                labels[f"j{fam}2"] = LineField.zero(ops.grid)
                labels[f"l{fam}2"] = LineField.zero(ops.grid)
        labels["j11"] = ops.sigma + labels["j11"]
        # ripple-squared family: the bilinear part and the ripple's own cubic
        # cancel against the periodic solve at the mode level, so only the
        # cubic's cross-coupling to the localized part survives on the line.
        if ops.has_cubic and float(np.max(np.abs(ripple_vec.per2.coeffs))) > 0:
            q6 = Q_eps(ops.symbols, ripple_vec, ripple_vec, ansatz, ops.eps,
                       m_subscript=ops.m_subscript)
            labels["j6"] = ops.apply_varpi_eps(q6.line1)
            labels["l6"] = ops.apply_lambda_plus(q6.line2)
        else:
            labels["j6"] = LineField.zero(ops.grid)
            labels["l6"] = LineField.zero(ops.grid)
        labels["j21_mod"] = labels["j21"] + correction
        labels["l31_mod"] = labels["l31"] + (2 * state.a) * ops.chi
    return TermCollection(r1, r2, r1_mod, r2_mod, labels)


def N_maps(ops: SolverOperators, state: NanopteronState, wave: PeriodicWave,
           fixed_point: str = "new"):
    """One application of the fixed-point maps; returns ``(N1, N2, N3)``.

    ``N3 = iota[r2_mod]/(2 upsilon)`` (new amplitude), ``N2 = eps**2
    P_eps r2_mod`` (new optical corrector), and ``N1 = A^{-1}(r1_mod - K2 z)``
    with ``z = N2`` ("new") or the current eta2 ("original").
    """
    terms = assemble_terms(ops, state, wave)
    a_new = ops.iota(terms.r2_mod) / (2 * ops.upsilon)
    eta2_new = ops.eps**2 * ops.P_eps(terms.r2_mod)
    z = eta2_new if fixed_point == "new" else state.eta2
    eta1_new = ops.A_solve(terms.r1_mod - ops.K2(z))
    return eta1_new, eta2_new, a_new


def system_residual(ops: SolverOperators, state: NanopteronState, wave: PeriodicWave):
    """Sup-norm residual of the full traveling-wave system at the ansatz.

    Both the localized and the ripple content are kept: the line parts are
    evaluated spectrally, the periodic parts mode by mode at the wave's own
    frequency, and the two are superposed on the grid before taking the sup.
    """
    ansatz, *_ = _full_ansatz(ops, state, wave)
    W = _combined_nonlinearity(ops, ansatz)
    grid, eps = ops.grid, ops.eps
    omega = wave.omega
    M = max(W.per1.M, W.per2.M, ansatz.per1.M, ansatz.per2.M)
    modes = eps * omega * np.arange(M + 1)
    xi_m = ops.symbols.xi_symbol(ops.resonance.c, modes)
    lam_m = ops.symbols.lambda_pm(modes)[1]
    g = ops.symbols.acoustic_over_k2(modes)
    c2 = ops.resonance.c**2
    varpi_m = -(eps * eps) * g / (c2 - g)

    th1_line = ansatz.line1 + ops.apply_varpi_eps(W.line1)
    th1_per = ansatz.per1.pad_to(M).coeffs + varpi_m * W.per1.pad_to(M).coeffs
    th2_line = ops._apply_table(ops.xi_table, ansatz.line2) + (
        eps * eps
    ) * ops.apply_lambda_plus(W.line2)
    th2_per = xi_m * ansatz.per2.pad_to(M).coeffs + (
        eps * eps
    ) * lam_m * W.per2.pad_to(M).coeffs

    phase = omega * grid.X
    total1 = th1_line.values + PeriodicField(th1_per).eval_at(phase)
    total2 = th2_line.values + PeriodicField(th2_per).eval_at(phase)
    return max(np.max(np.abs(total1)), np.max(np.abs(total2)))


@dataclass
class SolveDiagnostics:
    """Iteration log and converged-state measurements."""

    converged: bool
    iterations: int
    residual_sup: float
    residual_rel: float
    step_history: list
    a_history: list
    ripple_solves: int
    gmres_iterations: int
    eta_sup: tuple
    eta_weighted: float
    core_sup: float
    upsilon: float


def solve_nanopteron(params: DimerParams, eps, config: NanopteronConfig = None,
                     verbose: bool = False):
    """Solve the nanopteron fixed point; returns ``(state, wave, diagnostics)``.

    Outer iteration from ``(0, 0, 0)``: re-solve the periodic family only
    when the amplitude has moved by more than the configured relative
    threshold (its dependence on ``a`` is Lipschitz), then apply the three
    maps and measure the state change in sup norm.

    Raises
    ------
    NoConvergence
        If the iteration budget is exhausted, the state diverges, or the
        amplitude escapes ``|a| <= a_max``.
    """
    config = config or NanopteronConfig()
    dt = config.dtype
    eps = dt(eps)
    symbols = SymbolSet(params)
    resonance = symbols.find_resonance(eps)
    n = config.n
    grid = LineGrid(n, config.L, dtype=dt)
    while not grid.resolves_ripple(resonance.omega):
        if not config.auto_refine_grid or grid.n >= 1 << 16:
            raise InvalidParams(
                f"n = {grid.n} cannot resolve the ripple at omega = "
                f"{float(resonance.omega):.2f}"
            )
        grid = LineGrid(2 * grid.n, config.L, dtype=dt)
        if verbose:
            print(f"  refining grid to n={grid.n} to resolve the ripple")
    ops = SolverOperators(
        params, eps, grid, resonance=resonance, m_subscript=config.m_subscript,
        gmres_tol=config.gmres_tol, gmres_max_iter=config.gmres_max_iter,
    )
    state = NanopteronState(LineField.zero(grid), LineField.zero(grid), dt(0.0))
    wave = solve_periodic(params, eps, dt(0.0), config.periodic)
    wave_amplitude = dt(0.0)
    core_peak = sup_norm(ops.sigma)
    step_history, a_history = [], []
    ripple_solves = 0
    converged = False
    iterations = config.max_iter
    for it in range(1, config.max_iter + 1):
        if abs(state.a - wave_amplitude) > config.ripple_update_threshold * abs(state.a):
            wave = solve_periodic(params, eps, state.a, config.periodic)
            wave_amplitude = state.a
            ripple_solves += 1
        eta1_new, eta2_new, a_new = N_maps(ops, state, wave, config.fixed_point)
        step = max(
            sup_norm(eta1_new - state.eta1),
            sup_norm(eta2_new - state.eta2),
            abs(a_new - state.a),
        )
        state = NanopteronState(eta1_new, eta2_new, a_new)
        step_history.append(float(step))
        a_history.append(float(a_new))
        if verbose:
            print(f"  outer it={it:3d} step={float(step):.3e} a={float(a_new):.6e} "
                  f"gmres={ops.last_gmres_iterations}")
        if not abs(a_new) <= config.a_max:
            raise NoConvergence(
                f"ripple amplitude |a| = {abs(a_new):.3e} escaped the ansatz "
                f"region a_max = {config.a_max}"
            )
        if state.sup() > 1e3 * core_peak:
            raise NoConvergence("corrector diverged past 1e3 * core amplitude")
        if step <= config.tol:
            converged = True
            iterations = it
            break
    if not converged:
        raise NoConvergence(
            f"nanopteron solve did not reach tol={config.tol} in "
            f"{config.max_iter} outer iterations (last step {step_history[-1]:.2e})"
        )
    # polish with exact amplitude coupling: the lazy rule above accelerates
    # the transient but leaves the state converged against a ripple solved at
    # a slightly stale amplitude; a few tightly-coupled steps pin the reported
    # pair to the fixed point of the exactly-coupled map.
    for it in range(1, 11):
        if state.a != wave_amplitude and abs(state.a) > 0:
            wave = solve_periodic(params, eps, state.a, config.periodic)
            wave_amplitude = state.a
            ripple_solves += 1
        eta1_new, eta2_new, a_new = N_maps(ops, state, wave, config.fixed_point)
        step = max(
            sup_norm(eta1_new - state.eta1),
            sup_norm(eta2_new - state.eta2),
            abs(a_new - state.a),
        )
        state = NanopteronState(eta1_new, eta2_new, a_new)
        step_history.append(float(step))
        a_history.append(float(a_new))
        iterations += 1
        if verbose:
            print(f"  polish it={it:3d} step={float(step):.3e} a={float(a_new):.6e}")
        if step <= config.tol:
            break
    if state.a != wave_amplitude and abs(state.a) > 0:
        wave = solve_periodic(params, eps, state.a, config.periodic)
        ripple_solves += 1
    residual = system_residual(ops, state, wave)
    _, alpha = derived_constants(params.kappa, dt)
    q_star = 0.25 / np.sqrt(alpha)
    eta_weighted = max(
        weighted_norm(state.eta1, float(q_star), 2, "cosh_q_full", kdv_alpha=float(alpha)),
        weighted_norm(state.eta2, float(q_star), 2, "cosh_q_full", kdv_alpha=float(alpha)),
    )
    diagnostics = SolveDiagnostics(
        converged=True,
        iterations=iterations,
        residual_sup=float(residual),
        residual_rel=float(residual / core_peak),
        step_history=step_history,
        a_history=a_history,
        ripple_solves=ripple_solves,
        gmres_iterations=ops.last_gmres_iterations,
        eta_sup=(sup_norm(state.eta1), sup_norm(state.eta2)),
        eta_weighted=float(eta_weighted),
        core_sup=float(core_peak),
        upsilon=float(ops.upsilon),
    )
    state.validate(a_max=config.a_max)
    return state, wave, diagnostics
