"""Command-line driver: solve, simulate, and validate from one entry point.

Subcommands
-----------
dispersion   sample both branches and their derivatives; locate the resonance
periodic     solve the ripple family at one (eps, amplitude)
nanopteron   solve the core + ripple + corrector system, optionally sweeping eps
simulate     integrate a ring initialized from a profile; dump (t, j, r_j)
validate     run the identity/property gate table

Configuration resolves in three layers: command-line flags override entries
from ``--config FILE`` (``key = value`` lines, ``#`` comments), which override
the defaults below.

======================  ==========================================  ==========
flag                    meaning                                     default
======================  ==========================================  ==========
--kappa                 stiff/soft linear spring ratio (> 1)        2.0
--beta                  stiff spring's quadratic coefficient        1.0
--eps                   long-wave parameter                         0.2
--out                   output directory                            runs
--samples (dispersion)  wavenumber samples on [-pi, pi]             2048
--amplitude (periodic)  ripple amplitude a                          1e-3
--sweep (nanopteron)    comma list of eps values                    (none)
--threads (nanopteron)  sweep worker pool size                      1
--init (simulate)       'leading' or path to a saved solution       leading
--sites (simulate)      ring size (even)                            512
--dt (simulate)         integrator step                             0.02
--T (simulate)          horizon (default: the 20/c_eps validation)  (derived)
--snap-every (simulate) steps between snapshots                     25
======================  ==========================================  ==========

Exit codes: 0 success, 1 solver non-convergence or a failed gate, 2 invalid
configuration or usage.  Nothing in the pipeline draws fresh randomness, so
for a fixed configuration the data files — and every run-record section
except the trailing ``[timings]`` one — are byte-identical across reruns.

A plotting helper is deliberately not part of the package; a trajectory dump
loads with ``numpy.loadtxt(path, delimiter=",", skiprows=1)`` and reshapes to
(snapshots, sites) for e.g. ``matplotlib.pyplot.pcolormesh``.
"""

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dispersion import Resonance, SymbolSet
from .errors import InvalidParams, LinearSolveFailure, NoConvergence
from .kdv import core_profile, kdv_residual
from .lattice import (
    LatticeConfig,
    TravelingProfile,
    shape_error,
    simulate,
    stegoton_diagnostics,
)
from .model import DimerParams, derived_constants
from .nanopteron import NanopteronState, SolverOperators, solve_nanopteron
from .periodic import PeriodicField, solve_periodic
from .spectral import (
    LineField,
    LineGrid,
    Multiplier,
    NORM_VARIANTS,
    apply_line,
    conjugated_multiplier,
    l2_norm,
    sup_norm,
    weighted_norm,
)

SCHEMA_RECORD = "dimerwave-runrecord/1"
SCHEMA_SOLUTION = "dimerwave-nanopteron/1"
SCHEMA_CSV = "dimerwave-csv/1"

DEFAULTS = {
    "kappa": 2.0,
    "beta": 1.0,
    "eps": 0.2,
    "out": "runs",
    "samples": 2048,
    "amplitude": 1e-3,
    "sweep": None,
    "threads": 1,
    "init": "leading",
    "sites": 512,
    "dt": 0.02,
    "T": None,
    "snap_every": 25,
}


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class RunRecord:
    """Everything one run decided and measured, as structured text.

    ``gates`` rows are (name, passed, detail); every number printed in the
    summary or a gate detail comes from a named module output.
    """

    command: str
    config: dict
    summary: dict = field(default_factory=dict)
    gates: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def gate(self, name, passed, detail):
        self.gates.append((name, bool(passed), detail))

    @property
    def all_passed(self):
        return all(p for _, p, _ in self.gates)

    def render(self) -> str:
        lines = [f"schema = {SCHEMA_RECORD}", f"command = {self.command}", "", "[config]"]
        lines += [f"{k} = {_fmt(v)}" for k, v in sorted(self.config.items())]
        lines += ["", "[summary]"]
        lines += [f"{k} = {_fmt(v)}" for k, v in self.summary.items()]
        lines += ["", "[gates]"]
        lines += [
            f"{name} = {'PASS' if p else 'FAIL'} ({detail})" for name, p, detail in self.gates
        ]
        lines += ["", "[timings]"]
        lines += [f"{k}_seconds = {v:.3f}" for k, v in self.timings.items()]
        return "\n".join(lines) + "\n"

    def write(self, path: Path):
        path.write_text(self.render())

    def print_gates(self):
        width = max((len(n) for n, _, _ in self.gates), default=4)
        for name, p, detail in self.gates:
            print(f"  {name:<{width}}  {'PASS' if p else 'FAIL'}  {detail}")


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="\n") as fh:
        fh.write(f"# schema = {SCHEMA_CSV}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


# -- solution files -----------------------------------------------------------


def save_solution(path, params: DimerParams, eps, state, wave):
    """Archive a solved nanopteron so ``simulate`` can reconstruct it."""
    np.savez(
        path,
        schema=SCHEMA_SOLUTION,
        kappa=params.kappa,
        beta=params.beta,
        n1=np.asarray(params.n1, dtype=np.float64),
        n2=np.asarray(params.n2, dtype=np.float64),
        eps=float(eps),
        grid_n=state.eta1.grid.n,
        grid_L=state.eta1.grid.L,
        eta1=np.asarray(state.eta1.values, dtype=np.float64),
        eta2=np.asarray(state.eta2.values, dtype=np.float64),
        a=float(state.a),
        psi1=np.asarray(wave.psi1.coeffs, dtype=np.float64),
        psi2=np.asarray(wave.psi2.coeffs, dtype=np.float64),
        wave_a=float(wave.a),
        wave_t=float(wave.t),
        wave_omega=float(wave.omega),
        wave_residual=float(wave.residual),
        wave_iterations=wave.iterations,
        wave_contraction=float(wave.contraction_ratio),
        res_c=float(wave.resonance.c),
        res_Omega=float(wave.resonance.Omega),
        res_omega=float(wave.resonance.omega),
        res_Upsilon=float(wave.resonance.Upsilon),
        res_residual=float(wave.resonance.residual),
    )


def load_solution(path):
    """Rebuild ``(params, eps, state, wave)`` from a solution archive."""
    from .periodic import PeriodicWave  # local import keeps module load light

    with np.load(path) as z:
        if str(z["schema"]) != SCHEMA_SOLUTION:
            raise InvalidParams(f"{path}: unknown solution schema {z['schema']!r}")
        params = DimerParams(
            kappa=float(z["kappa"]), beta=float(z["beta"]),
            n1=tuple(z["n1"]), n2=tuple(z["n2"]),
        )
        eps = float(z["eps"])
        grid = LineGrid(int(z["grid_n"]), float(z["grid_L"]))
        state = NanopteronState(
            LineField(grid, z["eta1"], even=True),
            LineField(grid, z["eta2"], even=True),
            float(z["a"]),
        )
        resonance = Resonance(
            c=float(z["res_c"]), eps=eps, Omega=float(z["res_Omega"]),
            omega=float(z["res_omega"]), Upsilon=float(z["res_Upsilon"]),
            residual=float(z["res_residual"]),
        )
        wave = PeriodicWave(
            params=params, eps=eps, a=float(z["wave_a"]), t=float(z["wave_t"]),
            omega=float(z["wave_omega"]), psi1=PeriodicField(z["psi1"]),
            psi2=PeriodicField(z["psi2"]), resonance=resonance,
            residual=float(z["wave_residual"]), iterations=int(z["wave_iterations"]),
            contraction_ratio=float(z["wave_contraction"]), converged=True,
        )
    return params, eps, state, wave


# -- configuration ------------------------------------------------------------


def _parse_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParams(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONVERTERS = {
    "kappa": float, "beta": float, "eps": float, "out": str, "samples": int,
    "amplitude": float, "sweep": str, "threads": int, "init": str,
    "sites": int, "dt": float, "T": float, "snap_every": int,
}


def _resolve(args) -> dict:
    """Defaults, then config-file entries, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        for key, raw in _parse_config_file(args.config).items():
            if key not in _CONVERTERS:
                raise InvalidParams(f"unknown config key {key!r}")
            try:
                cfg[key] = _CONVERTERS[key](raw)
            except ValueError as exc:
                raise InvalidParams(f"config key {key!r}: {exc}") from exc
    for key in _CONVERTERS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    cfg["command"] = args.command
    return cfg


def _params(cfg) -> DimerParams:
    return DimerParams(kappa=cfg["kappa"], beta=cfg["beta"], n1=(), n2=())


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _record_config(cfg, keys):
    return {k: cfg[k] for k in ("kappa", "beta") + keys}


# -- subcommands ---------------------------------------------------------------


def cmd_dispersion(cfg) -> int:
    params = _params(cfg)
    S = SymbolSet(params)
    rec = RunRecord("dispersion", _record_config(cfg, ("eps", "samples")))
    t0 = time.perf_counter()
    ks = np.linspace(-np.pi, np.pi, cfg["samples"])
    lam_minus, lam_plus = S.lambda_pm(ks)
    d_minus, d_plus = S.lambda_pm_prime(ks)
    kap = params.kappa
    trace_dev = float(np.max(np.abs(lam_minus + lam_plus - (2 + 2 * kap))))
    det_dev = float(np.max(np.abs(lam_minus * lam_plus - 4 * kap * np.sin(ks) ** 2)))
    slope = float(max(np.max(np.abs(d_minus)), np.max(np.abs(d_plus))))
    res = S.find_resonance(cfg["eps"])
    rec.timings["total"] = time.perf_counter() - t0
    rec.summary.update(
        speed=res.c, Omega=res.Omega, omega=res.omega, Upsilon=res.Upsilon,
        trace_deviation=trace_dev, det_deviation=det_dev, max_branch_slope=slope,
    )
    rec.gate("trace_identity", trace_dev <= 1e-12, f"{trace_dev:.3e} <= 1e-12")
    rec.gate("det_identity", det_dev <= 1e-12, f"{det_dev:.3e} <= 1e-12")
    rec.gate("branch_slope_bound", slope <= 2 + 1e-6, f"{slope:.6f} <= 2 + 1e-6")
    rec.gate("resonance_residual", res.residual <= 1e-12, f"{res.residual:.3e} <= 1e-12")
    lo, hi = np.sqrt(2 * kap) / res.c, np.sqrt(2 + 2 * kap) / res.c
    rec.gate("resonance_bracket", lo <= res.Omega <= hi,
             f"{lo:.6f} <= {res.Omega:.6f} <= {hi:.6f}")
    out = _outdir(cfg)
    _write_csv(out / "dispersion.csv", ("k", "lambda_minus", "lambda_plus",
                                        "dlambda_minus", "dlambda_plus"),
               zip(ks, lam_minus, lam_plus, d_minus, d_plus))
    rec.write(out / "dispersion_record.txt")
    rec.print_gates()
    return 0 if rec.all_passed else 1


def cmd_periodic(cfg) -> int:
    params = _params(cfg)
    rec = RunRecord("periodic", _record_config(cfg, ("eps", "amplitude")))
    t0 = time.perf_counter()
    wave = solve_periodic(params, cfg["eps"], cfg["amplitude"])
    rec.timings["solve"] = time.perf_counter() - t0
    rec.summary.update(
        omega=wave.omega, frequency_shift=wave.t, iterations=wave.iterations,
        contraction_ratio=wave.contraction_ratio, residual=wave.residual,
        modes=wave.psi1.M,
    )
    rec.gate("converged", wave.converged, f"{wave.iterations} iterations")
    rec.gate("iteration_budget", wave.iterations <= 50, f"{wave.iterations} <= 50")
    rec.gate("contraction", wave.contraction_ratio <= 0.9,
             f"{wave.contraction_ratio:.3f} <= 0.9")
    rec.gate("residual", wave.residual <= 1e-10, f"{wave.residual:.3e} <= 1e-10")
    out = _outdir(cfg)
    c1, c2 = wave.psi1.coeffs, wave.psi2.coeffs
    _write_csv(out / "periodic.csv", ("mode", "psi1", "psi2"),
               zip(range(len(c1)), c1, c2))
    rec.write(out / "periodic_record.txt")
    rec.print_gates()
    return 0 if rec.all_passed else 1


def _solve_one_nanopteron(params, eps, cfg):
    rec = RunRecord("nanopteron", dict(_record_config(cfg, ()), eps=eps))
    t0 = time.perf_counter()
    try:
        state, wave, diag = solve_nanopteron(params, eps)
    except (NoConvergence, LinearSolveFailure) as exc:
        rec.timings["solve"] = time.perf_counter() - t0
        rec.gate("converged", False, str(exc))
        return rec, None
    rec.timings["solve"] = time.perf_counter() - t0
    rec.summary.update(
        a=state.a, residual_rel=diag.residual_rel, residual_sup=diag.residual_sup,
        iterations=diag.iterations, ripple_solves=diag.ripple_solves,
        gmres_iterations=diag.gmres_iterations, eta1_sup=diag.eta_sup[0],
        eta2_sup=diag.eta_sup[1], upsilon=diag.upsilon, omega=wave.omega,
        speed=wave.resonance.c,
    )
    rec.gate("converged", diag.converged, f"{diag.iterations} iterations")
    rec.gate("residual_rel", diag.residual_rel <= 1e-6,
             f"{diag.residual_rel:.3e} <= 1e-6")
    rec.gate("corrector_bound", max(diag.eta_sup) / eps <= 2.0,
             f"sup(eta)/eps = {max(diag.eta_sup) / eps:.3f} <= 2.0")
    try:
        state.validate()
        rec.gate("state_checks", True, "evenness, decay, amplitude bound")
    except InvalidParams as exc:
        rec.gate("state_checks", False, str(exc))
    return rec, (state, wave)


def cmd_nanopteron(cfg) -> int:
    params = _params(cfg)
    eps_list = ([float(s) for s in str(cfg["sweep"]).split(",")]
                if cfg["sweep"] else [cfg["eps"]])
    out = _outdir(cfg)
    if cfg["threads"] > 1 and len(eps_list) > 1:
        with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
            results = list(pool.map(lambda e: _solve_one_nanopteron(params, e, cfg),
                                    eps_list))
    else:
        results = [_solve_one_nanopteron(params, e, cfg) for e in eps_list]
    code = 0
    for eps, (rec, solved) in zip(eps_list, results):
        tag = f"eps{eps:g}"
        rec.write(out / f"nanopteron_{tag}_record.txt")
        if solved is None:
            code = 1
            print(f"eps = {eps:g}: solver did not converge")
            continue
        state, wave = solved
        save_solution(out / f"nanopteron_{tag}.npz", params, eps, state, wave)
        grid = state.eta1.grid
        sigma, _ = core_profile(params, grid)
        _write_csv(out / f"nanopteron_{tag}.csv", ("X", "sigma", "eta1", "eta2"),
                   zip(grid.X, sigma.values, state.eta1.values, state.eta2.values))
        print(f"eps = {eps:g}: a = {state.a:.6e}")
        rec.print_gates()
        if not rec.all_passed:
            code = 1
    return code


def cmd_simulate(cfg) -> int:
    if cfg["init"] == "leading":
        params = _params(cfg)
        eps = cfg["eps"]
        prof = TravelingProfile.leading_order(params, eps, cfg["sites"])
        ripple_k = None
    else:
        if not Path(cfg["init"]).exists():
            raise InvalidParams(f"--init: no such solution file {cfg['init']!r}")
        params, eps, state, wave = load_solution(cfg["init"])
        prof = TravelingProfile.from_nanopteron(params, eps, state, wave, cfg["sites"])
        ripple_k = eps * prof.omega
    horizon = cfg["T"] if cfg["T"] is not None else 20.0 / prof.c
    lat = LatticeConfig(sites=cfg["sites"], dt=cfg["dt"], T=horizon,
                        snap_every=cfg["snap_every"])
    rec = RunRecord("simulate", dict(
        _record_config(cfg, ("init", "sites", "dt", "snap_every")),
        eps=eps, T=horizon))
    r0, v0 = prof.initial()
    t0 = time.perf_counter()
    traj = simulate(params, lat, r0, v0)
    rec.timings["integrate"] = time.perf_counter() - t0
    err = shape_error(traj, prof)
    drift = traj.energy_drift()
    rep = stegoton_diagnostics(traj, prof.core_width_sites(), ripple_wavenumber=ripple_k)
    ratio_dev = float(np.max(np.abs(rep.ratios - params.kappa) / params.kappa))
    rec.summary.update(
        speed=prof.c, steps=int(round(horizon / cfg["dt"])), shape_error=err,
        energy_drift=drift, ratio_min=float(rep.ratios.min()),
        ratio_max=float(rep.ratios.max()), tail_max=float(rep.tail_amplitudes.max()),
    )
    shape_gate = 1e-3 if cfg["init"] != "leading" else 5e-2
    rec.gate("shape_error", err <= shape_gate, f"{err:.3e} <= {shape_gate:g}")
    rec.gate("energy_drift", drift <= 1e-8, f"{drift:.3e} <= 1e-8")
    if cfg["init"] != "leading":
        rec.gate("peak_ratio", ratio_dev <= 0.02,
                 f"max deviation {ratio_dev * 100:.2f}% <= 2%")
    out = _outdir(cfg)
    rows = (
        (traj.times[i], traj.sites[j], traj.R[i, j])
        for i in range(len(traj.times))
        for j in range(len(traj.sites))
    )
    _write_csv(out / "trajectory.csv", ("t", "j", "r_j"), rows)
    rec.write(out / "simulate_record.txt")
    rec.print_gates()
    return 0 if rec.all_passed else 1


def cmd_validate(cfg) -> int:
    params = _params(cfg)
    kap = params.kappa
    S = SymbolSet(params)
    rec = RunRecord("validate", _record_config(cfg, ("eps",)))
    t_all = time.perf_counter()

    ks = np.linspace(-np.pi, np.pi, 10001)
    lam_minus, lam_plus = S.lambda_pm(ks)
    trace_dev = float(np.max(np.abs(lam_minus + lam_plus - (2 + 2 * kap))))
    det_dev = float(np.max(np.abs(lam_minus * lam_plus - 4 * kap * np.sin(ks) ** 2)))
    rec.gate("dispersion_trace", trace_dev <= 1e-12, f"{trace_dev:.3e} <= 1e-12")
    rec.gate("dispersion_det", det_dev <= 1e-12, f"{det_dev:.3e} <= 1e-12")
    d_minus, d_plus = S.lambda_pm_prime(ks)
    slope = float(max(np.max(np.abs(d_minus)), np.max(np.abs(d_plus))))
    rec.gate("branch_slope_bound", slope <= 2 + 1e-6, f"{slope:.6f} <= 2 + 1e-6")

    res_dev, in_bracket = 0.0, True
    for e in (0.3, 0.1, 0.03):
        res = S.find_resonance(e)
        res_dev = max(res_dev, res.residual)
        lo, hi = np.sqrt(2 * kap) / res.c, np.sqrt(2 + 2 * kap) / res.c
        in_bracket = in_bracket and (lo <= res.Omega <= hi)
    rec.gate("resonance_residual", res_dev <= 1e-12, f"{res_dev:.3e} <= 1e-12")
    rec.gate("resonance_bracket", in_bracket, "sqrt(2k)/c <= Omega <= sqrt(2+2k)/c")
    rec.timings["dispersion"] = time.perf_counter() - t_all

    t0 = time.perf_counter()
    grid = LineGrid(2048, 40.0)
    sigma, _ = core_profile(params, grid)
    kdv_dev = sup_norm(kdv_residual(params, sigma))
    rec.gate("kdv_residual", kdv_dev <= 1e-10, f"{kdv_dev:.3e} <= 1e-10")

    ops = SolverOperators(params, 0.1, LineGrid(4096, 40.0))
    slope_field = LineField(ops.grid, ops.grid.derivative(ops.sigma.values), even=False)
    kernel_ratio = sup_norm(ops.A_apply(slope_field)) / sup_norm(slope_field)
    rec.gate("fp_kernel", kernel_ratio <= 1e-6, f"{kernel_ratio:.3e} <= 1e-6")
    rec.timings["core_operators"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    c0, alpha = derived_constants(kap)
    mu = Multiplier(lambda k: -c0 * c0 / (1 + alpha * k * k), name="varpi0")
    cgrid = LineGrid(1024, 30.0)
    rng = np.random.default_rng(0)
    envelope = np.exp(-(cgrid.X**2) / 16)
    fields = []
    for _ in range(20):
        spec = np.zeros(cgrid.n // 2 + 1)
        spec[:24] = rng.standard_normal(24)
        vals = envelope * cgrid.irfft(spec)
        fields.append(LineField(cgrid, vals / np.max(np.abs(vals)), even=False))
    devs = []
    for q in (0.2, 0.1, 0.05, 0.025):
        acc = 0.0
        for f in fields:
            delta = conjugated_multiplier(mu, q, f) - apply_line(mu, f)
            acc += l2_norm(delta) / l2_norm(f)
        devs.append(acc / len(fields))
    monotone = all(a > b for a, b in zip(devs, devs[1:]))
    rec.summary["conjugation_deviations"] = ",".join(f"{d:.3e}" for d in devs)
    rec.gate("conjugation_monotone", monotone, "deviation shrinks as q halves")

    worst = 1.0
    rng = np.random.default_rng(1)
    ngrid = LineGrid(512, 20.0)
    for _ in range(100):
        spec = np.zeros(ngrid.n // 2 + 1)
        spec[:16] = rng.standard_normal(16)
        vals = np.exp(-ngrid.X**2 / 8) * ngrid.irfft(spec)
        f = LineField(ngrid, vals, even=False)
        for q in (0.1, 0.3):
            for r in (1, 2):
                norms = [weighted_norm(f, q, r, v) for v in NORM_VARIANTS]
                worst = max(worst, max(norms) / min(norms))
    rec.gate("norm_equivalence", worst <= 20.0,
             f"worst pairwise ratio {worst:.2f} <= 20")
    rec.timings["weighted_spaces"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    wave = solve_periodic(params, 0.1, 1e-3)
    wave0 = solve_periodic(params, 0.1, 0.0)
    rec.gate("periodic_converged", wave.converged and wave.iterations <= 50,
             f"{wave.iterations} iterations <= 50")
    rec.gate("periodic_contraction", wave.contraction_ratio <= 0.9,
             f"{wave.contraction_ratio:.3f} <= 0.9")
    rec.gate("periodic_residual", wave.residual <= 1e-10,
             f"{wave.residual:.3e} <= 1e-10")
    omega_dev = abs(wave0.omega - wave0.resonance.omega)
    rec.gate("periodic_linear_frequency", omega_dev <= 1e-12,
             f"|omega(a=0) - omega_eps| = {omega_dev:.3e} <= 1e-12")
    rec.timings["periodic"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        state, nwave, diag = solve_nanopteron(params, cfg["eps"])
    except (NoConvergence, LinearSolveFailure) as exc:
        rec.gate("nanopteron_converged", False, str(exc))
        state = None
    if state is not None:
        rec.gate("nanopteron_converged", diag.converged, f"{diag.iterations} iterations")
        rec.gate("nanopteron_residual", diag.residual_rel <= 1e-6,
                 f"{diag.residual_rel:.3e} <= 1e-6")
        rec.summary["a"] = state.a
        rec.timings["nanopteron"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        prof = TravelingProfile.from_nanopteron(params, cfg["eps"], state, nwave, 512)
        r0, v0 = prof.initial()
        lat = LatticeConfig(sites=512, dt=0.02, T=10.0 / prof.c, snap_every=50)
        traj = simulate(params, lat, r0, v0)
        err = shape_error(traj, prof)
        drift = traj.energy_drift()
        rep = stegoton_diagnostics(traj, prof.core_width_sites(),
                                   ripple_wavenumber=cfg["eps"] * prof.omega)
        ratio_dev = float(np.max(np.abs(rep.ratios - kap) / kap))
        rec.gate("lattice_shape", err <= 1e-3, f"{err:.3e} <= 1e-3")
        rec.gate("lattice_drift", drift <= 1e-8, f"{drift:.3e} <= 1e-8")
        rec.gate("lattice_peak_ratio", ratio_dev <= 0.02,
                 f"max deviation {ratio_dev * 100:.2f}% <= 2%")
        rec.timings["lattice"] = time.perf_counter() - t0

    rec.timings["total"] = time.perf_counter() - t_all
    rec.write(_outdir(cfg) / "validate_record.txt")
    rec.print_gates()
    print(f"{sum(p for _, p, _ in rec.gates)}/{len(rec.gates)} gates passed")
    return 0 if rec.all_passed else 1


# -- argument parsing ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimerwave",
        description="Nanopteron traveling waves of the spring-dimer lattice.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--kappa", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("dispersion", help="sample branches and locate the resonance")
    common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("periodic", help="solve the ripple family at one amplitude")
    common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--amplitude", type=float)

    p = sub.add_parser("nanopteron", help="solve the full traveling-wave system")
    common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--sweep", help="comma-separated eps values")
    p.add_argument("--threads", type=int)

    p = sub.add_parser("simulate", help="integrate a ring and dump (t, j, r_j)")
    common(p)
    p.add_argument("--init", help="'leading' or path to a nanopteron solution file")
    p.add_argument("--eps", type=float)
    p.add_argument("--sites", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--snap-every", dest="snap_every", type=int)

    p = sub.add_parser("validate", help="run the identity/property gate table")
    common(p)
    p.add_argument("--eps", type=float)

    return parser


_COMMANDS = {
    "dispersion": cmd_dispersion,
    "periodic": cmd_periodic,
    "nanopteron": cmd_nanopteron,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def dispatch(argv=None) -> int:
    """Parse, run, and map failures to exit codes (0 ok / 1 solver / 2 config)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg)
    except InvalidParams as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except (NoConvergence, LinearSolveFailure) as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
