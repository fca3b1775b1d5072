"""Hot time-stepping kernels for the lattice integrator.

Both code paths advance the relative-displacement system

    r_ddot_j = s_{j+1} + s_{j-1} - 2 s_j,   s_j = F_parity(j)(r_j)

with the classical 4th-order one-step method on a periodic ring.  The
compiled kernels are used when numba imports and the environment variable
``DIMERWAVE_KERNELS`` is not set to ``numpy``; the pure-numpy twins produce
the same trajectories to rounding and keep the package importable anywhere.
``benchmarks/bench_kernels.py`` times one against the other.
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False


def use_numba() -> bool:
    """True when the compiled path is selected (import worked, no override)."""
    return HAS_NUMBA and os.environ.get("DIMERWAVE_KERNELS", "").lower() != "numpy"


# -- pure-numpy path --------------------------------------------------------------


def _poly_ascending(coeffs, r):
    """sum_i coeffs[i] r^i by Horner; zeros for an empty tuple."""
    out = np.zeros_like(r)
    for c in coeffs[::-1]:
        out = out * r + c
    return out


def spring_forces_numpy(r, odd, kappa, beta, n1, n2):
    """Per-site spring force: stiff F1 on odd sites, soft F2 on even.

    F1(r) = kappa r + beta r^2 + r^3 N1(r),  F2(r) = r + r^2 + r^3 N2(r).
    """
    s = np.where(odd, kappa * r + beta * r * r, r + r * r)
    if len(n1):
        s = np.where(odd, s + r**3 * _poly_ascending(n1, r), s)
    if len(n2):
        s = np.where(odd, s, s + r**3 * _poly_ascending(n2, r))
    return s


def accel_numpy(r, odd, kappa, beta, n1, n2):
    s = spring_forces_numpy(r, odd, kappa, beta, n1, n2)
    return np.roll(s, -1) + np.roll(s, 1) - 2 * s


def rk4_steps_numpy(r, v, dt, steps, odd, kappa, beta, n1, n2):
    r, v = r.copy(), v.copy()

    def a_of(x):
        return accel_numpy(x, odd, kappa, beta, n1, n2)

    for _ in range(steps):
        a1 = a_of(r)
        v2 = v + (0.5 * dt) * a1
        a2 = a_of(r + (0.5 * dt) * v)
        v3 = v + (0.5 * dt) * a2
        a3 = a_of(r + (0.5 * dt) * v2)
        v4 = v + dt * a3
        a4 = a_of(r + dt * v3)
        r = r + (dt / 6) * (v + 2 * v2 + 2 * v3 + v4)
        v = v + (dt / 6) * (a1 + 2 * a2 + 2 * a3 + a4)
    return r, v


# -- compiled path ----------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _accel_numba(r, odd, kappa, beta, n1, n2, out):
        J = r.shape[0]
        s = np.empty(J)
        for j in range(J):
            x = r[j]
            if odd[j]:
                f = kappa * x + beta * x * x
                if n1.shape[0]:
                    p = 0.0
                    for i in range(n1.shape[0] - 1, -1, -1):
                        p = p * x + n1[i]
                    f += x * x * x * p
            else:
                f = x + x * x
                if n2.shape[0]:
                    p = 0.0
                    for i in range(n2.shape[0] - 1, -1, -1):
                        p = p * x + n2[i]
                    f += x * x * x * p
            s[j] = f
        for j in range(J):
            out[j] = s[(j + 1) % J] + s[(j - 1) % J] - 2 * s[j]

    @njit(cache=True)
    def rk4_steps_numba(r, v, dt, steps, odd, kappa, beta, n1, n2):
        r, v = r.copy(), v.copy()
        J = r.shape[0]
        a1 = np.empty(J)
        a2 = np.empty(J)
        a3 = np.empty(J)
        a4 = np.empty(J)
        scratch = np.empty(J)
        for _ in range(steps):
            _accel_numba(r, odd, kappa, beta, n1, n2, a1)
            for j in range(J):
                scratch[j] = r[j] + 0.5 * dt * v[j]
            _accel_numba(scratch, odd, kappa, beta, n1, n2, a2)
            for j in range(J):
                scratch[j] = r[j] + 0.5 * dt * (v[j] + 0.5 * dt * a1[j])
            _accel_numba(scratch, odd, kappa, beta, n1, n2, a3)
            for j in range(J):
                scratch[j] = r[j] + dt * (v[j] + 0.5 * dt * a2[j])
            _accel_numba(scratch, odd, kappa, beta, n1, n2, a4)
            for j in range(J):
                v2 = v[j] + 0.5 * dt * a1[j]
                v3 = v[j] + 0.5 * dt * a2[j]
                v4 = v[j] + dt * a3[j]
                r[j] = r[j] + (dt / 6) * (v[j] + 2 * v2 + 2 * v3 + v4)
                v[j] = v[j] + (dt / 6) * (a1[j] + 2 * a2[j] + 2 * a3[j] + a4[j])
        return r, v


def rk4_steps(r, v, dt, steps, odd, kappa, beta, n1, n2, compiled=None):
    """Advance ``steps`` RK4 steps; ``compiled`` overrides the backend choice."""
    pick = use_numba() if compiled is None else (compiled and HAS_NUMBA)
    if pick:
        return rk4_steps_numba(
            r.astype(np.float64), v.astype(np.float64), float(dt), int(steps),
            odd, float(kappa), float(beta),
            np.asarray(n1, dtype=np.float64), np.asarray(n2, dtype=np.float64),
        )
    return rk4_steps_numpy(
        r, v, dt, steps, odd, kappa, beta,
        np.asarray(n1, dtype=np.float64), np.asarray(n2, dtype=np.float64),
    )
