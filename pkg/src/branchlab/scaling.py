"""From discrete family laws to continuum limits: rescaled measures and
mechanisms, the exponent ODE and its forward-Euler discretization, survival
mass and drift extraction, the damped Smoluchowski identity, and the
triangular-array statistics whose convergence characterizes the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gw import FamilyLaw, discrete_mechanism
from .levy import (
    LevyTriple,
    bernstein_value,
    grey_check,
    kappa_of,
    mechanism,
    mechanism_derivative,
    psi_prime_infinity,
    _estimate_limit,
)
from .measures import AtomicMeasure, DEFAULT_Q_GRID, kappa_distance


@dataclass(frozen=True)
class Rescaling:
    """Space step h and time step tau, both in (0, 1]."""

    h: float
    tau: float

    def __post_init__(self):
        if not (0 < self.h <= 1 and 0 < self.tau <= 1):
            raise ValueError("h and tau must lie in (0, 1]")

    @classmethod
    def dyadic(cls, k: int) -> "Rescaling":
        return cls(2.0**-k, 2.0**-k)


def rescaled_levy_measure(law: FamilyLaw, r: Rescaling) -> AtomicMeasure:
    """Atoms at j*h with weights (j - 1) pi(j) / tau for j >= 2.

    Only defined for critical laws (the drift part must vanish for the
    measure to capture the whole mechanism).
    """
    if not law.critical:
        raise ValueError("rescaled measure requires a critical law")
    mask = law.support >= 2
    j = law.support[mask].astype(float)
    w = law.probs[mask]
    if j.size == 0:
        return AtomicMeasure()
    return AtomicMeasure(j * r.h, (j - 1.0) * w / r.tau)


def rescaled_mechanism(law: FamilyLaw, r: Rescaling, q):
    """Psi_{h,tau}(q) = Psi_law(h q) / (tau h) for 0 <= q <= 1/h."""
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q_arr < 0) or np.any(q_arr > 1.0 / r.h + 1e-12):
        raise ValueError("q must lie in [0, 1/h]")
    out = discrete_mechanism(law, r.h * q_arr) / (r.tau * r.h)
    return float(out[0]) if np.ndim(q) == 0 else out


def euler_exponent(law: FamilyLaw, r: Rescaling, q: float, t: float) -> float:
    """Forward-Euler iterate of the rescaled exponent recursion.

    phi^0 = (1 - e^{-qh})/h, then phi <- phi - tau * Psi_{h,tau}(phi) for
    floor(t / tau) steps.  This is the exact rescaled one-step recursion of
    the discrete Bernstein transform, so it carries the full discrete
    dynamics, and converges first order in (h, tau) to the continuum
    exponent.
    """
    if q < 0 or q > 1.0 / r.h:
        raise ValueError("q must lie in [0, 1/h]")
    if t < 0:
        raise ValueError("t must be >= 0")
    n = int(math.floor(t / r.tau + 1e-9))
    phi = (1.0 - math.exp(-q * r.h)) / r.h
    for _ in range(n):
        phi = phi - discrete_mechanism(law, r.h * phi) / r.h
    return phi


def rescaled_gw_laplace(law: FamilyLaw, r: Rescaling, x: float, q: float,
                        t: float) -> float:
    """Laplace functional (1 - h phi^n(q))^{floor(x/h)} of the rescaled
    process started from floor(x/h) ancestors, n = floor(t/tau).

    Tends to e^{-x phi(q, t)} as the rescaling refines.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    phi = euler_exponent(law, r, q, t)
    return (1.0 - r.h * phi) ** int(math.floor(x / r.h + 1e-9))


# ---------------------------------------------------------------------------
# The exponent ODE d phi / dt = -Psi(phi)


def _rk4_step(f, y: float, h: float) -> float:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_exponent_ode(t: LevyTriple, q0: float, t_points,
                           rtol: float = 1e-11):
    """phi(q0, s) at the requested times: classic RK4 with step doubling.

    Each step is taken once at h and twice at h/2; the Richardson gap
    (y_half - y_full)/15 estimates the local error, the accepted value is
    the extrapolated one, and the step is resized by the standard fifth-root
    rule until successive estimates meet the relative tolerance.
    """
    pts = np.asarray(t_points, dtype=float)
    if np.any(pts < 0) or np.any(np.diff(pts) < 0):
        raise ValueError("t_points must be nondecreasing and >= 0")
    if q0 < 0:
        raise ValueError("q0 must be >= 0")

    def f(y):
        return -mechanism(t, max(y, 0.0))

    out = np.empty(pts.size)
    y = float(q0)
    s = 0.0
    rate = mechanism(t, q0) / q0 if q0 > 0 else 0.0
    h = 0.1 / max(rate, 1e-3)
    for i, target in enumerate(pts):
        while s < target:
            h = min(h, target - s)
            y_full = _rk4_step(f, y, h)
            y_half = _rk4_step(f, _rk4_step(f, y, 0.5 * h), 0.5 * h)
            err = abs(y_half - y_full) / 15.0
            tol = rtol * max(abs(y_half), 1e-3 * q0) + 1e-300
            if err <= tol:
                s += h
                y = max(y_half + (y_half - y_full) / 15.0, 0.0)
                h *= min(4.0, max(0.5, 0.9 * (tol / max(err, 1e-300)) ** 0.2))
            else:
                h *= max(0.1, 0.9 * (tol / err) ** 0.2)
        out[i] = y
    return out


# Extrapolation points used to probe q -> inf behaviour.
_Q_PROBE = 1.0e6
_Q_PROBE_LOW = 1.0e4
# Relative agreement between the two probes that declares the limit finite.
_PROBE_RTOL = 1e-3


@dataclass(frozen=True)
class ExponentTable:
    """Solved exponent values plus per-time jump mass and drift estimates.

    values[i, j] = phi(q_grid[i], t_grid[j]).  rho[j] estimates
    phi(inf, t_grid[j]) from the probe at q = 1e6 and is math.inf where the
    two probes disagree; beta0[j] is the numerical phi/q estimate at the
    probe, which tends to the analytic e^{-Psi'(inf) t}.
    """

    q_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    rho: np.ndarray
    beta0: np.ndarray


def solve_exponent(t: LevyTriple, q_grid, t_grid,
                   rtol: float = 1e-11) -> ExponentTable:
    """Integrate the exponent ODE over a (q, t) grid."""
    qs = np.asarray(q_grid, dtype=float)
    ts = np.asarray(t_grid, dtype=float)
    values = np.stack([integrate_exponent_ode(t, q, ts, rtol) for q in qs])
    hi = integrate_exponent_ode(t, _Q_PROBE, ts, rtol)
    lo = integrate_exponent_ode(t, _Q_PROBE_LOW, ts, rtol)
    rho = np.empty(ts.size)
    for j in range(ts.size):
        if ts[j] > 0 and abs(hi[j] - lo[j]) <= _PROBE_RTOL * abs(hi[j]):
            rho[j] = hi[j]
        else:
            rho[j] = math.inf
    return ExponentTable(qs, ts, values, rho, hi / _Q_PROBE)


def beta_and_rho(t: LevyTriple, table: ExponentTable, time: float):
    """(beta0, rho) of the time-`time` exponent.

    beta0 is the analytic e^{-Psi'(inf) * time} (zero when the slope at
    infinity is infinite, one at time zero), cross-checked against the
    table's numerical phi/q estimate within 1e-4.  rho = phi(inf, time) is
    read from the table and is math.inf unless Grey's condition holds.
    """
    idx = np.nonzero(np.isclose(table.t_grid, time, rtol=1e-12, atol=1e-12))[0]
    if idx.size == 0:
        raise ValueError("time is not on the table's t grid")
    j = int(idx[0])
    slope = psi_prime_infinity(t)
    if time == 0:
        beta = 1.0
    else:
        beta = 0.0 if math.isinf(slope) else math.exp(-slope * time)
    if abs(beta - table.beta0[j]) > 1e-4:
        raise RuntimeError(
            f"beta0 cross-check failed: analytic {beta!r} vs table {table.beta0[j]!r}")
    return beta, table.rho[j]


def damped_smol_residual(t: LevyTriple, time: float, q: float,
                         k_max: int = 30) -> float:
    """Gap between the truncated merger-rate sum and its closed form.

    Computes sum_{k=2}^{k_max} R_k I_k with R_k = (-rho)^k Psi^(k)(rho)/k!
    and the normalized I_k = 1 - (1 - phi/rho)^k - k phi/rho, and compares
    with Psi(0) - Psi(phi) + phi Psi'(0+), where phi = phi(q, time) and
    rho = phi(inf, time).  Requires Grey's condition (finite rho).

    A centered finite difference of the solved exponent is checked against
    -Psi(phi) on the way, guarding the ODE solve itself.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    converges, _ = grey_check(t)
    if not converges:
        raise ValueError("damped identity needs Grey's condition (finite rho)")
    if time <= 0:
        raise ValueError("time must be > 0")
    delta = 1e-3 * max(time, 1.0)
    times = np.array([time - delta, time, time + delta])
    phi3 = integrate_exponent_ode(t, q, times)
    phi = phi3[1]
    fd = (phi3[2] - phi3[0]) / (2.0 * delta)
    ode_rhs = -mechanism(t, phi)
    if abs(fd - ode_rhs) > 1e-4 * max(1.0, abs(ode_rhs)):
        raise RuntimeError("exponent solve failed its finite-difference check")
    rho = integrate_exponent_ode(t, _Q_PROBE, np.array([time]))[0]
    s = phi / rho
    lhs = 0.0
    for k in range(2, k_max + 1):
        r_k = (-rho) ** k * mechanism_derivative(t, rho, k) / math.factorial(k)
        i_k = 1.0 - (1.0 - s) ** k - k * s
        lhs += r_k * i_k
    rhs = mechanism(t, 0.0) - mechanism(t, phi) + phi * bernstein_value(t, 0.0)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Triangular-array diagnostics


@dataclass(frozen=True)
class LevyConvergenceReport:
    """Kappa distances and mechanism gaps of a rescaled-law sequence against
    an estimated limit triple."""

    limit: LevyTriple
    kappa_gaps: np.ndarray
    mechanism_gaps: np.ndarray

    @property
    def kappa_decreasing(self) -> bool:
        g = self.kappa_gaps
        return bool(np.all(np.diff(g) <= 1e-15) or np.all(g <= 1e-14))

    @property
    def mechanism_decreasing(self) -> bool:
        g = self.mechanism_gaps
        return bool(np.all(np.diff(g) <= 1e-15) or np.all(g <= 1e-14))


def levy_convergence_report(entries, q_grid=None) -> LevyConvergenceReport:
    """Convergence diagnostics for a sequence of (FamilyLaw, Rescaling).

    Each entry contributes the pure-jump triple of its rescaled measure; the
    limit is estimated from the kappa trajectory (see levy.continuity_report
    for the heuristic).  Mechanism gaps evaluate the rescaled mechanism
    against the limit's on the part of the grid below each entry's 1/h cap.
    """
    grid = DEFAULT_Q_GRID if q_grid is None else np.asarray(q_grid, dtype=float)
    if len(entries) < 3:
        raise ValueError("need at least three entries to estimate a limit")
    triples = [LevyTriple(0.0, 0.0, rescaled_levy_measure(law, r))
               for law, r in entries]
    limit = _estimate_limit(triples)
    k_lim = kappa_of(limit)
    kappa_gaps = np.array([kappa_distance(kappa_of(tr), k_lim, grid)
                           for tr in triples])
    mech_gaps = []
    for (law, r), tr in zip(entries, triples):
        sub = grid[grid <= 1.0 / r.h]
        gap = np.abs(rescaled_mechanism(law, r, sub) - mechanism(limit, sub))
        mech_gaps.append(float(gap.max()))
    return LevyConvergenceReport(limit, kappa_gaps, np.asarray(mech_gaps))


@dataclass(frozen=True)
class GrimvallStats:
    """Centered-increment statistics of one rescaled law.

    The increment measure eta places pi(j+1) at j*h for j >= -1; a_hat and
    b_hat are its integrals of x/(1+x^2) and x^2/(1+x^2), both divided by
    h*tau, and tail(z) is eta([z, inf))/(h*tau) for z > 0.
    """

    a_hat: float
    b_hat: float
    locations: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    h: float
    tau: float

    def tail(self, z):
        z_arr = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(z_arr <= 0):
            raise ValueError("tail is sampled at z > 0")
        out = np.array([float(self.weights[self.locations >= zz].sum())
                        for zz in z_arr]) / (self.h * self.tau)
        return float(out[0]) if np.ndim(z) == 0 else out


def grimvall_stats(law: FamilyLaw, r: Rescaling) -> GrimvallStats:
    locs = (law.support.astype(float) - 1.0) * r.h
    w = law.probs.copy()
    x2 = locs * locs
    a = float(np.dot(w, locs / (1.0 + x2))) / (r.h * r.tau)
    b = float(np.dot(w, x2 / (1.0 + x2))) / (r.h * r.tau)
    return GrimvallStats(a, b, locs, w, r.h, r.tau)


def grimvall_limit_targets(t: LevyTriple):
    """The limits the centered statistics must approach for a triple:

        a -> -alpha_inf - int x^2/(1+x^2) dmu
        b ->  alpha0    + int x/(1+x^2) dmu
        tail(z) -> int_{[z, inf)} dmu(x)/x

    Returns (a, b, tail callable).
    """
    x, w = t.mu.locations, t.mu.weights
    if x.size:
        a = -t.alpha_inf - float(np.dot(w, x * x / (1.0 + x * x)))
        b = t.alpha0 + float(np.dot(w, x / (1.0 + x * x)))
    else:
        a = -t.alpha_inf
        b = t.alpha0

    def tail(z):
        z_arr = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(z_arr <= 0):
            raise ValueError("tail is sampled at z > 0")
        if x.size:
            out = np.array([float((w[x >= zz] / x[x >= zz]).sum())
                            for zz in z_arr])
        else:
            out = np.zeros(z_arr.size)
        return float(out[0]) if np.ndim(z) == 0 else out

    return a, b, tail
