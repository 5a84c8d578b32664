"""Levy triples (alpha0, alpha_inf, mu), their Bernstein transforms and
branching mechanisms, and the weak-star convergence diagnostics that tie the
four equivalent formulations together.

A triple encodes f(q) = alpha0*q + alpha_inf + integral (1 - e^{-qx}) dmu(x)
with mu a finite atomic measure on (0, inf).  The associated mechanism is
Psi(q) = alpha0*q^2/2 + alpha_inf*q + integral (e^{-qx} - 1 + qx)/x dmu(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .measures import (
    AtomicMeasure,
    CompactifiedMeasure,
    DEFAULT_Q_GRID,
    kappa_distance,
)


@dataclass(frozen=True)
class LevyTriple:
    """Diffusion coefficient, killing rate, and jump measure."""

    alpha0: float = 0.0
    alpha_inf: float = 0.0
    mu: AtomicMeasure = field(default_factory=AtomicMeasure)

    def __post_init__(self):
        if not (math.isfinite(self.alpha0) and self.alpha0 >= 0):
            raise ValueError("alpha0 must be finite and >= 0")
        if not (math.isfinite(self.alpha_inf) and self.alpha_inf >= 0):
            raise ValueError("alpha_inf must be finite and >= 0")


def feller_triple() -> LevyTriple:
    """The pure-diffusion triple (1, 0, empty); mechanism q^2/2."""
    return LevyTriple(1.0, 0.0, AtomicMeasure())


def bernstein_value(t: LevyTriple, q):
    """Bernstein transform f(q); q may be a scalar or array, q >= 0."""
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q_arr < 0):
        raise ValueError("q must be >= 0")
    out = t.alpha0 * q_arr + t.alpha_inf
    x = t.mu.locations
    if x.size:
        out = out + (1.0 - np.exp(-np.outer(q_arr, x))) @ t.mu.weights
    return float(out[0]) if np.isscalar(q) or np.ndim(q) == 0 else out


def _em1p(u):
    """e^{-u} - 1 + u, evaluated without cancellation for small u >= 0."""
    u = np.asarray(u, dtype=float)
    small = u < 1e-4
    out = np.empty_like(u)
    us = u[small]
    out[small] = us * us * (0.5 - us * (1.0 / 6.0 - us / 24.0))
    ub = u[~small]
    out[~small] = np.expm1(-ub) + ub
    return out


def mechanism(t: LevyTriple, q):
    """Branching mechanism Psi(q), convex with Psi(0) = 0."""
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q_arr < 0):
        raise ValueError("q must be >= 0")
    out = 0.5 * t.alpha0 * q_arr**2 + t.alpha_inf * q_arr
    x = t.mu.locations
    if x.size:
        out = out + _em1p(np.outer(q_arr, x)) @ (t.mu.weights / x)
    return float(out[0]) if np.isscalar(q) or np.ndim(q) == 0 else out


def mechanism_derivative(t: LevyTriple, q, k: int):
    """k-th derivative of the mechanism, k >= 1.

    Psi'(q) coincides with the Bernstein transform of the triple itself;
    Psi''(q) = alpha0 + int x e^{-qx} dmu; higher derivatives alternate sign:
    Psi^(k)(q) = (-1)^k int x^{k-1} e^{-qx} dmu for k >= 3.
    """
    if k < 1 or k != int(k):
        raise ValueError("derivative order must be a positive integer")
    k = int(k)
    if k == 1:
        return bernstein_value(t, q)
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    x = t.mu.locations
    if k == 2:
        out = np.full_like(q_arr, t.alpha0)
        if x.size:
            out = out + np.exp(-np.outer(q_arr, x)) @ (t.mu.weights * x)
    else:
        out = np.zeros_like(q_arr)
        if x.size:
            out = out + np.exp(-np.outer(q_arr, x)) @ (t.mu.weights * x ** (k - 1))
        out = out * ((-1.0) ** k)
    return float(out[0]) if np.isscalar(q) or np.ndim(q) == 0 else out


def scale_triple(t: LevyTriple, b: float, c: float) -> LevyTriple:
    """Dilational rescaling: (alpha0, alpha_inf, mu) -> (c/b alpha0, c alpha_inf,
    atoms moved to x/b with weights c*w).

    Satisfies f_scaled(q) = c * f(q/b) and Psi_scaled(q) = c*b * Psi(q/b).
    """
    if b <= 0 or c <= 0:
        raise ValueError("scale factors must be > 0")
    return LevyTriple(c / b * t.alpha0, c * t.alpha_inf, t.mu.scaled(1.0 / b, c))


def kappa_of(t: LevyTriple) -> CompactifiedMeasure:
    """The kappa measure on [0, inf]: alpha0 at 0, alpha_inf at inf, and
    (x ^ 1) dmu in the interior."""
    x, w = t.mu.locations, t.mu.weights
    interior = AtomicMeasure(x, np.minimum(x, 1.0) * w) if x.size else AtomicMeasure()
    return CompactifiedMeasure(t.alpha0, t.alpha_inf, interior)


def triple_of(k: CompactifiedMeasure) -> LevyTriple:
    """Inverse of kappa_of; interior masses are divided by (x ^ 1)."""
    x, m = k.interior.locations, k.interior.weights
    mu = AtomicMeasure(x, m / np.minimum(x, 1.0)) if x.size else AtomicMeasure()
    return LevyTriple(k.mass_at_zero, k.mass_at_inf, mu)


def left_right(t: LevyTriple, x: float):
    """Left and right distribution values at x > 0:

        L(x) = alpha0 + sum_{z <= x} z * w(z)
        R(x) = alpha_inf + sum_{z > x} w(z)
    """
    if x <= 0:
        raise ValueError("x must be > 0")
    loc, w = t.mu.locations, t.mu.weights
    left = t.alpha0
    right = t.alpha_inf
    if loc.size:
        i = int(np.searchsorted(loc, x, side="right"))
        left += float(np.dot(loc[:i], w[:i]))
        right += float(w[i:].sum())
    return left, right


def psi_prime_infinity(t: LevyTriple) -> float:
    """lim Psi(q)/q as q -> inf: infinite iff alpha0 > 0 (an atomic mu always
    has finite total mass), else alpha_inf + mu(total)."""
    if t.alpha0 > 0:
        return math.inf
    return t.alpha_inf + t.mu.total_mass


# Horizon for the convergence decision and tail estimate in grey_check.
_GREY_HORIZON = 1.0e6
# Local log-log slopes within this margin of 1 are treated as linear growth.
_GREY_SLOPE_MARGIN = 1e-3


def grey_check(t: LevyTriple):
    """Estimate integral_1^inf du / Psi(u) and decide whether it converges.

    The integrand is integrated decade by decade up to a horizon U by
    adaptive quadrature.  Convexity of Psi gives only linear lower bounds,
    which cannot settle convergence, so the decision uses the local log-log
    slope p = log2(Psi(2U)/Psi(U)): slopes within _GREY_SLOPE_MARGIN of 1
    are flagged divergent, otherwise the tail is estimated by continuing the
    local power law, integral_U^inf = U / (Psi(U) (p - 1)), which is exact
    for pure power mechanisms.

    Returns (converges, value); value is math.inf when divergent.
    Raises ValueError when Psi vanishes on [1, inf).
    """
    u_top = _GREY_HORIZON
    psi_top = mechanism(t, u_top)
    if psi_top == 0.0:
        # Psi is nondecreasing, so it vanishes on the whole window.
        raise ValueError("mechanism vanishes on [1, inf)")
    p = math.log2(mechanism(t, 2 * u_top) / psi_top)
    if p < 1.0 + _GREY_SLOPE_MARGIN:
        return False, math.inf
    total = 0.0
    edges = np.geomspace(1.0, u_top, 13)
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda u: 1.0 / mechanism(t, u), a, b,
                      epsabs=1e-12, epsrel=1e-12, limit=200)
        total += val
    total += u_top / (psi_top * (p - 1.0))
    return True, total


@dataclass(frozen=True)
class QuadratureRecipe:
    """Midpoint rule on a log grid, for representing a density as atoms.

    grid holds the geometric midpoints, rule the interval widths; the
    resulting measure has weights density(grid) * rule.
    """

    density: object
    grid: np.ndarray
    rule: np.ndarray

    @classmethod
    def log_midpoint(cls, density, lo: float, hi: float, n: int) -> "QuadratureRecipe":
        if not (0 < lo < hi) or n < 1:
            raise ValueError("need 0 < lo < hi and n >= 1")
        edges = np.geomspace(lo, hi, n + 1)
        mids = np.sqrt(edges[:-1] * edges[1:])
        return cls(density, mids, np.diff(edges))

    def to_measure(self) -> AtomicMeasure:
        w = np.asarray(self.density(self.grid), dtype=float) * self.rule
        return AtomicMeasure(self.grid, w)


def stable_three_halves(n_atoms: int = 2000, lo: float = 1e-8,
                        hi: float = 1e8) -> LevyTriple:
    """Quadrature stand-in for the mechanism Psi(q) = q^(3/2).

    The jump density x^(-3/2) / Gamma(-3/2) is discretized by a log-midpoint
    rule and the weights are normalized so that mechanism(., 1) == 1 exactly.
    Faithful as a power law for q well inside [1/hi, 1/lo].
    """
    gamma = math.gamma(-1.5)  # = 4 sqrt(pi) / 3 > 0
    recipe = QuadratureRecipe.log_midpoint(lambda x: x**-1.5 / gamma, lo, hi, n_atoms)
    mu = recipe.to_measure()
    t = LevyTriple(0.0, 0.0, mu)
    z = mechanism(t, 1.0)
    return LevyTriple(0.0, 0.0, mu.scaled(1.0, 1.0 / z))


# ---------------------------------------------------------------------------
# Convergence diagnostics


@dataclass(frozen=True)
class ContinuityReport:
    """Gap families between a triple sequence and an estimated limit.

    Families: Bernstein sup-gaps on the q grid, kappa weak-star distances,
    mechanism sup-gaps, and left/right distribution gaps at continuity
    points.  The first three are checked for monotone decrease; for the
    left/right family only the per-point settlement of the final member is
    checked (escaping atoms make sup gaps non-monotone at desk scale).
    """

    limit: LevyTriple
    bernstein_gaps: np.ndarray
    kappa_gaps: np.ndarray
    mechanism_gaps: np.ndarray
    left_right_gaps: np.ndarray
    bernstein_decreasing: bool
    kappa_decreasing: bool
    mechanism_decreasing: bool
    left_right_settled: bool

    @property
    def consistent(self) -> bool:
        return (self.bernstein_decreasing and self.kappa_decreasing
                and self.mechanism_decreasing and self.left_right_settled)


# Atom trajectories with consecutive ratios below this are sent to 0 (and
# above its reciprocal to inf) when estimating the limit.
_DRIFT_RATIO = 0.9


def _estimate_limit(triples):
    """Heuristic limit of a triple sequence.

    Interior kappa atoms are rank-matched across the last few members; a
    location trending monotonically to 0 contributes its mass at 0, one
    trending to inf contributes at inf, anything else is kept in place.  If
    nothing moves (or the atom counts differ) the final member is returned
    unchanged, which keeps constant sequences exact.
    """
    kappas = [kappa_of(t) for t in triples]
    last = kappas[-1]
    counts = {k.interior.locations.size for k in kappas}
    n_last = last.interior.locations.size
    if len(triples) < 3 or len(counts) != 1 or n_last == 0:
        return triples[-1]
    window = kappas[-min(3, len(kappas)):]
    locs = np.stack([k.interior.locations for k in window])  # (w, n)
    ratios = locs[1:] / locs[:-1]
    to_zero = np.all(ratios <= _DRIFT_RATIO, axis=0)
    to_inf = np.all(ratios >= 1.0 / _DRIFT_RATIO, axis=0)
    keep = ~(to_zero | to_inf)
    if np.all(keep):
        return triples[-1]
    m0 = last.mass_at_zero + float(last.interior.weights[to_zero].sum())
    minf = last.mass_at_inf + float(last.interior.weights[to_inf].sum())
    interior = AtomicMeasure(last.interior.locations[keep],
                             last.interior.weights[keep])
    return triple_of(CompactifiedMeasure(m0, minf, interior))


def _nonincreasing(seq) -> bool:
    """Monotone decrease up to a 1.5x per-step tolerance; all-zero passes."""
    s = np.asarray(seq, dtype=float)
    if np.all(s <= 1e-14):
        return True
    steps_ok = np.all(s[1:] <= 1.5 * s[:-1] + 1e-15)
    return bool(steps_ok and s[-1] <= s[0] + 1e-15)


def continuity_report(triples, q_grid=None) -> ContinuityReport:
    """Evaluate the four equivalent convergence conditions along a sequence.

    Continuity points for the left/right family are the midpoints between
    consecutive distinct atom locations pooled over all members.
    """
    if len(triples) < 1:
        raise ValueError("need at least one triple")
    grid = DEFAULT_Q_GRID if q_grid is None else np.asarray(q_grid, dtype=float)
    limit = _estimate_limit(triples)
    kappas = [kappa_of(t) for t in triples]
    k_lim = kappa_of(limit)

    f_lim = bernstein_value(limit, grid)
    psi_lim = mechanism(limit, grid)
    bern = np.array([np.max(np.abs(bernstein_value(t, grid) - f_lim))
                     for t in triples])
    kap = np.array([kappa_distance(k, k_lim, grid) for k in kappas])
    mech = np.array([np.max(np.abs(mechanism(t, grid) - psi_lim))
                     for t in triples])

    pool = np.concatenate([t.mu.locations for t in triples]
                          + [limit.mu.locations])
    pool = np.unique(pool)
    if pool.size >= 2:
        points = 0.5 * (pool[:-1] + pool[1:])
    else:
        points = np.array([0.5, 1.0, 2.0])
    lim_lr = np.array([left_right(limit, x) for x in points])
    per_member = []
    for t in triples:
        lr = np.array([left_right(t, x) for x in points])
        per_member.append(np.abs(lr - lim_lr).sum(axis=1))
    per_member = np.stack(per_member)  # (members, points)
    lr_gaps = per_member.max(axis=1)
    settled = bool(np.all(per_member[-1] <= per_member.min(axis=0) + 1e-12))

    return ContinuityReport(
        limit=limit,
        bernstein_gaps=bern,
        kappa_gaps=kap,
        mechanism_gaps=mech,
        left_right_gaps=lr_gaps,
        bernstein_decreasing=_nonincreasing(bern),
        kappa_decreasing=_nonincreasing(kap),
        mechanism_decreasing=_nonincreasing(mech),
        left_right_settled=settled,
    )
