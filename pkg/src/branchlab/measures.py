"""Finite measures used throughout: lattice distributions, atomic measures on
(0, inf), and measures on the compactified half line [0, inf].

All containers are immutable after construction (arrays are marked read-only)
and validate their defining constraints up front, so downstream code can rely
on them without re-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

# Absolute tolerance for "masses sum to one" style checks.
MASS_TOL = 1e-12

# Atoms closer than this are merged into one (weights added).
MERGE_TOL = 1e-15

# Default evaluation grid for the weak-star pseudometric: 41 points,
# log-spaced over [2^-10, 2^10].
DEFAULT_Q_GRID = np.geomspace(2.0**-10, 2.0**10, 41)
DEFAULT_Q_GRID.setflags(write=False)


def _readonly(a):
    arr = np.asarray(a, dtype=float)
    arr = np.array(arr, dtype=float)  # private copy
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability distribution on {0, 1, ..., J} plus a lump of tail mass.

    masses[j] is the probability of j; tail_mass accounts for everything
    beyond index J (its exact location is not tracked).  The total must be
    1 within MASS_TOL.
    """

    masses: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        arr = _readonly(self.masses)
        object.__setattr__(self, "masses", arr)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("masses must be a nonempty 1-d array")
        if np.any(arr < -MASS_TOL) or self.tail_mass < -MASS_TOL:
            raise ValueError("negative mass")
        total = float(arr.sum()) + self.tail_mass
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")

    @classmethod
    def delta(cls, j: int, size: int | None = None) -> "DiscreteDistribution":
        """Point mass at integer j >= 0."""
        if j < 0:
            raise ValueError("delta location must be >= 0")
        n = (j + 1) if size is None else size
        if n <= j:
            raise ValueError("size too small for delta location")
        m = np.zeros(n)
        m[j] = 1.0
        return cls(m)

    @classmethod
    def from_weights(cls, weights) -> "DiscreteDistribution":
        return cls(np.asarray(weights, dtype=float))

    @property
    def support_max(self) -> int:
        nz = np.nonzero(self.masses)[0]
        return int(nz[-1]) if nz.size else 0

    def mean(self) -> float:
        """Mean over the retained lattice part (the tail lump is excluded)."""
        j = np.arange(self.masses.size)
        return float(np.dot(j, self.masses))

    def trimmed(self) -> "DiscreteDistribution":
        """Drop trailing zero entries (keeps at least index 0)."""
        return DiscreteDistribution(self.masses[: self.support_max + 1], self.tail_mass)

    def restricted_positive(self):
        """Mass on {1, 2, ...} and the conditional distribution given > 0.

        Returns (rho, conditional masses array with index 0 zeroed).
        """
        rho = float(self.masses[1:].sum()) + self.tail_mass
        cond = self.masses.copy()
        cond[0] = 0.0
        if rho > 0:
            cond /= rho
        return rho, cond


def convolve(a: DiscreteDistribution, b: DiscreteDistribution,
             max_index: int | None = None) -> DiscreteDistribution:
    """Convolution of two lattice distributions, truncated at max_index.

    Direct O(J^2) accumulation via np.convolve for short operands, FFT for
    long ones (FFT roundoff is ~1e-16 of the peak mass, well inside every
    stated tolerance; tiny negative artifacts are clipped).  Any mass
    landing beyond max_index is moved into the tail lump, as is all mass
    involving either operand's tail (a tail partner pushes the sum past the
    window).
    """
    if a.masses.size * b.masses.size > 1 << 22:
        c = np.maximum(fftconvolve(a.masses, b.masses), 0.0)
    else:
        c = np.convolve(a.masses, b.masses)
    ta, tb = a.tail_mass, b.tail_mass
    tail = ta + tb - ta * tb
    if max_index is not None and c.size > max_index + 1:
        tail += float(c[max_index + 1:].sum())
        c = c[: max_index + 1].copy()
    return DiscreteDistribution(c, tail)


def convolve_power(p: DiscreteDistribution, k: int,
                   max_index: int | None = None) -> DiscreteDistribution:
    """k-fold convolution power of p; k = 0 gives the point mass at 0.

    Sequential accumulation, exact up to float addition error for the k
    range used here (k <= 64 in practice).
    """
    if k < 0 or k != int(k):
        raise ValueError("k must be a nonnegative integer")
    out = DiscreteDistribution.delta(0)
    for _ in range(int(k)):
        out = convolve(out, p, max_index)
    return out


def total_variation(a: DiscreteDistribution, b: DiscreteDistribution) -> float:
    """Total variation distance; tail lumps are compared as one coordinate."""
    n = max(a.masses.size, b.masses.size)
    pa = np.zeros(n)
    pa[: a.masses.size] = a.masses
    pb = np.zeros(n)
    pb[: b.masses.size] = b.masses
    return 0.5 * float(np.abs(pa - pb).sum()) + 0.5 * abs(a.tail_mass - b.tail_mass)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite atomic measure on (0, inf): sorted locations, positive weights.

    Duplicate locations (within MERGE_TOL absolutely) are merged at
    construction.  The empty measure is allowed.
    """

    locations: np.ndarray = field(default_factory=lambda: np.empty(0))
    weights: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if loc.shape != w.shape or loc.ndim != 1:
            raise ValueError("locations and weights must be matching 1-d arrays")
        if loc.size:
            if np.any(~np.isfinite(loc)) or np.any(loc <= 0):
                raise ValueError("atom locations must be finite and > 0")
            if np.any(w < 0) or np.any(~np.isfinite(w)):
                raise ValueError("atom weights must be finite and >= 0")
            order = np.argsort(loc, kind="stable")
            loc, w = loc[order], w[order]
            # merge near-duplicates, drop zero weights
            keep_loc, keep_w = [], []
            for x, wt in zip(loc, w):
                if keep_loc and abs(x - keep_loc[-1]) <= MERGE_TOL:
                    keep_w[-1] += wt
                else:
                    keep_loc.append(x)
                    keep_w.append(wt)
            loc = np.array(keep_loc)
            w = np.array(keep_w)
            nz = w > 0
            loc, w = loc[nz], w[nz]
        object.__setattr__(self, "locations", _readonly(loc))
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def from_pairs(cls, pairs) -> "AtomicMeasure":
        if not pairs:
            return cls()
        loc, w = zip(*pairs)
        return cls(np.asarray(loc, dtype=float), np.asarray(w, dtype=float))

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def integrate(self, f) -> float:
        """Integral of f against the measure; f is applied vectorized."""
        if self.locations.size == 0:
            return 0.0
        vals = np.asarray(f(self.locations), dtype=float)
        if np.any(~np.isfinite(vals)):
            raise ValueError("integrand is not finite on the atom set")
        return float(np.dot(vals, self.weights))

    def scaled(self, loc_factor: float, weight_factor: float) -> "AtomicMeasure":
        return AtomicMeasure(self.locations * loc_factor, self.weights * weight_factor)


def integrate(m, f) -> float:
    """Integrate a vectorized function against an AtomicMeasure."""
    return m.integrate(f)


@dataclass(frozen=True)
class CompactifiedMeasure:
    """Finite measure on [0, inf]: point masses at 0 and inf plus an
    interior atomic part on (0, inf)."""

    mass_at_zero: float = 0.0
    mass_at_inf: float = 0.0
    interior: AtomicMeasure = field(default_factory=AtomicMeasure)

    def __post_init__(self):
        if self.mass_at_zero < 0 or self.mass_at_inf < 0:
            raise ValueError("boundary masses must be >= 0")

    @property
    def total_mass(self) -> float:
        return self.mass_at_zero + self.mass_at_inf + self.interior.total_mass

    def pair_test_function(self, q) -> np.ndarray:
        """<g_q, measure> for the dictionary g_q(x) = (1 - e^{-qx})/(x ^ 1),
        extended by g_q(0) = q and g_q(inf) = 1.  q may be an array."""
        q = np.atleast_1d(np.asarray(q, dtype=float))
        out = self.mass_at_zero * q + self.mass_at_inf * np.ones_like(q)
        x = self.interior.locations
        if x.size:
            denom = np.minimum(x, 1.0)
            g = (1.0 - np.exp(-np.outer(q, x))) / denom
            out = out + g @ self.interior.weights
        return out


def kappa_distance(a: CompactifiedMeasure, b: CompactifiedMeasure,
                   q_grid=None) -> float:
    """Weak-star discrepancy on [0, inf]:

        |total mass gap|  +  sup over the grid of |<g_q, a> - <g_q, b>|

    A vanishing distance along a refining grid is the working criterion for
    weak-star convergence of compactified measures.
    """
    grid = DEFAULT_Q_GRID if q_grid is None else np.asarray(q_grid, dtype=float)
    gap = np.abs(a.pair_test_function(grid) - b.pair_test_function(grid))
    return abs(a.total_mass - b.total_mass) + float(gap.max())
