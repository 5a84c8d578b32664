"""Discrete-generation branching: family laws, the descendant-distribution
recursion, its coagulation reformulation, generating-function iteration, and
Monte Carlo simulators for both pictures.

The central identity: with nu_n the generation-n descendant distribution of a
single ancestor, nu_{n+1}(j) = sum_k pi(k) * nu_n^{*k}(j), and the same
sequence solves a discrete Smoluchowski equation with multiple mergers whose
rates come from the branching mechanism of the family law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .measures import DiscreteDistribution, convolve_power, convolve

CRITICAL_TOL = 1e-12

# Laws with support beyond this refuse to materialize dense arrays.
_DENSE_LIMIT = 10**7

# Population guard: a path freezes once another generation could overflow
# int64 (2^63 - 1).
_INT64_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class FamilyLaw:
    """Offspring / group-size law pi on nonnegative integers.

    Stored sparsely: support holds the indices with positive probability in
    ascending order.  mean_family_size is sum j pi(j); the law is critical
    when that mean is 1 within CRITICAL_TOL.
    """

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=np.int64)
        p = np.asarray(self.probs, dtype=float)
        if sup.ndim != 1 or sup.shape != p.shape or sup.size == 0:
            raise ValueError("support and probs must be matching 1-d arrays")
        if np.any(np.diff(sup) <= 0) or np.any(sup < 0):
            raise ValueError("support must be strictly increasing, >= 0")
        if np.any(p <= 0):
            raise ValueError("probs must be > 0 on the support")
        if abs(p.sum() - 1.0) > CRITICAL_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        sup = sup.copy()
        p = p.copy()
        sup.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "_cdf", np.cumsum(p))
        object.__setattr__(self, "_mech_coeffs", None)

    @property
    def mean_family_size(self) -> float:
        return float(np.dot(self.support.astype(float), self.probs))

    @property
    def critical(self) -> bool:
        return abs(self.mean_family_size - 1.0) <= CRITICAL_TOL

    @property
    def max_support(self) -> int:
        return int(self.support[-1])

    @property
    def dist(self) -> DiscreteDistribution:
        """Dense view as a DiscreteDistribution (small supports only)."""
        if self.max_support > _DENSE_LIMIT:
            raise ValueError("support too large for a dense distribution")
        m = np.zeros(self.max_support + 1)
        m[self.support] = self.probs
        return DiscreteDistribution(m)

    def prob(self, j: int) -> float:
        i = np.searchsorted(self.support, j)
        if i < self.support.size and self.support[i] == j:
            return float(self.probs[i])
        return 0.0

    def generating_value(self, z):
        """G(z) = sum_j pi(j) z^j, vectorized in z."""
        z_arr = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.power.outer(z_arr, self.support.astype(float)) @ self.probs
        return float(out[0]) if np.ndim(z) == 0 else out

    def draw(self, gen: np.random.Generator, n: int) -> np.ndarray:
        """n samples by inverse-CDF lookup; branch-free and reproducible."""
        u = gen.random(n)
        idx = np.searchsorted(self._cdf, u, side="right")
        return self.support[np.minimum(idx, self.support.size - 1)]


def make_family_law(weights) -> FamilyLaw:
    """Family law from dense weights (weights[j] = pi(j))."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty 1-d sequence")
    if np.any(w < 0):
        raise ValueError("weights must be >= 0")
    if abs(w.sum() - 1.0) > CRITICAL_TOL:
        raise ValueError(f"weights sum to {w.sum()!r}, not 1")
    sup = np.nonzero(w)[0]
    if sup.size == 0:
        raise ValueError("at least one weight must be positive")
    return FamilyLaw(sup.astype(np.int64), w[sup])


_BUILTIN = {
    "unit": [0.0, 1.0],
    "binary": [0.5, 0.0, 0.5],
    "ternary": [2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0],
    "subcritical-demo": [0.75, 0.0, 0.25],
}


def builtin_law(name: str) -> FamilyLaw:
    """Named laws: unit, binary, ternary, subcritical-demo."""
    try:
        return make_family_law(_BUILTIN[name])
    except KeyError:
        raise ValueError(f"unknown law {name!r}; choose from {sorted(_BUILTIN)}")


def builtin_law_names():
    return sorted(_BUILTIN)


# ---------------------------------------------------------------------------
# Exact recursions


def descendant_sequence(law: FamilyLaw, n: int, max_index: int = 4096):
    """nu_0 .. nu_n as a list; nu_0 = delta_1, nu_{m+1} = sum_k pi(k) nu_m^{*k}.

    Convolution powers are truncated at max_index with the excess accounted
    in the tail lump, so total mass stays exactly 1.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if law.max_support > 64:
        raise ValueError("descendant recursion needs a small family law support")
    nu = DiscreteDistribution.delta(1)
    out = [nu]
    kmax = law.max_support
    for _ in range(n):
        mix = np.zeros(max_index + 1)
        tail = 0.0
        power = DiscreteDistribution.delta(0)
        for k in range(kmax + 1):
            p = law.prob(k)
            if p:
                mix[: power.masses.size] += p * power.masses
                tail += p * power.tail_mass
            if k < kmax:
                power = convolve(power, nu, max_index)
        nu = DiscreteDistribution(mix, tail).trimmed()
        out.append(nu)
    return out


def descendant_distribution(law: FamilyLaw, n: int,
                            max_index: int = 4096) -> DiscreteDistribution:
    """Distribution of the generation-n descendant count of one ancestor."""
    return descendant_sequence(law, n, max_index)[-1]


def generating_iterate(law: FamilyLaw, n: int, z):
    """n-fold functional iterate G_n(z); G_0(z) = z."""
    if n < 0:
        raise ValueError("n must be >= 0")
    val = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any((val < 0) | (val > 1)):
        raise ValueError("z must lie in [0, 1]")
    for _ in range(n):
        val = np.atleast_1d(law.generating_value(val))
    return float(val[0]) if np.ndim(z) == 0 else val


def discrete_bernstein(nu: DiscreteDistribution, q):
    """phi(q) = sum_{j >= 1} nu(j) (1 - e^{-qj}).

    Tail mass contributes with the factor 1 (its atoms sit beyond the
    window, where 1 - e^{-qj} is essentially 1 for the q of interest);
    exact identities should be evaluated on truncation-free distributions.
    """
    q_arr = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q_arr < 0):
        raise ValueError("q must be >= 0")
    j = np.arange(1, nu.masses.size, dtype=float)
    out = (1.0 - np.exp(-np.outer(q_arr, j))) @ nu.masses[1:] + nu.tail_mass
    return float(out[0]) if np.ndim(q) == 0 else out


def _mechanism_coeffs(law: FamilyLaw) -> np.ndarray:
    """a_m = sum_j pi(j) C(j, m) for m = 0..max_support (cached)."""
    cached = law.__dict__.get("_mech_coeffs")
    if cached is None:
        m_max = law.max_support
        cached = np.zeros(m_max + 1)
        for j, p in zip(law.support.tolist(), law.probs.tolist()):
            for m in range(j + 1):
                cached[m] += p * math.comb(j, m)
        object.__setattr__(law, "_mech_coeffs", cached)
    return cached


def discrete_mechanism(law: FamilyLaw, s):
    """Mechanism of the family law: Psi(s) = G(1-s) - 1 + s, s in [0, 1].

    Evaluated through the expansion sum_{m>=2} (-1)^m a_m s^m + (1 - Xi) s
    (a_m = sum_j pi(j) C(j, m)) when s is small enough that the alternating
    series is decreasing; this avoids the catastrophic cancellation of the
    direct form near s = 0 and keeps rescaled mechanisms exact.  Larger s
    and very large supports fall back to the direct form.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any((s_arr < 0) | (s_arr > 1)):
        raise ValueError("s must lie in [0, 1]")
    out = np.empty_like(s_arr)
    drift = 1.0 - law.mean_family_size
    if law.max_support <= 64:
        a = _mechanism_coeffs(law)
        cutoff = 0.5 / law.max_support
        small = s_arr <= cutoff
        if np.any(small):
            ss = s_arr[small]
            if a.size <= 2:  # support {0, 1}: no merger terms at all
                inner = np.zeros_like(ss)
            else:
                inner = np.full_like(ss, a[-1])
                for m in range(a.size - 2, 1, -1):
                    inner = a[m] - ss * inner
            out[small] = ss * ss * inner + drift * ss
        big = ~small
        if np.any(big):
            sb = s_arr[big]
            out[big] = law.generating_value(1.0 - sb) - 1.0 + sb
    else:
        out = law.generating_value(1.0 - s_arr) - 1.0 + s_arr
    return float(out[0]) if np.ndim(s) == 0 else out


def discrete_rates(law: FamilyLaw, rho: float, k_max: int | None = None) -> np.ndarray:
    """Merger rates R_k(rho) for k = 0..k_max at survival mass rho in (0, 1].

    Binomial form: R_k = sum_{l >= k} pi(l) C(l, k) rho^k (1-rho)^{l-k}.
    For k >= 2 this must match the derivative form
    (-rho)^k Psi^{(k)}(rho) / k! = rho^k G^{(k)}(1-rho) / k!; both are
    computed and a disagreement beyond 1e-10 raises RuntimeError.
    """
    if not (0 < rho <= 1):
        raise ValueError("rho must lie in (0, 1]")
    if law.max_support > 64:
        raise ValueError("rates need a small family law support")
    km = law.max_support if k_max is None else int(k_max)
    rates = np.zeros(km + 1)
    for k in range(km + 1):
        acc = 0.0
        for l, p in zip(law.support.tolist(), law.probs.tolist()):
            if l >= k:
                acc += p * math.comb(l, k) * rho**k * (1.0 - rho) ** (l - k)
        rates[k] = acc
    # derivative-form cross-check for the merger range
    for k in range(2, km + 1):
        acc = 0.0
        for l, p in zip(law.support.tolist(), law.probs.tolist()):
            if l >= k:
                acc += p * (math.factorial(l) / math.factorial(l - k)) \
                    * (1.0 - rho) ** (l - k)
        deriv_form = rho**k / math.factorial(k) * acc
        if abs(deriv_form - rates[k]) > 1e-10:
            raise RuntimeError(
                f"rate formulas disagree at k={k}: {rates[k]!r} vs {deriv_form!r}")
    return rates


def smoluchowski_residual(law: FamilyLaw, n: int, max_index: int = 4096) -> float:
    """Max defect of the discrete Smoluchowski step at generation n.

    Checks, for every positive j in the safe window,
        nu_{n+1}(j) - nu_n(j) = (Xi - 1) nu_n(j) + sum_{k>=2} R_k(rho_n) I_k(j)
    where I_k(j) = cond^{*k}(j) - k cond(j) and cond is nu_n conditioned on
    positive size.  Raises ValueError if truncation touched the window.
    """
    seq = descendant_sequence(law, n + 1, max_index)
    nu, nu_next = seq[n], seq[n + 1]
    if nu.tail_mass > 0 or nu_next.tail_mass > 0:
        raise ValueError("unsafe truncation: raise max_index")
    rho, cond = nu.restricted_positive()
    if rho == 0.0:
        return 0.0
    cond_dist = DiscreteDistribution(cond)
    xi = law.mean_family_size
    top = nu_next.masses.size
    defect = nu_next.masses.copy()
    pad = np.zeros(top)
    pad[: nu.masses.size] = nu.masses
    defect -= pad + (xi - 1.0) * pad
    rates = discrete_rates(law, rho)
    for k in range(2, law.max_support + 1):
        if rates[k] == 0.0:
            continue
        pw = convolve_power(cond_dist, k, top - 1)
        ik = np.zeros(top)
        ik[: pw.masses.size] = pw.masses
        ik[: cond.size] -= k * cond
        defect -= rates[k] * ik
    return float(np.abs(defect[1:]).max())


def bernstein_step_residual(law: FamilyLaw, n: int, q_grid,
                            max_index: int = 4096) -> float:
    """Max over the grid of |phi_{n+1}(q) - phi_n(q) + Psi(phi_n(q))|.

    phi_m is the discrete Bernstein transform of nu_m computed from the
    measure recursion, so the identity is a genuine two-route consistency
    check against the generating-function mechanism.
    """
    grid = np.asarray(q_grid, dtype=float)
    seq = descendant_sequence(law, n + 1, max_index)
    nu, nu_next = seq[n], seq[n + 1]
    if nu.tail_mass > 0 or nu_next.tail_mass > 0:
        raise ValueError("unsafe truncation: raise max_index")
    phi = discrete_bernstein(nu, grid)
    phi_next = discrete_bernstein(nu_next, grid)
    res = phi_next - phi + discrete_mechanism(law, phi)
    return float(np.abs(res).max())


# ---------------------------------------------------------------------------
# Monte Carlo


def empirical_distribution(values, max_index: int | None = None) -> DiscreteDistribution:
    """Empirical distribution of an integer sample; values beyond max_index
    are folded into the tail lump."""
    v = np.asarray(values)
    counts = np.bincount(v)
    n = v.size
    masses = counts / n
    tail = 0.0
    if max_index is not None and masses.size > max_index + 1:
        tail = float(masses[max_index + 1:].sum())
        masses = masses[: max_index + 1]
    return DiscreteDistribution(masses, tail)


@dataclass(frozen=True)
class CoagulationEnsemble:
    """Cluster sizes after n_steps of the grouping dynamics."""

    sizes: np.ndarray
    n_steps: int
    initial_count: int
    seed: int
    law: FamilyLaw

    def size_distribution(self, max_index: int | None = None) -> DiscreteDistribution:
        return empirical_distribution(self.sizes, max_index)


def simulate_coagulation(law: FamilyLaw, n_steps: int, n_clusters: int = 10**6,
                         seed: int = 0) -> CoagulationEnsemble:
    """Iterate the grouping rule: consecutive clusters are merged in groups
    whose sizes are drawn i.i.d. from the family law; each group becomes one
    new cluster (empty groups yield size-0 clusters).

    The trailing incomplete group at the array boundary is dropped, which
    leaves every retained cluster exactly distributed.  Draws for step m come
    from the (seed, coagulation, m) stream.
    """
    if n_steps < 0 or n_clusters < 1:
        raise ValueError("need n_steps >= 0 and n_clusters >= 1")
    sizes = np.ones(n_clusters, dtype=np.int64)
    for step in range(n_steps):
        gen = rng.stream(seed, rng.PURPOSE_COAGULATION, step)
        n = sizes.size
        mean = max(law.mean_family_size, 0.05)
        group_sizes = law.draw(gen, int(n / mean) + int(4 * math.sqrt(n / mean)) + 16)
        c = np.cumsum(group_sizes)
        while c.size == 0 or c[-1] < n:
            more = law.draw(gen, max(1024, n // 4))
            group_sizes = np.concatenate([group_sizes, more])
            c = np.cumsum(group_sizes)
        n_groups = int(np.searchsorted(c, n, side="right"))
        if n_groups == 0:
            raise RuntimeError("ensemble exhausted; increase n_clusters")
        prefix = np.concatenate([[0], np.cumsum(sizes)])
        ends = c[:n_groups]
        starts = np.concatenate([[0], ends[:-1]])
        sizes = (prefix[ends] - prefix[starts]).astype(np.int64)
    return CoagulationEnsemble(sizes, n_steps, n_clusters, seed, law)


@dataclass(frozen=True)
class GWPath:
    """One simulated population path."""

    populations: np.ndarray
    seed: int
    path_index: int


class GWPaths:
    """Bundle of simulated paths; behaves as a sequence of GWPath.

    populations has shape (n_paths, n_gens + 1).  Paths whose next
    generation could overflow int64 are frozen at their last value and
    flagged in overflowed.
    """

    def __init__(self, populations, seed, law, overflowed, clock=None):
        self.populations = populations
        self.seed = seed
        self.law = law
        self.overflowed = overflowed
        self.clock = clock

    def __len__(self):
        return self.populations.shape[0]

    def __getitem__(self, i) -> GWPath:
        return GWPath(self.populations[i], self.seed, int(i))

    def generation_distribution(self, gen: int,
                                max_index: int | None = None) -> DiscreteDistribution:
        return empirical_distribution(self.populations[:, gen], max_index)


def _evolve_generation(pops, law, gen_rng, overflowed):
    """One synchronous generation for all paths; returns new populations."""
    guard = _INT64_MAX // max(law.max_support, 1)
    hot = pops > guard
    if np.any(hot & ~overflowed):
        overflowed |= hot
    counts = np.where(overflowed, 0, pops)
    total = int(counts.sum())
    draws = law.draw(gen_rng, total) if total else np.zeros(0, dtype=np.int64)
    prefix = np.concatenate([[0], np.cumsum(draws)])
    ends = np.cumsum(counts)
    starts = ends - counts
    new = (prefix[ends] - prefix[starts]).astype(np.int64)
    return np.where(overflowed, pops, new)


def simulate_gw(law: FamilyLaw, n_gens: int, n_paths: int = 10**6,
                seed: int = 0, x0: int = 1) -> GWPaths:
    """Simulate n_paths independent population paths for n_gens generations.

    Generation g consumes draws from the (seed, gw, g) stream in path order,
    so results are reproducible bit-exactly from the arguments.
    """
    if n_gens < 0 or n_paths < 1 or x0 < 0:
        raise ValueError("bad simulation size")
    pops = np.full(n_paths, x0, dtype=np.int64)
    table = np.empty((n_paths, n_gens + 1), dtype=np.int64)
    table[:, 0] = pops
    overflowed = np.zeros(n_paths, dtype=bool)
    for g in range(n_gens):
        gen_rng = rng.stream(seed, rng.PURPOSE_GW, g)
        pops = _evolve_generation(pops, law, gen_rng, overflowed)
        table[:, g + 1] = pops
    return GWPaths(table, seed, law, overflowed)


def lamperti_gw(law: FamilyLaw, x0: int, n_gens: int, n_paths: int = 10**6,
                seed: int = 0) -> GWPaths:
    """Populations read off a random walk through the discrete time change.

    Per path, a walk with i.i.d. increments (xi - 1) is consumed
    sequentially: with Theta_0 = 0 and X_0 = x0, each generation advances
    the clock by Theta_{n+1} = Theta_n + X_n and sets
    X_{n+1} = x0 + walk(Theta_{n+1}).  Because consumption never overlaps,
    the walk increments spent in generation n are exactly X_n fresh draws,
    which is how they are generated here; the clock is recorded on the
    returned bundle.
    """
    if x0 < 1:
        raise ValueError("x0 must be >= 1")
    if n_gens < 0 or n_paths < 1:
        raise ValueError("bad simulation size")
    pops = np.full(n_paths, x0, dtype=np.int64)
    table = np.empty((n_paths, n_gens + 1), dtype=np.int64)
    table[:, 0] = pops
    clock = np.zeros((n_paths, n_gens + 1), dtype=np.int64)
    overflowed = np.zeros(n_paths, dtype=bool)
    for g in range(n_gens):
        gen_rng = rng.stream(seed, rng.PURPOSE_LAMPERTI, g)
        clock[:, g + 1] = clock[:, g] + np.where(overflowed, 0, pops)
        pops = _evolve_generation(pops, law, gen_rng, overflowed)
        table[:, g + 1] = pops
    return GWPaths(table, seed, law, overflowed, clock=clock)
