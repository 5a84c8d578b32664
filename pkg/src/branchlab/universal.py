"""A single family law whose rescalings approach every admissible limit.

The construction packs truncated copies of a countable dense set of target
triples into one jump measure, separated by a fast-growing weight schedule
so that at stage k the k-th member dominates: members j < k are pushed into
a vanishing head, members j > k carry vanishing total weight.  Binning that
measure onto the integers yields one critical family law; running it
through different dyadic rescalings recovers each target in turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gw import FamilyLaw
from .levy import LevyTriple, bernstein_value, kappa_of, scale_triple
from .measures import AtomicMeasure, DEFAULT_Q_GRID, kappa_distance
from .scaling import integrate_exponent_ode

# Per-piece mass budget k/9 keeps truncated members below k/3 in total.
_PIECE_BUDGET = 1.0 / 9.0
# Terms of sum_j j/c_j computed exactly before the geometric remainder bound.
_SCHEDULE_HEAD_TERMS = 6
_SCHEDULE_REMAINDER_TOL = 1e-6


def _schedule_sum(c: float, k_from: int):
    """sum_{j >= k_from} j / (c e^{j^2}), with a certified remainder bound.

    The first _SCHEDULE_HEAD_TERMS terms are summed directly; beyond j0 the
    ratio of consecutive terms is below e^{-(2 j0 + 1)} * (j0+1)/j0, so the
    remainder is dominated by a geometric series.
    """
    j0 = k_from + _SCHEDULE_HEAD_TERMS - 1
    head = sum(j / (c * math.exp(j * j)) for j in range(k_from, j0 + 1))
    first = (j0 + 1) / (c * math.exp((j0 + 1.0) ** 2))
    ratio = math.exp(-(2.0 * j0 + 3.0)) * (j0 + 2.0) / (j0 + 1.0)
    bound = first / (1.0 - ratio)
    return head, bound


@dataclass(frozen=True)
class UniversalSchedule:
    """Stage weights c_k = c * e^{k^2} with the summability certificate
    sum_k k/c_k < 1 that keeps the packed measure's total mass below one."""

    c: float
    k_max: int
    c_values: np.ndarray
    mass_sum: float
    mass_sum_bound: float

    def tail_weight(self, k: int) -> float:
        """Upper bound on c_k * sum_{j > k} j / c_j: total relative weight
        of all members beyond stage k (member j carries mass at most j)."""
        head, bound = _schedule_sum(self.c, k + 1)
        return self.c_values[k - 1] * (head + bound)


def make_schedule(c: float = 1.0, k_max: int = 4) -> UniversalSchedule:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if c <= 0:
        raise ValueError("c must be > 0")
    head, bound = _schedule_sum(c, 1)
    if bound > _SCHEDULE_REMAINDER_TOL:
        raise RuntimeError("remainder bound unexpectedly loose")
    if head + bound >= 1.0:
        raise ValueError(
            f"schedule mass sum {head + bound:.6f} >= 1; increase c")
    ks = np.arange(1, k_max + 1, dtype=float)
    sched = UniversalSchedule(c, k_max, c * np.exp(ks * ks), head, bound)
    tails = np.array([sched.tail_weight(k) for k in range(1, k_max + 1)])
    if not np.all(np.diff(tails) < 0):
        raise RuntimeError("schedule tail weights are not decreasing")
    return sched


def _truncate_member(target: LevyTriple, k: int) -> LevyTriple:
    """Stage-k pure-jump member approximating one target triple.

    A pure-jump target of total mass <= k needs no work and is kept whole.
    Otherwise a single cutoff eps_k is chosen so that each of three pieces
    stays below the stage budget k/9 (total below k/3):
      * diffusion: one atom (eps_k, alpha0/eps_k), whose Bernstein function
        rises like alpha0 * q over q << 1/eps_k;
      * jumps: the atoms of mu at locations >= eps_k;
      * escape: one atom at 1/eps_k carrying the alpha_inf mass (capped at
        the budget; exact once k >= 9 alpha_inf).
    """
    mu = target.mu
    if target.alpha0 == 0 and target.alpha_inf == 0 and mu.total_mass <= k:
        return LevyTriple(0.0, 0.0, mu)
    budget = k * _PIECE_BUDGET
    eps = 1.0 / (9.0 * k)
    if target.alpha0 > 0:
        eps = max(eps, target.alpha0 / budget)
    if mu.locations.size:
        # smallest cutoff with mu([cutoff, inf)) <= budget
        tail_mass = np.cumsum(mu.weights[::-1])[::-1]
        ok = tail_mass <= budget
        eps = max(eps, float(mu.locations[ok][0]) if ok.any() else math.inf)
    if not math.isfinite(eps):
        # even one atom busts the stage budget: contribute nothing yet
        return LevyTriple(0.0, 0.0, AtomicMeasure())
    locs, ws = [], []
    if target.alpha0 > 0:
        locs.append(eps)
        ws.append(target.alpha0 / eps)
    if mu.locations.size:
        keep = mu.locations >= eps
        locs.extend(mu.locations[keep])
        ws.extend(mu.weights[keep])
    if target.alpha_inf > 0:
        locs.append(1.0 / eps)
        ws.append(min(target.alpha_inf, budget))
    if not locs:
        return LevyTriple(0.0, 0.0, AtomicMeasure())
    return LevyTriple(0.0, 0.0, AtomicMeasure(np.array(locs), np.array(ws)))


@dataclass(frozen=True)
class DenseTargetFamily:
    """Round-robin enumeration of targets as truncated stage members."""

    targets: tuple
    schedule: UniversalSchedule
    members: tuple
    assignment: np.ndarray

    def subsequence(self, target_index: int) -> np.ndarray:
        """Stages (1-based) whose member approximates the given target."""
        return np.nonzero(self.assignment == target_index)[0] + 1


def dense_targets(targets, schedule: UniversalSchedule) -> DenseTargetFamily:
    targets = tuple(targets)
    if not targets:
        raise ValueError("need at least one target")
    assignment = np.arange(schedule.k_max) % len(targets)
    members = tuple(_truncate_member(targets[assignment[k - 1]], k)
                    for k in range(1, schedule.k_max + 1))
    return DenseTargetFamily(targets, schedule, members, assignment)


@dataclass(frozen=True)
class PackResult:
    """The packed jump measure and the bookkeeping of its construction.

    star is the packed triple sum_j scale(member_j, b_j, 1/c_j); head and
    tail bounds certify, stage by stage, that c_k * Phi_star(q / b_k)
    deviates from the k-th member's Bernstein function by at most
    head_bounds[k-1] + tail_bounds[k-1] over the packing grid.
    """

    family: DenseTargetFamily
    star: LevyTriple
    b_values: np.ndarray
    head_bounds: np.ndarray
    tail_bounds: np.ndarray
    q_grid: np.ndarray


def pack(family: DenseTargetFamily, q_grid=None) -> PackResult:
    """Choose spatial spreads b_1 < b_2 < ... making the members coexist.

    b_k starts at c_k * b_{k-1} and doubles until the earlier members'
    rescaled Bernstein mass at the top of the grid drops below 1/k; the
    later members are controlled by the schedule alone.
    """
    grid = DEFAULT_Q_GRID if q_grid is None else np.asarray(q_grid, dtype=float)
    q_top = float(grid.max())
    sched = family.schedule
    members = family.members
    for k, m in enumerate(members, start=1):
        if m.alpha0 != 0 or m.alpha_inf != 0:
            raise ValueError("members must be pure jump triples")
        if m.mu.total_mass > k:
            raise ValueError(f"member {k} has mass {m.mu.total_mass} > {k}")
    b = np.empty(len(members))
    heads = np.empty(len(members))
    for k in range(1, len(members) + 1):
        bk = sched.c_values[k - 1] * (b[k - 2] if k >= 2 else 1.0)
        while True:
            head = sum(
                (sched.c_values[k - 1] / sched.c_values[j - 1])
                * bernstein_value(members[j - 1], b[j - 1] * q_top / bk)
                for j in range(1, k))
            if head < 1.0 / k:
                break
            bk *= 2.0
            if not math.isfinite(bk):
                raise RuntimeError("b_k doubling search overflowed")
        b[k - 1] = bk
        heads[k - 1] = head
    tails = np.array([sched.tail_weight(k) for k in range(1, len(members) + 1)])
    locs, ws = [], []
    for j, m in enumerate(members):
        locs.append(m.mu.locations * b[j])
        ws.append(m.mu.weights / sched.c_values[j])
    star_mu = AtomicMeasure(np.concatenate(locs), np.concatenate(ws))
    return PackResult(family, LevyTriple(0.0, 0.0, star_mu), b, heads, tails,
                      np.asarray(grid, dtype=float))


def universal_family_law(mu_star: AtomicMeasure) -> FamilyLaw:
    """Bin a finite measure with mass < 1/2 into one critical family law.

    The atom at x lands in bin j = ceil(x) + 1 >= 2 with pi(j) =
    bin mass / (j - 1); pi(1) restores criticality, pi(0) restores total
    mass one.  Mass below 1/2 guarantees both stay positive.  The empty
    measure degenerates to the unit law delta_1.
    """
    if mu_star.locations.size == 0:
        return FamilyLaw(np.array([1]), np.array([1.0]))
    total = mu_star.total_mass
    if total >= 0.5:
        raise ValueError(f"total mass {total:.6f} >= 1/2; cannot bin critically")
    if float(mu_star.locations.max()) >= 2.0**62:
        raise ValueError("atom locations overflow the integer size range")
    bins = np.ceil(mu_star.locations).astype(np.int64) + 1
    uniq, inv = np.unique(bins, return_inverse=True)
    bin_mass = np.bincount(inv, weights=mu_star.weights)
    probs_hi = bin_mass / (uniq - 1.0)
    s1 = float(np.dot(uniq.astype(float), probs_hi))
    s0 = float(probs_hi.sum())
    p1 = 1.0 - s1
    p0 = s1 - s0
    support = np.concatenate(([0, 1], uniq))
    probs = np.concatenate(([p0, p1], probs_hi))
    return FamilyLaw(support, probs)


def law_jump_measure(law: FamilyLaw) -> AtomicMeasure:
    """The unrescaled jump measure of a law: (j - 1) pi(j) at j for j >= 2."""
    mask = law.support >= 2
    j = law.support[mask].astype(float)
    return AtomicMeasure(j, (j - 1.0) * law.probs[mask])


def tail_sandwich(law: FamilyLaw, mu_star: AtomicMeasure, z):
    """(lower, binned, upper) tail masses at each z > 2.

    Binning moves each atom of mu_star to the right by less than two, so
    the binned jump measure's tail mass sits between mu_star((z, inf)) and
    mu_star((z - 2, inf)).
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z_arr <= 2):
        raise ValueError("sandwich needs z > 2")
    mu_hat = law_jump_measure(law)

    def right(m, zz):
        return float(m.weights[m.locations > zz].sum())

    lower = np.array([right(mu_star, zz) for zz in z_arr])
    mid = np.array([right(mu_hat, zz) for zz in z_arr])
    upper = np.array([right(mu_star, zz - 2.0) for zz in z_arr])
    return lower, mid, upper


@dataclass(frozen=True)
class UniversalityReport:
    """Per-stage distances of the rescaled packed triple to one target."""

    target: LevyTriple
    stages: np.ndarray
    kappa_gaps: np.ndarray
    bernstein_gaps: np.ndarray

    @property
    def kappa_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.kappa_gaps) <= 1e-15))

    @property
    def bernstein_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.bernstein_gaps) <= 1e-15))


def universality_demo(result: PackResult, target_index: int,
                      q_grid=None) -> UniversalityReport:
    """Rescale the packed triple along one target's subsequence and measure
    kappa and Bernstein distances to that target."""
    grid = DEFAULT_Q_GRID if q_grid is None else np.asarray(q_grid, dtype=float)
    family = result.family
    target = family.targets[target_index]
    stages = family.subsequence(target_index)
    k_target = kappa_of(target)
    kappa_gaps = np.empty(stages.size)
    bern_gaps = np.empty(stages.size)
    for i, k in enumerate(stages):
        scaled = scale_triple(result.star, result.b_values[k - 1],
                              result.family.schedule.c_values[k - 1])
        kappa_gaps[i] = kappa_distance(kappa_of(scaled), k_target, grid)
        gap = np.abs(bernstein_value(scaled, grid) - bernstein_value(target, grid))
        bern_gaps[i] = float(gap.max())
    return UniversalityReport(target, stages, kappa_gaps, bern_gaps)


@dataclass(frozen=True)
class CsbpDemoReport:
    """Sup gaps between the rescaled packed exponent and a target's."""

    target: LevyTriple
    stages: np.ndarray
    exponent_gaps: np.ndarray

    @property
    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.exponent_gaps) <= 1e-15))


def universal_csbp_demo(result: PackResult, target_index: int,
                        q_grid=None, t_grid=None) -> CsbpDemoReport:
    """Compare b_k * phi_star(q / b_k, c_k t) with the target exponent.

    Both exponents solve their mechanism ODEs directly; the left side is
    exactly the exponent of the rescaled triple, so the gaps shrink along
    the subsequence at rates set by the mechanism gaps.
    """
    grid = np.geomspace(2.0**-4, 2.0**4, 9) if q_grid is None \
        else np.asarray(q_grid, dtype=float)
    times = np.array([0.0, 0.5, 1.0, 2.0]) if t_grid is None \
        else np.asarray(t_grid, dtype=float)
    family = result.family
    target = family.targets[target_index]
    stages = family.subsequence(target_index)
    ref = np.stack([integrate_exponent_ode(target, q, times) for q in grid])
    gaps = np.empty(stages.size)
    for i, k in enumerate(stages):
        b_k = result.b_values[k - 1]
        c_k = family.schedule.c_values[k - 1]
        got = np.stack([
            b_k * integrate_exponent_ode(result.star, q / b_k, c_k * times)
            for q in grid])
        gaps[i] = float(np.abs(got - ref).max())
    return CsbpDemoReport(target, stages, gaps)
