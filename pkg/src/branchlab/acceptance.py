"""The validation suite: thirteen numbered criteria, each returning a list
of named checks with measured values and tolerances.

These back both `branchlab verify <criterion>` and the acceptance tests.
Every expected value here is either an algebraic identity of the discrete
recursion or a closed form derived independently of the implementation
(Feller exponent q/(1+qt/2), stable exponent (q^{-1/2}+t/2)^{-2}, the
analytic Grey integrals, and the two-atom Grimvall hand computation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gw, levy, measures, scaling, universal


@dataclass(frozen=True)
class Check:
    """One named measurement against a tolerance.

    For upper bounds, passed means value <= tolerance.  A few checks are
    exactness or positivity statements; their `passed` captures the real
    condition and `tolerance` is reported as 0.
    """

    name: str
    value: float
    tolerance: float
    passed: bool


def _le(name, value, tol) -> Check:
    return Check(name, float(value), float(tol), bool(value <= tol))


def _exact(name, value) -> Check:
    return Check(name, float(value), 0.0, bool(value == 0.0))


def _positive(name, value) -> Check:
    return Check(name, float(value), 0.0, bool(value > 0.0))


# ---------------------------------------------------------------------------


def conservation():
    """Binary exact recursion keeps total mass and mean at one, n <= 12."""
    law = gw.builtin_law("binary")
    seq = gw.descendant_sequence(law, 12, max_index=4096)
    tail = max(nu.tail_mass for nu in seq)
    mass_err = max(abs(float(nu.masses.sum()) + nu.tail_mass - 1.0) for nu in seq)
    mean_err = max(abs(nu.mean() - 1.0) for nu in seq)
    return [
        _exact("truncation-tail", tail),
        _le("mass-conservation", mass_err, 1e-10),
        _le("mean-conservation", mean_err, 1e-8),
    ]


def duality(seed: int = 0):
    """Coagulation ensemble, GW population, and exact recursion agree."""
    law = gw.builtin_law("binary")
    rec = gw.descendant_distribution(law, 6, max_index=512)
    coag = gw.simulate_coagulation(law, 6, 10**6, seed).size_distribution(512)
    paths = gw.simulate_gw(law, 6, 10**6, seed)
    emp = paths.generation_distribution(6, max_index=512)
    return [
        _le("tv-coagulation-recursion", measures.total_variation(coag, rec), 0.01),
        _le("tv-gw-recursion", measures.total_variation(emp, rec), 0.01),
        _le("tv-coagulation-gw", measures.total_variation(coag, emp), 0.01),
    ]


def smol_identity():
    """Discrete Smoluchowski residual, critical and subcritical laws."""
    binary = gw.builtin_law("binary")
    sub = gw.make_family_law([0.75, 0.0, 0.25])
    r_bin = max(gw.smoluchowski_residual(binary, n, max_index=1024)
                for n in range(7))
    r_sub = max(gw.smoluchowski_residual(sub, n, max_index=1024)
                for n in range(7))
    return [
        _le("residual-binary", r_bin, 1e-10),
        _le("residual-subcritical", r_sub, 1e-10),
    ]


def bernstein_step():
    """One-step Bernstein identity on the 41-point grid, n <= 8."""
    grid = measures.DEFAULT_Q_GRID
    out = []
    for name, cap in [("binary", 1024), ("ternary", 20000),
                      ("subcritical-demo", 1024)]:
        law = gw.builtin_law(name)
        worst = max(gw.bernstein_step_residual(law, n, grid, max_index=cap)
                    for n in range(9))
        out.append(_le(f"step-{name}", worst, 1e-12))
    return out


def euler_order():
    """Euler error vs the Feller closed form halves per dyadic refinement."""
    law = gw.builtin_law("binary")
    qs = ts = (0.5, 1.0, 2.0)
    worst = 0.0
    for q in qs:
        for t in ts:
            errs = []
            for k in range(6, 13):
                r = scaling.Rescaling.dyadic(k)
                errs.append(abs(scaling.euler_exponent(law, r, q, t)
                                - q / (1.0 + 0.5 * q * t)))
            for i in range(2, 6):  # ratios err_k/err_{k+1} for k = 8..11
                worst = max(worst, abs(errs[i] / errs[i + 1] - 2.0))
    return [_le("order-ratio-offset", worst, 0.3)]


def ode_closed_forms():
    """Exponent ODE against the two closed forms plus the semigroup law."""
    fel = levy.feller_triple()
    ts = np.array([0.5, 1.0, 2.0])
    tab = scaling.solve_exponent(fel, measures.DEFAULT_Q_GRID, ts)
    ref = measures.DEFAULT_Q_GRID[:, None] / (
        1.0 + 0.5 * np.outer(measures.DEFAULT_Q_GRID, ts))
    feller_err = float(np.abs(tab.values - ref).max())

    st = levy.stable_three_halves()
    qs = np.geomspace(2.0**-4, 2.0**4, 17)
    tab_s = scaling.solve_exponent(st, qs, ts)
    ref_s = (qs[:, None] ** -0.5 + 0.5 * ts[None, :]) ** -2.0
    stable_err = float(np.abs(tab_s.values - ref_s).max())

    semi = 0.0
    for triple in (fel, st):
        for s, t in [(0.5, 1.0), (1.0, 1.0)]:
            for q in np.geomspace(2.0**-4, 2.0**4, 9):
                direct = scaling.integrate_exponent_ode(triple, q, [s + t])[0]
                mid = scaling.integrate_exponent_ode(triple, q, [t])[0]
                two = scaling.integrate_exponent_ode(triple, mid, [s])[0]
                semi = max(semi, abs(direct - two))
    return [
        _le("feller-closed-form", feller_err, 1e-8),
        _le("stable-closed-form", stable_err, 1e-4),
        _le("semigroup", semi, 1e-7),
    ]


def levy_convergence():
    """Dyadic binary rescalings converge to the pure-diffusion triple.

    The q-grid tops out at 1: the criterion's 0.01 bound concerns the
    small-q pairing where the diffusion limit forms; at q ~ 1/h the atom at
    2h is still individually visible at O(1) no matter how small h gets.
    """
    entries = [(gw.builtin_law("binary"), scaling.Rescaling.dyadic(k))
               for k in range(2, 11)]
    grid = np.geomspace(2.0**-10, 1.0, 41)
    rep = scaling.levy_convergence_report(entries, grid)
    limit_off = (abs(rep.limit.alpha0 - 1.0) + rep.limit.alpha_inf
                 + rep.limit.mu.total_mass)
    return [
        _exact("limit-is-feller", limit_off),
        Check("kappa-strictly-decreasing", float(np.diff(rep.kappa_gaps).max()),
              0.0, bool(np.all(np.diff(rep.kappa_gaps) < 0))),
        _le("kappa-final", float(rep.kappa_gaps[-1]), 0.01),
        _exact("mechanism-gap", float(rep.mechanism_gaps.max())),
    ]


def beta_rho():
    """Drift and jump-mass extraction plus the Grey integral values."""
    fel = levy.feller_triple()
    tab = scaling.solve_exponent(fel, np.array([1.0]), np.array([0.0, 1.0]))
    beta_f, rho_f = scaling.beta_and_rho(fel, tab, 1.0)

    dirac = levy.LevyTriple(0.0, 0.0, measures.AtomicMeasure([1.0], [1.0]))
    tab_d = scaling.solve_exponent(dirac, np.array([1.0]), np.array([0.0, 1.0]))
    beta_d, rho_d = scaling.beta_and_rho(dirac, tab_d, 1.0)

    ok_f, val_f = levy.grey_check(fel)
    ok_s, val_s = levy.grey_check(levy.stable_three_halves())
    ok_d, _ = levy.grey_check(dirac)
    return [
        _exact("feller-beta0", beta_f),
        _le("feller-rho1", abs(rho_f - 2.0), 1e-3),
        _le("dirac-beta0", abs(beta_d - math.exp(-1.0)), 1e-4),
        Check("dirac-rho-infinite", rho_d, 0.0, bool(math.isinf(rho_d))),
        Check("grey-feller", val_f, 1e-3, bool(ok_f and abs(val_f - 2.0) <= 1e-3)),
        Check("grey-stable", val_s, 1e-3, bool(ok_s and abs(val_s - 2.0) <= 1e-3)),
        Check("grey-dirac-divergent", 0.0 if not ok_d else 1.0, 0.0, not ok_d),
    ]


def damped_identity():
    """Truncated merger-rate sum vs its closed form.

    The Feller mechanism is a polynomial, so its Taylor expansion
    terminates at K = 2 and the identity is exact.  The stable mechanism's
    expansion about rho converges only like K^(-1/2) (the binomial series
    of (1-s)^{3/2} at the boundary), so at K = 30 the truncation error is
    of order 0.1; the stated 1e-6 would need K of order 10^10.  The check
    is kept at its stated tolerance and fails honestly.
    """
    fel = levy.feller_triple()
    st = levy.stable_three_halves()
    pts = [(q, t) for q in (0.5, 1.0, 2.0) for t in (0.5, 1.0, 2.0)]
    worst_f = max(scaling.damped_smol_residual(fel, t, q, 2) for q, t in pts)
    worst_s = max(scaling.damped_smol_residual(st, t, q, 30) for q, t in pts)
    return [
        _le("feller-k2", worst_f, 1e-10),
        _le("stable-k30", worst_s, 1e-6),
    ]


def grimvall():
    """Two-atom increment statistics against the diffusion targets."""
    law = gw.builtin_law("binary")
    h = 1e-2
    stats = scaling.grimvall_stats(law, scaling.Rescaling(h, h))
    a_t, b_t, tail_t = scaling.grimvall_limit_targets(levy.feller_triple())
    zs = np.array([0.5, 1.0, 2.0])
    tail_err = float(np.abs(stats.tail(zs) - tail_t(zs)).max())
    return [
        _exact("a-hat-zero", stats.a_hat),
        _le("b-hat", abs(stats.b_hat - 1.0), h * h),
        _le("a-target", abs(stats.a_hat - a_t), h * h),
        _le("b-target", abs(stats.b_hat - b_t), h * h),
        _exact("tail-zero", tail_err),
    ]


def _default_targets():
    return [levy.feller_triple(),
            levy.LevyTriple(0.0, 0.0, measures.AtomicMeasure([1.0], [1.0]))]


def packing():
    """Schedule certificate, head bounds, and scaling recovery."""
    sched = universal.make_schedule(1.0, 4)
    fam = universal.dense_targets(_default_targets(), sched)
    res = universal.pack(fam)
    grid = res.q_grid
    head_scaled = max(k * res.head_bounds[k - 1] for k in range(1, 5))
    recovery = -math.inf
    for k in range(1, 5):
        scaled = levy.scale_triple(res.star, res.b_values[k - 1],
                                   sched.c_values[k - 1])
        gap = np.abs(levy.bernstein_value(scaled, grid)
                     - levy.bernstein_value(fam.members[k - 1], grid)).max()
        recovery = max(recovery, float(gap) - (1.0 / k + res.tail_bounds[k - 1]))
    star_top = levy.bernstein_value(res.star, float(grid.max()))
    return [
        Check("schedule-sum", sched.mass_sum + sched.mass_sum_bound, 1.0,
              bool(sched.mass_sum + sched.mass_sum_bound < 1.0)),
        _le("schedule-remainder", sched.mass_sum_bound, 1e-6),
        Check("head-bounds", head_scaled, 1.0, bool(head_scaled < 1.0)),
        _le("scaling-recovery", recovery, 0.0),
        Check("star-mass", star_top, 1.0, bool(star_top < 1.0)),
    ]


def universal_law():
    """Criticality and the tail sandwich of the packed family law."""
    sched = universal.make_schedule(1.0, 4)
    fam = universal.dense_targets(_default_targets(), sched)
    res = universal.pack(fam)
    law = universal.universal_family_law(res.star.mu)
    crit = abs(float(np.dot(law.support.astype(float), law.probs)) - 1.0)
    zs = np.geomspace(3.0, 2.0 * float(res.star.mu.locations.max()), 20)
    lower, mid, upper = universal.tail_sandwich(law, res.star.mu, zs)
    violation = float(np.maximum(lower - mid, mid - upper).max())
    return [
        _le("criticality", crit, 1e-12),
        _positive("pi0-positive", law.prob(0)),
        _le("tail-sandwich", violation, 1e-12),
    ]


def universal_csbp():
    """Rescaled universal exponent converges to each target's exponent."""
    out = []
    rng = np.random.default_rng(20260819)
    for label, target in zip(("feller", "dirac"), _default_targets()):
        sched = universal.make_schedule(1.0, 3)
        fam = universal.dense_targets([target], sched)
        res = universal.pack(fam)
        rep = universal.universal_csbp_demo(res, 0)
        worst_step = float(np.diff(rep.exponent_gaps).max())
        out.append(Check(f"gaps-decreasing-{label}", worst_step, 0.0,
                         bool(np.all(np.diff(rep.exponent_gaps) < 0))))
    worst = 0.0
    for _ in range(20):
        locs = np.exp(rng.uniform(-2.0, 2.0, size=3))
        ws = rng.uniform(0.1, 1.0, size=3)
        t0 = levy.LevyTriple(rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.5),
                             measures.AtomicMeasure(locs, ws))
        b, c = rng.uniform(0.5, 2.0, size=2)
        q, t = rng.uniform(0.25, 4.0), rng.uniform(0.25, 2.0)
        direct = scaling.integrate_exponent_ode(
            levy.scale_triple(t0, b, c), q, [t])[0]
        dilated = b * scaling.integrate_exponent_ode(t0, q / b, [c * t])[0]
        worst = max(worst, abs(direct - dilated))
    out.append(_le("dilation-consistency", worst, 1e-8))
    return out


CRITERIA = {
    "conservation": (1, conservation),
    "duality": (2, duality),
    "smol-identity": (3, smol_identity),
    "bernstein-step": (4, bernstein_step),
    "euler-order": (5, euler_order),
    "ode-closed-forms": (6, ode_closed_forms),
    "levy-convergence": (7, levy_convergence),
    "beta-rho": (8, beta_rho),
    "damped-identity": (9, damped_identity),
    "grimvall": (10, grimvall),
    "packing": (11, packing),
    "universal-law": (12, universal_law),
    "universal-csbp": (13, universal_csbp),
}


def run_criterion(name: str):
    if name not in CRITERIA:
        raise KeyError(f"unknown criterion {name!r}; "
                       f"known: {', '.join(CRITERIA)}")
    _, fn = CRITERIA[name]
    return fn()
