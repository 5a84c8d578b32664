import math

import numpy as np
import pytest

from branchlab.levy import (
    ContinuityReport,
    LevyTriple,
    QuadratureRecipe,
    bernstein_value,
    continuity_report,
    feller_triple,
    grey_check,
    kappa_of,
    left_right,
    mechanism,
    mechanism_derivative,
    psi_prime_infinity,
    scale_triple,
    stable_three_halves,
    triple_of,
)
from branchlab.measures import AtomicMeasure


def random_triple(rng):
    n = int(rng.integers(0, 5))
    mu = AtomicMeasure(np.exp(rng.uniform(-3, 3, n)), rng.uniform(0.1, 2.0, n))
    return LevyTriple(float(rng.uniform(0, 2)), float(rng.uniform(0, 1)), mu)


def test_feller_closed_forms():
    fel = feller_triple()
    q = np.array([0.0, 0.5, 1.0, 7.0])
    assert np.allclose(bernstein_value(fel, q), q, atol=0)
    assert np.allclose(mechanism(fel, q), 0.5 * q**2, atol=0)


def test_dirac_mechanism_closed_form():
    # single unit jump: Psi(q) = e^{-q} - 1 + q
    t = LevyTriple(0.0, 0.0, AtomicMeasure([1.0], [1.0]))
    for q in (0.0, 0.3, 1.0, 10.0):
        assert mechanism(t, q) == pytest.approx(math.exp(-q) - 1.0 + q,
                                                rel=1e-14, abs=1e-300)


def test_mechanism_small_q_no_cancellation():
    t = LevyTriple(0.0, 0.0, AtomicMeasure([1.0], [1.0]))
    q = 1e-9
    # exact Taylor value q^2/2 - q^3/6 dominates at this scale
    assert mechanism(t, q) == pytest.approx(q * q / 2.0, rel=1e-8)


def test_bernstein_hand_value():
    t = LevyTriple(2.0, 0.25, AtomicMeasure([0.5, 2.0], [1.0, 3.0]))
    q = 1.0
    want = 2.0 + 0.25 + (1 - math.exp(-0.5)) + 3 * (1 - math.exp(-2.0))
    assert bernstein_value(t, q) == pytest.approx(want, rel=1e-15)


def test_mechanism_derivative_vs_finite_differences():
    rng = np.random.default_rng(5)
    for _ in range(10):
        t = random_triple(rng)
        q = float(rng.uniform(0.5, 3.0))
        h = 1e-5
        d1 = (mechanism(t, q + h) - mechanism(t, q - h)) / (2 * h)
        d2 = (mechanism(t, q + h) - 2 * mechanism(t, q)
              + mechanism(t, q - h)) / h**2
        assert mechanism_derivative(t, q, 1) == pytest.approx(d1, rel=1e-8,
                                                              abs=1e-8)
        # the second difference carries roundoff of order eps/h^2
        assert mechanism_derivative(t, q, 2) == pytest.approx(d2, rel=1e-3,
                                                              abs=1e-3)


def test_first_derivative_is_bernstein():
    rng = np.random.default_rng(6)
    t = random_triple(rng)
    q = np.array([0.1, 1.0, 4.0])
    assert np.allclose(mechanism_derivative(t, q, 1), bernstein_value(t, q))


def test_mechanism_convex_increasing():
    rng = np.random.default_rng(7)
    q = np.linspace(0.0, 8.0, 200)
    for _ in range(5):
        t = random_triple(rng)
        psi = mechanism(t, q)
        assert psi[0] == 0.0
        d2 = np.diff(psi, 2)
        assert np.all(d2 > -1e-12)  # convex
        assert np.all(np.diff(mechanism_derivative(t, q, 2)) <= 1e-12)


def test_scale_triple_identities():
    """f_scaled(q) = c f(q/b) and Psi_scaled(q) = c b Psi(q/b)."""
    rng = np.random.default_rng(8)
    q = np.geomspace(0.01, 100.0, 25)
    for _ in range(100):
        t = random_triple(rng)
        b = float(np.exp(rng.uniform(-2, 2)))
        c = float(np.exp(rng.uniform(-2, 2)))
        s = scale_triple(t, b, c)
        f_gap = np.abs(bernstein_value(s, q) - c * bernstein_value(t, q / b))
        p_gap = np.abs(mechanism(s, q) - c * b * mechanism(t, q / b))
        scale_f = max(1.0, np.abs(bernstein_value(s, q)).max())
        scale_p = max(1.0, np.abs(mechanism(s, q)).max())
        assert f_gap.max() <= 1e-12 * scale_f
        assert p_gap.max() <= 1e-10 * scale_p


def test_scale_triple_composes():
    t = LevyTriple(1.0, 0.5, AtomicMeasure([1.0], [1.0]))
    s = scale_triple(scale_triple(t, 2.0, 3.0), 4.0, 5.0)
    direct = scale_triple(t, 8.0, 15.0)
    assert s.alpha0 == pytest.approx(direct.alpha0, rel=1e-15)
    assert s.alpha_inf == pytest.approx(direct.alpha_inf, rel=1e-15)
    assert np.allclose(s.mu.locations, direct.mu.locations)
    assert np.allclose(s.mu.weights, direct.mu.weights)


def test_kappa_round_trip():
    rng = np.random.default_rng(9)
    for _ in range(50):
        t = random_triple(rng)
        back = triple_of(kappa_of(t))
        assert back.alpha0 == t.alpha0
        assert back.alpha_inf == t.alpha_inf
        assert np.allclose(back.mu.locations, t.mu.locations, rtol=1e-15)
        assert np.allclose(back.mu.weights, t.mu.weights, rtol=1e-12)


def test_kappa_interior_weights():
    # below 1 the kappa weight equals the mu weight; above 1 it is capped
    t = LevyTriple(0.0, 0.0, AtomicMeasure([0.25, 4.0], [2.0, 2.0]))
    k = kappa_of(t)
    assert k.interior.weights.tolist() == [0.5, 2.0]


def test_left_right_hand_case():
    t = LevyTriple(0.5, 0.25, AtomicMeasure([1.0, 2.0], [1.0, 3.0]))
    # at x=1.5: left = alpha0 + 1*1, right = alpha_inf + 3
    assert left_right(t, 1.5) == (1.5, 3.25)
    # at an atom the atom counts to the left (closed on the left)
    assert left_right(t, 1.0) == (1.5, 3.25)
    assert left_right(t, 0.5) == (0.5, 4.25)
    with pytest.raises(ValueError):
        left_right(t, 0.0)


def test_psi_prime_infinity():
    assert psi_prime_infinity(feller_triple()) == math.inf
    t = LevyTriple(0.0, 0.25, AtomicMeasure([1.0], [2.0]))
    assert psi_prime_infinity(t) == pytest.approx(2.25)


def test_grey_feller_value():
    """int_1^inf 2/q^2 dq = 2, finite."""
    finite, value = grey_check(feller_triple())
    assert finite
    assert value == pytest.approx(2.0, abs=1e-3)


def test_grey_stable_value():
    """For Psi = q^{3/2}: int_1^inf q^{-3/2} dq = 2."""
    finite, value = grey_check(stable_three_halves())
    assert finite
    assert value == pytest.approx(2.0, abs=1e-3)


def test_grey_divergent_for_linear_mechanism():
    t = LevyTriple(0.0, 0.0, AtomicMeasure([1.0], [1.0]))
    finite, value = grey_check(t)
    assert not finite
    assert value == math.inf


def test_grey_rejects_dead_mechanism():
    with pytest.raises(ValueError):
        grey_check(LevyTriple(0.0, 0.0, AtomicMeasure()))


def test_stable_mechanism_matches_power_law():
    st = stable_three_halves()
    # inside the working window the 2000-atom rule is accurate to ~1e-4;
    # toward the ends of the atom range the truncation bias grows
    q = np.geomspace(1.0 / 16.0, 16.0, 17)
    rel = np.abs(mechanism(st, q) - q**1.5) / q**1.5
    assert rel.max() < 3e-4
    wide = np.geomspace(0.01, 100.0, 31)
    rel_wide = np.abs(mechanism(st, wide) - wide**1.5) / wide**1.5
    assert rel_wide.max() < 1e-3
    assert mechanism(st, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_quadrature_recipe_integrates_power_density():
    # measure with density x on [1, 2]; total mass = 3/2
    rec = QuadratureRecipe.log_midpoint(lambda x: x, 1.0, 2.0, 400)
    m = rec.to_measure()
    assert m.total_mass == pytest.approx(1.5, rel=1e-4)
    # second moment: int_1^2 x^3 dx = 15/4
    got = m.integrate(lambda x: x**2)
    assert got == pytest.approx(15.0 / 4.0, rel=1e-4)


def _shrinking_sequence(n):
    return [
        LevyTriple(1.0 + 1.0 / k, 0.5 / k,
                   AtomicMeasure([1.0 + 1.0 / k], [1.0 + 1.0 / k]))
        for k in range(1, n + 1)
    ]


def test_continuity_report_consistent_sequence():
    rep = continuity_report(_shrinking_sequence(8))
    assert isinstance(rep, ContinuityReport)
    assert rep.consistent
    assert rep.bernstein_gaps[-1] == 0.0
    assert rep.kappa_gaps[-1] == 0.0
    assert rep.mechanism_gaps[-1] == 0.0
    # the estimated limit keeps interior atoms that do not drift
    assert rep.limit.mu.locations.size == 1


def test_continuity_report_escaping_atoms_reach_zero():
    """Atoms drifting to 0 are folded into the diffusion coordinate."""
    triples = [LevyTriple(0.0, 0.0, AtomicMeasure([2.0**-k], [1.0]))
               for k in range(1, 9)]
    rep = continuity_report(triples, q_grid=np.geomspace(2.0**-6, 1.0, 21))
    # kappa mass of atom (x, 1) is x; a vanishing location kills the mass
    assert rep.limit.mu.locations.size == 0
    assert rep.limit.alpha0 == pytest.approx(2.0**-8)
    assert rep.kappa_decreasing


def test_continuity_report_needs_members():
    with pytest.raises(ValueError):
        continuity_report([])
