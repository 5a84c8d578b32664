import math
from fractions import Fraction

import numpy as np
import pytest

from branchlab.gw import (
    CRITICAL_TOL,
    FamilyLaw,
    bernstein_step_residual,
    builtin_law,
    builtin_law_names,
    descendant_distribution,
    descendant_sequence,
    discrete_bernstein,
    discrete_mechanism,
    discrete_rates,
    empirical_distribution,
    generating_iterate,
    lamperti_gw,
    make_family_law,
    simulate_coagulation,
    simulate_gw,
    smoluchowski_residual,
)
from branchlab.measures import DEFAULT_Q_GRID, total_variation


def poly_compose(p, q):
    """Coefficients of p(q(z)) over exact rationals."""
    out = [Fraction(0)]
    power = [Fraction(1)]  # q(z)^k
    for c in p:
        for i, pc in enumerate(power):
            while len(out) <= i:
                out.append(Fraction(0))
            out[i] += Fraction(c) * pc
        nxt = [Fraction(0)] * (len(power) + len(q) - 1)
        for i, a in enumerate(power):
            for j, b in enumerate(q):
                nxt[i + j] += a * Fraction(b)
        power = nxt
    return out


def exact_descendants(weights, n):
    """nu_n as exact rationals via iterated composition of G with itself."""
    g = [Fraction(w) for w in weights]
    out = [Fraction(0), Fraction(1)]  # G_0(z) = z
    for _ in range(n):
        out = poly_compose(out, g)
    return out


def test_builtin_names():
    assert builtin_law_names() == ["binary", "subcritical-demo", "ternary",
                                   "unit"]


def test_binary_law_properties():
    law = builtin_law("binary")
    assert law.support.tolist() == [0, 2]
    assert law.probs.tolist() == [0.5, 0.5]
    assert law.mean_family_size == 1.0
    assert law.critical
    assert law.max_support == 2


def test_subcritical_demo_is_subcritical():
    law = builtin_law("subcritical-demo")
    assert law.mean_family_size == 0.5
    assert not law.critical


def test_make_family_law_validation():
    with pytest.raises(ValueError):
        make_family_law([0.5, 0.4])
    with pytest.raises(ValueError):
        make_family_law([1.5, -0.5])
    with pytest.raises(ValueError):
        make_family_law([])


def test_prob_and_generating_value():
    law = builtin_law("ternary")
    assert law.prob(0) == pytest.approx(2.0 / 3.0)
    assert law.prob(1) == 0.0
    assert law.prob(3) == pytest.approx(1.0 / 3.0)
    # G(z) = 2/3 + z^3/3
    for z in (0.0, 0.25, 1.0):
        assert law.generating_value(z) == pytest.approx(2 / 3 + z**3 / 3,
                                                        rel=1e-15)


@pytest.mark.parametrize("name", ["binary", "ternary", "subcritical-demo"])
@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_descendants_match_exact_composition(name, n):
    weights = {"binary": [0.5, 0.0, 0.5],
               "ternary": [2 / 3, 0.0, 0.0, 1 / 3],
               "subcritical-demo": [0.75, 0.0, 0.25]}[name]
    # Fraction oracle needs exact inputs
    exact_w = {"binary": [Fraction(1, 2), 0, Fraction(1, 2)],
               "ternary": [Fraction(2, 3), 0, 0, Fraction(1, 3)],
               "subcritical-demo": [Fraction(3, 4), 0, Fraction(1, 4)]}[name]
    law = make_family_law(weights)
    nu = descendant_distribution(law, n, max_index=4096)
    want = exact_descendants(exact_w, n)
    assert nu.tail_mass == 0.0
    for j, m in enumerate(nu.masses):
        ref = float(want[j]) if j < len(want) else 0.0
        assert m == pytest.approx(ref, abs=5e-15)


def test_binary_second_generation_values():
    nu = descendant_distribution(builtin_law("binary"), 2)
    assert nu.masses[0] == 0.625
    assert nu.masses[2] == 0.25
    assert nu.masses[4] == 0.125


def test_descendant_sequence_truncation_tail():
    law = builtin_law("binary")
    seq = descendant_sequence(law, 6, max_index=8)
    # support of nu_6 reaches 64, so mass must have been clipped
    assert seq[-1].tail_mass > 0
    assert seq[-1].masses.sum() + seq[-1].tail_mass == pytest.approx(1.0,
                                                                     abs=1e-12)


def test_generating_iterate_matches_descendants():
    law = builtin_law("ternary")
    z = 0.7
    for n in range(5):
        nu = descendant_distribution(law, n)
        direct = float(np.dot(nu.masses, z ** np.arange(nu.masses.size)))
        assert generating_iterate(law, n, z) == pytest.approx(direct,
                                                              rel=1e-13)


def test_unit_law_is_identity():
    law = builtin_law("unit")
    nu = descendant_distribution(law, 9)
    assert nu.masses.tolist() == [0.0, 1.0]
    assert generating_iterate(law, 9, 0.3) == pytest.approx(0.3)


def test_discrete_bernstein_oracle():
    nu = descendant_distribution(builtin_law("binary"), 2)
    q = 0.8
    want = sum(m * (1 - math.exp(-q * j)) for j, m in enumerate(nu.masses))
    assert discrete_bernstein(nu, q) == pytest.approx(want, rel=1e-15)


def test_discrete_mechanism_direct_form():
    law = builtin_law("binary")
    s = np.array([0.4, 0.7, 1.0])
    want = law.generating_value(1.0 - s) - 1.0 + s
    assert np.allclose(discrete_mechanism(law, s), want, atol=1e-16)


def test_discrete_mechanism_binary_closed_form():
    # G(z) = (1 + z^2)/2 gives Psi(s) = s^2/2; on the expansion branch
    # (s <= 1/4) the result is bit-identical to the closed form
    law = builtin_law("binary")
    small = np.geomspace(1e-12, 0.25, 20)
    assert np.array_equal(discrete_mechanism(law, small),
                          small * small / 2.0)
    big = np.linspace(0.3, 1.0, 8)
    assert np.allclose(discrete_mechanism(law, big), big * big / 2.0,
                       rtol=0, atol=5e-16)


def test_discrete_mechanism_small_s_no_cancellation():
    law = builtin_law("ternary")
    s = 1e-10
    # Psi(s) = s^2 - s^3/3 for the ternary law; direct form would lose
    # all digits at this scale
    assert discrete_mechanism(law, s) == pytest.approx(s * s, rel=1e-9)


def test_discrete_mechanism_drift_term():
    law = builtin_law("subcritical-demo")
    # Psi(s) = (1 - Xi) s + O(s^2) with Xi = 1/2
    s = 1e-9
    assert discrete_mechanism(law, s) == pytest.approx(0.5 * s, rel=1e-8)


def test_discrete_rates_binomial_oracle():
    rng = np.random.default_rng(17)
    for _ in range(20):
        size = int(rng.integers(2, 12))
        w = rng.random(size)
        w /= w.sum()
        law = make_family_law(w)
        rho = float(rng.uniform(0.05, 1.0))
        rates = discrete_rates(law, rho)
        for k in range(rates.size):
            want = sum(law.prob(l) * math.comb(l, k) * rho**k
                       * (1 - rho) ** (l - k)
                       for l in range(k, law.max_support + 1))
            assert rates[k] == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_discrete_rates_sum_to_one_at_full_mass():
    # at rho = 1 the rates collapse to the law itself
    law = builtin_law("ternary")
    rates = discrete_rates(law, 1.0)
    for k in range(rates.size):
        assert rates[k] == pytest.approx(law.prob(k), abs=1e-15)


def test_smoluchowski_residual_small_for_builtin_laws():
    for name in ("binary", "ternary", "subcritical-demo"):
        law = builtin_law(name)
        for n in range(4):
            assert smoluchowski_residual(law, n, max_index=2048) < 1e-10


def test_bernstein_step_residual_small():
    law = builtin_law("binary")
    for n in range(5):
        assert bernstein_step_residual(law, n, DEFAULT_Q_GRID,
                                       max_index=1024) < 1e-12


def test_empirical_distribution_hand_case():
    d = empirical_distribution(np.array([0, 1, 1, 3, 7]), max_index=4)
    # indices 0..4 are kept, the 7 lands in the tail
    assert d.masses.tolist() == [0.2, 0.4, 0.0, 0.2, 0.0]
    assert d.tail_mass == pytest.approx(0.2)


def test_simulation_reproducible():
    law = builtin_law("binary")
    a = simulate_coagulation(law, 3, 10**4, seed=42).size_distribution(64)
    b = simulate_coagulation(law, 3, 10**4, seed=42).size_distribution(64)
    assert np.array_equal(a.masses, b.masses)
    c = simulate_coagulation(law, 3, 10**4, seed=43).size_distribution(64)
    assert not np.array_equal(a.masses, c.masses)


def test_coagulation_matches_recursion():
    law = builtin_law("binary")
    rec = descendant_distribution(law, 4, max_index=128)
    emp = simulate_coagulation(law, 4, 2 * 10**5,
                               seed=3).size_distribution(128)
    assert total_variation(emp, rec) < 0.01


def test_gw_matches_recursion():
    law = builtin_law("ternary")
    rec = descendant_distribution(law, 4, max_index=128)
    paths = simulate_gw(law, 4, 2 * 10**5, seed=3)
    emp = paths.generation_distribution(4, max_index=128)
    assert total_variation(emp, rec) < 0.01


def test_gw_paths_shape_and_start():
    law = builtin_law("binary")
    paths = simulate_gw(law, 5, 100, seed=0, x0=2)
    assert len(paths) == 100
    assert paths.populations.shape == (100, 6)
    assert np.all(paths.populations[:, 0] == 2)
    # binary branching preserves parity of the population
    assert np.all(paths.populations % 2 == 0)


def test_lamperti_matches_gw_in_law():
    law = builtin_law("binary")
    n = 4
    rec = descendant_distribution(law, n, max_index=128)
    lam = lamperti_gw(law, 1, n, 2 * 10**5, seed=9)
    emp = lam.generation_distribution(n, max_index=128)
    assert total_variation(emp, rec) < 0.01


def test_lamperti_absorbed_at_zero():
    law = builtin_law("binary")
    lam = lamperti_gw(law, 1, 6, 10**4, seed=1)
    pops = lam.populations
    died = np.nonzero(pops == 0)
    for path, gen in zip(*died):
        assert np.all(pops[path, gen:] == 0)


def test_extinction_probability_grows_to_one():
    """Critical laws die out: nu_n(0) increases toward 1."""
    law = builtin_law("binary")
    seq = descendant_sequence(law, 24, max_index=4096)
    zero = [nu.masses[0] for nu in seq]
    assert all(b >= a for a, b in zip(zero, zero[1:]))
    # 1 - nu_n(0) ~ 2/(sigma^2 n) = 2/n for binary
    assert 1.0 - zero[-1] == pytest.approx(2.0 / 24.0, rel=0.25)


def test_large_support_law_rejected_by_recursion():
    law = FamilyLaw(np.array([0, 79]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        descendant_sequence(law, 2)
