import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from pressure_match import analytics as an
from pressure_match.errors import Infeasible, InvalidParams
from pressure_match.model import ModelParams

probs = st.floats(0.01, 0.99)
lengths = st.integers(2, 25)

# calibrated markets as printed in the headline table (4 decimals)
US = ModelParams(10, 0.3232, 0.1024)
JP3 = ModelParams(3, 0.5783, 0.2707)
JP4 = ModelParams(4, 0.5599, 0.2141)


def test_p_first_matches_observed_rates():
    assert an.p_first(US) == pytest.approx(0.5, abs=1e-4)
    assert an.p_first(JP3) == pytest.approx(0.7, abs=1e-4)


def test_p_later_matches_observed_rates():
    assert an.p_later(US) == pytest.approx(0.3, abs=1e-4)
    assert an.p_later(JP3) == pytest.approx(0.5, abs=1e-4)


@given(probs, lengths)
def test_no_pressure_limit(a, L):
    p = ModelParams(L, a, 0.0)
    assert an.p_first(p) == pytest.approx(a, abs=1e-12)
    assert an.p_later(p) == pytest.approx(a, abs=1e-12)
    assert an.rank_loss(p) == 0.0


@pytest.mark.parametrize(
    "params, expected",
    [(US, 0.7740), (JP3, 0.2053), (JP4, 0.3425)],
)
def test_rank_loss_table(params, expected):
    assert an.rank_loss(params) == pytest.approx(expected, abs=1e-3)


@pytest.mark.parametrize(
    "params, expected, tol",
    [(US, 2.5588, 2e-3), (JP3, 0.4754, 1e-3), (JP4, 0.8373, 1e-3)],
)
def test_rank_loss_random_table(params, expected, tol):
    assert an.rank_loss_random(params) == pytest.approx(expected, abs=tol)


def test_rank_loss_random_two_programs_always_accepted():
    p = ModelParams(2, 1 - 1e-12, 0.5)
    assert an.rank_loss_random(p) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("params, expected", [(US, 0.4829), (JP3, 0.6443), (JP4, 0.6591)])
def test_type1_error_second_position_is_the_lower_bound(params, expected):
    assert an.type1_error_no_swap(params, 2) == pytest.approx(expected, abs=1e-3)
    assert an.type1_error_no_swap(params, 2) == an.type1_error_lower_bound(params)


@given(probs, probs, lengths)
def test_first_position_is_perfectly_verifiable(a, e, L):
    assert an.type1_error_no_swap(ModelParams(L, a, e), 1) == 0.0


def test_type1_error_rejects_bad_rank():
    with pytest.raises(InvalidParams):
        an.type1_error_no_swap(US, 0)
    with pytest.raises(InvalidParams):
        an.type1_error_with_swap(US, 11)


@given(probs, st.floats(0.0, 0.5), lengths)
def test_swap_without_pressure_gives_a_times_epsilon(a, eps, L):
    p = ModelParams(L, a, 0.0, eps)
    assert an.type1_error_with_swap(p, 1) == pytest.approx(a * eps, abs=1e-12)


@given(probs, probs, lengths, st.integers(1, 25))
def test_swap_reduces_to_plain_when_off_and_beyond_rank_two(a, e, L, k):
    assume(k <= L)
    p = ModelParams(L, a, e)
    assert an.type1_error_with_swap(p, k) == an.type1_error_no_swap(p, k)
    if k >= 3:
        swapped = p.replace(epsilon=0.37)
        assert an.type1_error_with_swap(swapped, k) == an.type1_error_no_swap(p, k)


@given(probs, probs, lengths, st.sampled_from([0.0, 0.1, 0.25, 0.5]))
def test_swap_floor_holds_for_every_rank(a, e, L, eps):
    p = ModelParams(L, a, e, eps)
    floor = a * eps
    for k in range(1, L + 1):
        assert an.type1_error_with_swap(p, k) >= floor - 1e-12


@given(probs, probs, lengths)
def test_type1_error_monotone_in_rank(a, e, L):
    p = ModelParams(L, a, e)
    qs = [an.type1_error_no_swap(p, k) for k in range(1, L + 1)]
    assert all(x <= y + 1e-15 for x, y in zip(qs, qs[1:]))


@given(probs, probs, lengths)
def test_proposition(a, e, L):
    p = ModelParams(L, a, e)
    assert an.p_first(p) > an.p_later(p)
    assert an.p_later(p) < a < an.p_first(p)


@given(probs, st.floats(0.01, 0.98), lengths)
def test_gap_increases_with_pressure(a, e, L):
    lo, hi = ModelParams(L, a, e), ModelParams(L, a, e + 0.01)
    # P1 rounds to exactly 1.0 for long lists with heavy pressure
    assume(an.p_first(hi) < 1 - 1e-9)
    assert an.p_first(hi) > an.p_first(lo)
    assert an.p_later(hi) < an.p_later(lo)


@pytest.mark.parametrize("params", [US, JP3, JP4])
def test_rank_loss_vanishes_at_both_pressure_limits(params):
    assert an.rank_loss(params.replace(e=1e-6)) < 1e-3
    assert an.rank_loss(params.replace(e=1 - 1e-6)) < 1e-3
    assert an.rank_loss(params.replace(e=1.0)) == 0.0
    assert an.rank_loss(params) > 0


def test_permutation_rank_loss():
    assert an.permutation_rank_loss(0.4, 0.0) == 0.0
    assert an.permutation_rank_loss(0.5, 0.5) == 0.125
    assert an.permutation_rank_loss(0.5783, 0.15 / 0.5783) == pytest.approx(0.0867, abs=1e-3)
    assert an.permutation_rank_loss(0.3232, 0.15 / 0.3232) == pytest.approx(0.0485, abs=1e-3)


@given(st.floats(0.01, 0.99), st.floats(0.0, 0.49))
def test_permutation_rank_loss_increasing_in_epsilon(a, eps):
    assert an.permutation_rank_loss(a, eps + 0.01) > an.permutation_rank_loss(a, eps)


@given(st.floats(0.3, 0.98), st.floats(0.001, 0.15))
def test_loss_at_target_alpha_increasing_in_a(a, alpha):
    lower = an.permutation_rank_loss_for_alpha(a, alpha)
    higher = an.permutation_rank_loss_for_alpha(a + 0.01, alpha)
    assert lower == pytest.approx(a * alpha)
    assert higher > lower


def test_epsilon_for_alpha():
    assert an.epsilon_for_alpha(0.3232, 0.15) == pytest.approx(0.4641, abs=1e-4)
    eps = an.epsilon_for_alpha(0.5783, 0.15)
    assert eps == pytest.approx(0.2594, abs=1e-4)
    assert 0.5783 * eps == pytest.approx(0.15)
    with pytest.raises(Infeasible) as info:
        an.epsilon_for_alpha(0.2, 0.15)
    assert info.value.alpha == 0.15 and info.value.a == 0.2


def test_epsilon_for_alpha_boundary_is_feasible():
    assert an.epsilon_for_alpha(0.5, 0.25) == 0.5
    with pytest.raises(Infeasible):
        an.epsilon_for_alpha(0.5, math.nextafter(0.25, 1.0))


def test_quantile_loss():
    assert an.quantile_loss(0.7740, 10) == pytest.approx(0.0704, abs=1e-4)
    assert an.quantile_loss(0.0, 5) == 0.0
    assert an.quantile_loss(0.2053, 3) == pytest.approx(0.0513, abs=1e-4)
    with pytest.raises(InvalidParams):
        an.quantile_loss(-0.1, 3)


def test_key_statistics_marks_infeasible_alpha():
    stats = an.key_statistics_for(JP3, 0.4)
    assert stats.prl_alpha is None and not stats.feasible
    assert stats.quantile_loss == stats.rank_loss / 4
