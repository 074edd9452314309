import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spatialqa.grpo import (
    GroupTooSmall,
    GrpoConfig,
    LengthMismatch,
    PolicyGroup,
    group_advantages,
    grpo_objective,
    kl_estimate,
    toy_policy_check,
)


def make_group(rewards, logp_new=None, logp_old=None, logp_ref=None):
    n = len(rewards)
    base = [-1.0] * n
    return PolicyGroup(
        rewards=rewards,
        logp_new=logp_new if logp_new is not None else base,
        logp_old=logp_old if logp_old is not None else base,
        logp_ref=logp_ref if logp_ref is not None else base,
    )


# --- advantages ------------------------------------------------------------


def test_advantages_two_point():
    assert group_advantages([0.0, 2.0]) == [-1.0, 1.0]


def test_advantages_degenerate():
    assert group_advantages([1.0, 1.0, 1.0, 1.0]) == [0.0, 0.0, 0.0, 0.0]


def test_advantages_three_point():
    adv = group_advantages([0.0, 1.0, 2.0])
    expected = math.sqrt(3.0 / 2.0)
    assert adv[0] == pytest.approx(-expected)
    assert adv[1] == pytest.approx(0.0)
    assert adv[2] == pytest.approx(expected)


def test_advantages_too_small():
    with pytest.raises(GroupTooSmall):
        group_advantages([1.0])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=32))
def test_advantages_normalized(rewards):
    adv = group_advantages(rewards)
    n = len(adv)
    std = math.sqrt(sum((r - sum(rewards) / n) ** 2 for r in rewards) / n)
    if std <= 1e-8:
        assert adv == [0.0] * n
        return
    assert abs(sum(adv) / n) < 1e-9
    pop_std = math.sqrt(sum(a * a for a in adv) / n)
    assert abs(pop_std - 1.0) < 1e-9


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=16),
    st.floats(-50, 50),
)
def test_advantages_shift_invariant(rewards, shift):
    base = group_advantages(rewards)
    shifted = group_advantages([r + shift for r in rewards])
    for a, b in zip(base, shifted):
        assert a == pytest.approx(b, abs=1e-7)


# --- KL --------------------------------------------------------------------


def test_kl_zero_at_equality():
    assert kl_estimate(-1.3, -1.3) == 0.0


def test_kl_hand_values():
    assert kl_estimate(-1.0, -0.9) == pytest.approx(math.exp(0.1) - 1.1)
    assert kl_estimate(-0.9, -1.0) == pytest.approx(math.exp(-0.1) + 0.1 - 1.0)


@settings(max_examples=300, deadline=None)
@given(st.floats(-20, 3), st.floats(-20, 3))
def test_kl_nonnegative(lnew, lref):
    value = kl_estimate(lnew, lref)
    assert value >= 0.0
    if lnew == lref:
        assert value == 0.0


# --- objective ---------------------------------------------------------------


def test_objective_zero_when_policies_identical():
    rewards = [0.0, 1.0, 2.0, 3.0]
    group = make_group(rewards, *[[-1.0, -2.0, -0.5, -3.0]] * 3)
    adv = group_advantages(rewards)
    assert grpo_objective(group, adv) == pytest.approx(0.0)


def test_objective_clips_positive_advantage():
    group = PolicyGroup(
        rewards=(1.0,), logp_new=(math.log(2.0),), logp_old=(0.0,), logp_ref=(math.log(2.0),)
    )
    cfg = GrpoConfig(clip_eps=0.2, kl_beta=0.0)
    assert grpo_objective(group, [1.0], cfg) == pytest.approx(1.2)


def test_objective_pessimistic_negative_advantage():
    group = PolicyGroup(
        rewards=(0.0,), logp_new=(math.log(0.5),), logp_old=(0.0,), logp_ref=(math.log(0.5),)
    )
    cfg = GrpoConfig(clip_eps=0.2, kl_beta=0.0)
    assert grpo_objective(group, [-1.0], cfg) == pytest.approx(-0.8)


def test_objective_length_mismatch():
    group = make_group([0.0, 1.0])
    with pytest.raises(LengthMismatch):
        grpo_objective(group, [1.0])


def test_policy_group_rejects_uneven_lists():
    with pytest.raises(LengthMismatch):
        PolicyGroup(rewards=(1.0, 2.0), logp_new=(0.0,), logp_old=(0.0, 0.0),
                    logp_ref=(0.0, 0.0))


def test_policy_group_rejects_nonfinite():
    with pytest.raises(ValueError):
        PolicyGroup(rewards=(1.0, float("nan")), logp_new=(0.0, 0.0),
                    logp_old=(0.0, 0.0), logp_ref=(0.0, 0.0))


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_objective_unclipped_limit(data):
    """With every ratio inside the clip band and beta 0, the objective is
    exactly the importance-weighted advantage mean (the wide-band limit)."""
    n = data.draw(st.integers(2, 8))
    rewards = [data.draw(st.floats(0, 1)) for _ in range(n)]
    lnew = [data.draw(st.floats(-3, 0)) for _ in range(n)]
    # keep rho = exp(lnew - lold) well inside (1 - eps, 1 + eps)
    lold = [ln - data.draw(st.floats(-0.4, 0.4)) for ln in lnew]
    group = make_group(rewards, lnew, lold, lnew)
    adv = group_advantages(rewards)
    cfg = GrpoConfig(clip_eps=0.999999, kl_beta=0.0)
    expected = sum(
        math.exp(ln - lo) * a for ln, lo, a in zip(lnew, lold, adv)
    ) / n
    assert grpo_objective(group, adv, cfg) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_clipping_monotone_then_flat():
    cfg = GrpoConfig(clip_eps=0.2, kl_beta=0.0)

    def term(rho, a):
        group = PolicyGroup(
            rewards=(1.0,), logp_new=(math.log(rho),), logp_old=(0.0,),
            logp_ref=(math.log(rho),)
        )
        return grpo_objective(group, [a], cfg)

    rhos = np.linspace(0.05, 3.0, 80)
    pos = [term(r, 1.0) for r in rhos]
    assert all(b >= a - 1e-12 for a, b in zip(pos, pos[1:]))
    flat = [term(r, 1.0) for r in np.linspace(1.2, 3.0, 20)]
    assert max(flat) - min(flat) < 1e-12
    neg = [term(r, -1.0) for r in rhos]
    assert all(b <= a + 1e-12 for a, b in zip(neg, neg[1:]))
    flat_neg = [term(r, -1.0) for r in np.linspace(0.05, 0.8, 20)]
    assert max(flat_neg) - min(flat_neg) < 1e-12


# --- toy gradient check -------------------------------------------------------


def test_toy_policy_check_passes():
    report = toy_policy_check(num_actions=3, seed=0)
    assert report.passed, report
    assert report.max_rel_err < 1e-4
    assert report.reinforce_max_err < 1e-4


def test_toy_policy_check_various_sizes():
    for k, seed in ((2, 1), (4, 7), (6, 13)):
        report = toy_policy_check(num_actions=k, seed=seed)
        assert report.passed, (k, seed, report)


def test_toy_policy_all_equal_rewards_zero_gradient():
    # identical rewards => zero advantages => beta-free gradient vanishes
    rng = np.random.default_rng(5)
    theta = rng.normal(0.0, 1.0, 4)
    rewards = [0.5, 0.5, 0.5, 0.5]
    adv = group_advantages(rewards)
    assert adv == [0.0, 0.0, 0.0, 0.0]
    logp = [-1.0, -1.2, -0.8, -1.1]
    group = make_group(rewards, logp, logp, logp)
    cfg = GrpoConfig(kl_beta=0.0)
    assert grpo_objective(group, adv, cfg) == 0.0


def test_toy_policy_check_rejects_tiny_action_space():
    with pytest.raises(ValueError):
        toy_policy_check(num_actions=1, seed=0)
