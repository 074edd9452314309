"""Group-relative policy optimization math on toy inputs.

Implements the group advantage normalization, the clipped surrogate
objective with a KL penalty to a reference policy, and a self-contained
gradient check against central finite differences on a categorical toy
policy. No parameter updates happen here; the functions score given
log-probabilities only.

Conventions (documented, since they are often left implicit): population
standard deviation over the group, sequence-level importance ratios, and
the nonnegative exponential-form KL estimator exp(d) - d - 1 with
d = logp_ref - logp_new.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GroupTooSmall(ValueError):
    """Advantage normalization needs at least two rewards."""


class LengthMismatch(ValueError):
    """Per-sequence lists in a group must all have the same length."""


@dataclass(frozen=True)
class GrpoConfig:
    group_size: int = 8
    clip_eps: float = 0.2
    kl_beta: float = 0.01
    std_floor: float = 1e-8

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("group_size must be at least 2")
        if not (0.0 < self.clip_eps < 1.0):
            raise ValueError("clip_eps must lie in (0, 1)")
        if self.kl_beta < 0.0:
            raise ValueError("kl_beta must be nonnegative")
        if self.std_floor < 0.0:
            raise ValueError("std_floor must be nonnegative")


@dataclass(frozen=True)
class PolicyGroup:
    rewards: tuple[float, ...]
    logp_new: tuple[float, ...]
    logp_old: tuple[float, ...]
    logp_ref: tuple[float, ...]

    def __post_init__(self):
        for name in ("rewards", "logp_new", "logp_old", "logp_ref"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = len(self.rewards)
        for name in ("logp_new", "logp_old", "logp_ref"):
            if len(getattr(self, name)) != n:
                raise LengthMismatch(f"{name} has length {len(getattr(self, name))}, expected {n}")
        for name in ("rewards", "logp_new", "logp_old", "logp_ref"):
            if not all(math.isfinite(v) for v in getattr(self, name)):
                raise ValueError(f"{name} contains a non-finite value")

    def __len__(self) -> int:
        return len(self.rewards)


def group_advantages(rewards, cfg: GrpoConfig | None = None) -> list[float]:
    """Rewards normalized to zero mean and unit population std within the
    group; all zeros when the group is (near-)degenerate.

    Sequential plain-float arithmetic on purpose: reimplementations can
    match these values bit-for-bit.
    """
    cfg = cfg or GrpoConfig()
    values = [float(r) for r in rewards]
    n = len(values)
    if n < 2:
        raise GroupTooSmall(f"need at least 2 rewards, got {n}")
    total = 0.0
    for v in values:
        total += v
    mean = total / n
    sq = 0.0
    for v in values:
        d = v - mean
        sq += d * d
    std = math.sqrt(sq / n)
    if std <= cfg.std_floor:
        return [0.0] * n
    return [(v - mean) / std for v in values]


def kl_estimate(logp_new: float, logp_ref: float) -> float:
    """Nonnegative per-sequence KL estimator exp(d) - d - 1, d = logp_ref - logp_new.
    Zero exactly when the two log-probabilities agree."""
    d = logp_ref - logp_new
    return math.exp(d) - d - 1.0


def grpo_objective(group: PolicyGroup, advantages, cfg: GrpoConfig | None = None) -> float:
    """Mean over the group of the clipped surrogate minus the KL penalty:

        min(rho*A, clip(rho, 1-eps, 1+eps)*A) - beta * kl(logp_new, logp_ref)

    with rho = exp(logp_new - logp_old) per sequence.
    """
    cfg = cfg or GrpoConfig()
    adv = [float(a) for a in advantages]
    if len(adv) != len(group):
        raise LengthMismatch(f"advantages has length {len(adv)}, expected {len(group)}")
    lo, hi = 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps
    total = 0.0
    for a, lnew, lold, lref in zip(adv, group.logp_new, group.logp_old, group.logp_ref):
        rho = math.exp(lnew - lold)
        clipped = min(max(rho, lo), hi)
        surrogate = min(rho * a, clipped * a)
        total += surrogate - cfg.kl_beta * kl_estimate(lnew, lref)
    return total / len(group)


# --- toy-policy verification harness -------------------------------------


@dataclass
class GradientCheckReport:
    passed: bool
    max_rel_err: float
    reinforce_max_err: float
    checked_components: int
    seeds_from: int = 0
    notes: list[str] = field(default_factory=list)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


def _analytic_gradient(
    theta: np.ndarray,
    actions: np.ndarray,
    advantages: list[float],
    logp_old: np.ndarray,
    logp_ref: np.ndarray,
    cfg: GrpoConfig,
) -> np.ndarray:
    """d(objective)/d(logits) assembled from the per-term calculus:
    the surrogate contributes A*rho*grad_logpi on the unclipped branch and
    zero on a saturated clip; the KL penalty contributes
    beta*(exp(d)-1)*grad_logpi."""
    k = theta.shape[0]
    logpi = _log_softmax(theta)
    pi = np.exp(logpi)
    grad = np.zeros(k)
    lo, hi = 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps
    for i, a_idx in enumerate(actions):
        g_logpi = -pi.copy()
        g_logpi[a_idx] += 1.0
        rho = math.exp(logpi[a_idx] - logp_old[i])
        adv = advantages[i]
        clipped = min(max(rho, lo), hi)
        if rho * adv <= clipped * adv:
            grad += adv * rho * g_logpi
        elif lo < rho < hi:  # clip inactive inside the band
            grad += adv * rho * g_logpi
        d = logp_ref[i] - logpi[a_idx]
        grad += cfg.kl_beta * (math.exp(d) - 1.0) * g_logpi
    return grad / len(actions)


def _objective_at(
    theta: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    advantages: list[float],
    logp_old: np.ndarray,
    logp_ref: np.ndarray,
    cfg: GrpoConfig,
) -> float:
    logpi = _log_softmax(theta)
    group = PolicyGroup(
        rewards=tuple(float(r) for r in rewards),
        logp_new=tuple(float(logpi[a]) for a in actions),
        logp_old=tuple(float(v) for v in logp_old),
        logp_ref=tuple(float(v) for v in logp_ref),
    )
    return grpo_objective(group, advantages, cfg)


def toy_policy_check(
    num_actions: int,
    seed: int,
    group_size: int = 8,
    cfg: GrpoConfig | None = None,
    fd_step: float = 1e-5,
    rel_tol: float = 1e-4,
) -> GradientCheckReport:
    """Verify the objective on a categorical toy policy.

    (a) Central finite differences of the objective w.r.t. the logits must
        match the analytic gradient within rel_tol on components larger
        than 1e-8 in magnitude.
    (b) With beta = 0 and the new policy evaluated at the old one (rho = 1),
        the gradient must equal plain REINFORCE with the group baseline,
        (1/G) sum_i A_i * grad log pi(a_i).
    """
    if num_actions < 2:
        raise ValueError("num_actions must be at least 2")
    cfg = cfg or GrpoConfig()
    rng = np.random.default_rng(seed)
    theta_old = rng.normal(0.0, 1.0, num_actions)
    theta_ref = theta_old + rng.normal(0.0, 0.1, num_actions)
    pi_old = np.exp(_log_softmax(theta_old))
    actions = rng.choice(num_actions, size=group_size, p=pi_old)
    reward_table = rng.uniform(0.0, 1.0, num_actions)
    rewards = reward_table[actions]

    logp_old = _log_softmax(theta_old)[actions]
    logp_ref = _log_softmax(theta_ref)[actions]
    if np.unique(rewards).size == 1:
        advantages = [0.0] * group_size
    else:
        advantages = group_advantages(rewards.tolist(), cfg)

    # keep importance ratios away from the clip kinks so central differences
    # see a smooth function
    notes: list[str] = []
    theta = theta_old.copy()
    for attempt in range(200):
        theta = theta_old + rng.normal(0.0, 0.05, num_actions)
        logpi = _log_softmax(theta)
        rhos = np.exp(logpi[actions] - logp_old)
        if np.all(np.abs(rhos - (1.0 - cfg.clip_eps)) > 1e-3) and np.all(
            np.abs(rhos - (1.0 + cfg.clip_eps)) > 1e-3
        ):
            break
    else:  # pragma: no cover - practically unreachable
        notes.append("could not avoid clip boundaries; gradients may be off")

    def objective(t: np.ndarray) -> float:
        return _objective_at(t, actions, rewards, advantages, logp_old, logp_ref, cfg)

    analytic = _analytic_gradient(theta, actions, advantages, logp_old, logp_ref, cfg)
    numeric = np.zeros(num_actions)
    for j in range(num_actions):
        bump = np.zeros(num_actions)
        bump[j] = fd_step
        numeric[j] = (objective(theta + bump) - objective(theta - bump)) / (2.0 * fd_step)

    checked = 0
    max_rel_err = 0.0
    for j in range(num_actions):
        if abs(numeric[j]) <= 1e-8 and abs(analytic[j]) <= 1e-8:
            continue
        checked += 1
        denom = max(abs(numeric[j]), abs(analytic[j]))
        max_rel_err = max(max_rel_err, abs(numeric[j] - analytic[j]) / denom)

    # (b) at theta_old with beta off, the objective reduces to REINFORCE
    # with the group-mean baseline
    cfg_nobeta = GrpoConfig(
        group_size=cfg.group_size, clip_eps=cfg.clip_eps, kl_beta=0.0, std_floor=cfg.std_floor
    )

    def objective_nobeta(t: np.ndarray) -> float:
        return _objective_at(t, actions, rewards, advantages, logp_old, logp_ref, cfg_nobeta)

    pi_at_old = np.exp(_log_softmax(theta_old))
    reinforce = np.zeros(num_actions)
    for i, a_idx in enumerate(actions):
        g_logpi = -pi_at_old.copy()
        g_logpi[a_idx] += 1.0
        reinforce += advantages[i] * g_logpi
    reinforce /= group_size

    reinforce_max_err = 0.0
    for j in range(num_actions):
        bump = np.zeros(num_actions)
        bump[j] = fd_step
        fd = (objective_nobeta(theta_old + bump) - objective_nobeta(theta_old - bump)) / (2.0 * fd_step)
        scale = max(1.0, abs(reinforce[j]))
        reinforce_max_err = max(reinforce_max_err, abs(fd - reinforce[j]) / scale)

    passed = max_rel_err < rel_tol and reinforce_max_err < rel_tol and not notes
    return GradientCheckReport(
        passed=passed,
        max_rel_err=max_rel_err,
        reinforce_max_err=reinforce_max_err,
        checked_components=checked,
        seeds_from=seed,
        notes=notes,
    )
