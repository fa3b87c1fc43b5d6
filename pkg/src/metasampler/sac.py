"""Soft actor-critic meta-training of the sampling policy.

The environment is cascade ensemble training: a state is the error-histogram
meta-state, an action is the Gaussian center for the next member's subset,
and the reward is the change in validation AUCPRC contributed by that member
(so episode returns telescope to final minus initial score).

Actions are squashed to [0, 1] via a = (tanh(u) + 1) / 2 with u drawn from a
state-conditioned Gaussian; log-densities carry the change-of-variables term
log(0.5 * (1 - tanh(u)^2)), evaluated in a softplus form that stays finite
for saturated u. One critic network is used, plus a value network with a
Polyak-averaged target copy.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensemble import train_ensemble
from .errors import NumericalError
from .learners import DecisionTree
from .neural import (
    AdamState,
    Mlp,
    adam_step,
    decay_learning_rate,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_from_document,
    mlp_to_document,
    soft_update,
)
from .rng import as_generator, as_seed_sequence

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
LOG_2PI = math.log(2.0 * math.pi)
SAMPLER_FORMAT_VERSION = 1
HIDDEN_WIDTH = 50


@dataclass(frozen=True)
class SacConfig:
    """Meta-training hyperparameters; defaults are the reference values."""

    gamma: float = 0.99
    tau: float = 0.01
    alpha: float = 0.1
    lr: float = 1e-3
    lr_decay_steps: int = 10
    lr_decay_ratio: float = 0.99
    batch_size: int = 64
    replay_capacity: int = 1000
    gradient_steps: int = 1000
    random_steps: int = 500
    episodes: int | None = None
    ensemble_size: int = 10
    bins: int = 5
    sigma: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not self.lr > 0.0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.lr_decay_steps < 1 or not 0.0 < self.lr_decay_ratio <= 1.0:
            raise ValueError("invalid learning-rate decay settings")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be positive, got {self.batch_size}")
        if self.replay_capacity < self.batch_size:
            raise ValueError("replay capacity must be at least the batch size")
        if self.gradient_steps < 0 or self.random_steps < 0:
            raise ValueError("step budgets must be non-negative")
        if self.episodes is not None and self.episodes < 1:
            raise ValueError(f"episodes must be positive when set, got {self.episodes}")
        if self.ensemble_size < 2:
            raise ValueError("meta-training needs ensembles of at least 2 members")
        if self.bins < 1:
            raise ValueError(f"bins must be positive, got {self.bins}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def state_size(self) -> int:
        return 2 * self.bins


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: float
    reward: float
    next_state: np.ndarray
    terminal: bool


@dataclass(frozen=True)
class Batch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray


class ReplayMemory:
    """Fixed-capacity FIFO ring buffer of transitions."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._buffer = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._buffer)

    def push(self, transition: Transition) -> None:
        if len(self._buffer) < self.capacity:
            self._buffer.append(transition)
        else:
            self._buffer[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int, rng) -> Batch:
        if batch_size > len(self._buffer):
            raise ValueError(f"cannot sample {batch_size} of {len(self._buffer)} transitions")
        rng = as_generator(rng)
        idx = rng.choice(len(self._buffer), size=batch_size, replace=False)
        rows = [self._buffer[i] for i in idx]
        return Batch(
            states=np.stack([t.state for t in rows]),
            actions=np.array([t.action for t in rows]),
            rewards=np.array([t.reward for t in rows]),
            next_states=np.stack([t.next_state for t in rows]),
            terminals=np.array([float(t.terminal) for t in rows]),
        )


@dataclass
class MetaSampler:
    """Trained sampling policy plus the histogram/sampling parameters it expects."""

    policy: Mlp
    bins: int
    sigma: float

    def __post_init__(self):
        sizes = self.policy.layer_sizes
        if sizes[0] != 2 * self.bins:
            raise ValueError(f"policy input {sizes[0]} does not match 2 * {self.bins} bins")
        if sizes[-1] != 2:
            raise ValueError("policy must end in two heads (mean, log-std)")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def random_sampler(bins: int, sigma: float, seed) -> MetaSampler:
    """Freshly initialized, untrained sampling policy (an ablation baseline)."""
    policy = init_mlp([2 * bins, HIDDEN_WIDTH, 2], ["relu", "linear"], seed)
    return MetaSampler(policy=policy, bins=bins, sigma=sigma)


@dataclass
class SacNets:
    policy: Mlp
    q: Mlp
    v: Mlp
    target_v: Mlp


@dataclass
class SacOptimizers:
    policy: AdamState
    q: AdamState
    v: AdamState


def _softplus(x):
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _log_half_jacobian(u):
    """log(0.5 * (1 - tanh(u)^2)), finite even where tanh saturates."""
    return math.log(2.0) - 2.0 * u - 2.0 * _softplus(-2.0 * u)


def _policy_heads(policy: Mlp, states):
    out, cache = mlp_forward(policy, states)
    mean = out[:, 0]
    raw_log_std = out[:, 1]
    log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
    return mean, raw_log_std, log_std, cache


def _sample_with_noise(policy: Mlp, states, eps):
    """Reparameterized squashed sample for fixed standard-normal noise."""
    mean, raw_log_std, log_std, cache = _policy_heads(policy, states)
    std = np.exp(log_std)
    u = mean + std * eps
    tanh_u = np.tanh(u)
    actions = 0.5 * (tanh_u + 1.0)
    log_prob = -0.5 * eps * eps - log_std - 0.5 * LOG_2PI - _log_half_jacobian(u)
    return {
        "mean": mean,
        "raw_log_std": raw_log_std,
        "log_std": log_std,
        "std": std,
        "u": u,
        "tanh_u": tanh_u,
        "actions": actions,
        "log_prob": log_prob,
        "cache": cache,
    }


def sample_action(sampler: MetaSampler, state, seed):
    """Draw one action from the squashed policy; returns (action, log_prob)."""
    rng = as_generator(seed)
    state = np.asarray(state, dtype=np.float64)
    eps = rng.standard_normal(1)
    sample = _sample_with_noise(sampler.policy, state[None, :], eps)
    return float(sample["actions"][0]), float(sample["log_prob"][0])


def deterministic_action(sampler: MetaSampler, state) -> float:
    """Evaluation-time action: squashed mean head, no noise."""
    state = np.asarray(state, dtype=np.float64)
    mean, _, _, _ = _policy_heads(sampler.policy, state[None, :])
    return float(0.5 * (np.tanh(mean[0]) + 1.0))


def action_log_prob(sampler: MetaSampler, state, action: float) -> float:
    """Log-density of a given action in (0, 1) under the current policy."""
    if not 0.0 < action < 1.0:
        raise ValueError(f"interior action required, got {action}")
    state = np.asarray(state, dtype=np.float64)
    mean, _, log_std, _ = _policy_heads(sampler.policy, state[None, :])
    u = math.atanh(2.0 * action - 1.0)
    eps = (u - mean[0]) / np.exp(log_std[0])
    return float(
        -0.5 * eps * eps - log_std[0] - 0.5 * LOG_2PI - _log_half_jacobian(u)
    )


class PolicyActionSource:
    """Adapts a MetaSampler to the ensemble action-source interface."""

    def __init__(self, sampler: MetaSampler, seed=None, deterministic=False):
        self._sampler = sampler
        self._deterministic = deterministic
        if not deterministic and seed is None:
            raise ValueError("stochastic policy actions need a seed")
        self._rng = as_generator(seed) if seed is not None else None

    def action(self, state) -> float:
        if self._deterministic:
            return deterministic_action(self._sampler, state)
        action, _ = sample_action(self._sampler, state, self._rng)
        return action


def q_loss_and_grads(q_net: Mlp, target_v_net: Mlp, batch: Batch, gamma: float):
    """Critic regression onto r + gamma * (1 - terminal) * V_target(s')."""
    v_next, _ = mlp_forward(target_v_net, batch.next_states)
    targets = batch.rewards + gamma * (1.0 - batch.terminals) * v_next[:, 0]
    q_in = np.column_stack((batch.states, batch.actions))
    q_pred, cache = mlp_forward(q_net, q_in)
    diff = q_pred[:, 0] - targets
    loss = 0.5 * float(np.mean(diff * diff))
    grads, _ = mlp_backward(q_net, cache, (diff / diff.size)[:, None])
    return loss, grads


def policy_loss_and_grads(policy: Mlp, q_net: Mlp, states, eps, alpha: float):
    """Reparameterized actor loss mean(alpha * log pi - Q), gradients for the policy only.

    Gradients flow through the fresh action into the critic's action input and
    through the log-density; the critic's own parameters are left alone.
    Returns (loss, grads, aux) with aux carrying the sampled actions, their
    log-probs and critic values for reuse in the value target.
    """
    sample = _sample_with_noise(policy, states, eps)
    q_in = np.column_stack((states, sample["actions"]))
    q_vals, q_cache = mlp_forward(q_net, q_in)
    q_vals = q_vals[:, 0]
    n = len(q_vals)
    loss = float(np.mean(alpha * sample["log_prob"] - q_vals))

    # d(loss)/d(action) via the critic's input gradient
    _, q_input_grad = mlp_backward(q_net, q_cache, np.full((n, 1), -1.0 / n))
    dloss_daction = q_input_grad[:, -1]

    tanh_u = sample["tanh_u"]
    dact_du = 0.5 * (1.0 - tanh_u * tanh_u)
    dloss_du = (alpha / n) * (2.0 * tanh_u) + dloss_daction * dact_du
    dloss_dmean = dloss_du
    dloss_dlogstd = -alpha / n + dloss_du * sample["std"] * eps
    clamp_active = (sample["raw_log_std"] > LOG_STD_MIN) & (sample["raw_log_std"] < LOG_STD_MAX)
    head_grads = np.column_stack((dloss_dmean, dloss_dlogstd * clamp_active))
    grads, _ = mlp_backward(policy, sample["cache"], head_grads)
    aux = {"actions": sample["actions"], "log_prob": sample["log_prob"], "q_values": q_vals}
    return loss, grads, aux


def v_loss_and_grads(v_net: Mlp, states, v_targets):
    """Value regression onto the entropy-adjusted critic value (targets held fixed)."""
    v_pred, cache = mlp_forward(v_net, states)
    diff = v_pred[:, 0] - v_targets
    loss = 0.5 * float(np.mean(diff * diff))
    grads, _ = mlp_backward(v_net, cache, (diff / diff.size)[:, None])
    return loss, grads


def sac_update(replay: ReplayMemory, nets: SacNets, optim: SacOptimizers,
               config: SacConfig, rng) -> dict:
    """One gradient update of critic, value and policy plus the target refresh.

    Order: critic step first; then one fresh policy sample shared by the value
    target and the actor loss (both seeing the updated critic); value step,
    policy step, Polyak target update, and one decay tick per optimizer.
    """
    rng = as_generator(rng)
    batch = replay.sample(config.batch_size, rng)

    q_loss, q_grads = q_loss_and_grads(nets.q, nets.target_v, batch, config.gamma)
    adam_step(nets.q.parameters(), q_grads, optim.q)

    eps = rng.standard_normal(config.batch_size)
    policy_loss, policy_grads, aux = policy_loss_and_grads(
        nets.policy, nets.q, batch.states, eps, config.alpha
    )
    v_targets = aux["q_values"] - config.alpha * aux["log_prob"]
    v_loss, v_grads = v_loss_and_grads(nets.v, batch.states, v_targets)

    adam_step(nets.v.parameters(), v_grads, optim.v)
    adam_step(nets.policy.parameters(), policy_grads, optim.policy)
    soft_update(nets.target_v, nets.v, config.tau)
    for state in (optim.q, optim.v, optim.policy):
        decay_learning_rate(state, config.lr_decay_steps, config.lr_decay_ratio)

    losses = {"q_loss": q_loss, "v_loss": v_loss, "policy_loss": policy_loss}
    if not all(math.isfinite(v) for v in losses.values()):
        raise NumericalError(f"non-finite SAC losses: {losses}")
    return losses


class _EpisodeActions:
    """Uniform random actions for warmup steps, policy samples afterwards."""

    def __init__(self, sampler, rng, first_step: int, random_steps: int):
        self._sampler = sampler
        self._rng = rng
        self._step = first_step
        self._random_steps = random_steps

    def action(self, state) -> float:
        warmup = self._sampler is None or self._step < self._random_steps
        self._step += 1
        if warmup:
            return float(self._rng.random())
        action, _ = sample_action(self._sampler, state, self._rng)
        return action


def run_episode(task, sampler, config: SacConfig, replay: ReplayMemory, seed,
                env_step_offset: int = 0, learner_factory=DecisionTree, after_step=None):
    """Train one cascade episode, appending its transitions to the replay buffer.

    `task` is a (train, valid) dataset pair. With sampler None every action is
    uniform random; otherwise actions are uniform while the global step index
    (env_step_offset plus the step within this episode) is below
    config.random_steps, and policy samples afterwards. Returns the episode's
    EnsembleStep trace; rewards telescope to final minus initial validation
    AUCPRC by construction.
    """
    train, valid = task
    action_ss, subset_ss = as_seed_sequence(seed).spawn(2)
    actions = _EpisodeActions(
        sampler, as_generator(action_ss), env_step_offset, config.random_steps
    )

    def on_step(step):
        replay.push(
            Transition(
                state=step.state,
                action=step.action,
                reward=step.reward,
                next_state=step.next_state,
                terminal=step.terminal,
            )
        )
        if after_step is not None:
            after_step(step)

    _, steps = train_ensemble(
        train,
        valid,
        actions,
        sigma=config.sigma,
        bins=config.bins,
        n_members=config.ensemble_size,
        learner_factory=learner_factory,
        seed=subset_ss,
        on_step=on_step,
    )
    return steps


def meta_train(tasks, config: SacConfig, seed, learner_factory=DecisionTree,
               on_step=None) -> MetaSampler:
    """Train the sampling policy over one or more (train, valid) tasks.

    Episodes visit tasks round-robin (episode i uses task i mod n_tasks). The
    first config.random_steps environment steps take uniform actions with no
    learning; after that every environment step is followed by exactly one
    gradient update until config.gradient_steps updates have run. Episodes
    always run to completion. An explicit config.episodes caps the episode
    count. `on_step` receives (episode, step_in_episode, task_index, step).
    """
    tasks = list(tasks)
    if not tasks:
        raise ValueError("need at least one task")
    init_ss, update_ss, episode_root = as_seed_sequence(seed).spawn(3)
    policy_ss, q_ss, v_ss = init_ss.spawn(3)

    state_size = config.state_size
    nets = SacNets(
        policy=init_mlp([state_size, HIDDEN_WIDTH, 2], ["relu", "linear"], policy_ss),
        q=init_mlp([state_size + 1, HIDDEN_WIDTH, HIDDEN_WIDTH, 1],
                   ["relu", "relu", "linear"], q_ss),
        v=init_mlp([state_size, HIDDEN_WIDTH, HIDDEN_WIDTH, 1],
                   ["relu", "relu", "linear"], v_ss),
        target_v=None,
    )
    nets.target_v = nets.v.copy()
    optim = SacOptimizers(
        policy=AdamState.for_params(nets.policy.parameters(), config.lr),
        q=AdamState.for_params(nets.q.parameters(), config.lr),
        v=AdamState.for_params(nets.v.parameters(), config.lr),
    )
    replay = ReplayMemory(config.replay_capacity)
    update_rng = as_generator(update_ss)
    sampler = MetaSampler(policy=nets.policy, bins=config.bins, sigma=config.sigma)

    env_steps = 0
    updates = 0
    episode = 0
    while updates < config.gradient_steps:
        if config.episodes is not None and episode >= config.episodes:
            break
        task_index = episode % len(tasks)
        step_in_episode = 0

        def after_step(step):
            nonlocal env_steps, updates, step_in_episode
            env_steps += 1
            if (
                env_steps > config.random_steps
                and updates < config.gradient_steps
                and len(replay) >= config.batch_size
            ):
                sac_update(replay, nets, optim, config, update_rng)
                updates += 1
            if on_step is not None:
                on_step(episode, step_in_episode, task_index, step)
            step_in_episode += 1

        run_episode(
            tasks[task_index],
            sampler,
            config,
            replay,
            episode_root.spawn(1)[0],
            env_step_offset=env_steps,
            learner_factory=learner_factory,
            after_step=after_step,
        )
        episode += 1
    return sampler


def sampler_to_document(sampler: MetaSampler) -> dict:
    return {
        "format_version": SAMPLER_FORMAT_VERSION,
        "bins": sampler.bins,
        "sigma": sampler.sigma,
        "policy": mlp_to_document(sampler.policy),
    }


def sampler_from_document(doc: dict) -> MetaSampler:
    version = doc.get("format_version")
    if version != SAMPLER_FORMAT_VERSION:
        raise ValueError(f"unsupported sampler format version {version!r}")
    return MetaSampler(
        policy=mlp_from_document(doc["policy"]),
        bins=int(doc["bins"]),
        sigma=float(doc["sigma"]),
    )


def save_sampler(sampler: MetaSampler, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(sampler_to_document(sampler), indent=2, sort_keys=True))


def load_sampler(path) -> MetaSampler:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such sampler file: {path}")
    return sampler_from_document(json.loads(path.read_text()))
