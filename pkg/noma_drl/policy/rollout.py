"""
Policy Rollout Module

Masked action distributions, episode rollouts and trajectory log-probabilities.
A trajectory's probability factorizes over its steps:
    log p(zeta | S) = sum_t log p(a_t | s_t)
Masked actions get logit -inf, hence probability exactly 0 and no gradient.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import torch

from ..environment.episode import (
    Action,
    EpisodeState,
    apply_action,
    build_state,
    legal_mask,
    reset,
)
from ..environment.network import NetworkInstance
from ..exceptions import DegenerateMask, IllegalAction, IllegalTrajectory
from .network import PolicyParameters

SAMPLE = "sample"
GREEDY = "greedy"


@dataclass(frozen=True)
class Trajectory:
    """
    One episode as stored in replay memory.

    Attributes:
        instance_seed: Seed that regenerates the NetworkInstance
        actions: Online (sampled) action sequence, length N
        return_online: Sum rate R of the online assignment in bit/s
        return_baseline: Sum rate R^bl of the baseline assignment in bit/s
        baseline_actions: Greedy baseline action sequence
        behavior_log_prob: log p(actions) under the policy that collected them
        step_reward_sum: Per-step rewards of the online actions, summed
    """
    instance_seed: int
    actions: Tuple[Action, ...]
    return_online: float = 0.0
    return_baseline: float = 0.0
    baseline_actions: Tuple[Action, ...] = ()
    behavior_log_prob: float = 0.0
    step_reward_sum: float = 0.0

    @property
    def advantage(self) -> float:
        return self.return_online - self.return_baseline


def masked_log_softmax(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Log-probabilities over the last axis with masked-out entries at -inf."""
    return torch.log_softmax(logits.masked_fill(~mask, float("-inf")), dim=-1)


def _state_input(state: EpisodeState, n_features: int) -> torch.Tensor:
    return torch.from_numpy(build_state(state, n_features))


def forward(params: PolicyParameters, state: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """
    Action distribution of one state.

    Args:
        params: Policy
        state: (N, K, F) state tensor
        mask: (N, K) legal-action grid

    Returns:
        (N*K,) probabilities; masked actions are exactly 0

    Raises:
        DegenerateMask: No action is legal
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise DegenerateMask("every action is masked out")
    with torch.no_grad():
        logits = params.logits(torch.as_tensor(state, dtype=torch.float64)[None])[0]
        log_probs = masked_log_softmax(logits, torch.from_numpy(mask.reshape(-1)))
    return log_probs.exp().numpy()


def rollout(params: PolicyParameters, instance: NetworkInstance, mode: str = SAMPLE,
            rng_seed: int = 0) -> Tuple[Tuple[Action, ...], float]:
    """
    Assign every user of an instance with the policy.

    Args:
        params: Policy
        instance: Scenario
        mode: "sample" draws from the distribution, "greedy" takes the most
            probable action (ties to the lowest action index)
        rng_seed: Sampling seed, unused in greedy mode

    Returns:
        (actions, log_prob) with log_prob = sum_t log p(a_t | s_t)
    """
    if mode not in (SAMPLE, GREEDY):
        raise ValueError(f"mode must be '{SAMPLE}' or '{GREEDY}', got {mode!r}")

    rng = np.random.default_rng(int(rng_seed))
    n_features = params.arch.input_dims[2]
    k = instance.n_channels
    state = reset(instance)
    actions: List[Action] = []
    total = 0.0

    with torch.no_grad():
        while not state.is_terminal:
            mask = legal_mask(state).reshape(-1)
            logits = params.logits(_state_input(state, n_features)[None])[0]
            log_probs = masked_log_softmax(logits, torch.from_numpy(mask)).numpy()
            if mode == GREEDY:
                index = int(np.argmax(log_probs))
            else:
                probs = np.exp(log_probs)
                index = int(rng.choice(probs.size, p=probs / probs.sum()))
            total += float(log_probs[index])
            action = Action.from_index(index, k)
            actions.append(action)
            state = apply_action(state, action)

    return tuple(actions), total


def trajectory_log_probs(params: PolicyParameters, action_sequences: Sequence[Sequence[Action]],
                         instances: Sequence[NetworkInstance]) -> torch.Tensor:
    """
    Differentiable log-probabilities of a batch of action sequences.

    Every episode is replayed to rebuild its states and masks; all B*N
    states then go through the network in one forward pass.

    Args:
        params: Policy
        action_sequences: B action sequences
        instances: The B matching instances

    Returns:
        (B,) tensor attached to the parameters' graph

    Raises:
        IllegalTrajectory: A sequence has the wrong length or an action is
            illegal when replayed
    """
    if len(action_sequences) != len(instances):
        raise ValueError(f"{len(action_sequences)} action sequences for {len(instances)} instances")

    n_features = params.arch.input_dims[2]
    states, masks, indices = [], [], []
    for b, (actions, instance) in enumerate(zip(action_sequences, instances)):
        if len(actions) != instance.n_users:
            raise IllegalTrajectory(f"trajectory {b} has {len(actions)} actions for {instance.n_users} users")
        state = reset(instance)
        for action in actions:
            states.append(build_state(state, n_features))
            masks.append(legal_mask(state).reshape(-1))
            indices.append(action.index(instance.n_channels))
            try:
                state = apply_action(state, action)
            except IllegalAction as exc:
                raise IllegalTrajectory(f"trajectory {b}, step {state.step}: {exc}") from exc

    logits = params.logits(torch.from_numpy(np.stack(states)))
    log_probs = masked_log_softmax(logits, torch.from_numpy(np.stack(masks)))
    taken = log_probs.gather(1, torch.tensor(indices).unsqueeze(1)).squeeze(1)
    return taken.reshape(len(instances), -1).sum(dim=1)


def log_prob(params: PolicyParameters, traj: Trajectory, instance: NetworkInstance) -> float:
    """log p(traj.actions | instance) under params, by replaying the episode."""
    with torch.no_grad():
        return float(trajectory_log_probs(params, [traj.actions], [instance])[0])


def grad_weighted_log_prob(params: PolicyParameters, batch: Sequence[Tuple[Trajectory, float]],
                           instances: Sequence[NetworkInstance]) -> List[torch.Tensor]:
    """
    Mean advantage-weighted gradient of the trajectory log-probabilities.

        (1/|batch|) sum_i advantage_i * grad log p(zeta_i | S_i)

    Args:
        params: Policy
        batch: (trajectory, advantage) pairs
        instances: Matching instances

    Returns:
        One gradient tensor per parameter, in parameters() order
    """
    if not batch:
        raise ValueError("batch must not be empty")
    advantages = torch.tensor([adv for _, adv in batch], dtype=torch.float64)
    log_probs = trajectory_log_probs(params, [traj.actions for traj, _ in batch], instances)
    objective = (advantages * log_probs).mean()
    return list(torch.autograd.grad(objective, list(params.module.parameters())))
