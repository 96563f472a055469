"""Finite-horizon tabular MDPs: planning, occupancy measures and episode sampling.

Array conventions used throughout the package:

* transition kernel ``P`` has shape ``(S, A, S)``; rows may be sub-stochastic,
  missing mass meaning the episode terminates with zero further reward;
* rewards have shape ``(S, A)``;
* a policy stores its actions with shape ``(S, H)``, column ``h`` being step ``h + 1``;
* per-step occupancy ``q`` has shape ``(S, A, H)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .errors import DimensionMismatch, NonStochasticRow, RewardOutOfRange

ROW_TOL = 1e-12


@dataclass(frozen=True)
class Bernoulli:
    kind: str = field(default="Bernoulli", init=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ClippedGaussian:
    sigma: float = 0.1
    kind: str = field(default="ClippedGaussian", init=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma}


@dataclass(frozen=True)
class Fixed:
    s1: int = 0
    kind: str = field(default="Fixed", init=False)

    def state(self, episode: int) -> int:
        return self.s1

    def to_dict(self) -> dict:
        return {"kind": self.kind, "s1": self.s1}


@dataclass(frozen=True)
class Schedule:
    states: tuple[int, ...]
    kind: str = field(default="Schedule", init=False)

    def state(self, episode: int) -> int:
        # episodes are 1-based; the schedule repeats when exhausted
        return self.states[(episode - 1) % len(self.states)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "states": list(self.states)}


RewardDist = Bernoulli | ClippedGaussian
InitialStateRule = Fixed | Schedule


def _frozen(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Mdp:
    """Tabular finite-horizon environment.

    ``transitions`` and ``mean_rewards`` are stored as read-only arrays.
    Construction does not validate; use :func:`validate_mdp`.
    """

    transitions: np.ndarray
    mean_rewards: np.ndarray
    H: int
    reward_dist: RewardDist = Bernoulli()
    init: InitialStateRule = Fixed(0)

    def __post_init__(self):
        object.__setattr__(self, "transitions", _frozen(self.transitions))
        object.__setattr__(self, "mean_rewards", _frozen(self.mean_rewards))

    @property
    def S(self) -> int:
        return self.transitions.shape[0]

    @property
    def A(self) -> int:
        return self.transitions.shape[1]

    def initial_state(self, episode: int) -> int:
        return self.init.state(episode)

    @cached_property
    def _cum_transitions(self) -> np.ndarray:
        return np.cumsum(self.transitions, axis=-1)

    def to_dict(self) -> dict:
        return {
            "S": self.S,
            "A": self.A,
            "H": self.H,
            "P": self.transitions.tolist(),
            "r": self.mean_rewards.tolist(),
            "reward_dist": self.reward_dist.to_dict(),
            "init": self.init.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Mdp":
        P = np.asarray(doc["P"], dtype=float)
        r = np.asarray(doc["r"], dtype=float)
        S, A = int(doc["S"]), int(doc["A"])
        if P.shape != (S, A, S) or r.shape != (S, A):
            raise DimensionMismatch(f"P {P.shape} / r {r.shape} do not match S={S}, A={A}")
        return cls(P, r, int(doc["H"]), _reward_dist_from(doc.get("reward_dist")), _init_from(doc.get("init")))

    @classmethod
    def from_json(cls, text: str) -> "Mdp":
        return cls.from_dict(json.loads(text))


def _reward_dist_from(doc: dict | None) -> RewardDist:
    if doc is None or doc.get("kind", "Bernoulli") == "Bernoulli":
        return Bernoulli()
    if doc["kind"] == "ClippedGaussian":
        return ClippedGaussian(float(doc.get("sigma", 0.1)))
    raise ValueError(f"unknown reward distribution {doc['kind']!r}")


def _init_from(doc: dict | None) -> InitialStateRule:
    if doc is None or doc.get("kind", "Fixed") == "Fixed":
        return Fixed(int((doc or {}).get("s1", 0)))
    if doc["kind"] == "Schedule":
        return Schedule(tuple(int(s) for s in doc["states"]))
    raise ValueError(f"unknown initial-state rule {doc['kind']!r}")


def validate_mdp(mdp: Mdp) -> Mdp:
    P, r = mdp.transitions, mdp.mean_rewards
    if P.ndim != 3 or P.shape[0] != P.shape[2] or r.shape != P.shape[:2]:
        raise DimensionMismatch(f"P {P.shape} and r {r.shape} are inconsistent")
    if mdp.H < 1 or mdp.S < 1 or mdp.A < 1:
        raise DimensionMismatch("S, A and H must be positive")
    sums = P.sum(axis=-1)
    for s, a in np.ndindex(*sums.shape):
        if abs(sums[s, a] - 1.0) > ROW_TOL or (P[s, a] < 0).any():
            raise NonStochasticRow(s, a, float(sums[s, a]))
    for s, a in np.ndindex(*r.shape):
        if not 0.0 <= r[s, a] <= 1.0:
            raise RewardOutOfRange(s, a, float(r[s, a]))
    if isinstance(mdp.init, Fixed):
        initial = [mdp.init.s1]
    else:
        initial = list(mdp.init.states)
        if not initial:
            raise ValueError("empty initial-state schedule")
    if any(not 0 <= s < mdp.S for s in initial):
        raise DimensionMismatch("initial state out of range")
    return mdp


@dataclass(frozen=True)
class Policy:
    """Deterministic time-dependent policy, ``actions[s, h]`` is the action at step h+1."""

    actions: np.ndarray

    def __post_init__(self):
        acts = np.array(self.actions, dtype=np.int64)
        if acts.ndim != 2:
            raise DimensionMismatch(f"policy actions must be (S, H), got {acts.shape}")
        acts.setflags(write=False)
        object.__setattr__(self, "actions", acts)

    @property
    def S(self) -> int:
        return self.actions.shape[0]

    @property
    def H(self) -> int:
        return self.actions.shape[1]

    def __call__(self, s: int, h: int) -> int:
        return int(self.actions[s, h])

    def key(self) -> tuple[int, ...]:
        return tuple(self.actions.ravel().tolist())

    def __eq__(self, other):
        return isinstance(other, Policy) and np.array_equal(self.actions, other.actions)

    def __hash__(self):
        return hash(self.key())

    def check(self, num_actions: int) -> "Policy":
        if self.actions.size and (self.actions.min() < 0 or self.actions.max() >= num_actions):
            raise DimensionMismatch(f"policy actions outside [0, {num_actions})")
        return self


@dataclass(frozen=True)
class OccupancyMeasure:
    q: np.ndarray  # (S, A, H)
    d: np.ndarray  # (S, A)


@dataclass(frozen=True)
class Trajectory:
    """What an agent is allowed to see after one episode.

    Only the summed reward is kept; the per-step draws never leave
    :func:`sample_episode`.
    """

    states: tuple[int, ...]
    actions: tuple[int, ...]
    v_hat: float
    d_hat: np.ndarray  # (S, A) visit counts


def _check_kernel(P: np.ndarray, reward: np.ndarray | None = None) -> tuple[int, int]:
    if P.ndim != 3 or P.shape[0] != P.shape[2]:
        raise DimensionMismatch(f"kernel must be (S, A, S), got {P.shape}")
    if reward is not None and reward.shape != P.shape[:2]:
        raise DimensionMismatch(f"reward {reward.shape} does not match kernel {P.shape}")
    return P.shape[0], P.shape[1]


def backward_induction(P: np.ndarray, reward: np.ndarray, H: int) -> tuple[Policy, np.ndarray]:
    """Optimal deterministic policy and values for an arbitrary real reward.

    Returns ``(policy, V)`` with ``V`` of shape ``(S, H + 1)`` and ``V[:, H] = 0``.
    Ties go to the lowest action index.
    """
    P = np.asarray(P, dtype=float)
    reward = np.asarray(reward, dtype=float)
    S, A = _check_kernel(P, reward)
    V = np.zeros((S, H + 1))
    actions = np.zeros((S, H), dtype=np.int64)
    for h in range(H - 1, -1, -1):
        Q = reward + P @ V[:, h + 1]
        actions[:, h] = np.argmax(Q, axis=1)
        V[:, h] = Q[np.arange(S), actions[:, h]]
    return Policy(actions), V


def evaluate_policy(policy: Policy, P: np.ndarray, reward: np.ndarray) -> np.ndarray:
    """Bellman evaluation of a fixed policy; returns ``V`` of shape ``(S, H + 1)``."""
    P = np.asarray(P, dtype=float)
    reward = np.asarray(reward, dtype=float)
    S, A = _check_kernel(P, reward)
    if policy.S != S:
        raise DimensionMismatch(f"policy has {policy.S} states, kernel {S}")
    H = policy.H
    V = np.zeros((S, H + 1))
    idx = np.arange(S)
    for h in range(H - 1, -1, -1):
        a = policy.actions[:, h]
        V[:, h] = reward[idx, a] + P[idx, a] @ V[:, h + 1]
    return V


def occupancy_measure(policy: Policy, P: np.ndarray, H: int, s1: int) -> OccupancyMeasure:
    P = np.asarray(P, dtype=float)
    S, A = _check_kernel(P)
    if policy.S != S or policy.H != H:
        raise DimensionMismatch(f"policy shape {policy.actions.shape} vs (S={S}, H={H})")
    idx = np.arange(S)
    q = np.zeros((S, A, H))
    mu = np.zeros(S)
    mu[s1] = 1.0
    for h in range(H):
        a = policy.actions[:, h]
        q[idx, a, h] = mu
        mu = mu @ P[idx, a]
    return OccupancyMeasure(q, q.sum(axis=2))


def policy_value(policy: Policy, P: np.ndarray, reward: np.ndarray, s1: int) -> float:
    """Value of ``policy`` from ``s1``, computed as ``d . r`` and cross-checked by Bellman evaluation."""
    reward = np.asarray(reward, dtype=float)
    occ = occupancy_measure(policy, P, policy.H, s1)
    via_occupancy = float(np.sum(occ.d * reward))
    via_bellman = float(evaluate_policy(policy, P, reward)[s1, 0])
    if abs(via_occupancy - via_bellman) > 1e-10 * max(1.0, abs(via_bellman)):
        raise ArithmeticError(f"occupancy value {via_occupancy!r} != Bellman value {via_bellman!r}")
    return via_occupancy


def sample_episode(mdp: Mdp, policy: Policy, s1: int, rng: np.random.Generator) -> Trajectory:
    S, A, H = mdp.S, mdp.A, mdp.H
    if policy.S != S or policy.H != H:
        raise DimensionMismatch(f"policy shape {policy.actions.shape} vs (S={S}, H={H})")
    cum = mdp._cum_transitions
    means = mdp.mean_rewards
    u_next = rng.random(H)
    if isinstance(mdp.reward_dist, ClippedGaussian):
        noise = rng.standard_normal(H) * mdp.reward_dist.sigma
    else:
        u_reward = rng.random(H)
    states = [int(s1)]
    actions = []
    d_hat = np.zeros((S, A), dtype=np.int64)
    total = 0.0
    s = int(s1)
    for h in range(H):
        a = int(policy.actions[s, h])
        actions.append(a)
        d_hat[s, a] += 1
        if isinstance(mdp.reward_dist, ClippedGaussian):
            total += min(1.0, max(0.0, means[s, a] + noise[h]))
        else:
            total += 1.0 if u_reward[h] < means[s, a] else 0.0
        nxt = int(np.searchsorted(cum[s, a], u_next[h], side="right"))
        if nxt >= S:  # u landed in a rounding gap below 1.0
            nxt = int(np.flatnonzero(mdp.transitions[s, a])[-1])
        s = nxt
        states.append(s)
    d_hat.setflags(write=False)
    return Trajectory(tuple(states), tuple(actions), total, d_hat)
