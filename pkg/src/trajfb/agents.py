"""Episodic agents that learn from trajectory returns.

Every agent follows the same two-call protocol per episode::

    policy = agent.select_policy(s1, rng)
    ...play the episode...
    agent.absorb(feedback)

``feedback`` carries the visited states/actions and the summed return only.
Agents are built by :func:`make_agent` from an environment *view*; the
learning agents read nothing but ``S``, ``A``, ``H`` and, for the
known-model variants, ``transitions``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, EnumerationTooLarge, StaleFeedback
from .estimation import (
    CountTable,
    LsEstimator,
    confidence_radius,
    exploration_bonus,
    noise_scale,
    transition_estimate,
)
from .mdp import Policy, Trajectory, backward_induction

KINDS = ("OfulKnown", "TsKnown", "UcbviTs", "RsUcbviTs", "UniformRandom", "OracleOptimal")


@dataclass(frozen=True)
class AgentConfig:
    kind: str
    delta: float = 0.1
    lam: float | None = None  # None means lambda = H
    C: float = 1.0
    enumeration_cap: int = 10**6
    name: str | None = None
    # ablation knobs; 1.0 reproduces the published exploration constants
    noise_mult: float = 1.0
    bonus_mult: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown agent kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.lam is not None and not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam!r}")
        if self.C < 0:
            raise ConfigError(f"C must be non-negative, got {self.C!r}")
        if self.enumeration_cap < 1:
            raise ConfigError("enumeration_cap must be >= 1")
        if self.noise_mult < 0 or self.bonus_mult < 0:
            raise ConfigError("exploration multipliers must be non-negative")

    @property
    def id(self) -> str:
        return self.name or self.kind

    @classmethod
    def from_dict(cls, doc: dict, defaults: dict | None = None) -> "AgentConfig":
        merged = {**(defaults or {}), **doc}
        unknown = set(merged) - {"kind", "delta", "lambda", "C", "enumeration_cap", "name", "id",
                                 "noise_mult", "bonus_mult"}
        if unknown:
            raise ConfigError(f"unknown agent fields {sorted(unknown)}")
        if "kind" not in merged:
            raise ConfigError("agent config needs a 'kind'")
        try:
            return cls(
                kind=merged["kind"],
                delta=float(merged.get("delta", 0.1)),
                lam=None if merged.get("lambda") is None else float(merged["lambda"]),
                C=float(merged.get("C", 1.0)),
                enumeration_cap=int(merged.get("enumeration_cap", 10**6)),
                name=merged.get("name", merged.get("id")),
                noise_mult=float(merged.get("noise_mult", 1.0)),
                bonus_mult=float(merged.get("bonus_mult", 1.0)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class EpisodeFeedback:
    episode: int
    states: tuple[int, ...]
    actions: tuple[int, ...]
    v_hat: float

    @classmethod
    def from_trajectory(cls, episode: int, traj: Trajectory) -> "EpisodeFeedback":
        return cls(episode, traj.states, traj.actions, traj.v_hat)

    def d_hat(self, S: int, A: int) -> np.ndarray:
        d = np.zeros((S, A), dtype=np.int64)
        np.add.at(d, (np.asarray(self.states[:-1]), np.asarray(self.actions)), 1)
        return d


# ---------------------------------------------------------------------------
# policy selection rules


def enumerate_policy_table(S: int, A: int, H: int, cap: int) -> np.ndarray:
    """All deterministic policies as an ``(N, S, H)`` array, lexicographic in the flattened actions."""
    count = A ** (S * H)
    if count > cap:
        raise EnumerationTooLarge(count, cap)
    n = np.arange(count, dtype=np.int64)
    width = S * H
    powers = A ** np.arange(width - 1, -1, -1, dtype=np.int64)
    digits = (n[:, None] // powers[None, :]) % A
    return digits.astype(np.int16).reshape(count, S, H)


def batch_occupancy(table: np.ndarray, P: np.ndarray, s1: int) -> np.ndarray:
    """Summed occupancy ``d`` (flattened to length S*A) for every policy in ``table``."""
    N, S, H = table.shape
    A = P.shape[1]
    rows = np.arange(N)
    d = np.zeros((N, S, A))
    mu = np.zeros((N, S))
    mu[:, s1] = 1.0
    for h in range(H):
        nxt = np.zeros_like(mu)
        for s in range(S):
            a = table[:, s, h]
            d[rows, s, a] += mu[:, s]
            nxt += mu[:, s, None] * P[s, a]
        mu = nxt
    return d.reshape(N, S * A)


def oful_scores(D: np.ndarray, est: LsEstimator, radius: float) -> np.ndarray:
    r_hat = est.point_estimate()
    widths = np.sqrt(np.maximum(np.einsum("ni,ij,nj->n", D, est.A_inv, D), 0.0))
    return D @ r_hat + radius * widths


def oful_select_policy(
    est: LsEstimator, P: np.ndarray, radius: float, H: int, s1: int, cap: int = 10**6,
    table: np.ndarray | None = None, D: np.ndarray | None = None,
) -> Policy:
    """Exact maximiser of ``d_pi . r_hat + radius * ||d_pi||_{A^-1}`` by enumeration.

    Ties resolve to the lexicographically first policy.
    """
    S, A = P.shape[:2]
    if table is None:
        table = enumerate_policy_table(S, A, H, cap)
    if D is None:
        D = batch_occupancy(table, P, s1)
    return Policy(table[int(np.argmax(oful_scores(D, est, radius)))])


def ts_known_select_policy(
    est: LsEstimator, P: np.ndarray, v: float, H: int, rng: np.random.Generator
) -> tuple[Policy, np.ndarray, np.ndarray]:
    """Plan on the true kernel with a Gaussian-perturbed reward estimate.

    Returns the policy, the perturbed reward ``(S, A)`` and the planner's values.
    """
    S, A = P.shape[:2]
    r_tilde = (est.point_estimate() + est.sample_perturbation(v, rng)).reshape(S, A)
    policy, V = backward_induction(P, r_tilde, H)
    return policy, r_tilde, V


def ucbvi_ts_select_policy(
    est: LsEstimator, counts: CountTable, v: float, bonus: np.ndarray, H: int, rng: np.random.Generator
) -> tuple[Policy, np.ndarray, np.ndarray]:
    """Plan in the empirical model with perturbed reward plus transition bonus (no clipping)."""
    S, A = counts.S, counts.A
    r_tilde = (est.point_estimate() + est.sample_perturbation(v, rng)).reshape(S, A) + bonus
    policy, V = backward_induction(transition_estimate(counts), r_tilde, H)
    return policy, r_tilde, V


# ---------------------------------------------------------------------------
# agents


class Agent:
    kind = "base"

    def __init__(self, S: int, A: int, H: int):
        self.S, self.A, self.H = S, A, H
        self.episode = 1
        self._pending: int | None = None
        self.switched = False

    def select_policy(self, s1: int, rng: np.random.Generator) -> Policy:
        if self._pending is not None:
            raise StaleFeedback(f"episode {self._pending} was proposed but never absorbed")
        policy = self._select(s1, rng)
        self._pending = self.episode
        return policy

    def absorb(self, feedback: EpisodeFeedback) -> None:
        if self._pending is None or feedback.episode != self._pending:
            raise StaleFeedback(f"feedback for episode {feedback.episode}, expected {self._pending}")
        if len(feedback.actions) != self.H or len(feedback.states) != self.H + 1:
            raise DimensionMismatch("feedback length does not match the horizon")
        self.switched = self._absorb(feedback)
        self._pending = None
        self.episode += 1

    def _select(self, s1: int, rng: np.random.Generator) -> Policy:
        raise NotImplementedError

    def _absorb(self, feedback: EpisodeFeedback) -> bool:
        return False


class UniformRandom(Agent):
    kind = "UniformRandom"

    def _select(self, s1, rng):
        return Policy(rng.integers(self.A, size=(self.S, self.H)))


class OracleOptimal(Agent):
    kind = "OracleOptimal"

    def __init__(self, S, A, H, P, r):
        super().__init__(S, A, H)
        self.policy, _ = backward_induction(P, r, H)

    def _select(self, s1, rng):
        return self.policy


class _LsAgent(Agent):
    """Shared reward-estimation bookkeeping."""

    rarely_switching = False

    def __init__(self, S, A, H, delta=0.1, lam=None):
        super().__init__(S, A, H)
        self.delta = delta
        self.lam = float(H if lam is None else lam)
        self.est = LsEstimator(S * A, self.lam, rarely_switching=self.rarely_switching)
        self.last_reward: np.ndarray | None = None
        self.last_values: np.ndarray | None = None

    def _absorb(self, feedback):
        d_hat = feedback.d_hat(self.S, self.A)
        self.est.update(d_hat.ravel(), feedback.v_hat)
        return bool(d_hat.any())


class OfulKnown(_LsAgent):
    kind = "OfulKnown"

    def __init__(self, S, A, H, P, delta=0.1, lam=None, cap=10**6):
        super().__init__(S, A, H, delta, lam)
        self.P = np.asarray(P, dtype=float)
        self.table = enumerate_policy_table(S, A, H, cap)
        self._occupancies: dict[int, np.ndarray] = {}

    def _select(self, s1, rng):
        if s1 not in self._occupancies:
            self._occupancies[s1] = batch_occupancy(self.table, self.P, s1)
        radius = confidence_radius(self.episode - 1, self.S, self.A, self.H, self.lam, self.delta)
        return oful_select_policy(self.est, self.P, radius, self.H, s1, table=self.table, D=self._occupancies[s1])


class TsKnown(_LsAgent):
    kind = "TsKnown"

    def __init__(self, S, A, H, P, delta=0.1, lam=None, noise_mult=1.0):
        super().__init__(S, A, H, delta, lam)
        self.P = np.asarray(P, dtype=float)
        self.noise_mult = noise_mult

    def _select(self, s1, rng):
        v = self.noise_mult * noise_scale(self.episode, self.S, self.A, self.H, self.delta)
        policy, self.last_reward, self.last_values = ts_known_select_policy(self.est, self.P, v, self.H, rng)
        return policy


class UcbviTs(_LsAgent):
    kind = "UcbviTs"

    def __init__(self, S, A, H, delta=0.1, lam=None, noise_mult=1.0, bonus_mult=1.0):
        super().__init__(S, A, H, delta, lam)
        self.counts = CountTable(S, A)
        self.noise_mult, self.bonus_mult = noise_mult, bonus_mult

    def _select(self, s1, rng):
        v = self.noise_mult * noise_scale(self.episode, self.S, self.A, self.H, self.delta)
        bonus = self.bonus_mult * exploration_bonus(self.counts, self.episode - 1, self.H, self.delta)
        policy, self.last_reward, self.last_values = ucbvi_ts_select_policy(
            self.est, self.counts, v, bonus, self.H, rng
        )
        return policy

    def _absorb(self, feedback):
        self.counts.absorb(feedback.states, feedback.actions)
        return super()._absorb(feedback)


class RsUcbviTs(UcbviTs):
    """UCBVI-TS whose planning Gram matrix is refreshed only on determinant growth by 1 + C."""

    kind = "RsUcbviTs"
    rarely_switching = True

    def __init__(self, S, A, H, delta=0.1, lam=None, C=1.0, noise_mult=1.0, bonus_mult=1.0):
        super().__init__(S, A, H, delta, lam, noise_mult, bonus_mult)
        self.C = C
        self.switches = 0

    def _absorb(self, feedback):
        self.counts.absorb(feedback.states, feedback.actions)
        self.est.update(feedback.d_hat(self.S, self.A).ravel(), feedback.v_hat)
        switched = self.est.maybe_switch(self.C)
        self.switches += switched
        return switched


def make_agent(cfg: AgentConfig, env) -> Agent:
    """Build an agent, touching only the parts of ``env`` its information model allows."""
    S, A, H = env.S, env.A, env.H
    if cfg.kind == "UniformRandom":
        return UniformRandom(S, A, H)
    if cfg.kind == "OracleOptimal":
        return OracleOptimal(S, A, H, env.transitions, env.mean_rewards)
    if cfg.kind == "OfulKnown":
        try:
            return OfulKnown(S, A, H, env.transitions, cfg.delta, cfg.lam, cfg.enumeration_cap)
        except EnumerationTooLarge as exc:
            raise EnumerationTooLarge(exc.count, exc.cap, cfg.id) from None
    if cfg.kind == "TsKnown":
        return TsKnown(S, A, H, env.transitions, cfg.delta, cfg.lam, cfg.noise_mult)
    if cfg.kind == "UcbviTs":
        return UcbviTs(S, A, H, cfg.delta, cfg.lam, cfg.noise_mult, cfg.bonus_mult)
    if cfg.kind == "RsUcbviTs":
        return RsUcbviTs(S, A, H, cfg.delta, cfg.lam, cfg.C, cfg.noise_mult, cfg.bonus_mult)
    raise ConfigError(f"unknown agent kind {cfg.kind!r}")
