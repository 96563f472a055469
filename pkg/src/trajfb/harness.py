"""Seeded experiment runner: environments, exact regret accounting, CSV output and summaries."""
from __future__ import annotations

import csv
import io
import json
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .agents import AgentConfig, EpisodeFeedback, make_agent
from .errors import ConfigError, EmptyInput, InvalidSpec
from .mdp import ClippedGaussian, Fixed, Mdp, backward_induction, policy_value, sample_episode, validate_mdp

CSV_COLUMNS = ("agent", "seed", "episode", "v_opt", "v_pi", "regret", "cum_regret", "v_hat", "switched", "wall_time_ns")

# stream purposes for key derivation; never renumber
PURPOSE = {"agent": 1, "env": 2}


def derive_rng(seed: int, agent_id: str, episode: int, purpose: str) -> np.random.Generator:
    """Independent stream for one (seed, agent, episode, purpose) cell.

    The key is ``[seed, crc32(agent_id), episode, purpose code]`` fed to
    ``numpy.random.SeedSequence``, so streams depend on the agent's id rather
    than its position in the config.
    """
    key = [int(seed), zlib.crc32(agent_id.encode()), int(episode), PURPOSE[purpose]]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


# ---------------------------------------------------------------------------
# environments


def random_dense(S: int, A: int, H: int, seed: int = 0) -> Mdp:
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(S), size=(S, A))
    # renormalise so every row sums to one to machine precision
    P /= P.sum(axis=-1, keepdims=True)
    r = rng.uniform(0.0, 1.0, size=(S, A))
    return Mdp(P, r, H)


def chain(S: int, H: int, slip: float = 0.1) -> Mdp:
    """RiverSwim-style chain. Action 0 ("left") resets to s0, action 1 ("right") advances w.p. 1 - slip."""
    P = np.zeros((S, 2, S))
    r = np.zeros((S, 2))
    for s in range(S):
        P[s, 0, 0] = 1.0
        nxt = min(s + 1, S - 1)
        P[s, 1, nxt] += 1.0 - slip
        P[s, 1, s] += slip
    r[S - 1, 1] = 1.0
    r[0, 0] = 0.01
    return Mdp(P, r, H)


def two_room(size: int, H: int, slip: float = 0.1) -> Mdp:
    """Two ``size x size`` rooms side by side joined by a one-cell door in the middle row.

    Actions are up/down/left/right; with probability ``slip`` the agent stays put.
    Start in the top-left corner of the left room, reward 1 in the bottom-right
    corner of the right room.
    """
    width = 2 * size + 1
    door_row = size // 2
    cells = [(row, col) for row in range(size) for col in range(width)
             if col != size or row == door_row]
    index = {c: i for i, c in enumerate(cells)}
    S, A = len(cells), 4
    moves = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    P = np.zeros((S, A, S))
    r = np.zeros((S, A))
    for (row, col), s in index.items():
        for a, (dr, dc) in enumerate(moves):
            target = index.get((row + dr, col + dc), s)
            P[s, a, target] += 1.0 - slip
            P[s, a, s] += slip
    r[index[(size - 1, width - 1)], :] = 1.0
    return Mdp(P, r, H, init=Fixed(index[(0, 0)]))


def generate_env(spec: dict) -> Mdp:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidSpec("environment spec must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "RandomDense":
            S, A, H = int(spec["S"]), int(spec["A"]), int(spec["H"])
            if min(S, A, H) < 1:
                raise InvalidSpec("S, A, H must be positive")
            mdp = random_dense(S, A, H, int(spec.get("seed", 0)))
        elif kind == "Chain":
            S, H, slip = int(spec["S"]), int(spec["H"]), float(spec.get("slip", 0.1))
            if S < 2 or H < 1 or not 0.0 <= slip < 1.0:
                raise InvalidSpec("Chain needs S >= 2, H >= 1, slip in [0, 1)")
            mdp = chain(S, H, slip)
        elif kind == "TwoRoom":
            size, H, slip = int(spec.get("size", 2)), int(spec["H"]), float(spec.get("slip", 0.1))
            if size < 1 or H < 1 or not 0.0 <= slip < 1.0:
                raise InvalidSpec("TwoRoom needs size >= 1, H >= 1, slip in [0, 1)")
            mdp = two_room(size, H, slip)
        elif kind == "Mdp":
            mdp = Mdp.from_dict(spec["mdp"])
        elif kind == "File":
            mdp = Mdp.from_json(Path(spec["path"]).read_text())
        else:
            raise InvalidSpec(f"unknown environment kind {kind!r}")
    except KeyError as exc:
        raise InvalidSpec(f"environment spec is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(str(exc)) from exc
    if kind in ("RandomDense", "Chain", "TwoRoom"):
        dist = spec.get("reward_dist")
        if dist and dist.get("kind") == "ClippedGaussian":
            mdp = Mdp(mdp.transitions, mdp.mean_rewards, mdp.H, ClippedGaussian(float(dist.get("sigma", 0.1))), mdp.init)
        if "s1" in spec:
            mdp = Mdp(mdp.transitions, mdp.mean_rewards, mdp.H, mdp.reward_dist, Fixed(int(spec["s1"])))
    try:
        return validate_mdp(mdp)
    except ValueError as exc:
        raise InvalidSpec(str(exc)) from exc


# ---------------------------------------------------------------------------
# configuration and records


@dataclass(frozen=True)
class ExperimentConfig:
    env: dict
    agents: tuple[AgentConfig, ...]
    K: int
    seeds: tuple[int, ...]
    output: str | None = None
    record_wall_time: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        if not self.agents:
            raise ConfigError("at least one agent is required")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"agent ids must be unique, got {ids}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {"env", "agents", "K", "seeds", "delta", "lambda", "C", "output", "record_wall_time"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        for key in ("env", "agents", "K", "seeds"):
            if key not in doc:
                raise ConfigError(f"config is missing {key!r}")
        overrides = {k: doc[k] for k in ("delta", "lambda", "C") if k in doc}
        agents = []
        for a in doc["agents"]:
            a = {"kind": a} if isinstance(a, str) else a
            agents.append(AgentConfig.from_dict(a, overrides))
        try:
            return cls(
                env=doc["env"],
                agents=tuple(agents),
                K=int(doc["K"]),
                seeds=tuple(int(s) for s in doc["seeds"]),
                output=doc.get("output"),
                record_wall_time=bool(doc.get("record_wall_time", False)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)


@dataclass(frozen=True)
class RegretRecord:
    agent: str
    seed: int
    episode: int
    v_opt: float
    v_pi: float
    regret: float
    cum_regret: float
    v_hat: float
    switched: bool
    wall_time_ns: int = 0

    def row(self) -> list[str]:
        f = _fmt
        return [self.agent, str(self.seed), str(self.episode), f(self.v_opt), f(self.v_pi), f(self.regret),
                f(self.cum_regret), f(self.v_hat), str(int(self.switched)), str(self.wall_time_ns)]


def _fmt(x: float) -> str:
    return "%.17g" % x


@dataclass
class RunTrace:
    """Per-episode data the lemma checkers need; never includes per-step rewards."""

    agent: str
    kind: str
    S: int
    A: int
    H: int
    lam: float
    C: float
    d_hats: list[np.ndarray] = field(default_factory=list)
    switched: list[bool] = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.d_hats)


# ---------------------------------------------------------------------------
# running


def run_cell(mdp: Mdp, agent_cfg: AgentConfig, seed: int, K: int,
             record_wall_time: bool = False, trace: RunTrace | None = None,
             agent=None) -> list[RegretRecord]:
    """Run one (agent, seed) cell for K episodes and return its records in episode order."""
    agent = agent if agent is not None else make_agent(agent_cfg, mdp)
    P, r = mdp.transitions, mdp.mean_rewards
    v_star: dict[int, float] = {}
    records = []
    cum = 0.0
    for k in range(1, K + 1):
        s1 = mdp.initial_state(k)
        if s1 not in v_star:
            _, V = backward_induction(P, r, mdp.H)
            v_star[s1] = float(V[s1, 0])
        agent_rng = derive_rng(seed, agent_cfg.id, k, "agent")
        t0 = time.perf_counter_ns()
        policy = agent.select_policy(s1, agent_rng)
        t1 = time.perf_counter_ns()
        v_pi = policy_value(policy, P, r, s1)
        traj = sample_episode(mdp, policy, s1, derive_rng(seed, agent_cfg.id, k, "env"))
        t2 = time.perf_counter_ns()
        agent.absorb(EpisodeFeedback.from_trajectory(k, traj))
        t3 = time.perf_counter_ns()
        regret = v_star[s1] - v_pi
        cum += regret
        wall = (t1 - t0) + (t3 - t2) if record_wall_time else 0
        records.append(RegretRecord(agent_cfg.id, seed, k, v_star[s1], v_pi, regret, cum, traj.v_hat,
                                    agent.switched, wall))
        if trace is not None:
            trace.d_hats.append(np.asarray(traj.d_hat).ravel().copy())
            trace.switched.append(agent.switched)
    return records


def _cell_job(args) -> list[RegretRecord]:
    env_spec, agent_cfg, seed, K, record_wall_time = args
    return run_cell(generate_env(env_spec), agent_cfg, seed, K, record_wall_time)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> Iterator[RegretRecord]:
    """Yield records of every (agent, seed) cell, ordered by (agent id, seed, episode).

    Cells are independent; with ``threads > 1`` they run in worker processes.
    """
    mdp = generate_env(cfg.env)
    # surface configuration and feasibility problems before any episode runs
    for a in cfg.agents:
        make_agent(a, mdp)
    cells = sorted(((a, s) for a in cfg.agents for s in cfg.seeds), key=lambda c: (c[0].id, c[1]))
    if threads <= 1:
        for a, s in cells:
            yield from run_cell(mdp, a, s, cfg.K, cfg.record_wall_time)
        return
    jobs = [(cfg.env, a, s, cfg.K, cfg.record_wall_time) for a, s in cells]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for records in pool.map(_cell_job, jobs):
            yield from records


def write_csv(records: Iterable[RegretRecord], path: str | Path | None = None) -> str | None:
    """Write records as CSV to ``path``; with no path, return the CSV text."""
    buf = io.StringIO() if path is None else open(path, "w", newline="")
    try:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in records:
            w.writerow(rec.row())
        if path is None:
            return buf.getvalue()
    finally:
        buf.close()
    return None


def read_csv(path: str | Path) -> list[RegretRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigError(f"unexpected CSV header {reader.fieldnames}")
        return [
            RegretRecord(row["agent"], int(row["seed"]), int(row["episode"]), float(row["v_opt"]),
                         float(row["v_pi"]), float(row["regret"]), float(row["cum_regret"]),
                         float(row["v_hat"]), row["switched"] == "1", int(row["wall_time_ns"]))
            for row in reader
        ]


# ---------------------------------------------------------------------------
# summaries


def sqrt_k_coefficient(episodes: np.ndarray, cum_regret: np.ndarray) -> float:
    """Least-squares slope of cumulative regret against sqrt(k), through the origin."""
    x = np.sqrt(np.asarray(episodes, dtype=float))
    y = np.asarray(cum_regret, dtype=float)
    return float(x @ y / (x @ x))


def summarize(records: Iterable[RegretRecord]) -> dict:
    by_agent: dict[str, list[RegretRecord]] = {}
    for rec in records:
        by_agent.setdefault(rec.agent, []).append(rec)
    if not by_agent:
        raise EmptyInput("no records to summarize")
    out = {}
    for agent, recs in by_agent.items():
        seeds = sorted({r.seed for r in recs})
        finals = []
        switches = []
        for s in seeds:
            cell = [r for r in recs if r.seed == s]
            last = max(cell, key=lambda r: r.episode)
            finals.append(last.cum_regret)
            switches.append(sum(r.switched for r in cell))
        finals = np.array(finals)
        out[agent] = {
            "seeds": len(seeds),
            "episodes": max(r.episode for r in recs),
            "final_cum_regret_mean": float(finals.mean()),
            "final_cum_regret_std": float(finals.std()),
            "sqrt_k_coefficient": sqrt_k_coefficient([r.episode for r in recs], [r.cum_regret for r in recs]),
            "switches_total": int(sum(switches)),
            "switches_per_seed": float(np.mean(switches)),
            "mean_wall_time_ns": float(np.mean([r.wall_time_ns for r in recs])),
        }
    return out


def final_regrets(records: Iterable[RegretRecord], agent: str) -> dict[int, float]:
    """Final cumulative regret per seed for one agent."""
    out: dict[int, tuple[int, float]] = {}
    for r in records:
        if r.agent == agent and (r.seed not in out or r.episode > out[r.seed][0]):
            out[r.seed] = (r.episode, r.cum_regret)
    return {s: v for s, (_, v) in out.items()}


def regret_at(records: Iterable[RegretRecord], agent: str, episode: int) -> dict[int, float]:
    return {r.seed: r.cum_regret for r in records if r.agent == agent and r.episode == episode}


__all__ = [
    "CSV_COLUMNS", "ExperimentConfig", "RegretRecord", "RunTrace", "chain", "derive_rng", "final_regrets",
    "generate_env", "random_dense", "read_csv", "regret_at", "run_cell", "run_experiment", "summarize",
    "sqrt_k_coefficient", "two_room", "write_csv",
]
