import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trajfb import oracles
from trajfb.agents import AgentConfig
from trajfb.errors import ConfigError, EmptyInput, EnumerationTooLarge, InvalidSpec
from trajfb.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    RegretRecord,
    chain,
    derive_rng,
    final_regrets,
    generate_env,
    random_dense,
    read_csv,
    regret_at,
    run_cell,
    run_experiment,
    sqrt_k_coefficient,
    summarize,
    two_room,
    write_csv,
)
from trajfb.mdp import backward_induction, validate_mdp


def _config(**over):
    doc = {"env": {"kind": "RandomDense", "S": 2, "A": 2, "H": 3, "seed": 1},
           "agents": ["UniformRandom", "TsKnown", {"kind": "RsUcbviTs", "C": 1.0}], "K": 30, "seeds": [0, 1]}
    doc.update(over)
    return ExperimentConfig.from_dict(doc)


# --- environments ------------------------------------------------------------


def test_chain_2_3_deterministic_value():
    env = chain(2, 3, slip=0.0)
    _, V = backward_induction(env.transitions, env.mean_rewards, 3)
    best, _ = oracles.brute_force_optimum(env.transitions, env.mean_rewards, 3, 0)
    assert V[0, 0] == 2.0 and best == 2.0


def test_chain_structure():
    env = chain(5, 5, slip=0.1)
    validate_mdp(env)
    assert (env.transitions[:, 0, 0] == 1).all()
    assert env.transitions[2, 1, 3] == pytest.approx(0.9) and env.transitions[2, 1, 2] == pytest.approx(0.1)
    assert env.mean_rewards[4, 1] == 1.0 and env.mean_rewards[0, 0] == 0.01
    assert env.mean_rewards.sum() == pytest.approx(1.01)


@given(st.integers(1, 6), st.integers(1, 4), st.integers(1, 5), st.integers(0, 1000))
def test_random_dense_rows(S, A, H, seed):
    env = random_dense(S, A, H, seed)
    assert np.abs(env.transitions.sum(axis=-1) - 1).max() <= 1e-12
    assert ((0 <= env.mean_rewards) & (env.mean_rewards <= 1)).all()


def test_generator_determinism():
    spec = {"kind": "RandomDense", "S": 3, "A": 2, "H": 4, "seed": 5}
    assert generate_env(spec).to_json() == generate_env(dict(spec)).to_json()
    assert generate_env(spec).to_json() != generate_env({**spec, "seed": 6}).to_json()


def test_two_room_is_valid_and_solvable():
    env = two_room(2, 12)
    validate_mdp(env)
    _, V = backward_induction(env.transitions, env.mean_rewards, env.H)
    assert V[env.initial_state(1), 0] > 0
    _, V_short = backward_induction(env.transitions, env.mean_rewards, 2)
    assert V_short[env.initial_state(1), 0] == 0


@pytest.mark.parametrize(
    "spec",
    [{}, {"kind": "Nope"}, {"kind": "Chain", "S": 1, "H": 3}, {"kind": "Chain", "S": 3, "H": 3, "slip": 1.0},
     {"kind": "RandomDense", "S": 2, "A": 2}, {"kind": "RandomDense", "S": 0, "A": 2, "H": 2},
     {"kind": "Chain", "S": 3, "H": 3, "s1": 7},
     {"kind": "Mdp", "mdp": {"S": 1, "A": 1, "H": 1, "P": [[[0.5]]], "r": [[0.1]]}}],
)
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpec):
        generate_env(spec)


def test_inline_and_file_specs(tmp_path):
    env = random_dense(2, 2, 3, seed=4)
    assert generate_env({"kind": "Mdp", "mdp": env.to_dict()}).to_json() == env.to_json()
    path = tmp_path / "env.json"
    path.write_text(env.to_json())
    assert generate_env({"kind": "File", "path": str(path)}).to_json() == env.to_json()


# --- rng ---------------------------------------------------------------------


def test_derive_rng_streams():
    a = derive_rng(3, "TsKnown", 5, "agent").random(4)
    assert np.array_equal(a, derive_rng(3, "TsKnown", 5, "agent").random(4))
    for other in [(4, "TsKnown", 5, "agent"), (3, "UcbviTs", 5, "agent"), (3, "TsKnown", 6, "agent"),
                  (3, "TsKnown", 5, "env")]:
        assert not np.array_equal(a, derive_rng(*other).random(4))


def test_adding_agents_does_not_perturb_others():
    small = {r.episode: r for r in run_experiment(_config(agents=["TsKnown"])) if r.seed == 0}
    big = {r.episode: r for r in run_experiment(_config()) if r.agent == "TsKnown" and r.seed == 0}
    assert [r.row() for r in small.values()] == [r.row() for r in big.values()]


# --- config ------------------------------------------------------------------


@pytest.mark.parametrize(
    "over",
    [{"K": 0}, {"seeds": []}, {"agents": []}, {"agents": ["TsKnown", "TsKnown"]}, {"bogus": 1},
     {"delta": 2.0}, {"agents": [{"kind": "RsUcbviTs", "C": -1}]}],
)
def test_config_errors(over):
    with pytest.raises(ConfigError):
        _config(**over)


def test_config_overrides_apply_to_agents():
    cfg = _config(delta=0.05, C=3.0, **{"lambda": 2.0})
    assert all(a.delta == 0.05 and a.lam == 2.0 for a in cfg.agents)
    # a value set on the agent itself takes precedence over the grid-wide one
    assert [a.C for a in cfg.agents] == [3.0, 3.0, 1.0]


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "nope.json")


# --- running -----------------------------------------------------------------


def test_oracle_has_zero_regret():
    env = random_dense(3, 2, 4, seed=2)
    recs = run_cell(env, AgentConfig("OracleOptimal"), 0, 200)
    assert all(abs(r.regret) <= 1e-10 for r in recs)
    assert abs(recs[-1].cum_regret) <= 1e-10
    assert sqrt_k_coefficient([r.episode for r in recs], [r.cum_regret for r in recs]) == pytest.approx(0, abs=1e-9)


def test_record_invariants():
    recs = list(run_experiment(_config()))
    assert [(r.agent, r.seed) for r in recs] == sorted((r.agent, r.seed) for r in recs)
    for agent in {r.agent for r in recs}:
        for seed in (0, 1):
            cell = [r for r in recs if r.agent == agent and r.seed == seed]
            assert [r.episode for r in cell] == list(range(1, 31))
            assert all(r.regret >= -1e-10 for r in cell)
            assert all(b.cum_regret >= a.cum_regret - 1e-10 for a, b in zip(cell, cell[1:]))
            assert all(r.wall_time_ns == 0 for r in cell)
    assert not any(r.switched for r in recs if r.agent == "UniformRandom")


def test_oful_enumeration_error_surfaces_with_id():
    cfg = _config(env={"kind": "Chain", "S": 4, "H": 6}, agents=[{"kind": "OfulKnown", "name": "big"}])
    with pytest.raises(EnumerationTooLarge) as exc:
        list(run_experiment(cfg))
    assert exc.value.agent == "big"


def test_uniform_random_regret_is_linear():
    env = chain(3, 4, slip=0.1)
    ratios = []
    for seed in range(10):
        recs = run_cell(env, AgentConfig("UniformRandom"), seed, 2000)
        ratios.append(recs[1999].cum_regret / recs[999].cum_regret)
    assert 1.9 <= np.mean(ratios) <= 2.1


def test_threads_match_serial():
    cfg = _config()
    assert write_csv(run_experiment(cfg)) == write_csv(run_experiment(cfg, threads=2))


def test_wall_time_recorded_when_requested():
    recs = run_cell(random_dense(2, 2, 2), AgentConfig("TsKnown"), 0, 5, record_wall_time=True)
    assert all(r.wall_time_ns > 0 for r in recs)


# --- csv / summaries ---------------------------------------------------------


def test_csv_round_trip_and_determinism(tmp_path):
    cfg = _config()
    text = write_csv(run_experiment(cfg))
    assert text == write_csv(run_experiment(cfg))
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    path = tmp_path / "out.csv"
    write_csv(run_experiment(cfg), path)
    assert path.read_text() == text
    back = read_csv(path)
    assert write_csv(back) == text


def test_float_format_is_lossless():
    x = 0.1 + 0.2
    rec = RegretRecord("a", 0, 1, x, x, 0.0, 0.0, 1.0, False)
    assert float(rec.row()[3]) == x


def _synthetic(coef=5.0, K=100, seeds=(0, 1)):
    return [RegretRecord("syn", s, k, 1.0, 1.0, 0.0, coef * math.sqrt(k), 0.0, k % 10 == 0)
            for s in seeds for k in range(1, K + 1)]


def test_summarize_sqrt_fit():
    summ = summarize(_synthetic())["syn"]
    assert abs(summ["sqrt_k_coefficient"] - 5.0) <= 1e-9
    assert summ["seeds"] == 2 and summ["episodes"] == 100
    assert summ["final_cum_regret_mean"] == pytest.approx(50.0)
    assert summ["final_cum_regret_std"] == 0.0
    assert summ["switches_total"] == 20 and summ["switches_per_seed"] == 10


def test_summarize_empty():
    with pytest.raises(EmptyInput):
        summarize([])


def test_final_and_at_helpers():
    recs = _synthetic(K=16)
    assert final_regrets(recs, "syn") == {0: 20.0, 1: 20.0}
    assert regret_at(recs, "syn", 4) == {0: 10.0, 1: 10.0}


def test_ts_beats_uniform_on_chain_coefficient():
    env = chain(5, 5)
    coef = {}
    for kind in ("TsKnown", "UniformRandom"):
        recs = run_cell(env, AgentConfig(kind), 0, 300)
        coef[kind] = summarize(recs)[kind]["sqrt_k_coefficient"]
    assert coef["TsKnown"] < coef["UniformRandom"]


def test_summary_is_json_serialisable():
    json.dumps(summarize(list(run_experiment(_config()))))
