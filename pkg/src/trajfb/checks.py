"""Check suites behind ``trajfb check``.

Each check returns ``{"pass": bool, "lhs": float, "rhs": float, "details": ...}``
where passing means ``lhs <= rhs``.
"""
from __future__ import annotations

import math

import numpy as np

from . import oracles
from .agents import AgentConfig
from .estimation import LsEstimator
from .harness import RunTrace, random_dense, run_cell
from .mdp import backward_induction, occupancy_measure


def _result(lhs: float, rhs: float, **details) -> dict:
    return {"pass": bool(lhs <= rhs), "lhs": float(lhs), "rhs": float(rhs), "details": details}


def occupancy_equivalence(n: int = 50, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        S, A, H = int(rng.integers(1, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 5))
        P = oracles.random_kernel(rng, S, A)
        pi = oracles.random_policy(rng, S, A, H)
        s1 = int(rng.integers(S))
        fast = occupancy_measure(pi, P, H, s1).q
        slow = oracles.brute_force_occupancy(pi, P, H, s1).q
        worst = max(worst, float(np.abs(fast - slow).max()))
    return _result(worst, 1e-10, instances=n)


def planning_equivalence(n: int = 20, seed: int = 1, cap: int = 10**4) -> dict:
    rng = np.random.default_rng(seed)
    shapes = [(S, A, H) for S in range(1, 5) for A in range(1, 4) for H in range(1, 7) if A ** (S * H) <= cap]
    worst = 0.0
    for _ in range(n):
        S, A, H = shapes[int(rng.integers(len(shapes)))]
        P = oracles.random_kernel(rng, S, A)
        r = rng.uniform(-1.0, 2.0, size=(S, A))
        s1 = int(rng.integers(S))
        _, V = backward_induction(P, r, H)
        best, _ = oracles.brute_force_optimum(P, r, H, s1, cap)
        worst = max(worst, abs(float(V[s1, 0]) - best))
    return _result(worst, 1e-10, instances=n)


def linalg_integrity(m: int = 20, updates: int = 1000, seed: int = 2, H: int = 5) -> tuple[dict, dict]:
    """Sherman-Morrison inverse and determinant recursion against direct recomputation."""
    rng = np.random.default_rng(seed)
    est = LsEstimator(m, float(H))
    gram = H * np.eye(m)
    for _ in range(updates):
        d = rng.multinomial(H, np.ones(m) / m).astype(float)
        est.update(d, float(rng.uniform(0, H)))
        gram += np.outer(d, d)
    inv_err = float(np.abs(est.A_inv - np.linalg.inv(gram)).max())
    sign, logdet = np.linalg.slogdet(gram)
    det_rel = abs(math.expm1(est.log_det_A - logdet)) if sign > 0 else math.inf
    return (_result(inv_err, 1e-8, dim=m, updates=updates),
            _result(det_rel, 1e-6, dim=m, updates=updates, log_det=logdet))


def value_difference(n: int = 100, seed: int = 3) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        S, A, H = int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 5))
        m1 = (oracles.random_kernel(rng, S, A), rng.uniform(size=(S, A)))
        m2 = (oracles.random_kernel(rng, S, A), rng.uniform(size=(S, A)))
        pi = oracles.random_policy(rng, S, A, H)
        worst = max(worst, oracles.check_value_difference(pi, m1, m2, int(rng.integers(S))))
    return _result(worst, 1e-9, instances=n)


def occupancy_l1(n: int = 100, seed: int = 4) -> dict:
    rng = np.random.default_rng(seed)
    worst_slack = -math.inf
    for _ in range(n):
        S, A, H = int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 5))
        P1, P2 = oracles.random_kernel(rng, S, A), oracles.random_kernel(rng, S, A)
        pi = oracles.random_policy(rng, S, A, H)
        lhs, rhs = oracles.check_occupancy_l1_bound(pi, P1, P2, int(rng.integers(S)), H)
        worst_slack = max(worst_slack, lhs - rhs)
    # pass iff every instance has lhs <= rhs + 1e-10
    return _result(worst_slack, 1e-10, instances=n)


def oracle_suite() -> dict:
    inv, det = linalg_integrity()
    return {
        "occupancy_equivalence": occupancy_equivalence(),
        "planning_equivalence": planning_equivalence(),
        "sherman_morrison_inverse": inv,
        "determinant_recursion": det,
        "value_difference": value_difference(),
        "occupancy_l1_bound": occupancy_l1(),
    }


def lemma_runs(K: int = 2000, seed: int = 0) -> list[RunTrace]:
    """Traces of the runs the lemma checks are evaluated on (S = A = 2, H = 3, lambda = H)."""
    mdp = random_dense(2, 2, 3, seed=seed)
    configs = [AgentConfig("RsUcbviTs", C=c, name=f"RsUcbviTs_C{c:g}") for c in (0.1, 1.0, 10.0)]
    configs += [AgentConfig("UcbviTs"), AgentConfig("TsKnown")]
    traces = []
    for cfg in configs:
        lam = float(mdp.H if cfg.lam is None else cfg.lam)
        trace = RunTrace(cfg.id, cfg.kind, mdp.S, mdp.A, mdp.H, lam, cfg.C)
        run_cell(mdp, cfg, seed, K, trace=trace)
        traces.append(trace)
    return traces


def lemma_suite(K: int = 2000) -> dict:
    report = {}
    for tr in lemma_runs(K):
        lhs, rhs = oracles.check_elliptical_potential(tr.d_hats, tr.lam, tr.S, tr.A, tr.H)
        report[f"elliptical_potential[{tr.agent}]"] = _result(lhs, rhs, K=tr.K)
        vl, vr = oracles.check_cumulative_visitation(tr.d_hats, tr.S, tr.A, tr.H)
        report[f"cumulative_visitation[{tr.agent}]"] = _result(float((vl - vr).max()), 0.0, K=tr.K)
        if tr.kind == "RsUcbviTs":
            switches, bound = oracles.check_switch_bound(tr.switched, tr.C, tr.lam, tr.K, tr.S, tr.A, tr.H)
            report[f"switch_bound[{tr.agent}]"] = _result(switches, bound, C=tr.C, K=tr.K)
    return report


def run_suite(name: str) -> dict:
    if name == "oracles":
        return oracle_suite()
    if name == "lemmas":
        return lemma_suite()
    if name == "all":
        return {**oracle_suite(), **lemma_suite()}
    raise ValueError(f"unknown suite {name!r}")
