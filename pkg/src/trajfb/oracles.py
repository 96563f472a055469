"""Brute-force oracles and deterministic lemma checkers.

Nothing here calls the numpy planning/occupancy code in :mod:`trajfb.mdp`;
occupancies come from explicit path enumeration and values from plain
Python loops, so agreement between the two is a meaningful check.
"""
from __future__ import annotations

import itertools
import math
from typing import Iterator

import numpy as np

from .errors import DimensionMismatch, TooLarge
from .mdp import OccupancyMeasure, Policy


def _as_lists(P) -> list:
    return np.asarray(P, dtype=float).tolist()


def brute_force_occupancy(policy: Policy, P, H: int, s1: int, max_paths: int = 10**6) -> OccupancyMeasure:
    """Per-step occupancy by walking every state-path prefix and multiplying its probability."""
    P = np.asarray(P, dtype=float)
    S, A = P.shape[0], P.shape[1]
    if policy.S != S or policy.H != H:
        raise DimensionMismatch(f"policy shape {policy.actions.shape} vs (S={S}, H={H})")
    if S**H > max_paths:
        raise TooLarge(f"{S}^{H} state paths exceed {max_paths}")
    kernel = _as_lists(P)
    acts = policy.actions.tolist()
    q = [[[0.0] * H for _ in range(A)] for _ in range(S)]

    def walk(s: int, h: int, prob: float) -> None:
        a = acts[s][h]
        q[s][a][h] += prob
        if h + 1 == H:
            return
        row = kernel[s][a]
        for s_next in range(S):
            walk(s_next, h + 1, prob * row[s_next])

    walk(s1, 0, 1.0)
    q = np.array(q)
    return OccupancyMeasure(q, q.sum(axis=2))


def enumerate_policies(S: int, A: int, H: int, cap: int = 10**6) -> Iterator[Policy]:
    """Every deterministic policy, lexicographic in the row-major ``(s, h)`` action tuple."""
    count = A ** (S * H)
    if count > cap:
        raise TooLarge(f"{count} policies exceed cap {cap}")
    for flat in itertools.product(range(A), repeat=S * H):
        yield Policy(np.array(flat, dtype=np.int64).reshape(S, H))


def evaluate(policy: Policy, P, r) -> list[list[float]]:
    """Plain-loop policy evaluation; ``V[h][s]`` for h = 0..H with ``V[H] = 0``."""
    kernel, reward = _as_lists(P), np.asarray(r, dtype=float).tolist()
    S, H = policy.S, policy.H
    acts = policy.actions.tolist()
    V = [[0.0] * S for _ in range(H + 1)]
    for h in range(H - 1, -1, -1):
        for s in range(S):
            a = acts[s][h]
            V[h][s] = reward[s][a] + sum(p * v for p, v in zip(kernel[s][a], V[h + 1]))
    return V


def brute_force_optimum(P, r, H: int, s1: int, cap: int = 10**5) -> tuple[float, Policy]:
    """Best ``d_pi . r`` over all policies, occupancies by path enumeration."""
    P = np.asarray(P, dtype=float)
    r = np.asarray(r, dtype=float)
    S, A = P.shape[:2]
    best, arg = -math.inf, None
    for pi in enumerate_policies(S, A, H, cap):
        value = float(np.sum(brute_force_occupancy(pi, P, H, s1).d * r))
        if value > best:
            best, arg = value, pi
    return best, arg


def check_value_difference(policy: Policy, m1: tuple, m2: tuple, s1: int) -> float:
    """|LHS - RHS| of the value-difference identity between two MDPs sharing a policy.

    LHS is ``V^pi(s1; M1) - V^pi(s1; M2)``; RHS sums, under M1's occupancy,
    the reward gap plus ``(P1 - P2)(.|s,a) . V^pi_{h+1}(.; M2)``.
    """
    (P1, r1), (P2, r2) = m1, m2
    P1, P2 = np.asarray(P1, dtype=float), np.asarray(P2, dtype=float)
    r1, r2 = np.asarray(r1, dtype=float), np.asarray(r2, dtype=float)
    if P1.shape != P2.shape or r1.shape != r2.shape or r1.shape != P1.shape[:2]:
        raise DimensionMismatch("the two MDPs have different shapes")
    S, H = policy.S, policy.H
    V1, V2 = evaluate(policy, P1, r1), evaluate(policy, P2, r2)
    lhs = V1[0][s1] - V2[0][s1]
    q = brute_force_occupancy(policy, P1, H, s1).q
    rhs = 0.0
    for h in range(H):
        for s in range(S):
            a = int(policy.actions[s, h])
            w = q[s, a, h]
            if w == 0.0:
                continue
            gap = sum((P1[s, a, t] - P2[s, a, t]) * V2[h + 1][t] for t in range(S))
            rhs += w * (r1[s, a] - r2[s, a] + gap)
    return abs(lhs - rhs)


def check_occupancy_l1_bound(policy: Policy, P1, P2, s1: int, H: int) -> tuple[float, float]:
    """``(||q(P1) - q(P2)||_1, H * E_{P2}[sum_h ||P1(.|s_h,a_h) - P2(.|s_h,a_h)||_1])``."""
    P1, P2 = np.asarray(P1, dtype=float), np.asarray(P2, dtype=float)
    if P1.shape != P2.shape:
        raise DimensionMismatch("kernels have different shapes")
    q1 = brute_force_occupancy(policy, P1, H, s1).q
    q2 = brute_force_occupancy(policy, P2, H, s1).q
    lhs = float(np.abs(q1 - q2).sum())
    gaps = np.abs(P1 - P2).sum(axis=-1)  # (S, A)
    rhs = float(H * np.sum(q2 * gaps[:, :, None]))
    return lhs, rhs


def elliptical_potential_bound(K: int, S: int, A: int, H: int, lam: float) -> float:
    m = S * A
    return math.sqrt(H**2 / lam) * math.sqrt(2 * K * m * math.log(lam + K * H**2 / m))


def check_elliptical_potential(d_hats, lam: float, S: int, A: int, H: int) -> tuple[float, float]:
    """``(sum_k ||d_k||_{A_{k-1}^{-1}}, closed-form bound)`` with the Gram matrix rebuilt from scratch.

    The bound is deterministic whenever ``1 <= lam <= H**2`` (in particular at lam = H).
    """
    m = S * A
    gram = lam * np.eye(m)
    lhs = 0.0
    for d in d_hats:
        d = np.asarray(d, dtype=float).ravel()
        lhs += math.sqrt(max(float(d @ np.linalg.solve(gram, d)), 0.0))
        gram += np.outer(d, d)
    return lhs, elliptical_potential_bound(len(d_hats), S, A, H, lam)


def check_cumulative_visitation(d_hats, S: int, A: int, H: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-(s, a) sides of ``sum_k 1{n_{k-1} >= H} visits_k / (n_{k-1} v 1) <= 2 log(n_K v 1)``."""
    n = np.zeros(S * A)
    lhs = np.zeros(S * A)
    for d in d_hats:
        d = np.asarray(d, dtype=float).ravel()
        mask = n >= H
        lhs[mask] += d[mask] / np.maximum(n[mask], 1)
        n += d
    rhs = 2 * np.log(np.maximum(n, 1))
    return lhs.reshape(S, A), rhs.reshape(S, A)


def switch_count_bound(K: int, S: int, A: int, H: int, lam: float, C: float) -> float:
    m = S * A
    if C <= 0:
        return math.inf
    return m / math.log1p(C) * math.log1p(K * H**2 / (lam * m))


def check_switch_bound(switched, C: float, lam: float, K: int, S: int, A: int, H: int) -> tuple[int, float]:
    return int(sum(bool(x) for x in switched)), switch_count_bound(K, S, A, H, lam, C)


# ---------------------------------------------------------------------------
# random instances for the check suites


def random_kernel(rng: np.random.Generator, S: int, A: int) -> np.ndarray:
    P = rng.dirichlet(np.ones(S), size=(S, A))
    return P / P.sum(axis=-1, keepdims=True)


def random_policy(rng: np.random.Generator, S: int, A: int, H: int) -> Policy:
    return Policy(rng.integers(A, size=(S, H)))
