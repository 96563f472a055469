"""Least-squares reward estimation from trajectory returns, plus count-based model estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, FactorizationFailure, InvalidDelta, InvalidK, InvalidLambda


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise InvalidDelta(f"delta must lie in (0, 1), got {delta!r}")


def confidence_radius(k: int, S: int, A: int, H: int, lam: float, delta: float) -> float:
    """Radius of the reward confidence ellipsoid after ``k`` episodes."""
    _check_delta(delta)
    if k < 0:
        raise InvalidK(f"k must be >= 0, got {k}")
    if lam <= 0:
        raise InvalidLambda(f"lambda must be positive, got {lam!r}")
    m = S * A
    return math.sqrt(0.25 * m * H * math.log((1.0 + k * H**2 / lam) / (delta / 10.0))) + math.sqrt(lam * m)


def noise_scale(k: int, S: int, A: int, H: int, delta: float) -> float:
    """Scale of the Thompson perturbation drawn in episode ``k`` (1-based)."""
    _check_delta(delta)
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    arg = k * H**2 / (delta / 10.0)
    return math.sqrt(9.0 * S * A * H * math.log(max(arg, 1.0)))


class LsEstimator:
    """Regularised least squares on (visit-count vector, episode return) pairs.

    Two copies of the statistics are kept.  The B-side (``B``, ``B_inv``,
    ``Z``) absorbs every episode.  The A-side (``A``, ``A_inv``, ``Y``) is
    what estimates and perturbations are computed from; with
    ``rarely_switching=False`` it tracks the B-side exactly, otherwise it is
    refreshed only through :meth:`maybe_switch`.

    Determinants are carried as natural logs so large Gram matrices do not
    overflow; ``det_A`` / ``det_B`` exponentiate on demand.
    """

    def __init__(self, m: int, lam: float, rarely_switching: bool = False):
        if m < 1:
            raise DimensionMismatch(f"dimension must be >= 1, got {m}")
        if not lam > 0:
            raise InvalidLambda(f"lambda must be positive, got {lam!r}")
        self.m = int(m)
        self.lam = float(lam)
        self.rarely_switching = rarely_switching
        self.k = 0
        self.B = self.lam * np.eye(self.m)
        self.B_inv = np.eye(self.m) / self.lam
        self.log_det_B = self.m * math.log(self.lam)
        self.Z = np.zeros(self.m)
        self._version = 0
        self._factor: tuple[int, np.ndarray] | None = None
        self._sync()

    def _sync(self) -> None:
        # arrays are replaced, never mutated, so sharing them is safe
        self.A, self.A_inv, self.log_det_A, self.Y = self.B, self.B_inv, self.log_det_B, self.Z
        self._version += 1

    @property
    def det_A(self) -> float:
        return math.exp(self.log_det_A)

    @property
    def det_B(self) -> float:
        return math.exp(self.log_det_B)

    def update(self, d_hat, v_hat: float) -> None:
        x = np.asarray(d_hat, dtype=float).ravel()
        if x.shape != (self.m,):
            raise DimensionMismatch(f"expected a length-{self.m} vector, got {np.shape(d_hat)}")
        self.k += 1
        if not x.any():
            return
        Bx = self.B_inv @ x
        quad = float(x @ Bx)
        self.B = self.B + np.outer(x, x)
        B_inv = self.B_inv - np.outer(Bx, Bx) / (1.0 + quad)
        self.B_inv = 0.5 * (B_inv + B_inv.T)
        self.log_det_B += math.log1p(quad)
        self.Z = self.Z + x * float(v_hat)
        if not self.rarely_switching:
            self._sync()

    def maybe_switch(self, C: float) -> bool:
        """Refresh the A-side if ``det B > (1 + C) det A``; report whether it happened."""
        if self.log_det_B > self.log_det_A + math.log1p(C):
            self._sync()
            return True
        return False

    def point_estimate(self) -> np.ndarray:
        return self.A_inv @ self.Y

    def norm(self, x) -> float:
        """``||x||`` in the metric of the (possibly stale) inverse Gram matrix."""
        x = np.asarray(x, dtype=float).ravel()
        return math.sqrt(max(float(x @ self.A_inv @ x), 0.0))

    def sqrt_inverse(self) -> np.ndarray:
        """Symmetric square root of ``A_inv``; recomputed only when the A-side changes."""
        if self._factor is None or self._factor[0] != self._version:
            w, U = np.linalg.eigh(self.A_inv)
            w, U = w[::-1], U[:, ::-1]
            if w[-1] < -1e-10 * max(1.0, abs(w[0])):
                raise FactorizationFailure(f"inverse Gram matrix has eigenvalue {w[-1]!r}")
            L = (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T
            self._factor = (self._version, L)
        return self._factor[1]

    def sample_perturbation(self, v: float, rng: np.random.Generator) -> np.ndarray:
        """Draw from N(0, v^2 A_inv)."""
        z = rng.standard_normal(self.m)
        return v * (self.sqrt_inverse() @ z)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "m": self.m,
            "k": self.k,
            "rarely_switching": self.rarely_switching,
            "A": self.A.tolist(),
            "A_inv": self.A_inv.tolist(),
            "Y": self.Y.tolist(),
            "det": self.det_A if math.isfinite(self.det_A) else None,
            "log_det": self.log_det_A,
            "B": self.B.tolist(),
            "B_inv": self.B_inv.tolist(),
            "Z": self.Z.tolist(),
            "log_det_B": self.log_det_B,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LsEstimator":
        est = cls(int(doc["m"]), float(doc["lambda"]), bool(doc.get("rarely_switching", False)))
        est.k = int(doc["k"])
        est.B = np.array(doc["B"], dtype=float)
        est.B_inv = np.array(doc["B_inv"], dtype=float)
        est.Z = np.array(doc["Z"], dtype=float)
        est.log_det_B = float(doc["log_det_B"])
        est.A = np.array(doc["A"], dtype=float)
        est.A_inv = np.array(doc["A_inv"], dtype=float)
        est.Y = np.array(doc["Y"], dtype=float)
        est.log_det_A = float(doc["log_det"])
        if not est.rarely_switching:
            est._sync()
        est._version += 1
        return est


# functional aliases matching the estimator's method names
def ls_init(m: int, lam: float, rarely_switching: bool = False) -> LsEstimator:
    return LsEstimator(m, lam, rarely_switching)


@dataclass
class CountTable:
    S: int
    A: int
    n: np.ndarray = field(init=False)
    trans_counts: np.ndarray = field(init=False)

    def __post_init__(self):
        self.n = np.zeros((self.S, self.A), dtype=np.int64)
        self.trans_counts = np.zeros((self.S, self.A, self.S), dtype=np.int64)

    def absorb(self, states, actions) -> None:
        """Count the transitions ``(s_h, a_h, s_{h+1})`` of one episode."""
        if len(states) != len(actions) + 1:
            raise DimensionMismatch("need one more state than actions")
        for h, a in enumerate(actions):
            s, s_next = states[h], states[h + 1]
            self.n[s, a] += 1
            self.trans_counts[s, a, s_next] += 1


def transition_estimate(counts: CountTable) -> np.ndarray:
    """Empirical kernel; rows of never-visited pairs are all zero."""
    return counts.trans_counts / np.maximum(counts.n, 1)[:, :, None]


def exploration_bonus(counts: CountTable, k: int, H: int, delta: float) -> np.ndarray:
    """Count-based transition bonus for every (s, a).

    ``k`` may be 0, in which case the floored log makes the bonus vanish.
    """
    _check_delta(delta)
    if k < 0:
        raise InvalidK(f"k must be >= 0, got {k}")
    S, A = counts.S, counts.A
    log_term = math.log(max(40.0 * S * A * H**2 * k**3 / delta, 1.0))
    return np.sqrt(H**2 * log_term / np.maximum(counts.n, 1))
