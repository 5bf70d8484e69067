"""Pseudorandomness statistics P1-P7 of a row-normalized data matrix.

Each statistic is compared against ``C * f(n, p) * (log p)^r`` where the
constants ``(C, r)`` live in a versioned :class:`ThresholdConfig`.  A property
passes when its statistic is at most its threshold.  P7 is reported as the
deficit ``1 - ||G||_F^2 / (n p^2)`` so that it follows the same convention.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .datagen import NOISE_FAMILIES, DataMatrix, gram

PROPERTIES = ("P1", "P2", "P3", "P4", "P5", "P6", "P7")
P4_EXHAUSTIVE_MAX_P = 60
P4_SAMPLES = 10_000

# Scale functions f(n, p) per property.
SCALES: dict[str, Callable[[int, int], float]] = {
    "P1": lambda n, p: n,
    "P2": lambda n, p: math.sqrt(n),
    "P3": lambda n, p: n**1.5 * p,
    "P4": lambda n, p: n**2 * math.sqrt(p),
    "P5": lambda n, p: math.sqrt(n) * p,
    "P6": lambda n, p: n**1.5 * p**2,
    "P7": lambda n, p: 1.0,
}


@dataclass(frozen=True)
class ThresholdConfig:
    """Per-property constants and log exponents."""

    constants: dict
    exponents: dict
    version: int = 1
    note: str = ""

    def __post_init__(self):
        for name in PROPERTIES:
            if not self.constants.get(name, 0) > 0:
                raise ValueError(f"threshold constant for {name} must be positive")
            self.exponents.setdefault(name, 0.0)

    def threshold(self, name: str, n: int, p: int) -> float:
        return self.constants[name] * SCALES[name](n, p) * math.log(max(p, 2)) ** self.exponents[name]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdConfig":
        return cls(dict(data["constants"]), dict(data["exponents"]), int(data.get("version", 1)), data.get("note", ""))

    @classmethod
    def load(cls, path=None) -> "ThresholdConfig":
        """Load a config file; defaults to the committed one shipped with the package."""
        if path is None:
            text = resources.files("sospca").joinpath("data/thresholds.json").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())


@dataclass(frozen=True)
class PropertyResult:
    statistic: float
    threshold: float
    passed: bool
    witness: tuple
    coverage: float = 1.0


@dataclass(frozen=True)
class PseudorandomReport:
    n: int
    p: int
    results: dict = field(default_factory=dict)

    @property
    def conditioned(self) -> bool:
        return all(r.passed for r in self.results.values())

    def failed(self) -> list[str]:
        return [k for k, r in self.results.items() if not r.passed]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "conditioned": self.conditioned,
            "properties": {
                k: {"statistic": r.statistic, "threshold": r.threshold, "pass": r.passed,
                    "witness": list(r.witness), "coverage": r.coverage}
                for k, r in self.results.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _offdiag_argmax(A: np.ndarray) -> tuple[float, tuple[int, int]]:
    B = np.abs(A).copy()
    np.fill_diagonal(B, -np.inf)
    flat = int(np.argmax(B))
    i, j = divmod(flat, B.shape[1])
    return float(B[i, j]), (min(i, j), max(i, j))


# individual statistics ------------------------------------------------------
# Each takes the Gram matrix and returns (statistic, witness).


def p1_statistic(G: np.ndarray, n: int):
    dev = np.abs(np.diag(G) - n)
    i = int(np.argmax(dev))
    return float(dev[i]), (i,)


def p2_statistic(G: np.ndarray):
    return _offdiag_argmax(G)


def p3_matrix(G: np.ndarray) -> np.ndarray:
    """``sum_{l not in {i,j}} G_il^3 G_jl`` for every pair (diagonal is meaningless)."""
    d = np.diag(G)
    S = (G**3) @ G
    return S - (d**3)[:, None] * G - G**3 * d[None, :]


def p3_statistic(G: np.ndarray):
    if G.shape[0] < 3:
        return 0.0, ()
    return _offdiag_argmax(p3_matrix(G))


def p4_value(G: np.ndarray, quad) -> float:
    i, j, s, t = quad
    return float(np.sum(G[i] * G[j] * G[s] * G[t]))


def p4_statistic(G: np.ndarray, mode: str = "auto", samples: int = P4_SAMPLES, seed: int = 0):
    """Max over distinct quadruples; returns (statistic, witness, coverage)."""
    p = G.shape[0]
    total = math.comb(p, 4)
    if total == 0:
        return 0.0, (), 1.0
    if mode == "auto":
        mode = "exhaustive" if p <= P4_EXHAUSTIVE_MAX_P else "sampled"
    if mode == "exhaustive":
        I, J = np.triu_indices(p, 1)
        H = G[I] * G[J]
        K = np.abs(H @ H.T)
        shared = (I[:, None] == I[None, :]) | (I[:, None] == J[None, :]) | (J[:, None] == I[None, :]) | (J[:, None] == J[None, :])
        K[shared] = -np.inf
        a, b = divmod(int(np.argmax(K)), K.shape[1])
        quad = tuple(sorted((int(I[a]), int(J[a]), int(I[b]), int(J[b]))))
        return float(K[a, b]), quad, 1.0
    if samples >= total:
        quads = np.array(list(itertools.combinations(range(p), 4)))
    else:
        rng = np.random.Generator(np.random.Philox(seed))
        quads = np.sort(np.stack([rng.choice(p, 4, replace=False) for _ in range(samples)]), axis=1)
    vals = np.abs(np.einsum("ql,ql,ql,ql->q", G[quads[:, 0]], G[quads[:, 1]], G[quads[:, 2]], G[quads[:, 3]]))
    q = int(np.argmax(vals))
    return float(vals[q]), tuple(int(x) for x in quads[q]), min(1.0, len(quads) / total)


def p5_statistic(G: np.ndarray):
    return _offdiag_argmax(G @ G)


def p6_statistic(G: np.ndarray):
    w = (G * G).sum(axis=0)
    return _offdiag_argmax((G * w) @ G.T)


def p7_statistic(G: np.ndarray, n: int):
    p = G.shape[0]
    return float(1.0 - np.sum(G * G) / (n * p * p)), ()


# public checks ---------------------------------------------------------------


def _result(name, stat, witness, n, p, config, coverage=1.0) -> PropertyResult:
    thr = config.threshold(name, n, p)
    return PropertyResult(stat, thr, bool(stat <= thr), tuple(witness), coverage)


def _unpack(X):
    if isinstance(X, DataMatrix):
        return gram(X), X.n
    X = np.asarray(X, dtype=float)
    return gram(X), X.shape[1]


def check_p1_p2(X, config: ThresholdConfig | None = None) -> tuple[PropertyResult, PropertyResult]:
    config = config or ThresholdConfig.load()
    G, n = _unpack(X)
    p = G.shape[0]
    return (_result("P1", *p1_statistic(G, n), n, p, config), _result("P2", *p2_statistic(G), n, p, config))


def check_p3(X, config: ThresholdConfig | None = None) -> PropertyResult:
    config = config or ThresholdConfig.load()
    G, n = _unpack(X)
    return _result("P3", *p3_statistic(G), n, G.shape[0], config)


def check_p4(X, config: ThresholdConfig | None = None, mode: str = "auto", samples: int = P4_SAMPLES, seed: int = 0):
    config = config or ThresholdConfig.load()
    G, n = _unpack(X)
    stat, wit, cov = p4_statistic(G, mode, samples, seed)
    return _result("P4", stat, wit, n, G.shape[0], config, cov)


def check_p5(X, config: ThresholdConfig | None = None) -> PropertyResult:
    config = config or ThresholdConfig.load()
    G, n = _unpack(X)
    return _result("P5", *p5_statistic(G), n, G.shape[0], config)


def check_p6(X, config: ThresholdConfig | None = None) -> PropertyResult:
    config = config or ThresholdConfig.load()
    G, n = _unpack(X)
    return _result("P6", *p6_statistic(G), n, G.shape[0], config)


def check_p7(X, config: ThresholdConfig | None = None) -> PropertyResult:
    config = config or ThresholdConfig.load()
    G, n = _unpack(X)
    return _result("P7", *p7_statistic(G, n), n, G.shape[0], config)


def raw_statistics(X, p4_mode: str = "auto", seed: int = 0) -> dict[str, tuple]:
    """All seven (statistic, witness) pairs computed from one Gram matrix."""
    G, n = _unpack(X)
    s4, w4, _ = p4_statistic(G, p4_mode, seed=seed)
    return {
        "P1": p1_statistic(G, n), "P2": p2_statistic(G), "P3": p3_statistic(G), "P4": (s4, w4),
        "P5": p5_statistic(G), "P6": p6_statistic(G), "P7": p7_statistic(G, n),
    }


def check_pseudorandom(X, config: ThresholdConfig | None = None, p4_mode: str = "auto", seed: int = 0) -> PseudorandomReport:
    config = config or ThresholdConfig.load()
    G, n = _unpack(X)
    p = G.shape[0]
    res = {
        "P1": _result("P1", *p1_statistic(G, n), n, p, config),
        "P2": _result("P2", *p2_statistic(G), n, p, config),
        "P3": _result("P3", *p3_statistic(G), n, p, config),
    }
    s4, w4, cov = p4_statistic(G, p4_mode, seed=seed)
    res["P4"] = _result("P4", s4, w4, n, p, config, cov)
    res["P5"] = _result("P5", *p5_statistic(G), n, p, config)
    res["P6"] = _result("P6", *p6_statistic(G), n, p, config)
    res["P7"] = _result("P7", *p7_statistic(G, n), n, p, config)
    return PseudorandomReport(n, p, res)


# Monte-Carlo moments of a normalized noise vector --------------------------


@dataclass(frozen=True)
class GoodnessEstimate:
    """Moment estimates of ``x`` = a noise vector rescaled to squared norm n."""

    second: tuple[float, float]  # (mean, standard error) of x_1^2
    fourth: tuple[float, float]  # x_1^4
    two_two: tuple[float, float]  # x_1^2 x_2^2
    odd: tuple[float, float]  # x_1^3 x_2
    fourth_spread: float  # max - min of E[x_i^4] over coordinates
    two_two_spread: float  # max - min of E[x_i^2 x_j^2] over adjacent pairs
    max_odd: float  # largest |estimate| among the odd moments probed
    trials: int


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def goodness_montecarlo(noise_family: str, n: int, trials: int = 10_000, seed: int = 0) -> GoodnessEstimate:
    if trials < 10_000:
        raise ValueError("need at least 10^4 trials")
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.Generator(np.random.Philox(seed))
    x = NOISE_FAMILIES[noise_family](rng, (trials, n))
    x *= np.sqrt(n / np.einsum("ij,ij->i", x, x))[:, None]
    x2 = x * x
    x4 = x2 * x2
    pairs22 = x2[:, :-1] * x2[:, 1:]
    odd_probes = [x[:, 0] ** 3 * x[:, 1], x[:, 0] * x[:, 1], x[:, 0] ** 3, x[:, 0] * x2[:, 1] * x[:, -1] if n > 2 else x[:, 0] * x[:, 1]]
    f4 = x4.mean(axis=0)
    f22 = pairs22.mean(axis=0)
    return GoodnessEstimate(
        second=_mean_se(x2[:, 0]),
        fourth=_mean_se(x4[:, 0]),
        two_two=_mean_se(x2[:, 0] * x2[:, 1]),
        odd=_mean_se(odd_probes[0]),
        fourth_spread=float(f4.max() - f4.min()),
        two_two_spread=float(f22.max() - f22.min()),
        max_odd=float(max(abs(v.mean()) for v in odd_probes)),
        trials=trials,
    )
