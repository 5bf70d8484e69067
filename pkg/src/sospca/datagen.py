"""Sampling under the null and the planted sparse-spike model, plus row normalization.

Randomness comes from numpy's Philox counter-based generator.  Every draw has
its own substream keyed off the seed so that the noise ``xi`` is identical
between the null and the planted sample for the same seed::

    spawn key (0, i)  ->  noise row i
    spawn key (1,)    ->  per-sample spike weights g_j
    spawn key (2,)    ->  spike support and signs
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .exceptions import DegenerateRowError, ParameterError

NORM_RTOL = 1e-12

Sampler = Callable[[np.random.Generator, tuple], np.ndarray]


def _gaussian(rng, shape):
    return rng.standard_normal(shape)


def _rademacher(rng, shape):
    return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0


def _uniform_scaled(rng, shape):
    return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=shape)


NOISE_FAMILIES: dict[str, Sampler] = {
    "gaussian": _gaussian,
    "rademacher": _rademacher,
    "uniform_scaled": _uniform_scaled,
}
# Stable small integers used in the binary file header.
_FAMILY_TAGS = {"gaussian": 0, "rademacher": 1, "uniform_scaled": 2}


def register_noise_family(name: str, sampler: Sampler) -> None:
    """Add a mean-0, variance-1 entry sampler under ``name``."""
    NOISE_FAMILIES[name] = sampler
    _FAMILY_TAGS.setdefault(name, max(_FAMILY_TAGS.values()) + 1)


@dataclass(frozen=True)
class ModelParams:
    p: int
    n: int
    k: int
    lam: float = 0.0
    noise_family: str = "rademacher"
    seed: int = 0

    def __post_init__(self):
        if not 3 <= self.k <= self.p:
            raise ParameterError(f"need 3 <= k <= p, got k={self.k}, p={self.p}")
        if self.n < 1:
            raise ParameterError(f"need n >= 1, got {self.n}")
        if not self.lam >= 0:
            raise ParameterError(f"need lambda >= 0, got {self.lam}")
        if self.noise_family not in NOISE_FAMILIES:
            raise ParameterError(f"unknown noise family {self.noise_family!r}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SparseSpike:
    p: int
    support: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.support)) != len(self.support) or len(self.support) != len(self.signs):
            raise ParameterError("support must be distinct indices with one sign each")
        if any(s not in (-1, 1) for s in self.signs):
            raise ParameterError("signs must be +1 or -1")
        if any(not 0 <= i < self.p for i in self.support):
            raise ParameterError("support index out of range")

    @property
    def k(self) -> int:
        return len(self.support)

    @property
    def v(self) -> np.ndarray:
        v = np.zeros(self.p)
        v[list(self.support)] = np.asarray(self.signs, dtype=float) / np.sqrt(self.k)
        return v


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """A p x n sample matrix; rows are variables, columns are samples."""

    X: np.ndarray
    normalized: bool = False
    family: str = "unknown"
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        if X.ndim != 2:
            raise ValueError("X must be two-dimensional")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def p(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, DataMatrix) and self.normalized == other.normalized and np.array_equal(self.X, other.X)

    # binary / csv IO ---------------------------------------------------------

    _MAGIC = b"SPCADAT1"
    _HEADER = struct.Struct("<8sQQBHQ")

    def save(self, path) -> None:
        tag = _FAMILY_TAGS.get(self.family, 0xFFFF)
        with open(path, "wb") as fh:
            fh.write(self._HEADER.pack(self._MAGIC, self.p, self.n, int(self.normalized), tag, self.seed))
            fh.write(np.ascontiguousarray(self.X, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "DataMatrix":
        raw = Path(path).read_bytes()
        magic, p, n, normalized, tag, seed = cls._HEADER.unpack_from(raw)
        if magic != cls._MAGIC:
            raise ValueError(f"{path}: not a data matrix file")
        body = raw[cls._HEADER.size:]
        if len(body) != 8 * p * n:
            raise ValueError(f"{path}: expected {p}x{n} payload, got {len(body)} bytes")
        X = np.frombuffer(body, dtype="<f8").reshape(p, n)
        family = {v: k for k, v in _FAMILY_TAGS.items()}.get(tag, "unknown")
        return cls(X, bool(normalized), family, seed)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in self.X:
                w.writerow([repr(float(x)) for x in row])


def _substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def _noise(params: ModelParams) -> np.ndarray:
    draw = NOISE_FAMILIES[params.noise_family]
    X = np.empty((params.p, params.n))
    for i in range(params.p):
        X[i] = draw(_substream(params.seed, 0, i), (params.n,))
    return X


def sample_spike(params: ModelParams) -> SparseSpike:
    """Uniformly random support of size k with independent random signs."""
    rng = _substream(params.seed, 2)
    support = np.sort(rng.choice(params.p, size=params.k, replace=False))
    signs = rng.integers(0, 2, size=params.k) * 2 - 1
    return SparseSpike(params.p, tuple(int(i) for i in support), tuple(int(s) for s in signs))


def sample_h0(params: ModelParams) -> DataMatrix:
    return DataMatrix(_noise(params), False, params.noise_family, params.seed)


def sample_hv(params: ModelParams, spike: SparseSpike | None = None) -> DataMatrix:
    """Columns ``sqrt(lam) * g_j * v + xi_j``; the spike defaults to ``sample_spike(params)``."""
    X = _noise(params)
    if params.lam > 0:
        spike = spike if spike is not None else sample_spike(params)
        if spike.p != params.p:
            raise ParameterError("spike dimension does not match params.p")
        g = NOISE_FAMILIES[params.noise_family](_substream(params.seed, 1), (params.n,))
        X += np.sqrt(params.lam) * np.outer(spike.v, g)
    return DataMatrix(X, False, params.noise_family, params.seed)


def normalize_rows(data: DataMatrix | np.ndarray) -> DataMatrix:
    """Rescale each row to squared norm n.  Rows already at norm n are left untouched."""
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    X = np.array(data.X)
    n = X.shape[1]
    sq = np.einsum("ij,ij->i", X, X)
    zero = np.flatnonzero(sq == 0)
    if zero.size:
        raise DegenerateRowError(f"row {int(zero[0])} is identically zero")
    scale = np.sqrt(n / sq)
    off = np.abs(sq - n) > NORM_RTOL * n
    X[off] *= scale[off, None]
    return DataMatrix(X, True, data.family, data.seed, dict(data.meta))


def gram(data: DataMatrix | np.ndarray) -> np.ndarray:
    """``X X^T`` made exactly symmetric, with diagonal set to n for normalized data."""
    X = data.X if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    G = X @ X.T
    G = (G + G.T) / 2
    if isinstance(data, DataMatrix) and data.normalized:
        np.fill_diagonal(G, X.shape[1])
    return G


def empirical_covariance(data: DataMatrix | np.ndarray) -> np.ndarray:
    X = data.X if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    return gram(data) / X.shape[1]
