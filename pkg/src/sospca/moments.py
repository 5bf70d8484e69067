"""Monomial indexing, pseudo-moment tables and their matrix forms (degree <= 4).

A monomial ``x_{i1} x_{i2} ... x_{id}`` is identified with the sorted tuple of
its variable indices (a multiset), e.g. ``x_0 x_3^2`` is ``(0, 3, 3)``.  The
empty tuple is the constant monomial ``1``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np
from scipy import linalg

from .exceptions import DegreeError, IncompleteTableError, SymmetryError

MAX_DEGREE = 4
SYMMETRY_RTOL = 1e-12

MonomialIndex = tuple  # sorted tuple of ints, length <= 4


def canonicalize(indices: Iterable[int], p: int | None = None) -> MonomialIndex:
    """Return the canonical (sorted) multiset for a list of variable indices."""
    idx = tuple(sorted(int(i) for i in indices))
    if len(idx) > MAX_DEGREE:
        raise DegreeError(f"monomial of degree {len(idx)} exceeds {MAX_DEGREE}")
    if idx and (idx[0] < 0 or (p is not None and idx[-1] >= p)):
        raise IndexError(f"variable index out of range for p={p}: {idx}")
    return idx


def monomials(p: int, degree: int) -> Iterator[MonomialIndex]:
    """All canonical monomials of exactly ``degree`` in ``p`` variables."""
    return itertools.combinations_with_replacement(range(p), degree)


def pair_basis(p: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(p) for j in range(p)]


def reduced_basis(p: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(p) for j in range(i, p)]


class MomentTable:
    """Values of a degree-<=4 pseudo-moment on canonical monomials.

    Lookups canonicalize their argument, so ``table[(3, 1)]`` and
    ``table[(1, 3)]`` hit the same entry.  Only canonical keys are stored.
    """

    def __init__(self, p: int, values: Mapping[Iterable[int], float]):
        self.p = int(p)
        store: dict[MonomialIndex, float] = {}
        for key, val in values.items():
            store[canonicalize(key, self.p)] = float(val)
        if store.get((), None) != 1.0:
            raise ValueError("a moment table must have M(1) = 1")
        self._values = store

    def lookup(self, indices: Iterable[int]) -> float:
        key = canonicalize(indices, self.p)
        try:
            return self._values[key]
        except KeyError:
            raise IncompleteTableError(key) from None

    __getitem__ = lookup

    def __contains__(self, indices) -> bool:
        return canonicalize(indices, self.p) in self._values

    def __len__(self) -> int:
        return len(self._values)

    def items(self):
        return self._values.items()

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentTable):
            return NotImplemented
        return self.p == other.p and self._values == other._values

    def degree2_matrix(self) -> np.ndarray:
        M2 = np.empty((self.p, self.p))
        for i, j in itertools.combinations_with_replacement(range(self.p), 2):
            M2[i, j] = M2[j, i] = self.lookup((i, j))
        return M2

    def values(self, I, J, S, T) -> np.ndarray:
        """Degree-4 values at index arrays, one lookup per entry."""
        quads = zip(*(np.asarray(a).ravel() for a in (I, J, S, T)))
        out = np.fromiter((self.lookup(q) for q in quads), dtype=float)
        return out.reshape(np.shape(I))

    def evaluate(self, poly: Mapping[Iterable[int], float]) -> float:
        """Apply the linear functional to a polynomial given as {monomial: coef}."""
        total = 0.0
        for mono, coef in poly.items():
            total += coef * self.lookup(mono)
        return total

    # serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        entries = [{"idx": list(k), "val": v} for k, v in sorted(self._values.items(), key=lambda kv: (len(kv[0]), kv[0]))]
        return {"p": self.p, "entries": entries}

    @classmethod
    def from_dict(cls, data: Mapping) -> "MomentTable":
        values = {}
        for e in data["entries"]:
            key = tuple(e["idx"])
            if key != canonicalize(key):
                raise ValueError(f"non-canonical index in serialized table: {key}")
            values[key] = e["val"]
        return cls(data["p"], values)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MomentTable":
        return cls.from_dict(json.loads(text))


def square_polynomial(linear: Mapping[int, float], quadratic: Mapping[tuple[int, int], float],
                      constant: float = 0.0) -> dict[MonomialIndex, float]:
    """Expand ``(c + sum a_i x_i + sum b_ij x_i x_j)^2`` into {monomial: coef}."""
    terms: list[tuple[MonomialIndex, float]] = []
    if constant:
        terms.append(((), constant))
    terms += [((i,), a) for i, a in linear.items()]
    terms += [(tuple(ij), b) for ij, b in quadratic.items()]
    out: dict[MonomialIndex, float] = {}
    for (m1, c1), (m2, c2) in itertools.product(terms, repeat=2):
        key = canonicalize(m1 + m2)
        out[key] = out.get(key, 0.0) + c1 * c2
    return out


@dataclass(frozen=True)
class MatrixForm:
    """Block-diagonal moment matrix ``blkdiag(M4, M2, M0)``.

    ``M4`` is indexed by ordered pairs (``basis == "pair"``, dimension p^2) or by
    pairs ``i <= j`` (``basis == "reduced"``, dimension p(p+1)/2).  Odd-degree
    cross blocks vanish for every table produced here, so only these three
    blocks are kept.
    """

    M0: np.ndarray
    M2: np.ndarray
    M4: np.ndarray
    basis: str

    @property
    def p(self) -> int:
        return self.M2.shape[0]

    def index(self) -> list[tuple[int, int]]:
        return pair_basis(self.p) if self.basis == "pair" else reduced_basis(self.p)


def assemble_matrix_form(table, basis: str = "reduced") -> MatrixForm:
    """Build the matrix form of ``table`` by reading every entry from it.

    ``table`` is anything exposing ``p`` and ``lookup(indices)``.
    """
    if basis not in ("pair", "reduced"):
        raise ValueError(f"unknown basis {basis!r}")
    p = table.p
    M0 = np.array([[table.lookup(())]])
    M2 = np.empty((p, p))
    for i, j in itertools.combinations_with_replacement(range(p), 2):
        M2[i, j] = M2[j, i] = table.lookup((i, j))
    rows = reduced_basis(p)
    pos = {r: a for a, r in enumerate(rows)}
    N = len(rows)
    R = np.empty((N, N))
    for a, (i, j) in enumerate(rows):
        for b in range(a, N):
            s, t = rows[b]
            R[a, b] = R[b, a] = table.lookup((i, j, s, t))
    if basis == "reduced":
        return MatrixForm(M0, M2, R, basis)
    sel = np.array([pos[(min(i, j), max(i, j))] for i, j in pair_basis(p)])
    return MatrixForm(M0, M2, R[np.ix_(sel, sel)], basis)


def check_symmetric(A: np.ndarray, rtol: float = SYMMETRY_RTOL) -> None:
    scale = max(np.abs(A).max(initial=0.0), np.finfo(float).tiny)
    asym = np.abs(A - A.T).max(initial=0.0)
    if asym > rtol * scale:
        raise SymmetryError(f"matrix asymmetry {asym:.3e} exceeds {rtol:g} relative")


def min_eigenvalue(block: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    A = np.asarray(block, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    check_symmetric(A)
    A = (A + A.T) / 2
    if A.shape[0] <= 64:
        return float(np.linalg.eigvalsh(A)[0])
    return float(linalg.eigh(A, eigvals_only=True, subset_by_index=[0, 0], driver="evr")[0])


def spectral_norm(block: np.ndarray) -> float:
    A = (block + block.T) / 2
    w = linalg.eigh(A, eigvals_only=True)
    return float(max(abs(w[0]), abs(w[-1])))
