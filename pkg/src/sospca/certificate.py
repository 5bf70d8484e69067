"""Explicit degree-4 pseudo-moment built from a row-normalized data matrix.

Notation used throughout, with ``G = X X^T`` the Gram matrix of the rows:

* degree-2 base ``Mt = (gamma k / p^2) G``;
* ``P(ijst) = cP * sum_l G_il G_jl G_sl G_tl`` with ``cP = gamma k / (p^2 n^3)``;
* ``Q(ijst) = cQ * (G_ij G_st + G_is G_jt + G_it G_js)`` with ``cQ = gamma k^2 / (p^3 n)``.

The exact moment keeps ``P + Q`` on every degree-4 monomial except those of the
shapes ``x_s^3 x_t``, ``x_s^2 x_t^2`` and ``x_s^4``, which are adjusted so that
the linear constraints hold to machine precision.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .datagen import DataMatrix, gram
from .exceptions import ParameterError
from .moments import MatrixForm, MomentTable, canonicalize, monomials, reduced_basis

_CHUNK = 1 << 16


@dataclass(frozen=True)
class CertificateParams:
    k: int
    gamma: float = 1.0

    def __post_init__(self):
        if self.k < 3:
            raise ParameterError(f"need k >= 3, got {self.k}")
        if not self.gamma >= 1:
            raise ParameterError(f"need gamma >= 1, got {self.gamma}")

    @classmethod
    def theorem_mode(cls, k: int, lam: float, n: int) -> tuple["CertificateParams", int]:
        """Couple ``gamma = 11 lam`` and ``p = ceil(1.1 gamma n)``; returns (params, p)."""
        gamma = 11.0 * lam
        return cls(k, gamma), int(np.ceil(1.1 * gamma * n - 1e-9))


@dataclass(frozen=True, eq=False)
class ErrorMatrices:
    """Row/column sums of the degree-4 blocks that differ from the degree-2 base.

    ``F`` is ``P(x_i^3 x_j) - Mt_ij`` and is not symmetric in general.
    ``G`` here is the Q-side error ``sum_i Q(x_i^2 x_s x_t) - k Mt_st``.
    """

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    Eprime: np.ndarray
    Fprime: np.ndarray
    delta: float

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist() for name in ("E", "F", "G", "Eprime", "Fprime")} | {"delta": self.delta}


def _gram_of(X) -> tuple[np.ndarray, int]:
    if isinstance(X, DataMatrix):
        if not X.normalized:
            warnings.warn("data matrix is not flagged as row-normalized", stacklevel=3)
        return gram(X), X.n
    X = np.asarray(X, dtype=float)
    G, n = gram(X), X.shape[1]
    if not np.allclose(np.diag(G), n, rtol=1e-8, atol=0):
        # the constraints still hold algebraically, but cancellation grows with the row-norm spread
        warnings.warn("rows do not have squared norm n; normalize them first", stacklevel=3)
    return G, n


def _constants(p: int, n: int, params: CertificateParams) -> tuple[float, float]:
    k, g = params.k, params.gamma
    return g * k / (p**2 * n**3), g * k**2 / (p**3 * n)


def build_degree2(X, params: CertificateParams) -> np.ndarray:
    """``(gamma k / p^2) X X^T``."""
    G, _ = _gram_of(X)
    p = G.shape[0]
    return params.gamma * params.k / p**2 * G


def build_degree2_diagonal_fixed(X, params: CertificateParams) -> np.ndarray:
    """Degree-2 base with its diagonal replaced by ``k/p`` so that the trace is exactly k.

    A standalone degree-2 point; the main construction does not use it.
    """
    M = build_degree2(X, params)
    np.fill_diagonal(M, params.k / M.shape[0])
    return M


def build_P_gram(X, params: CertificateParams, basis: str = "reduced") -> np.ndarray:
    """Factor ``W`` with ``mat(P) = W W^T``; one column per l in [p].

    Rows follow the pair basis (p^2 rows) or the reduced basis (i <= j).
    """
    G, n = _gram_of(X)
    p = G.shape[0]
    cP, _ = _constants(p, n, params)
    if basis == "pair":
        I, J = np.divmod(np.arange(p * p), p)
    else:
        I, J = np.triu_indices(p)
    return np.sqrt(cP) * (G[I] * G[J])


@dataclass(frozen=True)
class QBlock:
    """Entry accessor for Q plus its Gram factor.

    ``mat(Q) = cQ * Z (vec(I) vec(I)^T + I + K) Z^T`` where row (i,j) of ``Z`` is
    ``X_i kron X_j`` and ``K`` is the commutation matrix; hence the factor
    ``sqrt(cQ) [Z vec(I), sqrt(2) Z (I + K)/2]``.
    """

    X: np.ndarray
    G: np.ndarray
    cQ: float

    def entry(self, i, j, s, t):
        G = self.G
        return self.cQ * (G[i, j] * G[s, t] + G[i, s] * G[j, t] + G[i, t] * G[j, s])

    def gram_factor(self, pairs: list[tuple[int, int]] | None = None) -> np.ndarray:
        p, n = self.X.shape
        if pairs is None:
            pairs = reduced_basis(p)
        I = np.array([a for a, _ in pairs])
        J = np.array([b for _, b in pairs])
        Z = np.einsum("ra,rb->rab", self.X[I], self.X[J]).reshape(len(pairs), n * n)
        sym = (Z + np.einsum("rab->rba", Z.reshape(-1, n, n)).reshape(len(pairs), n * n)) / 2
        trace_col = self.G[I, J][:, None]
        return np.sqrt(self.cQ) * np.hstack([trace_col, np.sqrt(2.0) * sym])


def build_Q(X, params: CertificateParams) -> QBlock:
    G, n = _gram_of(X)
    Xa = X.X if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)
    _, cQ = _constants(G.shape[0], n, params)
    return QBlock(Xa, G, cQ)


def _error_parts(G: np.ndarray, n: int, params: CertificateParams):
    p = G.shape[0]
    k = params.k
    cP, cQ = _constants(p, n, params)
    Mt = params.gamma * k / p**2 * G
    G2 = G * G
    F = cP * ((G2 * G) @ G.T) - Mt
    w = G2.sum(axis=0)
    E = cP * (G * w) @ G.T
    E = (E + E.T) / 2
    Gq = 2 * cQ * (G @ G)
    Gq = (Gq + Gq.T) / 2
    Ep = E + Gq
    Fp = F + 3 * k / p * Mt
    # (P+Q)(x_s^2 x_t^2) for all s, t
    PQ = cP * (G2 @ G2.T) + cQ * (np.outer(np.diag(G), np.diag(G)) + 2 * G2)
    PQ = (PQ + PQ.T) / 2
    off = PQ.sum() - np.trace(PQ)
    delta = (k * k - k - off) / (p * (p - 1))
    return Mt, ErrorMatrices(E, F, Gq, Ep, Fp, float(delta)), PQ, cP, cQ


def compute_error_matrices(X, params: CertificateParams) -> ErrorMatrices:
    G, n = _gram_of(X)
    return _error_parts(G, n, params)[1]


def _content_hash(G: np.ndarray, n: int) -> str:
    h = hashlib.sha256()
    h.update(np.asarray([G.shape[0], n], dtype="<i8").tobytes())
    h.update(np.ascontiguousarray(G, dtype="<f8").tobytes())
    return h.hexdigest()


@dataclass(frozen=True, eq=False)
class Certificate:
    """The exact pseudo-moment.  Degree-4 values are computed on demand from ``G``."""

    params: CertificateParams
    n: int
    G: np.ndarray
    Mt: np.ndarray
    errors: ErrorMatrices
    M2: np.ndarray
    pair_sums: np.ndarray
    cP: float
    cQ: float
    data_hash: str
    warnings: tuple[str, ...] = field(default=())

    # basic accessors -------------------------------------------------------

    @property
    def p(self) -> int:
        return self.G.shape[0]

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def delta(self) -> float:
        return self.errors.delta

    @property
    def delta_negative(self) -> bool:
        return self.errors.delta < 0

    def degree2_matrix(self) -> np.ndarray:
        return self.M2

    # correction entries ----------------------------------------------------

    @property
    def gamma_diag(self) -> np.ndarray:
        """Correction at ((i,i),(i,i)): ``M(x_i^4) - (P+Q)(x_i^4)``."""
        return np.diag(self.M2) - np.diag(self.pair_sums)

    @property
    def gamma_cross(self) -> np.ndarray:
        """Correction at ((i,i),(i,j)): ``M(x_i^3 x_j) - (P+Q)(x_i^3 x_j)``; zero diagonal."""
        C = self.M2 - self.Mt - self.errors.Fprime
        np.fill_diagonal(C, 0.0)
        return C

    def correction_entries(self) -> dict:
        """The four correction patterns; ((i,i),(j,j)) and ((i,j),(i,j)) both equal delta."""
        return {"ii,ii": self.gamma_diag, "ii,jj": self.delta, "ij,ij": self.delta, "ii,ij": self.gamma_cross}

    # degree-4 values -------------------------------------------------------

    def base_values(self, I, J, S, T) -> np.ndarray:
        """``(P+Q)`` at index arrays (any order)."""
        I, J, S, T = (np.asarray(a, dtype=np.intp) for a in (I, J, S, T))
        G = self.G
        out = np.empty(I.shape, dtype=float)
        flat = out.reshape(-1)
        I, J, S, T = I.ravel(), J.ravel(), S.ravel(), T.ravel()
        for lo in range(0, I.size, _CHUNK):
            i, j, s, t = (a[lo:lo + _CHUNK] for a in (I, J, S, T))
            P = self.cP * np.einsum("rl,rl->r", G[i] * G[j], G[s] * G[t])
            Q = self.cQ * (G[i, j] * G[s, t] + G[i, s] * G[j, t] + G[i, t] * G[j, s])
            flat[lo:lo + _CHUNK] = P + Q
        return out

    def _adjust(self, out: np.ndarray, a, b, c, d) -> np.ndarray:
        """Overwrite the base values on the adjusted shapes; indices must be sorted per entry."""
        e_ab, e_bc, e_cd = a == b, b == c, c == d
        quad = e_ab & e_bc & e_cd
        triple_lo = e_ab & e_bc & ~e_cd  # a a a d
        triple_hi = ~e_ab & e_bc & e_cd  # a d d d
        two_pairs = e_ab & ~e_bc & e_cd
        out[quad] = self.M2[a[quad], a[quad]]
        out[triple_lo] = self.M2[a[triple_lo], d[triple_lo]]
        out[triple_hi] = self.M2[a[triple_hi], d[triple_hi]]
        out[two_pairs] += self.delta
        return out

    def values(self, I, J, S, T) -> np.ndarray:
        """Exact moment values at index arrays (any order)."""
        idx = np.sort(np.stack([np.asarray(a, dtype=np.intp).ravel() for a in (I, J, S, T)], axis=1), axis=1)
        a, b, c, d = idx.T
        out = self._adjust(self.base_values(a, b, c, d), a, b, c, d)
        return out.reshape(np.shape(I))

    def columns_iist(self, S, T) -> np.ndarray:
        """``M(x_i^2 x_s x_t)`` for all i (columns) and each pair (rows), via matrix products."""
        S = np.asarray(S, dtype=np.intp).ravel()
        T = np.asarray(T, dtype=np.intp).ravel()
        G = self.G
        p = self.p
        out = self.cP * ((G[S] * G[T]) @ (G * G).T)
        d = np.diag(G)
        out += self.cQ * (G[S, T][:, None] * d[None, :] + 2 * G[:, S].T * G[:, T].T)
        i = np.broadcast_to(np.arange(p), out.shape)
        ss = np.broadcast_to(S[:, None], out.shape)
        tt = np.broadcast_to(T[:, None], out.shape)
        idx = np.sort(np.stack([i, i, ss, tt], axis=-1), axis=-1)
        return self._adjust(out, *(idx[..., r] for r in range(4)))

    def lookup(self, indices) -> float:
        idx = canonicalize(indices, self.p)
        if len(idx) == 0:
            return 1.0
        if len(idx) % 2:
            return 0.0
        if len(idx) == 2:
            return float(self.M2[idx])
        return float(self.values(*([v] for v in idx))[0])

    __getitem__ = lookup

    def column_iist(self, s: int, t: int) -> np.ndarray:
        """``M(x_i^2 x_s x_t)`` for all i."""
        return self.columns_iist([s], [t])[0]

    # matrix forms ----------------------------------------------------------

    def P_gram(self, basis: str = "reduced") -> np.ndarray:
        if basis == "pair":
            I, J = np.divmod(np.arange(self.p**2), self.p)
        else:
            I, J = np.triu_indices(self.p)
        return np.sqrt(self.cP) * (self.G[I] * self.G[J])

    def Q_block(self) -> np.ndarray:
        """Dense mat(Q) in the reduced basis."""
        I, J = np.triu_indices(self.p)
        G = self.G
        return self.cQ * (np.outer(G[I, J], G[I, J]) + G[np.ix_(I, I)] * G[np.ix_(J, J)] + G[np.ix_(I, J)] * G[np.ix_(J, I)])

    def correction_sparse(self) -> sparse.csr_matrix:
        """Correction matrix in the reduced basis as a sparse matrix (O(p^2) nonzeros)."""
        p = self.p
        I, J = np.triu_indices(p)
        N = I.size
        pos = np.full((p, p), -1)
        pos[I, J] = np.arange(N)
        diag = pos[np.arange(p), np.arange(p)]
        r_dd, c_dd = np.meshgrid(diag, diag, indexing="ij")
        v_dd = np.full(r_dd.shape, self.delta)
        v_dd[np.arange(p), np.arange(p)] = self.gamma_diag
        off = np.flatnonzero(I < J)
        C = self.gamma_cross
        rows = [r_dd.ravel(), off]
        cols = [c_dd.ravel(), off]
        vals = [v_dd.ravel(), np.full(off.size, self.delta)]
        for u, v in ((I[off], J[off]), (J[off], I[off])):
            rows += [diag[u], off]
            cols += [off, diag[u]]
            vals += [C[u, v], C[u, v]]
        return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))

    def correction_block(self) -> np.ndarray:
        """Dense correction matrix in the reduced basis (mostly zeros)."""
        return self.correction_sparse().toarray()

    def m4_reduced(self) -> np.ndarray:
        """Dense degree-4 block in the reduced basis via the P/Q/correction split."""
        W = self.P_gram("reduced")
        M4 = W @ W.T + self.Q_block() + self.correction_block()
        return (M4 + M4.T) / 2

    def matrix_form(self, basis: str = "reduced") -> MatrixForm:
        R = self.m4_reduced()
        M0 = np.ones((1, 1))
        if basis == "reduced":
            return MatrixForm(M0, self.M2.copy(), R, basis)
        p = self.p
        pos = np.full((p, p), -1)
        I, J = np.triu_indices(p)
        pos[I, J] = pos[J, I] = np.arange(I.size)
        sel = pos.ravel()
        return MatrixForm(M0, self.M2.copy(), R[np.ix_(sel, sel)], basis)

    def to_table(self) -> MomentTable:
        """Materialize every canonical monomial; intended for small p."""
        vals = {(): 1.0}
        for d in (1, 3):
            vals.update({m: 0.0 for m in monomials(self.p, d)})
        vals.update({m: float(self.M2[m]) for m in monomials(self.p, 2)})
        quads = np.array(list(monomials(self.p, 4)), dtype=np.intp).reshape(-1, 4)
        v4 = self.values(*quads.T)
        vals.update({tuple(int(x) for x in q): float(v) for q, v in zip(quads, v4)})
        return MomentTable(self.p, vals)

    # serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "params": {"k": self.k, "gamma": self.gamma},
            "p": self.p,
            "n": self.n,
            "data_hash": self.data_hash,
            "degree2_base": self.Mt.tolist(),
            "degree2": self.M2.tolist(),
            "errors": self.errors.to_dict(),
            "correction": {
                "ii,ii": self.gamma_diag.tolist(),
                "ii,jj": self.delta,
                "ij,ij": self.delta,
                "ii,ij": self.gamma_cross.tolist(),
            },
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _build_from_gram(G: np.ndarray, n: int, params: CertificateParams, data_hash: str | None = None) -> Certificate:
    p = G.shape[0]
    if p < 2:
        raise ParameterError("need at least two variables")
    k = params.k
    Mt, err, PQ, cP, cQ = _error_parts(G, n, params)
    Fs = (err.Fprime + err.Fprime.T) / 2
    M2 = Mt + (err.Eprime - 2 * Fs) / (k - 2)
    off = ~np.eye(p, dtype=bool)
    M2[np.diag_indices(p)] = np.where(off, PQ + err.delta, 0.0).sum(axis=1) / (k - 1)
    notes = []
    if err.delta < 0:
        notes.append("delta_negative")
    return Certificate(params, n, G, Mt, err, M2, PQ, cP, cQ, data_hash or _content_hash(G, n), tuple(notes))


def build_exact_moment(X, params: CertificateParams) -> Certificate:
    G, n = _gram_of(X)
    return _build_from_gram(G, n, params)


@dataclass(frozen=True, eq=False)
class RestrictedCertificate:
    """A certificate built on rows ``keep`` and zero-extended to all p variables."""

    inner: Certificate
    keep: np.ndarray
    p: int

    @property
    def k(self) -> int:
        return self.inner.k

    @property
    def gamma(self) -> float:
        return self.inner.gamma

    @property
    def delta(self) -> float:
        return self.inner.delta

    @property
    def M2(self) -> np.ndarray:
        M = np.zeros((self.p, self.p))
        M[np.ix_(self.keep, self.keep)] = self.inner.M2
        return M

    def degree2_matrix(self) -> np.ndarray:
        return self.M2

    def _local(self) -> np.ndarray:
        loc = np.full(self.p, -1)
        loc[self.keep] = np.arange(self.keep.size)
        return loc

    def values(self, I, J, S, T) -> np.ndarray:
        loc = self._local()
        idx = [loc[np.asarray(a, dtype=np.intp).ravel()] for a in (I, J, S, T)]
        inside = np.all([a >= 0 for a in idx], axis=0)
        out = np.zeros(inside.shape)
        if inside.any():
            out[inside] = self.inner.values(*(a[inside] for a in idx))
        return out.reshape(np.shape(I))

    def lookup(self, indices) -> float:
        idx = canonicalize(indices, self.p)
        loc = self._local()
        if any(loc[i] < 0 for i in idx):
            return 0.0
        return self.inner.lookup([loc[i] for i in idx])

    __getitem__ = lookup

    def matrix_form(self, basis: str = "reduced") -> MatrixForm:
        p = self.p
        loc = self._local()
        inner = self.inner.matrix_form(basis)
        q = self.inner.p
        if basis == "reduced":
            I, J = np.triu_indices(p)
            mask = (loc[I] >= 0) & (loc[J] >= 0)
            pos = np.full((q, q), -1)
            a, b = np.triu_indices(q)
            pos[a, b] = np.arange(a.size)
            src = pos[loc[I[mask]], loc[J[mask]]]
        else:
            I, J = np.divmod(np.arange(p * p), p)
            mask = (loc[I] >= 0) & (loc[J] >= 0)
            src = loc[I[mask]] * q + loc[J[mask]]
        M4 = np.zeros((I.size, I.size))
        dst = np.flatnonzero(mask)
        M4[np.ix_(dst, dst)] = inner.M4[np.ix_(src, src)]
        return MatrixForm(inner.M0, self.M2, M4, basis)


def restrict_certificate(cert: Certificate, keep) -> RestrictedCertificate:
    """Rebuild ``cert`` from the rows ``keep`` only and embed it into all p variables.

    Every monomial touching a variable outside ``keep`` gets value 0.
    """
    keep = np.unique(np.asarray(keep, dtype=np.intp))
    if keep.size and (keep[0] < 0 or keep[-1] >= cert.p):
        raise IndexError("restriction index out of range")
    inner = _build_from_gram(cert.G[np.ix_(keep, keep)], cert.n, cert.params)
    return RestrictedCertificate(inner, keep, cert.p)
