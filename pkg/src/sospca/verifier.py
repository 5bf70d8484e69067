"""Feasibility checks for degree-4 pseudo-moments and the detection rule.

Constraints checked:

* C1 ``sum_i M(x_i^2) = k``
* C2 ``sum_{i,j} |M(x_i x_j)| <= k^2``
* C3 ``M(x_i^3 x_j) = M(x_i x_j)``
* C4 ``sum_i M(x_i^2 x_s x_t) = k M(x_s x_t)``
* C5 ``sum_{i,j,s,t} |M(x_i x_j x_s x_t)| <= k^4``
* C6 the moment matrix is PSD

Tables are duck-typed: anything with ``p``, ``lookup(indices)`` and
``values(I, J, S, T)`` works.  ``degree2_matrix()`` is used when present.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import CapError, InvalidLowerBoundError, ParameterError
from .moments import MatrixForm, assemble_matrix_form, min_eigenvalue, spectral_norm

SCHEMA_VERSION = 1
LINEAR_RTOL = 1e-9
PSD_TOL = 1e-8
LINEAR_EXHAUSTIVE_MAX_P = 40
C5_EXACT_MAX_P = 120
EIGEN_MAX_P = 100
AUDIT_SAMPLES = 10_000
C5_SAMPLES = 100_000

EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_ESTIMATE = 0, 2, 3


@dataclass
class ConstraintResult:
    value: float
    bound: float
    passed: bool
    witness: list = field(default_factory=list)
    estimate: bool = False
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    objective: float
    constraints: dict
    psd_mode: str
    psd_details: dict = field(default_factory=dict)
    k: int = 0
    p: int = 0
    schema_version: int = SCHEMA_VERSION

    @property
    def feasible(self) -> bool:
        return all(c.passed for c in self.constraints.values()) and len(self.constraints) == 6

    @property
    def estimate_only(self) -> bool:
        return any(c.estimate for c in self.constraints.values())

    @property
    def exit_code(self) -> int:
        if not self.feasible:
            return EXIT_INFEASIBLE
        return EXIT_ESTIMATE if self.estimate_only else EXIT_FEASIBLE

    def to_dict(self) -> dict:
        d = asdict(self)
        d["feasible"] = self.feasible
        d["estimate_only"] = self.estimate_only
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        cons = {k: ConstraintResult(**v) for k, v in d["constraints"].items()}
        return cls(d["objective"], cons, d["psd_mode"], d.get("psd_details", {}), d.get("k", 0), d.get("p", 0),
                   d.get("schema_version", SCHEMA_VERSION))

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _degree2(table) -> np.ndarray:
    if hasattr(table, "degree2_matrix"):
        return np.asarray(table.degree2_matrix())
    p = table.p
    return np.array([[table.lookup((i, j)) for j in range(p)] for i in range(p)])


def objective(table, sigma_hat: np.ndarray) -> float:
    """``sum_{i,j} M(x_i x_j) sigma_hat_ij``."""
    return float(np.sum(_degree2(table) * np.asarray(sigma_hat)))


# linear constraints ----------------------------------------------------------


def _pair_sample(p: int, exhaustive_max_p: int, samples: int, seed: int):
    if p <= exhaustive_max_p or samples >= p * p:
        S, T = np.divmod(np.arange(p * p), p)
        return S, T, False
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.integers(0, p, samples), rng.integers(0, p, samples), True


def check_linear_constraints(table, k: int, *, exhaustive_max_p: int = LINEAR_EXHAUSTIVE_MAX_P,
                             samples: int = AUDIT_SAMPLES, seed: int = 0, rtol: float = LINEAR_RTOL) -> dict:
    """Residuals of C1, C3, C4.  Pairs are audited by random sampling above ``exhaustive_max_p``."""
    p = table.p
    M2 = _degree2(table)
    entry_scale = max(float(np.abs(M2).max()), np.finfo(float).tiny)

    c1 = abs(float(np.trace(M2)) - k)
    out = {"C1": ConstraintResult(c1, rtol * k, c1 <= rtol * k)}

    S, T, sampled = _pair_sample(p, exhaustive_max_p, samples, seed)
    cubes = table.values(S, S, S, T)
    r3 = np.abs(cubes - M2[S, T])
    w = int(np.argmax(r3))
    out["C3"] = ConstraintResult(float(r3[w]), rtol * entry_scale, bool(r3[w] <= rtol * entry_scale),
                                 [int(S[w]), int(T[w])], detail={"sampled": sampled, "pairs": int(S.size)})

    col = np.zeros(S.size)
    idx = np.arange(p)
    step = max(1, (1 << 18) // p)
    for lo in range(0, S.size, step):
        s, t = S[lo:lo + step], T[lo:lo + step]
        if hasattr(table, "columns_iist"):
            block = table.columns_iist(s, t)
        else:
            I = np.broadcast_to(idx, (s.size, p))
            block = table.values(I, I, np.broadcast_to(s[:, None], I.shape), np.broadcast_to(t[:, None], I.shape))
        col[lo:lo + step] = block.sum(axis=1)
    r4 = np.abs(col - k * M2[S, T])
    w = int(np.argmax(r4))
    bound = rtol * k * entry_scale
    out["C4"] = ConstraintResult(float(r4[w]), bound, bool(r4[w] <= bound), [int(S[w]), int(T[w])],
                                 detail={"sampled": sampled, "pairs": int(S.size)})
    return out


# l1 constraints --------------------------------------------------------------

# Canonical multiset strata: (name, number of orderings of one multiset).
_STRATA = (("distinct", 24), ("one_pair", 12), ("two_pairs", 6), ("triple", 4), ("quad", 1))


def _stratum_count(name: str, p: int) -> int:
    return {
        "distinct": math.comb(p, 4),
        "one_pair": p * math.comb(p - 1, 2),
        "two_pairs": math.comb(p, 2),
        "triple": p * (p - 1),
        "quad": p,
    }[name]


def _stratum_members(name: str, p: int) -> np.ndarray:
    """All canonical-shape index tuples of a stratum (small strata only)."""
    a = np.arange(p)
    if name == "quad":
        return np.stack([a, a, a, a], axis=1)
    i, j = np.triu_indices(p, 1)
    if name == "two_pairs":
        return np.stack([i, i, j, j], axis=1)
    if name == "triple":
        i, j = np.nonzero(~np.eye(p, dtype=bool))
        return np.stack([i, i, i, j], axis=1)
    raise ValueError(name)


def _distinct_draws(p: int, width: int, size: int, rng) -> np.ndarray:
    """``size`` uniform draws of ``width`` distinct indices (rejection sampling)."""
    out = np.empty((0, width), dtype=np.intp)
    while len(out) < size:
        cand = rng.integers(0, p, (2 * size, width))
        srt = np.sort(cand, axis=1)
        ok = np.all(np.diff(srt, axis=1) > 0, axis=1)
        out = np.concatenate([out, cand[ok]])
    return out[:size]


def _sample_stratum(name: str, p: int, size: int, rng) -> np.ndarray:
    if name == "distinct":
        return _distinct_draws(p, 4, size, rng)
    picks = _distinct_draws(p, 3, size, rng)
    return np.stack([picks[:, 0], picks[:, 0], picks[:, 1], picks[:, 2]], axis=1)


def _iter_one_pair(p: int):
    j, s = np.triu_indices(p, 1)
    for i in range(p):
        keep = (j != i) & (s != i)
        jj, ss = j[keep], s[keep]
        yield np.stack([np.full(jj.size, i), np.full(jj.size, i), jj, ss], axis=1)


def _iter_distinct(p: int):
    # enumerate i<j<s<t by fixing (i, j) and taking all s<t above j
    for i in range(p):
        for j in range(i + 1, p):
            rest = np.arange(j + 1, p)
            if rest.size < 2:
                continue
            s, t = np.triu_indices(rest.size, 1)
            m = s.size
            yield np.stack([np.full(m, i), np.full(m, j), rest[s], rest[t]], axis=1)


def _abs_sum(table, quads: np.ndarray) -> float:
    total = 0.0
    for lo in range(0, len(quads), 1 << 16):
        q = quads[lo:lo + (1 << 16)]
        total += float(np.abs(table.values(q[:, 0], q[:, 1], q[:, 2], q[:, 3])).sum())
    return total


def _batched(gen, size: int):
    buf, n = [], 0
    for arr in gen:
        buf.append(arr)
        n += len(arr)
        if n >= size:
            yield np.concatenate(buf)
            buf, n = [], 0
    if buf:
        yield np.concatenate(buf)


def check_l1_constraints(table, k: int, *, exact_max_p: int = C5_EXACT_MAX_P, samples: int = C5_SAMPLES,
                         seed: int = 0) -> dict:
    """Margins of C2 and C5; C5 is a stratified estimate above ``exact_max_p``."""
    p = table.p
    M2 = _degree2(table)
    s2 = float(np.abs(M2).sum())
    out = {"C2": ConstraintResult(s2, float(k * k), s2 <= k * k, detail={"margin": k * k - s2})}

    strata = {}
    estimate = p > exact_max_p
    rng = np.random.Generator(np.random.Philox(seed))
    for name, weight in _STRATA:
        count = _stratum_count(name, p)
        if count == 0:
            strata[name] = 0.0
            continue
        if name in ("two_pairs", "triple", "quad"):
            strata[name] = weight * _abs_sum(table, _stratum_members(name, p))
        elif not estimate:
            gen = _iter_distinct(p) if name == "distinct" else _iter_one_pair(p)
            strata[name] = weight * sum(_abs_sum(table, q) for q in _batched(gen, 1 << 16))
        else:
            q = _sample_stratum(name, p, samples, rng)
            strata[name] = weight * count * _abs_sum(table, q) / len(q)
    s5 = float(sum(strata.values()))
    bound = float(k) ** 4
    out["C5"] = ConstraintResult(s5, bound, s5 <= bound, estimate=estimate,
                                 detail={"margin": bound - s5, "strata": strata})
    return out


# PSD checks ------------------------------------------------------------------


def _psd_margin(block: np.ndarray, tol: float) -> dict:
    lam = min_eigenvalue(block)
    norm = spectral_norm(block)
    return {"min_eigenvalue": lam, "norm": norm, "passed": bool(lam >= -tol * norm)}


def check_psd_eigen(form, tol: float = PSD_TOL, max_p: int = EIGEN_MAX_P) -> dict:
    """Dense eigenvalue check of M2 and reduced-basis M4."""
    p = form.p
    if p > max_p:
        raise CapError(f"eigen-mode PSD check capped at p={max_p} (got p={p}); use structural mode")
    if not isinstance(form, MatrixForm):
        form = form.matrix_form("reduced") if hasattr(form, "matrix_form") else assemble_matrix_form(form, "reduced")
    m2 = _psd_margin(form.M2, tol)
    m4 = _psd_margin(form.M4, tol)
    out = {"M2": m2, "M4": m4, "passed": m2["passed"] and m4["passed"]}
    if form.basis == "reduced":
        # informational: the constant/degree-2 block left out of blkdiag(M4, M2, M0)
        I, J = np.triu_indices(p)
        m = form.M2[I, J]
        out["M4_with_constant"] = _psd_margin(form.M4 - np.outer(m, m), tol)
    return out


@dataclass
class GershgorinResult:
    passed: bool
    top_margin: float
    bottom_margin: float
    worst_top: int
    worst_bottom: int
    alpha: float


def gershgorin_blocks(a_diag, c_abs_rows, c_abs_cols, d_diag, alpha: float,
                      a_off_rows=None, d_off_rows=None) -> GershgorinResult:
    """Scaled Gershgorin test for ``[[A, C], [C^T, D]]`` from row/column sums of ``|C|``.

    Conditions: ``A_ii >= sum_i'|A_ii'| + (1/alpha) sum_j |C_ij|`` and
    ``D_jj >= sum_j'|D_jj'| + alpha sum_i |C_ij|``; off-block sums default to zero.
    """
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    a_off = 0.0 if a_off_rows is None else a_off_rows
    d_off = 0.0 if d_off_rows is None else d_off_rows
    top = np.asarray(a_diag) - a_off - np.asarray(c_abs_rows) / alpha
    bottom = np.asarray(d_diag) - d_off - alpha * np.asarray(c_abs_cols)
    tm = float(top.min()) if top.size else math.inf
    bm = float(bottom.min()) if bottom.size else math.inf
    return GershgorinResult(tm >= 0 and bm >= 0, tm, bm, int(np.argmin(top)) if top.size else -1,
                            int(np.argmin(bottom)) if bottom.size else -1, alpha)


def gershgorin_psd(matrix: np.ndarray, m: int | None = None, alpha: float = 1.0) -> GershgorinResult:
    """Sufficient PSD test for a symmetric matrix split after row ``m``.

    With ``m`` equal to the dimension (the default) this is plain diagonal dominance.
    """
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    A = np.asarray(matrix, dtype=float)
    N = A.shape[0]
    m = N if m is None else m
    absA = np.abs(A)
    top, bot = absA[:m, :m], absA[m:, m:]
    C = absA[:m, m:]
    return gershgorin_blocks(np.diag(A)[:m], C.sum(axis=1), C.sum(axis=0), np.diag(A)[m:], alpha,
                             top.sum(axis=1) - np.diag(top), bot.sum(axis=1) - np.diag(bot))


def _gershgorin_sweep(a_diag, c_rows, c_cols, d_diag, alpha0: float):
    res = gershgorin_blocks(a_diag, c_rows, c_cols, d_diag, alpha0)
    if res.passed:
        return res, [alpha0]
    tried = [alpha0]
    best = res
    for alpha in np.logspace(-4, 4, 161):
        r = gershgorin_blocks(a_diag, c_rows, c_cols, d_diag, float(alpha))
        tried.append(float(alpha))
        if r.passed:
            return r, tried
        if min(r.top_margin, r.bottom_margin) > min(best.top_margin, best.bottom_margin):
            best = r
    return best, tried


def _schur_min_eig(a_diag: np.ndarray, C: np.ndarray, delta: float) -> float:
    """Min eigenvalue of ``diag(A) - (C C~^T)/delta`` for the reduced correction block.

    Pair column (i, j) couples only rows i and j, with entries ``C_ij`` and ``C_ji``.
    """
    S = -(C * C.T) / delta
    np.fill_diagonal(S, a_diag - (C * C).sum(axis=1) / delta)
    return float(np.linalg.eigvalsh((S + S.T) / 2)[0])


def _decomposition_residual(cert, samples: int, seed: int) -> float:
    """Compare sampled entries of P + Q + correction against the certificate's own values."""
    p = cert.p
    rng = np.random.Generator(np.random.Philox(seed))
    I, J = np.triu_indices(p)
    N = I.size
    a = rng.integers(0, N, samples)
    b = rng.integers(0, N, samples)
    W = cert.P_gram("reduced")
    P = np.einsum("rl,rl->r", W[a], W[b])
    G = cert.G
    i, j, s, t = I[a], J[a], I[b], J[b]
    Q = cert.cQ * (G[i, j] * G[s, t] + G[i, s] * G[j, t] + G[i, t] * G[j, s])
    corr = np.zeros(samples)
    d = cert.delta
    diag_a, diag_b = i == j, s == t
    corr[diag_a & diag_b] = d
    same = (a == b) & diag_a
    corr[same] = cert.gamma_diag[i[same]]
    corr[(a == b) & ~diag_a] = d
    C = cert.gamma_cross
    m = diag_a & ~diag_b & ((i == s) | (i == t))
    corr[m] = C[i[m], np.where(i[m] == s[m], t[m], s[m])]
    m = diag_b & ~diag_a & ((s == i) | (s == j))
    corr[m] = C[s[m], np.where(s[m] == i[m], j[m], i[m])]
    got = cert.values(i, j, s, t)
    scale = max(float(np.abs(got).max()), np.finfo(float).tiny)
    return float(np.abs(P + Q + corr - got).max() / scale)


def _q_gram_residual(cert, X: np.ndarray | None, rows: int, seed: int) -> float:
    if X is None:
        return math.nan
    from .certificate import QBlock

    p = cert.p
    rng = np.random.Generator(np.random.Philox(seed))
    I, J = np.triu_indices(p)
    pick = rng.choice(I.size, size=min(rows, I.size), replace=False)
    pairs = list(zip(I[pick].tolist(), J[pick].tolist()))
    q = QBlock(X, cert.G, cert.cQ)
    F = q.gram_factor(pairs)
    A = np.array([[q.entry(i, j, s, t) for (s, t) in pairs] for (i, j) in pairs])
    scale = max(float(np.abs(A).max()), np.finfo(float).tiny)
    return float(np.abs(F @ F.T - A).max() / scale)


def check_psd_structural(cert, *, alpha: float | None = None, tol: float = PSD_TOL, X: np.ndarray | None = None,
                         samples: int = 20_000, seed: int = 0) -> dict:
    """Verify C6 through the decomposition of the certificate into PSD pieces.

    Degree 2: ``M2 = Mt + E'/(k-2) + remainder``.  Degree 4: ``P + Q + Lambda' + Gamma''``
    where ``Lambda'`` is ``delta`` on all ((i,i),(j,j)) entries.  Each piece is
    checked by the cheapest sufficient test first, with exact fallbacks noted in
    ``method``.
    """
    inner = getattr(cert, "inner", None)
    if inner is not None:  # zero-extension preserves every piece
        return check_psd_structural(inner, alpha=alpha, tol=tol, X=None if X is None else X[cert.keep],
                                    samples=samples, seed=seed)
    k = cert.k
    pieces: dict[str, dict] = {}

    for name, M in (("degree2_base", cert.Mt), ("error_Eprime", cert.errors.Eprime)):
        pieces[name] = _psd_margin(M, tol) | {"method": "eigen"}

    R = cert.M2 - cert.Mt - cert.errors.Eprime / (k - 2)
    R = (R + R.T) / 2
    g = gershgorin_psd(R)
    piece = {"passed": g.passed, "margin": g.top_margin, "worst_row": g.worst_top, "method": "gershgorin"}
    if not g.passed:
        e = _psd_margin(R, tol)
        piece |= {"passed": e["passed"], "min_eigenvalue": e["min_eigenvalue"], "method": "eigen"}
    pieces["degree2_remainder"] = piece

    res = _decomposition_residual(cert, min(samples, cert.p ** 4), seed)
    pieces["P_gram"] = {"passed": res <= 1e-9, "decomposition_residual": res, "method": "gram"}
    qres = _q_gram_residual(cert, X, 60, seed)
    pieces["Q_gram"] = {"passed": bool(math.isnan(qres) or qres <= 1e-9), "gram_residual": qres, "method": "gram"}

    d = cert.delta
    pieces["Lambda_prime"] = {"passed": d >= 0, "delta": d, "method": "rank_one"}

    a_diag = cert.gamma_diag - d
    C = cert.gamma_cross
    absC = np.abs(C)
    iu, ju = np.triu_indices(cert.p, 1)
    cols = absC[iu, ju] + absC[ju, iu]
    alpha0 = 1.0 / cert.gamma**2 if alpha is None else alpha
    gres, tried = _gershgorin_sweep(a_diag, absC.sum(axis=1), cols, np.full(cols.size, d), alpha0)
    piece = {"passed": gres.passed, "alpha": gres.alpha, "top_margin": gres.top_margin,
             "bottom_margin": gres.bottom_margin, "worst_row": gres.worst_top, "worst_pair": gres.worst_bottom,
             "alphas_tried": len(tried), "method": "gershgorin"}
    if not gres.passed:
        if d > 0:
            lam = _schur_min_eig(a_diag, C, d)
            scale = max(float(np.abs(a_diag).max()), d)
            piece |= {"passed": lam >= -tol * scale, "schur_min_eigenvalue": lam, "method": "schur"}
        else:
            piece |= {"passed": bool(d == 0 and not C.any() and a_diag.min() >= 0), "method": "schur"}
    pieces["Gamma_dprime"] = piece

    failed = [k for k, v in pieces.items() if not v["passed"]]
    return {"pieces": pieces, "passed": not failed, "failed": failed}


def m4_operator(cert, with_constant: bool = False):
    """Matrix-free reduced-basis M4 (optionally minus ``m m^T``, m = degree-2 moments).

    The full moment matrix is ``blkdiag(M2, [[1, m^T], [m, M4]])`` because every
    odd block vanishes, so ``M4 - m m^T`` is its Schur complement with respect to
    the constant monomial.
    """
    from scipy.sparse.linalg import LinearOperator

    p = cert.p
    I, J = np.triu_indices(p)
    G = cert.G
    W = cert.P_gram("reduced")
    corr = cert.correction_sparse()
    m = cert.M2[I, J]

    def matvec(v):
        v = np.asarray(v, dtype=float).ravel()
        V = np.zeros((p, p))
        V[I, J] = v
        GVG = G @ V @ G
        out = W @ (W.T @ v) + cert.cQ * (G[I, J] * np.sum(G * V) + GVG[I, J] + GVG.T[I, J]) + corr @ v
        if with_constant:
            out -= m * (m @ v)
        return out

    return LinearOperator((I.size, I.size), matvec=matvec, dtype=float)


def check_psd_lanczos(cert, tol: float = PSD_TOL, lanczos_tol: float = 1e-8) -> dict:
    """Smallest eigenvalues of M4 and of its Schur complement ``M4 - m m^T`` by Lanczos.

    A diagnostic for large p: not part of the C6 verdict, and its accuracy is that
    of the iterative solver rather than a certificate.
    """
    from scipy.sparse.linalg import eigsh

    cert = getattr(cert, "inner", cert)
    out = {}
    for name, flag in (("M4", False), ("M4_with_constant", True)):
        op = m4_operator(cert, flag)
        lo = float(eigsh(op, k=1, which="SA", tol=lanczos_tol, return_eigenvectors=False)[0])
        hi = float(eigsh(op, k=1, which="LA", tol=1e-4, return_eigenvectors=False)[0])
        out[name] = {"min_eigenvalue": lo, "norm": max(abs(lo), abs(hi)), "passed": lo >= -tol * max(abs(lo), abs(hi))}
    return out


# aggregation -----------------------------------------------------------------


def verify(table, sigma_hat: np.ndarray, k: int, *, psd_mode: str = "auto", tol: float = PSD_TOL,
           X: np.ndarray | None = None, seed: int = 0, alpha: float | None = None) -> VerificationReport:
    """Run C1-C6 and compute the objective.

    ``psd_mode`` is ``eigen``, ``structural``, ``both`` or ``auto`` (eigen when
    p <= 100 and the table is not a certificate, structural otherwise).
    """
    p = table.p
    if psd_mode == "auto":
        structural_ok = hasattr(table, "gamma_cross") or hasattr(table, "inner")
        psd_mode = "structural" if structural_ok and p > EIGEN_MAX_P else ("eigen" if p <= EIGEN_MAX_P else "structural")
    if psd_mode not in ("eigen", "structural", "both"):
        raise ValueError(f"unknown psd mode {psd_mode!r}")
    cons = {}
    cons.update(check_linear_constraints(table, k, seed=seed))
    cons.update(check_l1_constraints(table, k, seed=seed))
    details = {}
    passed = True
    if psd_mode in ("eigen", "both"):
        details["eigen"] = check_psd_eigen(table, tol)
        passed &= details["eigen"]["passed"]
    if psd_mode in ("structural", "both"):
        details["structural"] = check_psd_structural(table, alpha=alpha, tol=tol, X=X, seed=seed)
        passed &= details["structural"]["passed"]
    value = 0.0
    if "eigen" in details:
        value = min(details["eigen"]["M2"]["min_eigenvalue"], details["eigen"]["M4"]["min_eigenvalue"])
    cons["C6"] = ConstraintResult(value, tol, bool(passed), detail={"mode": psd_mode})
    return VerificationReport(objective(table, sigma_hat), cons, psd_mode, details, k, p)


def detect(report: VerificationReport, k: int, lam: float) -> str:
    """``"Hv"`` iff the certified objective strictly exceeds ``(1 + lam/2) k``."""
    if not report.feasible:
        raise InvalidLowerBoundError("certificate is infeasible, so its objective is not a lower bound")
    return "Hv" if report.objective > (1 + lam / 2) * k else "H0"
