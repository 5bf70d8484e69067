import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_cert
from sospca.exceptions import CapError, InvalidLowerBoundError, ParameterError
from sospca.moments import MomentTable, canonicalize, monomials
from sospca.verifier import (
    ConstraintResult,
    VerificationReport,
    check_l1_constraints,
    check_linear_constraints,
    check_psd_eigen,
    check_psd_lanczos,
    check_psd_structural,
    detect,
    gershgorin_psd,
    objective,
    verify,
)


def sparse_sign_table(p, k):
    """Exact moments of x uniform on {0, +-1}^p vectors with exactly k nonzeros."""
    vals = {(): 1.0}
    for d in (1, 2, 3, 4):
        for q in monomials(p, d):
            counts = [q.count(v) for v in set(q)]
            if any(c % 2 for c in counts):
                vals[q] = 0.0
            else:
                m = len(counts)  # distinct variables, each to an even power
                vals[q] = np.prod([(k - r) / (p - r) for r in range(m)])
    return MomentTable(p, vals)


def test_objective_identity_example():
    p, k = 6, 3
    table = sparse_sign_table(p, k)
    assert objective(table, np.eye(p)) == pytest.approx(k)


def test_objective_permutation_invariant():
    data, cert = make_cert(10, 6, 4, 1.0, seed=2)
    S = data.X @ data.X.T / data.n
    perm = np.random.default_rng(0).permutation(10)
    from sospca.certificate import CertificateParams, build_exact_moment

    other = build_exact_moment(data.X[perm], CertificateParams(4, 1.0))
    assert objective(other, S[np.ix_(perm, perm)]) == pytest.approx(objective(cert, S), rel=1e-12)


def test_true_distribution_is_feasible():
    table = sparse_sign_table(7, 3)
    rep = verify(table, np.eye(7), 3, psd_mode="eigen")
    assert rep.feasible and rep.exit_code == 0
    assert rep.constraints["C1"].value == pytest.approx(0, abs=1e-15)
    assert rep.psd_details["eigen"]["M4"]["min_eigenvalue"] > -1e-12


def test_corrupt_entry_c3_witness():
    table = sparse_sign_table(5, 3)
    vals = dict(table.items())
    vals[canonicalize((0, 0, 0, 1))] += 1.0
    bad = MomentTable(5, vals)
    res = check_linear_constraints(bad, 3)
    assert res["C3"].value == pytest.approx(1.0)
    assert res["C3"].witness == [0, 1] and not res["C3"].passed
    assert res["C1"].passed


def test_certificate_linear_constraints_sampled_above_cap():
    _, cert = make_cert(120, 16, 14, 1.5, seed=1)
    res = check_linear_constraints(cert, 14)
    assert all(r.passed for r in res.values())
    assert res["C4"].detail["sampled"]


def test_l1_orthogonal_rows():
    from sospca.certificate import CertificateParams, build_exact_moment

    n, p, k, g = 8, 6, 3, 1.0
    X = np.sqrt(n) * np.eye(n)[:p]
    cert = build_exact_moment(X, CertificateParams(k, g))
    Mt = cert.Mt
    assert np.abs(Mt).sum() == pytest.approx(g * k * n / p)


def test_l1_conditioned_instance():
    _, cert = make_cert(100, 64, 30, 1.0, seed=0)
    res = check_l1_constraints(cert, 30)
    assert res["C2"].passed and res["C5"].passed
    assert not res["C5"].estimate


def test_l1_exact_matches_stratified_estimate():
    _, cert = make_cert(40, 16, 14, 1.5, seed=3)
    exact = check_l1_constraints(cert, 14)["C5"]
    est = check_l1_constraints(cert, 14, exact_max_p=10, samples=50_000)["C5"]
    assert est.estimate and not exact.estimate
    assert est.value == pytest.approx(exact.value, rel=0.02)
    # strata computed exactly in both modes agree exactly
    for name in ("two_pairs", "triple", "quad"):
        assert est.detail["strata"][name] == exact.detail["strata"][name]


def test_l1_brute_force_small():
    _, cert = make_cert(6, 4, 4, 1.0, seed=0)
    idx = np.array(np.meshgrid(*[np.arange(6)] * 4, indexing="ij")).reshape(4, -1)
    total = np.abs(cert.values(*idx)).sum()
    assert check_l1_constraints(cert, 4)["C5"].value == pytest.approx(total, rel=1e-12)


def test_gershgorin_examples():
    assert gershgorin_psd(np.array([[2.0, 1.0], [1.0, 2.0]]), m=1).passed
    bad = np.array([[1.0, 3.0], [3.0, 1.0]])
    for alpha in np.logspace(-3, 3, 25):
        assert not gershgorin_psd(bad, m=1, alpha=alpha).passed
    with pytest.raises(ParameterError):
        gershgorin_psd(bad, m=1, alpha=0.0)
    with pytest.raises(ParameterError):
        gershgorin_psd(bad, m=1, alpha=-1.0)


def test_gershgorin_soundness_audit():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 1000:
        N = int(rng.integers(2, 12))
        m = int(rng.integers(1, N + 1))
        B = rng.standard_normal((N, N)) * (rng.random((N, N)) < 0.5)
        A = (B + B.T) / 2
        A[np.diag_indices(N)] = np.abs(A).sum(axis=1) * rng.uniform(0.5, 2.0, N)
        alpha = float(np.exp(rng.uniform(-2, 2)))
        if gershgorin_psd(A, m, alpha).passed:
            checked += 1
            assert np.linalg.eigvalsh(A)[0] >= -1e-10
    for _ in range(50):
        N = int(rng.integers(2, 8))
        v = rng.standard_normal(N)
        A = np.eye(N) - 3 * np.outer(v, v) / (v @ v)  # one eigenvalue -2
        for alpha in (0.1, 1.0, 10.0):
            assert not gershgorin_psd(A, int(rng.integers(1, N + 1)), alpha).passed


def test_detect_rules():
    cons = {f"C{i}": ConstraintResult(0.0, 1.0, True) for i in range(1, 7)}
    k, lam = 10, 1.0
    mk = lambda obj: VerificationReport(obj, cons, "eigen", k=k)
    assert detect(mk(10 * lam * k), k, lam) == "Hv"
    assert detect(mk(float(k)), k, lam) == "H0"
    assert detect(mk((1 + lam / 2) * k), k, lam) == "H0"
    assert detect(mk(np.nextafter((1 + lam / 2) * k, np.inf)), k, lam) == "Hv"
    bad = dict(cons, C5=ConstraintResult(2.0, 1.0, False))
    with pytest.raises(InvalidLowerBoundError):
        detect(VerificationReport(100.0, bad, "eigen"), k, lam)


def test_eigen_cap():
    _, cert = make_cert(101, 16, 10, 1.0, seed=0)
    with pytest.raises(CapError):
        check_psd_eigen(cert)


def test_report_json_round_trip_and_exit_codes():
    data, cert = make_cert(12, 8, 5, 1.2, seed=0)
    S = data.X @ data.X.T / data.n
    rep = verify(cert, S, 5, psd_mode="both", X=data.X)
    back = VerificationReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert back.feasible == rep.feasible
    assert rep.exit_code in (0, 2)
    d = json.loads(rep.to_json())
    assert d["schema_version"] == 1 and set(d["constraints"]) == {f"C{i}" for i in range(1, 7)}


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 12), st.integers(4, 16), st.floats(1.0, 3.0), st.integers(0, 10**6))
def test_structural_implies_eigen(p, n, gamma, seed):
    k = max(3, p // 2)
    data, cert = make_cert(p, n, k, gamma, seed=seed)
    s = check_psd_structural(cert, X=data.X)
    e = check_psd_eigen(cert)
    if s["passed"]:
        assert e["passed"]
    assert s["pieces"]["P_gram"]["decomposition_residual"] <= 1e-9
    assert s["pieces"]["Q_gram"]["gram_residual"] <= 1e-9


def test_structural_failure_names_piece():
    data, cert = make_cert(40, 16, 14, 1.5, seed=0)
    s = check_psd_structural(cert, X=data.X)
    assert cert.delta < 0
    assert "Lambda_prime" in s["failed"] and not s["passed"]


def test_gamma_diag_lower_bound_in_structure():
    _, cert = make_cert(60, 32, 20, 1.0, seed=1)
    if cert.delta > 0:
        PQ = cert.pair_sums
        corr = np.abs((PQ.sum(axis=1) - np.diag(PQ)) / (cert.k - 1) - np.diag(PQ))
        lower = (cert.p - cert.k) / (cert.k - 1) * cert.delta - corr
        assert np.all(cert.gamma_diag - cert.delta >= lower - 1e-12)


def test_lanczos_agrees_with_dense_small():
    _, cert = make_cert(14, 10, 6, 1.5, seed=2)
    lz = check_psd_lanczos(cert)
    e = check_psd_eigen(cert)
    assert lz["M4"]["min_eigenvalue"] == pytest.approx(e["M4"]["min_eigenvalue"], abs=1e-7)
    assert lz["M4_with_constant"]["min_eigenvalue"] == pytest.approx(
        e["M4_with_constant"]["min_eigenvalue"], abs=1e-7)


def test_verify_auto_uses_structural_for_large_p():
    data, cert = make_cert(130, 32, 20, 1.0, seed=0)
    rep = verify(cert, data.X @ data.X.T / data.n, 20, X=data.X)
    assert rep.psd_mode == "structural"
    assert rep.constraints["C5"].estimate
    assert rep.exit_code == (3 if rep.feasible else 2)
