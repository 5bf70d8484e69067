import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sospca import CertificateParams, ModelParams, build_exact_moment, normalize_rows, sample_h0  # noqa: E402

# Rademacher sample at p=6, n=4 (seed 0), frozen so oracle values do not depend on the RNG.
SMALL_X = np.array([
    [-1, 1, 1, 1], [-1, 1, -1, -1], [-1, -1, -1, -1],
    [1, 1, -1, 1], [-1, -1, -1, 1], [1, 1, -1, 1],
], dtype=float)


@pytest.fixture
def small_x():
    return SMALL_X.copy()


@pytest.fixture
def small_cert():
    return build_exact_moment(SMALL_X, CertificateParams(4, 1.0))


def make_cert(p, n, k, gamma=1.0, seed=0, family="rademacher"):
    data = normalize_rows(sample_h0(ModelParams(p, n, k, 0.0, family, seed)))
    return data, build_exact_moment(data, CertificateParams(k, gamma))


# Acceptance verdicts collected by test_acceptance.py and echoed after the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
