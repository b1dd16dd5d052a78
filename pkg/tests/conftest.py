from pathlib import Path

import numpy as np
import pytest

from adaptloop.telemetry import MetricSample


def ctmc_mm1k(lam: float, mu: float, k: int) -> np.ndarray:
    """Stationary distribution of the M/M/1/K birth-death chain by linear solve."""
    q = np.zeros((k + 1, k + 1))
    for n in range(k):
        q[n, n + 1] = lam
        q[n + 1, n] = mu
    np.fill_diagonal(q, -q.sum(axis=1))
    a = np.vstack([q.T, np.ones(k + 1)])
    b = np.zeros(k + 2)
    b[-1] = 1.0
    return np.linalg.lstsq(a, b, rcond=None)[0]


def sample(**kw) -> MetricSample:
    base = dict(timestamp=0.0, packets_out=7500, cpu_utilization=4.0, latency=23.5, login_attempts=0)
    base.update(kw)
    return MetricSample(**base)


@pytest.fixture
def write_config(tmp_path):
    def _write(body: str, name: str = "session.toml") -> Path:
        p = tmp_path / name
        p.write_text(body, encoding="utf-8")
        return p

    return _write


# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
