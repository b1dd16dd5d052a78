import numpy as np
import pytest
from sklearn.base import clone

from adaptloop.errors import InvalidArgument
from adaptloop.monitor import Category, ThresholdMonitor, ThresholdRuleSet, evaluate, violations
from adaptloop.telemetry import AnomalyScenario, generate_baseline, inject

from conftest import sample


def cats(s, median=7600.0):
    return {c for c, _, _ in violations(s, ThresholdRuleSet(), median)}


@pytest.mark.parametrize(
    "kw",
    [dict(cpu_utilization=8.0), dict(packets_out=7280), dict(login_attempts=5), dict(packets_out=15200)],
)
def test_boundaries_are_benign(kw):
    assert cats(sample(**kw)) == set()


@pytest.mark.parametrize(
    "kw,cat",
    [
        (dict(cpu_utilization=8.01), Category.QOA),
        (dict(packets_out=7279), Category.QOS),
        (dict(login_attempts=6), Category.INTRUSION),
        (dict(packets_out=15201), Category.DOS),
        (dict(tampered_packets=1), Category.DOS),
    ],
)
def test_each_rule_fires(kw, cat):
    assert cats(sample(**kw)) == {cat}


def test_dos_surge_needs_median():
    assert cats(sample(packets_out=10**6), median=None) == set()


def test_severity_is_excess_or_default():
    rules = ThresholdRuleSet(default_severity_ms={"QoA": 3.0})
    (e,) = evaluate(sample(cpu_utilization=9.0, latency=30.0), rules)
    assert e.severity == pytest.approx(6.5)
    (e,) = evaluate(sample(cpu_utilization=9.0, latency=20.0), rules)
    assert e.severity == 3.0 and e.trigger_metric == "cpu_utilization"


def test_ruleset_validation():
    with pytest.raises(InvalidArgument):
        ThresholdRuleSet(qoa_max_cpu=0)


def test_scan_is_edge_triggered():
    base = generate_baseline(1, 60)
    stream = inject(base, AnomalyScenario("PacketDrop", start=10, duration=5, intensity=0.5))
    m = ThresholdMonitor().fit(base)
    events = m.scan(stream)
    assert [(e.category, e.arrival_time) for e in events] == [(Category.QOS, 10.0)]
    level = ThresholdMonitor().fit(base).scan(stream, edge_triggered=False)
    assert len(level) == 5
    assert [e.id for e in level] == list(range(5))


def test_estimator_surface():
    base = generate_baseline(2, 50)
    m = ThresholdMonitor(qoa_max_cpu=5.0)
    assert clone(m).get_params()["qoa_max_cpu"] == 5.0
    X = np.array([[s.packets_out, s.cpu_utilization, s.latency, s.login_attempts] for s in base])
    flags = m.fit(X).transform(X)
    assert flags.shape == (50, 4)
    expected = (X[:, 1] > 5.0).astype(int)
    assert np.array_equal(flags[:, 0], expected)
    assert np.array_equal(m.predict(X), expected)
