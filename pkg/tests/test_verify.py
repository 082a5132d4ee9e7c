import logging

import pytest

from satharm.verify import SUITES, CheckResult, print_results, run_suite


@pytest.mark.parametrize("suite", ["sat-integral", "parity", "jacobi-anger", "bessel"])
def test_fast_suites_pass(default_config, suite):
    results = run_suite(suite, default_config)
    assert results
    assert all(r.suite == suite for r in results)
    assert [r.name for r in results if not r.passed] == []


@pytest.mark.slow
@pytest.mark.parametrize("suite", ["oracle", "identity"])
def test_slow_suites_pass(default_config, suite):
    results = run_suite(suite, default_config)
    assert [r.name for r in results if not r.passed] == []


def test_all_runs_every_suite(monkeypatch, default_config):
    calls = []
    for name in list(SUITES):
        monkeypatch.setitem(SUITES, name, lambda cfg, name=name: calls.append(name) or [CheckResult(name, "x", 0, 1)])
    results = run_suite("all", default_config)
    assert calls == list(SUITES)
    assert len(results) == len(SUITES)


def test_check_result_threshold():
    assert CheckResult("s", "n", 1e-9, 1e-9).passed
    assert not CheckResult("s", "n", 2e-9, 1e-9).passed


def test_failures_are_logged_as_errors(caplog):
    with caplog.at_level(logging.INFO):
        print_results([CheckResult("oracle", "good", 0.0, 1.0), CheckResult("oracle", "bad", 2.0, 1.0)])
    failed = [r for r in caplog.records if r.levelno == logging.ERROR]
    assert len(failed) == 1
    assert "bad" in failed[0].getMessage()
