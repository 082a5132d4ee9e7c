"""Scenario runs: cancellation quality of both reconstruction models."""
import numpy as np
import pytest

from satharm.artifacts import read_manifest
from satharm.config import resolve_scenario
from satharm.dsp.analysis import CancellationReport
from satharm.errors import CapabilityError
from satharm.processing import ScenarioRunner


@pytest.fixture(scope="module")
def runner(tmp_path_factory):
    return ScenarioRunner(resolve_scenario({"output_dir": tmp_path_factory.mktemp("runs")}))


@pytest.fixture(scope="module")
def reports(runner):
    return runner.compare(0, 3)


def test_saturated_signal_respects_the_rails(runner):
    sc = runner.scenario
    s_a = runner.config.s_a
    assert np.max(np.abs(sc.saturated.samples.real)) <= s_a
    assert np.max(np.abs(sc.saturated.samples.imag)) <= s_a
    assert sc.saturated.same_grid(sc.unsaturated)


def test_bessel_model_cancels_the_third_harmonic(reports):
    report = reports["bessel"]
    assert report.band == pytest.approx((-80e6, -40e6))
    assert report.reduction >= 20
    assert report.footprint_reduction >= 30
    assert report.footprint_residual_peak <= report.peak_before - 30


def test_tanh_model_falls_short(reports):
    assert reports["bessel"].reduction - reports["tanh"].reduction >= 10
    assert reports["bessel"].footprint_reduction - reports["tanh"].footprint_reduction >= 10


def test_compare_writes_its_artifacts(runner, reports):
    out = runner.output_dir
    comparison = read_manifest(out / "comparison.txt")
    assert float(comparison["gap"]) == pytest.approx(reports["bessel"].reduction - reports["tanh"].reduction)
    for model in ("bessel", "tanh"):
        stem = f"{model}_m0_n3"
        assert (out / f"reconstructed_{stem}.csig").exists()
        assert (out / f"residual_{stem}.csv").exists()
        report = CancellationReport.from_text((out / f"report_{stem}.txt").read_text(encoding="utf-8"))
        assert report == reports[model]
    assert not list(out.glob(".*.partial*"))


def test_tanh_model_has_no_cross_terms(runner):
    with pytest.raises(CapabilityError):
        runner.reconstruction_term(1, 2, "tanh")


def test_unclipped_scenario_has_nothing_to_cancel(tmp_path):
    runner = ScenarioRunner(resolve_scenario({"coefficient": 1.0, "output_dir": tmp_path}))
    np.testing.assert_array_equal(runner.scenario.saturated.samples, runner.scenario.unsaturated.samples)
    report = runner.cancel(0, 3)
    assert report.reduction == pytest.approx(0.0, abs=0.5)
