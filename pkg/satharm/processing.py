# File: satharm/processing.py
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from satharm import artifacts
from satharm.config import ScenarioConfig
from satharm.dsp import analysis
from satharm.dsp.harmonic_model import (
    DecompositionTable, HarmonicTerm, decompose, harmonic_term, reconstruct_harmonic, tanh_term,
)
from satharm.dsp.saturation import hard_clip_complex
from satharm.dsp.signals import ComplexSignal, PhaseTrack, add_noise, combine, gen_lfm, lfm_phase, write_signal
from satharm.errors import CapabilityError, VerificationError

RULE = "━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━"


@dataclass(frozen=True)
class Scenario:
    """Signals of one run, all on the same sample grid."""
    echo: ComplexSignal
    interference: ComplexSignal
    unsaturated: ComplexSignal
    saturated: ComplexSignal
    phi: PhaseTrack
    xi: PhaseTrack


class ScenarioRunner:
    """Runs the commands of one resolved scenario and writes their artifacts."""

    def __init__(self, config: ScenarioConfig, plots: bool = False):
        self.config = config
        self.plots = plots
        self.output_dir = config.output_dir
        self._scenario: Optional[Scenario] = None

    # ------------------------------------------------------------
    # Signals
    # ------------------------------------------------------------
    @property
    def scenario(self) -> Scenario:
        if self._scenario is None:
            self._scenario = self._build()
        return self._scenario

    def _build(self) -> Scenario:
        cfg = self.config
        n = cfg.num_samples
        duration = n / cfg.sample_rate
        echo = gen_lfm(cfg.echo, cfg.sample_rate, cfg.t0, duration)
        interference = gen_lfm(cfg.interference, cfg.sample_rate, cfg.t0, duration)
        unsaturated = add_noise(combine(echo, interference), cfg.noise_power, cfg.seed)
        saturated = hard_clip_complex(unsaturated, cfg.s_a)
        logging.info(
            f"Scenario: a={cfg.a:.6g}, b={cfg.b:.6g}, s_a={cfg.s_a:.6g}, C={cfg.coefficient:.6g}, "
            f"fs={cfg.sample_rate / 1e6:g} MHz, {n} samples."
        )
        return Scenario(
            echo=echo,
            interference=interference,
            unsaturated=unsaturated,
            saturated=saturated,
            phi=lfm_phase(cfg.echo, cfg.sample_rate, cfg.t0, n),
            xi=lfm_phase(cfg.interference, cfg.sample_rate, cfg.t0, n),
        )

    # ------------------------------------------------------------
    # Artifact helpers
    # ------------------------------------------------------------
    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def _write_signal_pair(self, stem: str, x: ComplexSignal) -> List[Path]:
        return [
            artifacts.write_atomic(self._path(f"{stem}{suffix}"), lambda p: write_signal(p, x))
            for suffix in (".csig", ".csv")
        ]

    def _write_analysis(self, stem: str, x: ComplexSignal) -> Tuple[analysis.SpectrumFrame, analysis.TFMap, List[Path]]:
        cfg = self.config
        frame = analysis.spectrum(x, cfg.nfft, cfg.full_scale)
        tf = analysis.stft(x, cfg.window_len, cfg.hop, cfg.full_scale)
        paths = [
            artifacts.write_atomic(self._path(f"spectrum_{stem}.csv"), lambda p: analysis.write_spectrum_csv(p, frame)),
            artifacts.write_atomic(self._path(f"tf_{stem}.csv"), lambda p: analysis.write_tfmap_csv(p, tf)),
            artifacts.write_atomic(self._path(f"tf_{stem}.ctfm"), lambda p: analysis.write_tfmap_binary(p, tf)),
        ]
        return frame, tf, paths

    def _write_manifest(self, command: str, extra: Optional[Dict[str, object]] = None) -> Path:
        entries = {"command": command, **self.config.manifest(), **(extra or {})}
        return artifacts.write_manifest(self._path("manifest.txt"), entries)

    # ------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------
    def simulate(self) -> List[Path]:
        artifacts.prepare_output_dir(self.output_dir)
        logging.info(RULE)
        logging.info(f"Simulating scenario into {self.output_dir}")
        logging.info(RULE)
        sc = self.scenario

        written: List[Path] = []
        frames = {}
        maps = {}
        for stem, x in (("unsaturated", sc.unsaturated), ("saturated", sc.saturated)):
            written += self._write_signal_pair(stem, x)
            frames[stem], maps[stem], paths = self._write_analysis(stem, x)
            written += paths
        written.append(self._write_manifest("simulate"))

        if self.plots:
            from satharm import plots
            written += plots.plot_simulation(self.output_dir, sc.unsaturated, sc.saturated, frames, maps)
        logging.info(f"Wrote {len(written)} artifact(s).")
        return written

    def decompose(self) -> DecompositionTable:
        artifacts.prepare_output_dir(self.output_dir)
        cfg = self.config
        table = decompose(cfg.a, cfg.b, cfg.s_a, cfg.max_order)
        artifacts.write_atomic(self._path("decomposition.csv"), table.to_csv)
        self._write_manifest("decompose", {"terms": len(table), "unconverged": len(table.unconverged)})

        logging.info(RULE)
        logging.info(f"{'m':>3} {'n':>3} │ {'combined':>12} │ kind")
        logging.info(RULE)
        for entry in table:
            if table.is_significant(entry):
                logging.info(f"{entry.m:>3} {entry.n:>3} │ {entry.combined_coeff:>12.6g} │ {entry.kind}")
        logging.info(RULE)
        for entry in table.unconverged:
            logging.warning(f"Term ({entry.m},{entry.n}): {entry.note}")
        return table

    def reconstruction_term(self, m: int, n: int, model: str) -> HarmonicTerm:
        cfg = self.config
        if model == "tanh":
            if m != 0:
                raise CapabilityError(f"the tanh model has no echo or cross-term harmonics, got (m={m}, n={n})")
            return tanh_term(n, cfg.b, cfg.coefficient)
        return harmonic_term(m, n, cfg.a, cfg.b, cfg.s_a)

    def cancel(self, m: int, n: int, model: str = "bessel") -> analysis.CancellationReport:
        artifacts.prepare_output_dir(self.output_dir)
        cfg = self.config
        sc = self.scenario

        term = self.reconstruction_term(m, n, model)
        reconstructed = reconstruct_harmonic(term, sc.phi, sc.xi)
        band = analysis.harmonic_band(term, cfg.echo, cfg.interference, cfg.band_margin)
        logging.info(
            f"Cancelling ({m},{n}) with the {model} model: coefficient {term.combined_coeff:.6g}, "
            f"band [{band[0] / 1e6:.2f}, {band[1] / 1e6:.2f}] MHz."
        )
        residual, report = analysis.cancel(
            sc.saturated, reconstructed, band, cfg.nfft, cfg.full_scale, cfg.window_len, cfg.hop,
        )

        stem = f"{model}_m{m}_n{n}"
        self._write_signal_pair(f"reconstructed_{stem}", reconstructed)
        self._write_signal_pair(f"residual_{stem}", residual)
        frame, tf, _ = self._write_analysis(f"residual_{stem}", residual)
        artifacts.write_text_atomic(self._path(f"report_{stem}.txt"), report.to_text())
        self._write_manifest("cancel", {"m": m, "n": n, "model": model, "coefficient_used": term.combined_coeff})

        if self.plots:
            from satharm import plots
            plots.plot_cancellation(self.output_dir, stem, sc.saturated, residual, tf, band)

        logging.info(
            f"Band reduction {report.reduction:.2f} dB, footprint reduction {report.footprint_reduction:.2f} dB, "
            f"residual peak {report.residual_peak:.2f} dB."
        )
        return report

    def compare(self, m: int, n: int) -> Dict[str, analysis.CancellationReport]:
        reports = {model: self.cancel(m, n, model) for model in ("bessel", "tanh")}
        gap = reports["bessel"].reduction - reports["tanh"].reduction
        footprint_gap = reports["bessel"].footprint_reduction - reports["tanh"].footprint_reduction
        text = artifacts.format_manifest({
            "m": m,
            "n": n,
            "bessel_reduction": reports["bessel"].reduction,
            "tanh_reduction": reports["tanh"].reduction,
            "gap": gap,
            "bessel_footprint_reduction": reports["bessel"].footprint_reduction,
            "tanh_footprint_reduction": reports["tanh"].footprint_reduction,
            "footprint_gap": footprint_gap,
        })
        artifacts.write_text_atomic(self._path("comparison.txt"), text)
        self._write_manifest("compare", {"m": m, "n": n, "models": "bessel,tanh", "gap": gap})
        logging.info(RULE)
        logging.info(f"Bessel model beats tanh by {gap:.2f} dB in band, {footprint_gap:.2f} dB on the footprint.")
        logging.info(RULE)
        return reports

    def verify(self, suite: str) -> None:
        from satharm import verify

        results = verify.run_suite(suite, self.config)
        verify.print_results(results)
        failed = [r for r in results if not r.passed]
        if failed:
            raise VerificationError(f"{len(failed)} of {len(results)} check(s) failed")
        logging.info(f"All {len(results)} check(s) passed.")
