# File: satharm/plots.py
import logging
from pathlib import Path
from typing import Dict, List, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from satharm.dsp.analysis import SpectrumFrame, TFMap, spectrum  # noqa: E402
from satharm.dsp.signals import ComplexSignal  # noqa: E402

# --- Constants ---
DPI: int = 120
TF_FLOOR_DB: float = -100.0


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    logging.debug(f"Rendered {path}")
    return path


def _plot_time(ax, x: ComplexSignal, title: str) -> None:
    t_us = x.times * 1e6
    ax.plot(t_us, x.samples.real, linewidth=0.4, label="I")
    ax.plot(t_us, x.samples.imag, linewidth=0.4, label="Q", alpha=0.7)
    ax.set_xlabel("time (µs)")
    ax.set_ylabel("amplitude")
    ax.set_title(title)
    ax.legend(loc="upper right")


def _plot_spectrum(ax, frame: SpectrumFrame, title: str) -> None:
    ax.plot(frame.freqs / 1e6, frame.psd, linewidth=0.5)
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel("PSD (dB re full scale)")
    ax.set_title(title)


def _plot_tf(ax, tf: TFMap, title: str) -> None:
    extent = (tf.times[0] * 1e6, tf.times[-1] * 1e6, tf.freqs[0] / 1e6, tf.freqs[-1] / 1e6)
    ax.imshow(tf.magnitude_db.T, origin="lower", aspect="auto", extent=extent,
              vmin=max(TF_FLOOR_DB, tf.magnitude_db.max() - 80.0), cmap="viridis")
    ax.set_xlabel("time (µs)")
    ax.set_ylabel("frequency (MHz)")
    ax.set_title(title)


def plot_simulation(output_dir: Path, unsaturated: ComplexSignal, saturated: ComplexSignal,
                    frames: Dict[str, SpectrumFrame], maps: Dict[str, TFMap]) -> List[Path]:
    fig, axes = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    _plot_time(axes[0], unsaturated, "Unsaturated")
    _plot_time(axes[1], saturated, "Saturated")
    paths = [_save(fig, output_dir / "time_domain.png")]

    fig, axes = plt.subplots(2, 2, figsize=(11, 7))
    for column, stem in enumerate(("unsaturated", "saturated")):
        _plot_spectrum(axes[0, column], frames[stem], f"Spectrum, {stem}")
        _plot_tf(axes[1, column], maps[stem], f"Time-frequency, {stem}")
    paths.append(_save(fig, output_dir / "spectra.png"))
    return paths


def plot_cancellation(output_dir: Path, stem: str, saturated: ComplexSignal, residual: ComplexSignal,
                      tf: TFMap, band: Tuple[float, float]) -> List[Path]:
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    full_scale = float(abs(saturated.samples).max() ** 2) or 1.0
    for x, label in ((saturated, "saturated"), (residual, "residual")):
        frame = spectrum(x, full_scale=full_scale)
        axes[0].plot(frame.freqs / 1e6, frame.psd, linewidth=0.5, label=label)
    for edge in band:
        axes[0].axvline(edge / 1e6, color="k", linestyle="--", linewidth=0.6)
    axes[0].set_xlabel("frequency (MHz)")
    axes[0].set_ylabel("PSD (dB)")
    axes[0].legend(loc="upper right")
    axes[0].set_title(f"Cancellation, {stem}")
    _plot_tf(axes[1], tf, "Residual time-frequency")
    return [_save(fig, output_dir / f"cancel_{stem}.png")]
