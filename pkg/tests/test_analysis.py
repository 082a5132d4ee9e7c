import numpy as np
import pytest

from satharm.dsp.analysis import (
    CancellationReport, band_power, cancel, footprint_mask, footprint_power, harmonic_band, read_tfmap_binary,
    ridge, ridge_slope, spectrum, stft, write_tfmap_binary,
)
from satharm.dsp.harmonic_model import term_from_a2
from satharm.dsp.signals import ComplexSignal, gen_lfm
from satharm.errors import InvalidParameterError, ShapeMismatchError, SignalFormatError

FS = 400e6


def _tone(freq: float, n: int = 4000, amplitude: float = 1.0) -> ComplexSignal:
    t = np.arange(n) / FS
    return ComplexSignal(amplitude * np.exp(2j * np.pi * freq * t), FS)


# --- Spectrum ---

def test_tone_peak():
    frame = spectrum(_tone(20e6))
    assert frame.freqs[np.argmax(frame.psd)] == pytest.approx(20e6)
    assert frame.psd.max() - np.median(frame.psd) >= 40


@pytest.mark.parametrize("nfft", [None, 8192])
def test_spectrum_parseval(nfft):
    x = _tone(13e6, amplitude=3.0)
    frame = spectrum(x, nfft)
    assert np.sum(frame.psd_lin) * frame.df == pytest.approx(x.power, rel=1e-9)
    assert band_power(frame, -FS / 2, FS / 2) == pytest.approx(10 * np.log10(9.0), abs=1e-9)


def test_full_scale_shifts_the_db_reference():
    x = _tone(13e6)
    assert band_power(spectrum(x, full_scale=100.0), -FS / 2, FS / 2) == pytest.approx(-20.0, abs=1e-9)


def test_spectrum_bins_are_linear():
    x = _tone(13e6, amplitude=2.0)
    y = ComplexSignal(0.5 * np.exp(1j * (2 * np.pi * -41e6 * np.arange(4000) / FS + 0.7)), FS)
    total = spectrum(x.with_samples(x.samples + y.samples), nfft=8192)
    parts = spectrum(x, nfft=8192).bins + spectrum(y, nfft=8192).bins
    np.testing.assert_allclose(total.bins, parts, rtol=0, atol=1e-9)
    np.testing.assert_allclose(np.abs(total.bins) ** 2, total.psd_lin * 8192 * 4000 * total.df, rtol=1e-9)


def test_band_power_grows_with_the_band():
    frame = spectrum(_tone(13e6), nfft=8192)
    nested = [(12e6, 14e6), (10e6, 20e6), (0.0, 50e6), (-FS / 2, FS / 2)]
    powers = [band_power(frame, lo, hi) for lo, hi in nested]
    assert all(inner <= outer for inner, outer in zip(powers, powers[1:]))


def test_spectrum_rejects_short_nfft():
    with pytest.raises(InvalidParameterError):
        spectrum(_tone(1e6), nfft=100)


def test_band_power_rejects_bad_bands():
    frame = spectrum(_tone(1e6))
    with pytest.raises(InvalidParameterError):
        band_power(frame, 10e6, 5e6)
    with pytest.raises(InvalidParameterError):
        band_power(frame, 1e9, 2e9)


def test_unsaturated_power_sits_in_the_pulse_bands(default_scenario):
    frame = spectrum(default_scenario.unsaturated)
    inside = frame.band_mask(-3.75e6, 3.75e6) | frame.band_mask(12.5e6, 27.5e6)
    assert frame.psd_lin[inside].sum() / frame.psd_lin.sum() >= 0.95


def test_saturation_raises_the_third_harmonic_band(default_config, default_scenario):
    fs = default_config.full_scale
    before = band_power(spectrum(default_scenario.unsaturated, full_scale=fs), -75e6, -45e6)
    after = band_power(spectrum(default_scenario.saturated, full_scale=fs), -75e6, -45e6)
    assert after - before >= 20


def test_quiet_band_stays_below_the_third_harmonic(default_config, default_scenario):
    fs = default_config.full_scale
    third = band_power(spectrum(default_scenario.saturated, full_scale=fs), -80e6, -40e6)
    quiet = band_power(spectrum(default_scenario.unsaturated, full_scale=fs), 150e6, 160e6)
    assert quiet <= third - 35


# --- Time-frequency ---

def test_stft_tracks_an_lfm(default_config):
    p = default_config.interference
    tf = stft(gen_lfm(p, FS))
    expected = p.f_center + p.chirp_rate * (tf.times - p.center_time)
    bin_width = FS / tf.window_len
    assert np.all(np.abs(ridge(tf) - expected) <= bin_width)
    assert ridge_slope(tf) == pytest.approx(p.chirp_rate, rel=0.02)


def test_stft_of_a_tone_has_a_flat_ridge():
    tf = stft(_tone(19.53125e6, n=8000))
    assert abs(ridge_slope(tf)) < 1.0
    assert tf.magnitude_db.max() == pytest.approx(0.0, abs=0.1)


def test_stft_with_one_frame_covering_the_record():
    x = _tone(20e6, n=1000)
    tf = stft(x, window_len=1000, hop=1000)
    assert tf.times.size == 1
    assert tf.times[0] == pytest.approx(500 / FS)
    assert tf.magnitude_db.max() == pytest.approx(0.0, abs=1e-6)

    shifted = stft(x, window_len=1000, hop=64)
    np.testing.assert_allclose(shifted.magnitude_db, tf.magnitude_db, atol=1e-9)


def test_stft_frames_start_at_the_first_sample():
    tf = stft(_tone(25e6, n=1300), window_len=256, hop=100)
    assert tf.times.size == 11
    np.testing.assert_allclose(tf.times, (np.arange(11) * 100 + 128) / FS)
    assert tf.magnitude_db.max() == pytest.approx(0.0, abs=1e-6)


def test_saturated_third_harmonic_ridge(default_config, default_scenario):
    tf = stft(default_scenario.saturated, full_scale=default_config.full_scale)
    expected = -3 * default_config.interference.chirp_rate
    assert ridge_slope(tf, -80e6, -40e6) == pytest.approx(expected, rel=0.05)


def test_stft_rejects_bad_geometry():
    with pytest.raises(InvalidParameterError):
        stft(_tone(1e6, n=100), window_len=512)
    with pytest.raises(InvalidParameterError):
        stft(_tone(1e6), window_len=256, hop=512)


def test_tfmap_binary_round_trip(tmp_path):
    tf = stft(_tone(20e6, n=2048), window_len=256, hop=128)
    path = tmp_path / "tf.ctfm"
    write_tfmap_binary(path, tf)
    loaded = read_tfmap_binary(path)
    np.testing.assert_array_equal(loaded.magnitude_db, tf.magnitude_db)
    np.testing.assert_array_equal(loaded.freqs, tf.freqs)

    path.write_bytes(b"NOPE" + path.read_bytes()[4:])
    with pytest.raises(SignalFormatError) as info:
        read_tfmap_binary(path)
    assert info.value.offset == 0


# --- Bands and footprints ---

def test_harmonic_band_of_the_third_interference_harmonic(default_config):
    cfg = default_config
    lo, hi = harmonic_band(term_from_a2(0, 3, 1.0), cfg.echo, cfg.interference, 5e6)
    assert lo == pytest.approx(-80e6)
    assert hi == pytest.approx(-40e6)


def test_footprint_mask_covers_the_peak():
    tf = stft(_tone(20e6, n=4096))
    mask = footprint_mask(tf, 20.0)
    assert mask[np.unravel_index(np.argmax(tf.magnitude_db), mask.shape)]
    assert footprint_power(tf, mask) <= 10 * np.log10(tf.power.sum()) + 1e-9
    with pytest.raises(ShapeMismatchError):
        footprint_power(tf, mask[:, :-1])


# --- Cancellation ---

def test_cancel_nothing_changes_nothing():
    x = _tone(20e6)
    _, report = cancel(x, x.with_samples(np.zeros(len(x))), (15e6, 25e6))
    assert report.reduction == pytest.approx(0.0, abs=1e-9)
    assert report.footprint_reduction == pytest.approx(0.0, abs=1e-9)


def test_cancel_everything():
    x = _tone(20e6)
    residual, report = cancel(x, x, (15e6, 25e6))
    assert np.all(residual.samples == 0)
    assert report.reduction > 200


def test_cancel_requires_a_shared_grid():
    x = _tone(20e6)
    with pytest.raises(ShapeMismatchError):
        cancel(x, _tone(20e6, n=2000), (15e6, 25e6))


def test_report_text_round_trip():
    x = _tone(20e6)
    _, report = cancel(x, x.with_samples(0.5 * x.samples), (15e6, 25e6), full_scale=4.0)
    assert report.reduction == pytest.approx(20 * np.log10(2.0), abs=1e-9)
    assert CancellationReport.from_text(report.to_text()) == report
