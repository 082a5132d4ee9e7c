"""Pulse generation, combination and signal file I/O."""
import logging
import math

import numpy as np
import pytest

from satharm.dsp.analysis import spectrum
from satharm.dsp.signals import (
    CSIG_HEADER, ChirpParams, ComplexSignal, add_noise, amplitude_from_isr, combine, gen_lfm,
    instantaneous_frequency, lfm_phase, read_signal, write_signal,
)
from satharm.errors import InvalidParameterError, ShapeMismatchError, SignalFormatError

FS = 400e6
ECHO = ChirpParams(f_center=0.0, bandwidth=5e6, pulse_width=30e-6)
INTERFERENCE = ChirpParams(f_center=20e6, bandwidth=10e6, pulse_width=30e-6, amplitude=31.62)


def test_amplitude_from_isr():
    assert amplitude_from_isr(1.0, 30.0) == pytest.approx(31.62, abs=0.01)
    assert amplitude_from_isr(1.0, 0.0) == 1.0
    assert amplitude_from_isr(2.0, 20.0) == pytest.approx(20.0)
    with pytest.raises(InvalidParameterError):
        amplitude_from_isr(0.0, 30.0)


def test_chirp_params_validation():
    with pytest.raises(InvalidParameterError):
        ChirpParams(f_center=0.0, bandwidth=5e6, pulse_width=-1e-6)
    with pytest.raises(InvalidParameterError):
        ChirpParams(f_center=0.0, bandwidth=-5e6, pulse_width=1e-6)
    assert INTERFERENCE.chirp_rate == pytest.approx(10e6 / 30e-6)
    assert INTERFERENCE.max_abs_frequency == pytest.approx(25e6)


def test_gen_lfm_length_and_peak():
    x = gen_lfm(INTERFERENCE, FS)
    assert len(x) == 12000
    assert np.max(np.abs(x.samples)) == pytest.approx(31.62)


def test_gen_lfm_rejects_bad_sample_rate():
    with pytest.raises(InvalidParameterError):
        gen_lfm(ECHO, 0.0)


def test_zero_bandwidth_is_a_constant_phasor():
    p = ChirpParams(f_center=0.0, bandwidth=0.0, pulse_width=1e-6, amplitude=2.0, phase0=0.3)
    x = gen_lfm(p, FS)
    np.testing.assert_allclose(x.samples, 2.0 * np.exp(0.3j), rtol=0, atol=1e-12)


def test_pulse_energy():
    x = gen_lfm(ECHO, FS)
    assert x.energy == pytest.approx(ECHO.amplitude ** 2 * ECHO.pulse_width, rel=1e-3)


def test_instantaneous_frequency_at_pulse_center():
    x = gen_lfm(INTERFERENCE, FS)
    center = int(round(INTERFERENCE.center_time * FS))
    f = instantaneous_frequency(x)
    assert abs(f[center] - INTERFERENCE.f_center) < 1.0 / INTERFERENCE.pulse_width


@pytest.mark.parametrize("p", [ECHO, INTERFERENCE], ids=["echo", "interference"])
def test_spectrum_concentrates_in_the_swept_band(p):
    frame = spectrum(gen_lfm(p, FS))
    inside = frame.band_mask(p.f_center - 0.75 * p.bandwidth, p.f_center + 0.75 * p.bandwidth)
    assert frame.psd_lin[inside].sum() / frame.psd_lin.sum() >= 0.95


def test_gen_lfm_warns_on_aliasing(caplog):
    p = ChirpParams(f_center=100e6, bandwidth=10e6, pulse_width=1e-6)
    with caplog.at_level(logging.WARNING):
        gen_lfm(p, 150e6)
    assert "alias" in caplog.text


def test_delayed_pulse_is_zero_before_its_start():
    p = ChirpParams(f_center=0.0, bandwidth=5e6, pulse_width=1e-6, delay=1e-6)
    x = gen_lfm(p, FS)
    assert len(x) == 800
    assert np.all(x.samples[:400] == 0)
    np.testing.assert_allclose(np.abs(x.samples[400:]), 1.0)


def test_combine_identity_and_commutativity():
    e = gen_lfm(ECHO, FS)
    i = gen_lfm(INTERFERENCE, FS)
    zero = e.with_samples(np.zeros(len(e)))
    np.testing.assert_array_equal(combine(e, zero).samples, e.samples)
    np.testing.assert_array_equal(combine(e, i).samples, combine(i, e).samples)


def test_combine_is_associative():
    e = gen_lfm(ECHO, FS)
    i = gen_lfm(INTERFERENCE, FS)
    offset = e.with_samples(np.full(len(e), 0.5 - 0.25j))
    left = combine(combine(e, i), offset).samples
    right = combine(e, combine(i, offset)).samples
    np.testing.assert_allclose(left, right, rtol=0, atol=1e-12)


def test_combine_shape_mismatch():
    e = gen_lfm(ECHO, FS)
    short = ComplexSignal(np.ones(10), FS)
    with pytest.raises(ShapeMismatchError):
        combine(e, short)
    with pytest.raises(ShapeMismatchError):
        combine(ComplexSignal(np.ones(10), FS), ComplexSignal(np.ones(10), 2 * FS))


def test_combined_peak_and_phase_alignment():
    e = gen_lfm(ECHO, FS)
    i = gen_lfm(INTERFERENCE, FS)
    x = combine(e, i)
    a, b = ECHO.amplitude, INTERFERENCE.amplitude
    assert np.max(np.abs(x.samples)) <= a + b + 1e-12

    phi = lfm_phase(ECHO, FS, 0.0, len(x)).phase
    xi = lfm_phase(INTERFERENCE, FS, 0.0, len(x)).phase
    delta = np.angle(np.exp(1j * (phi - xi)))
    k = int(np.argmin(np.abs(delta)))
    assert abs(delta[k]) < 0.2
    expected = math.sqrt(a * a + b * b + 2 * a * b * math.cos(delta[k]))
    assert abs(x.samples[k]) == pytest.approx(expected, rel=1e-9)


def test_add_noise_is_seeded():
    x = gen_lfm(ECHO, FS)
    first = add_noise(x, 0.01, seed=7)
    second = add_noise(x, 0.01, seed=7)
    np.testing.assert_array_equal(first.samples, second.samples)
    assert add_noise(x, 0.0) is x
    with pytest.raises(InvalidParameterError):
        add_noise(x, -1.0)


def test_samples_are_read_only():
    x = ComplexSignal(np.ones(4), FS)
    with pytest.raises(ValueError):
        x.samples[0] = 2.0


def test_csig_round_trip_is_bit_exact(tmp_path):
    x = ComplexSignal(np.array([1 + 2j, -0.5j, 3.25]), 4e8, t0=1e-6)
    path = tmp_path / "x.csig"
    write_signal(path, x)
    y = read_signal(path)
    assert y.sample_rate == 4e8
    assert y.t0 == 1e-6
    assert y.samples.tobytes() == x.samples.tobytes()


def test_csv_round_trip_infers_sample_rate(tmp_path):
    x = gen_lfm(ChirpParams(f_center=1e6, bandwidth=1e6, pulse_width=1e-6), FS)
    path = tmp_path / "x.csv"
    write_signal(path, x)
    y = read_signal(path)
    assert y.sample_rate == pytest.approx(FS, rel=1e-9)
    np.testing.assert_allclose(y.samples, x.samples, rtol=0, atol=1e-12)


def test_csig_bad_magic(tmp_path):
    path = tmp_path / "bad.csig"
    write_signal(path, ComplexSignal(np.ones(3), FS))
    data = bytearray(path.read_bytes())
    data[:4] = b"XXXX"
    path.write_bytes(bytes(data))
    with pytest.raises(SignalFormatError) as info:
        read_signal(path)
    assert info.value.offset == 0


def test_csig_truncated_payload(tmp_path):
    path = tmp_path / "short.csig"
    write_signal(path, ComplexSignal(np.ones(3), FS))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SignalFormatError) as info:
        read_signal(path)
    assert info.value.offset == CSIG_HEADER.size + 2 * 16


def test_empty_signal_can_be_written_but_not_processed(tmp_path):
    path = tmp_path / "empty.csig"
    write_signal(path, ComplexSignal(np.zeros(0), FS))
    y = read_signal(path)
    assert len(y) == 0
    with pytest.raises(InvalidParameterError):
        spectrum(y)


def test_unknown_suffix(tmp_path):
    with pytest.raises(InvalidParameterError):
        write_signal(tmp_path / "x.bin", ComplexSignal(np.ones(3), FS))
