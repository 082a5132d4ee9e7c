# File: satharm/dsp/analysis.py
import math
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy.signal import ShortTimeFFT, get_window

from satharm.dsp.harmonic_model import HarmonicTerm
from satharm.dsp.signals import ChirpParams, ComplexSignal
from satharm.errors import InvalidParameterError, ShapeMismatchError, SignalFormatError
from satharm.utils import DB_FLOOR, parse_key_values, power_db

# --- Constants ---
DEFAULT_WINDOW_LEN: int = 512
DEFAULT_HOP: int = 64
DEFAULT_BAND_MARGIN_HZ: float = 5e6
DEFAULT_FOOTPRINT_FLOOR_DB: float = 20.0
TFMAP_MAGIC: bytes = b"CTFM"
TFMAP_VERSION: int = 1
TFMAP_HEADER = struct.Struct("<4sIQQ")

Band = Tuple[float, float]
PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class SpectrumFrame:
    """
    DC-centered periodogram. ``psd`` is dB re full scale, ``psd_lin`` the matching density per Hz.

    ``bins`` keeps the complex DFT the powers came from, in the same bin order.
    """
    freqs: np.ndarray
    psd: np.ndarray
    psd_lin: np.ndarray
    nfft: int
    sample_rate: float
    full_scale: float = 1.0
    bins: Optional[np.ndarray] = None

    @property
    def df(self) -> float:
        return self.sample_rate / self.nfft

    def band_mask(self, f_lo: float, f_hi: float) -> np.ndarray:
        return (self.freqs >= f_lo) & (self.freqs <= f_hi)


@dataclass(frozen=True, eq=False)
class TFMap:
    """STFT magnitude, rows are frames (times) and columns are frequencies."""
    times: np.ndarray
    freqs: np.ndarray
    magnitude_db: np.ndarray
    window: str = "hann"
    window_len: int = DEFAULT_WINDOW_LEN
    hop: int = DEFAULT_HOP

    def __post_init__(self):
        if self.magnitude_db.shape != (self.times.size, self.freqs.size):
            raise ShapeMismatchError(
                f"grid {self.magnitude_db.shape} does not match {self.times.size} times x {self.freqs.size} freqs")

    @property
    def power(self) -> np.ndarray:
        return 10.0 ** (self.magnitude_db / 10.0)

    def band_columns(self, f_lo: float, f_hi: float) -> np.ndarray:
        columns = (self.freqs >= f_lo) & (self.freqs <= f_hi)
        if not columns.any():
            raise InvalidParameterError(f"band [{f_lo:g}, {f_hi:g}] Hz contains no STFT bins")
        return columns


@dataclass(frozen=True)
class CancellationReport:
    band: Band
    power_before: float
    power_after: float
    reduction: float
    residual_peak: float
    peak_before: float
    footprint_before: float
    footprint_after: float
    footprint_reduction: float
    footprint_residual_peak: float
    footprint_cells: int
    full_scale: float = 1.0

    def to_text(self) -> str:
        lines = [
            "# cancellation report",
            f"# dB reference: full scale power = {self.full_scale!r}",
        ]
        for key, value in asdict(self).items():
            if key == "band":
                lines.append(f"band_lo_hz = {value[0]!r}")
                lines.append(f"band_hi_hz = {value[1]!r}")
            else:
                lines.append(f"{key} = {value!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CancellationReport":
        values = parse_key_values(text)
        kwargs = {}
        for f in fields(cls):
            if f.name == "band":
                kwargs["band"] = (float(values["band_lo_hz"]), float(values["band_hi_hz"]))
            elif f.name == "footprint_cells":
                kwargs[f.name] = int(values[f.name])
            else:
                kwargs[f.name] = float(values[f.name])
        return cls(**kwargs)


def spectrum(x: ComplexSignal, nfft: Optional[int] = None, full_scale: float = 1.0) -> SpectrumFrame:
    """
    Rectangular-window periodogram, zero-padded to ``nfft``.

    Normalised so Σ psd_lin·df equals the mean signal power over full_scale.
    """
    x.require_samples()
    n = len(x)
    nfft = n if nfft is None else int(nfft)
    if nfft < n:
        raise InvalidParameterError(f"nfft={nfft} is shorter than the signal ({n} samples)")
    if not full_scale > 0:
        raise InvalidParameterError(f"full_scale must be > 0, got {full_scale}")
    bins = np.fft.fftshift(np.fft.fft(x.samples, nfft))
    freqs = np.fft.fftshift(np.fft.fftfreq(nfft, d=1.0 / x.sample_rate))
    df = x.sample_rate / nfft
    psd_lin = np.abs(bins) ** 2 / (nfft * n * df) / full_scale
    return SpectrumFrame(freqs, power_db(psd_lin), psd_lin, nfft, x.sample_rate, full_scale, bins)


def band_power(s: SpectrumFrame, f_lo: float, f_hi: float) -> float:
    """Integrated power in [f_lo, f_hi], dB."""
    if not f_lo < f_hi:
        raise InvalidParameterError(f"band must satisfy f_lo < f_hi, got [{f_lo:g}, {f_hi:g}]")
    mask = s.band_mask(f_lo, f_hi)
    if not mask.any():
        raise InvalidParameterError(f"band [{f_lo:g}, {f_hi:g}] Hz contains no spectrum bins")
    return float(power_db(np.sum(s.psd_lin[mask]) * s.df))


def spectral_centroid(s: SpectrumFrame, f_lo: float, f_hi: float) -> float:
    """Power-weighted mean frequency inside a band."""
    mask = s.band_mask(f_lo, f_hi)
    weights = s.psd_lin[mask]
    if not mask.any() or weights.sum() <= 0:
        raise InvalidParameterError(f"band [{f_lo:g}, {f_hi:g}] Hz holds no power")
    return float(np.sum(s.freqs[mask] * weights) / weights.sum())


def stft(x: ComplexSignal, window_len: int = DEFAULT_WINDOW_LEN, hop: int = DEFAULT_HOP,
         full_scale: float = 1.0) -> TFMap:
    """
    Hann-windowed STFT over the frames that lie fully inside the record.

    0 dB is a full-scale tone: |S| is divided by Σwindow·sqrt(full_scale).
    """
    x.require_samples()
    n = len(x)
    if not 0 < hop <= window_len <= n:
        raise InvalidParameterError(
            f"STFT geometry needs 0 < hop <= window_len <= samples, got hop={hop}, window_len={window_len}, n={n}")
    window = get_window("hann", window_len)
    sft = ShortTimeFFT(window, hop, x.sample_rate, fft_mode="centered", mfft=window_len)
    # Slice p spans [p·hop − mid, p·hop − mid + window_len). Leading zeros shift the
    # grid so slice p0 starts exactly at sample 0; the zeros never enter slices p >= p0.
    mid = sft.m_num_mid
    p0 = -(-mid // hop)
    lead = p0 * hop - mid
    count = (n - window_len) // hop + 1
    padded = np.concatenate([np.zeros(lead, dtype=x.samples.dtype), x.samples])
    frames = sft.stft(padded, p0=p0, p1=p0 + count)
    magnitude = np.abs(frames.T) / (window.sum() * math.sqrt(full_scale))
    magnitude_db = 20.0 * np.log10(np.maximum(magnitude, math.sqrt(DB_FLOOR)))
    times = x.t0 + (np.arange(count) * hop + mid) / x.sample_rate
    return TFMap(times, np.asarray(sft.f), magnitude_db, "hann", window_len, hop)


def ridge(tf: TFMap, f_lo: Optional[float] = None, f_hi: Optional[float] = None) -> np.ndarray:
    """Per-frame peak frequency, optionally restricted to a band."""
    if f_lo is None or f_hi is None:
        columns = np.ones(tf.freqs.size, dtype=bool)
    else:
        columns = tf.band_columns(f_lo, f_hi)
    freqs = tf.freqs[columns]
    return freqs[np.argmax(tf.magnitude_db[:, columns], axis=1)]


def ridge_slope(tf: TFMap, f_lo: Optional[float] = None, f_hi: Optional[float] = None) -> float:
    """Least-squares slope of the ridge, Hz/s."""
    if tf.times.size < 2:
        raise InvalidParameterError("a ridge slope needs at least two frames")
    slope, _ = np.polyfit(tf.times, ridge(tf, f_lo, f_hi), 1)
    return float(slope)


def _frequency_span(p: int, q: int, echo: ChirpParams, interference: ChirpParams,
                    t_start: float, t_end: float) -> Tuple[float, float]:
    def frequency(t: float) -> float:
        f_e = echo.f_center + echo.chirp_rate * (t - echo.center_time)
        f_i = interference.f_center + interference.chirp_rate * (t - interference.center_time)
        return p * f_e + q * f_i

    ends = (frequency(t_start), frequency(t_end))
    return min(ends), max(ends)


def harmonic_band(term: HarmonicTerm, echo: ChirpParams, interference: ChirpParams,
                  margin: float = DEFAULT_BAND_MARGIN_HZ) -> Band:
    """Frequency band a term's exponentials sweep while its pulses are on, widened by ``margin``."""
    if term.m == 0:
        t_start, t_end = interference.start_time, interference.end_time
    elif term.n == 0:
        t_start, t_end = echo.start_time, echo.end_time
    else:
        t_start = max(echo.start_time, interference.start_time)
        t_end = min(echo.end_time, interference.end_time)
        if t_end <= t_start:
            raise InvalidParameterError("echo and interference pulses do not overlap")
    lows, highs = zip(*(_frequency_span(p, q, echo, interference, t_start, t_end) for p, q in term.components()))
    return min(lows) - margin, max(highs) + margin


def footprint_mask(reference: TFMap, floor_db: float = DEFAULT_FOOTPRINT_FLOOR_DB,
                   band: Optional[Band] = None) -> np.ndarray:
    """Cells where ``reference`` is within ``floor_db`` of its peak, optionally inside a band."""
    grid = reference.magnitude_db
    columns = np.ones(reference.freqs.size, dtype=bool) if band is None else reference.band_columns(*band)
    peak = grid[:, columns].max()
    return (grid >= peak - floor_db) & columns[None, :]


def footprint_power(tf: TFMap, mask: np.ndarray) -> float:
    """Summed cell power under a mask, dB."""
    if mask.shape != tf.magnitude_db.shape:
        raise ShapeMismatchError(f"mask {mask.shape} does not match TF grid {tf.magnitude_db.shape}")
    return float(power_db(tf.power[mask].sum()))


def cancel(saturated: ComplexSignal, reconstructed: ComplexSignal, band: Band,
           nfft: Optional[int] = None, full_scale: float = 1.0,
           window_len: int = DEFAULT_WINDOW_LEN, hop: int = DEFAULT_HOP,
           footprint_floor_db: float = DEFAULT_FOOTPRINT_FLOOR_DB) -> Tuple[ComplexSignal, CancellationReport]:
    """
    Subtracts a reconstructed harmonic and measures what is left.

    Band figures come from the spectrum; peak and footprint figures come from
    the STFT, the footprint being the cells the reconstruction itself occupies.
    """
    if not saturated.same_grid(reconstructed):
        raise ShapeMismatchError("saturated and reconstructed signals must share a sample grid")
    residual = saturated.with_samples(saturated.samples - reconstructed.samples)
    f_lo, f_hi = band

    before = band_power(spectrum(saturated, nfft, full_scale), f_lo, f_hi)
    after = band_power(spectrum(residual, nfft, full_scale), f_lo, f_hi)

    tf_before = stft(saturated, window_len, hop, full_scale)
    tf_after = stft(residual, window_len, hop, full_scale)
    tf_reference = stft(reconstructed, window_len, hop, full_scale)
    columns = tf_before.band_columns(f_lo, f_hi)
    mask = footprint_mask(tf_reference, footprint_floor_db, band)

    fp_before = footprint_power(tf_before, mask)
    fp_after = footprint_power(tf_after, mask)
    report = CancellationReport(
        band=(float(f_lo), float(f_hi)),
        power_before=before,
        power_after=after,
        reduction=before - after,
        residual_peak=float(tf_after.magnitude_db[:, columns].max()),
        peak_before=float(tf_before.magnitude_db[:, columns].max()),
        footprint_before=fp_before,
        footprint_after=fp_after,
        footprint_reduction=fp_before - fp_after,
        footprint_residual_peak=float(tf_after.magnitude_db[mask].max()),
        footprint_cells=int(mask.sum()),
        full_scale=float(full_scale),
    )
    return residual, report


# --- Export ---

def write_spectrum_csv(path: PathLike, s: SpectrumFrame) -> None:
    np.savetxt(path, np.column_stack([s.freqs, s.psd]), fmt="%.17g", delimiter=",",
               header="freq_hz,psd_db", comments="")


def write_tfmap_csv(path: PathLike, tf: TFMap) -> None:
    t, f = np.meshgrid(tf.times, tf.freqs, indexing="ij")
    table = np.column_stack([t.ravel(), f.ravel(), tf.magnitude_db.ravel()])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header="t_s,freq_hz,mag_db", comments="")


def write_tfmap_binary(path: PathLike, tf: TFMap) -> None:
    rows, cols = tf.magnitude_db.shape
    with open(path, "wb") as f:
        f.write(TFMAP_HEADER.pack(TFMAP_MAGIC, TFMAP_VERSION, rows, cols))
        f.write(tf.times.astype("<f8").tobytes())
        f.write(tf.freqs.astype("<f8").tobytes())
        f.write(tf.magnitude_db.astype("<f8").tobytes())


def read_tfmap_binary(path: PathLike) -> TFMap:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < TFMAP_HEADER.size:
        raise SignalFormatError(f"truncated header in {path.name}", len(data))
    magic, version, rows, cols = TFMAP_HEADER.unpack_from(data, 0)
    if magic != TFMAP_MAGIC:
        raise SignalFormatError(f"bad magic {magic!r} in {path.name}", 0)
    if version != TFMAP_VERSION:
        raise SignalFormatError(f"unsupported version {version} in {path.name}", 4)
    expected = TFMAP_HEADER.size + 8 * (rows + cols + rows * cols)
    if len(data) != expected:
        raise SignalFormatError(f"payload of {path.name} holds {len(data)} bytes, expected {expected}",
                                min(len(data), expected))
    values = np.frombuffer(data, dtype="<f8", offset=TFMAP_HEADER.size).astype(np.float64)
    times = values[:rows]
    freqs = values[rows:rows + cols]
    grid = values[rows + cols:].reshape(rows, cols)
    return TFMap(times, freqs, grid)
