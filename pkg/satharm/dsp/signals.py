# File: satharm/dsp/signals.py
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from satharm.errors import InvalidParameterError, ShapeMismatchError, SignalFormatError

# --- Constants ---
CSIG_MAGIC: bytes = b"CSIG"
CSIG_VERSION: int = 1
CSIG_HEADER = struct.Struct("<4sIddQ")
CSIG_SAMPLE_DTYPE = np.dtype("<c16")
CSV_HEADER: str = "t,re,im"

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class ComplexSignal:
    """Uniformly sampled complex baseband sequence. Samples are read-only after construction."""
    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise InvalidParameterError(f"sample_rate must be > 0, got {self.sample_rate}")
        samples = np.array(self.samples, dtype=np.complex128).reshape(-1)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.sample_rate

    @property
    def power(self) -> float:
        """Mean power over the record."""
        self.require_samples()
        return float(np.mean(np.abs(self.samples) ** 2))

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def require_samples(self) -> "ComplexSignal":
        if len(self) == 0:
            raise InvalidParameterError("signal has no samples; zero-length signals can be written but not processed")
        return self

    def with_samples(self, samples: np.ndarray) -> "ComplexSignal":
        """Same grid, new samples."""
        if np.shape(samples) != self.samples.shape:
            raise ShapeMismatchError(f"expected {self.samples.shape} samples, got {np.shape(samples)}")
        return ComplexSignal(samples, self.sample_rate, self.t0)

    def same_grid(self, other: "ComplexSignal") -> bool:
        return (
                len(self) == len(other)
                and math.isclose(self.sample_rate, other.sample_rate, rel_tol=1e-12)
                and math.isclose(self.t0, other.t0, rel_tol=1e-12, abs_tol=0.5 / self.sample_rate)
        )


@dataclass(frozen=True)
class ChirpParams:
    """LFM pulse. ``delay`` is the pulse start relative to t = 0."""
    f_center: float
    bandwidth: float
    pulse_width: float
    amplitude: float = 1.0
    phase0: float = 0.0
    delay: float = 0.0

    def __post_init__(self):
        if not self.pulse_width > 0:
            raise InvalidParameterError(f"pulse_width must be > 0, got {self.pulse_width}")
        if self.bandwidth < 0:
            raise InvalidParameterError(f"bandwidth must be >= 0, got {self.bandwidth}")
        if self.amplitude < 0:
            raise InvalidParameterError(f"amplitude must be >= 0, got {self.amplitude}")

    @property
    def chirp_rate(self) -> float:
        """K = bandwidth / pulse_width, Hz/s."""
        return self.bandwidth / self.pulse_width

    @property
    def start_time(self) -> float:
        return self.delay

    @property
    def center_time(self) -> float:
        return self.delay + 0.5 * self.pulse_width

    @property
    def end_time(self) -> float:
        return self.delay + self.pulse_width

    @property
    def max_abs_frequency(self) -> float:
        return abs(self.f_center) + 0.5 * self.bandwidth


@dataclass(frozen=True, eq=False)
class PhaseTrack:
    """Instantaneous phase of one pulse on a sample grid, with its support mask."""
    phase: np.ndarray
    support: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        phase = np.asarray(self.phase, dtype=np.float64)
        support = np.asarray(self.support, dtype=bool)
        if phase.shape != support.shape or phase.ndim != 1:
            raise ShapeMismatchError(f"phase {phase.shape} and support {support.shape} must be equal 1-D shapes")
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "support", support)

    def __len__(self) -> int:
        return self.phase.size


def _pulse_support(p: ChirpParams, sample_rate: float, t0: float, n: int) -> np.ndarray:
    # Index based so the pulse always spans round(pulse_width * fs) samples.
    first = math.ceil((p.delay - t0) * sample_rate - 1e-9)
    count = int(round(p.pulse_width * sample_rate))
    k = np.arange(n)
    return (k >= first) & (k < first + count)


def lfm_phase(p: ChirpParams, sample_rate: float, t0: float, n: int) -> PhaseTrack:
    """θ(t) = phase0 + 2π f_center (t − t_c) + π K (t − t_c)², referenced to the pulse center t_c."""
    if not sample_rate > 0:
        raise InvalidParameterError(f"sample_rate must be > 0, got {sample_rate}")
    if n < 0:
        raise InvalidParameterError(f"sample count must be >= 0, got {n}")
    tau = t0 + np.arange(n) / sample_rate - p.center_time
    phase = p.phase0 + 2.0 * np.pi * p.f_center * tau + np.pi * p.chirp_rate * tau ** 2
    return PhaseTrack(phase, _pulse_support(p, sample_rate, t0, n), sample_rate, t0)


def samples_to_cover(p: ChirpParams, sample_rate: float, t0: float = 0.0) -> int:
    """Number of samples from t0 up to the end of the pulse."""
    return max(0, math.ceil((p.end_time - t0) * sample_rate - 1e-9))


def gen_lfm(p: ChirpParams, sample_rate: float, t0: float = 0.0, duration: Optional[float] = None) -> ComplexSignal:
    """
    Generates an LFM pulse, zero outside its support.

    The record runs from ``t0`` for ``duration`` seconds, or until the pulse ends
    when no duration is given.
    """
    if not sample_rate > 0:
        raise InvalidParameterError(f"sample_rate must be > 0, got {sample_rate}")
    if sample_rate < 2.0 * p.max_abs_frequency:
        logging.warning(
            f"Sample rate {sample_rate / 1e6:.3f} MHz is below 2·(|f_center| + bandwidth/2) = "
            f"{2.0 * p.max_abs_frequency / 1e6:.3f} MHz; the pulse will alias."
        )
    if duration is None:
        n = samples_to_cover(p, sample_rate, t0)
    else:
        if duration < 0:
            raise InvalidParameterError(f"duration must be >= 0, got {duration}")
        n = int(round(duration * sample_rate))
    track = lfm_phase(p, sample_rate, t0, n)
    samples = np.where(track.support, p.amplitude * np.exp(1j * track.phase), 0.0)
    return ComplexSignal(samples, sample_rate, t0)


def amplitude_from_isr(a: float, isr_db: float) -> float:
    """Interference amplitude b with 20·log10(b/a) = isr_db."""
    if not a > 0:
        raise InvalidParameterError(f"echo amplitude a must be > 0, got {a}")
    return a * 10.0 ** (isr_db / 20.0)


def combine(e: ComplexSignal, i: ComplexSignal) -> ComplexSignal:
    """Sample-wise sum of two signals on the same grid."""
    if len(e) != len(i):
        raise ShapeMismatchError(f"length mismatch: {len(e)} vs {len(i)} samples")
    if not math.isclose(e.sample_rate, i.sample_rate, rel_tol=1e-12):
        raise ShapeMismatchError(f"sample rate mismatch: {e.sample_rate} vs {i.sample_rate} Hz")
    return ComplexSignal(e.samples + i.samples, e.sample_rate, e.t0)


def add_noise(x: ComplexSignal, power: float, seed: Optional[int] = None) -> ComplexSignal:
    """Adds circular complex white Gaussian noise of the given mean power."""
    if power < 0:
        raise InvalidParameterError(f"noise power must be >= 0, got {power}")
    if power == 0:
        return x
    rng = np.random.default_rng(seed)
    scale = np.sqrt(power / 2.0)
    noise = scale * (rng.standard_normal(len(x)) + 1j * rng.standard_normal(len(x)))
    return x.with_samples(x.samples + noise)


def instantaneous_frequency(x: ComplexSignal) -> np.ndarray:
    """Finite difference of the unwrapped phase, Hz. One value per adjacent sample pair."""
    x.require_samples()
    return np.diff(np.unwrap(np.angle(x.samples))) * x.sample_rate / (2.0 * np.pi)


# --- Signal files ---

def _write_csig(path: Path, x: ComplexSignal) -> None:
    header = CSIG_HEADER.pack(CSIG_MAGIC, CSIG_VERSION, x.sample_rate, x.t0, len(x))
    with open(path, "wb") as f:
        f.write(header)
        f.write(x.samples.astype(CSIG_SAMPLE_DTYPE).tobytes())


def _read_csig(path: Path) -> ComplexSignal:
    data = path.read_bytes()
    if len(data) < CSIG_HEADER.size:
        raise SignalFormatError(f"truncated header in {path.name}", len(data))
    magic, version, sample_rate, t0, count = CSIG_HEADER.unpack_from(data, 0)
    if magic != CSIG_MAGIC:
        raise SignalFormatError(f"bad magic {magic!r} in {path.name}", 0)
    if version != CSIG_VERSION:
        raise SignalFormatError(f"unsupported version {version} in {path.name}", 4)
    if not sample_rate > 0:
        raise SignalFormatError(f"non-positive sample rate {sample_rate} in {path.name}", 8)

    payload = data[CSIG_HEADER.size:]
    expected = count * CSIG_SAMPLE_DTYPE.itemsize
    if len(payload) < expected:
        complete = len(payload) // CSIG_SAMPLE_DTYPE.itemsize
        raise SignalFormatError(
            f"truncated payload in {path.name}: {complete} of {count} samples",
            CSIG_HEADER.size + complete * CSIG_SAMPLE_DTYPE.itemsize,
        )
    if len(payload) > expected:
        raise SignalFormatError(f"trailing bytes after {count} samples in {path.name}", CSIG_HEADER.size + expected)

    samples = np.frombuffer(payload, dtype=CSIG_SAMPLE_DTYPE, count=count)
    return ComplexSignal(samples.astype(np.complex128), sample_rate, t0)


def _write_csv(path: Path, x: ComplexSignal) -> None:
    table = np.column_stack([x.times, x.samples.real, x.samples.imag])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=CSV_HEADER, comments="")


def _read_csv(path: Path, sample_rate: Optional[float]) -> ComplexSignal:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
    if header != CSV_HEADER:
        raise SignalFormatError(f"expected header {CSV_HEADER!r} in {path.name}, got {header!r}", 0)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise SignalFormatError(f"unparsable row in {path.name}: {e}", len(header) + 1) from e

    if table.size == 0:
        if sample_rate is None:
            raise SignalFormatError(f"cannot infer the sample rate of empty {path.name}", len(header) + 1)
        return ComplexSignal(np.zeros(0), sample_rate, 0.0)
    if table.shape[1] != 3:
        raise SignalFormatError(f"expected 3 columns in {path.name}, got {table.shape[1]}", len(header) + 1)

    t = table[:, 0]
    if sample_rate is None:
        if t.size < 2 or t[-1] <= t[0]:
            raise SignalFormatError(f"cannot infer the sample rate of {path.name}; pass it explicitly", 0)
        sample_rate = (t.size - 1) / (t[-1] - t[0])
    return ComplexSignal(table[:, 1] + 1j * table[:, 2], sample_rate, t[0])


def write_signal(path: PathLike, x: ComplexSignal) -> None:
    """Writes a signal as binary CSIG (``.csig``) or CSV (``.csv``)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".csig":
        _write_csig(path, x)
    elif suffix == ".csv":
        _write_csv(path, x)
    else:
        raise InvalidParameterError(f"unknown signal file type {path.suffix!r}; use .csig or .csv")


def read_signal(path: PathLike, sample_rate: Optional[float] = None) -> ComplexSignal:
    """
    Reads a signal written by :func:`write_signal`.

    CSV files carry no sample-rate field, so the rate is inferred from the time
    column unless ``sample_rate`` is given.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".csig":
        return _read_csig(path)
    if suffix == ".csv":
        return _read_csv(path, sample_rate)
    raise InvalidParameterError(f"unknown signal file type {path.suffix!r}; use .csig or .csv")
