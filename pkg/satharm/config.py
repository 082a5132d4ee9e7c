# File: satharm/config.py
import argparse
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from colorlog import ColoredFormatter
from tqdm.contrib.logging import _TqdmLoggingHandler

from satharm.dsp.saturation import SaturationConfig
from satharm.dsp.signals import ChirpParams, amplitude_from_isr, samples_to_cover
from satharm.errors import ConfigError, InvalidParameterError
from satharm.utils import parse_key_values

# --- Constants ---
DEFAULT_LOG_FILE: str = "satharm.log"
LOG_FILE_ENV_VAR: str = "SATHARM_LOG_FILE"

DEFAULT_SAMPLE_RATE_HZ: float = 400e6
DEFAULT_ISR_DB: float = 30.0
DEFAULT_COEFFICIENT: float = 0.5
DEFAULT_OUTPUT_DIR: Path = Path("output")

COMMANDS: List[str] = ["simulate", "decompose", "cancel", "compare", "verify"]
VERIFY_SUITES: List[str] = ["sat-integral", "parity", "oracle", "jacobi-anger", "bessel", "identity", "all"]
MODELS: List[str] = ["bessel", "tanh"]

# Mutually exclusive pairs; the first member wins when neither is given.
EXCLUSIVE_PAIRS = (("isr_db", "interference_amplitude"), ("coefficient", "s_a"))

DEFAULTS: Dict[str, Any] = {
    "echo_f_center": 0.0,
    "echo_bandwidth": 5e6,
    "echo_pulse_width": 30e-6,
    "echo_amplitude": 1.0,
    "echo_phase0": 0.0,
    "echo_delay": 0.0,
    "interference_f_center": 20e6,
    "interference_bandwidth": 10e6,
    "interference_pulse_width": 30e-6,
    "interference_phase0": 0.0,
    "interference_delay": 0.0,
    "sample_rate": DEFAULT_SAMPLE_RATE_HZ,
    "t0": 0.0,
    "duration": None,
    "seed": 0,
    "noise_power": 0.0,
    "output_dir": DEFAULT_OUTPUT_DIR,
    "max_order": 7,
    "nfft": None,
    "window_len": 512,
    "hop": 64,
    "grid_n": 1024,
    "band_margin": 5e6,
}


def _integer(raw: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(f"{raw!r} is not an integer")
    return int(value)


FIELD_TYPES: Dict[str, Callable[[str], Any]] = {
    **{key: float for key in (
        "echo_f_center", "echo_bandwidth", "echo_pulse_width", "echo_amplitude", "echo_phase0", "echo_delay",
        "interference_f_center", "interference_bandwidth", "interference_pulse_width", "interference_amplitude",
        "interference_phase0", "interference_delay", "isr_db", "s_a", "coefficient", "sample_rate", "t0",
        "duration", "noise_power", "band_margin",
    )},
    **{key: _integer for key in ("seed", "max_order", "nfft", "window_len", "hop", "grid_n")},
    "output_dir": Path,
}


def setup_logging(log_file: Optional[str] = None) -> None:
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    log_file = log_file or os.getenv(LOG_FILE_ENV_VAR) or DEFAULT_LOG_FILE
    file_handler = logging.FileHandler(log_file)
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(logging.Formatter("%(asctime)s [%(levelname)s] - %(message)s"))
    root_logger.addHandler(file_handler)

    log_colors = {
        'DEBUG': 'white', 'INFO': 'green', 'WARNING': 'yellow',
        'ERROR': 'red', 'CRITICAL': 'bold_red',
    }
    console_formatter = ColoredFormatter(
        '%(log_color)s%(asctime)s [%(levelname)s] - %(message)s',
        log_colors=log_colors
    )
    # Routes console output through tqdm so progress bars stay intact.
    console_handler = _TqdmLoggingHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(console_formatter)
    root_logger.addHandler(console_handler)


# --- Scenario ---

@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario: both pulses, the clip level and the analysis settings."""
    echo: ChirpParams
    interference: ChirpParams
    isr_db: Optional[float]
    saturation: SaturationConfig
    sample_rate: float
    t0: float
    duration: Optional[float]
    seed: int
    noise_power: float
    output_dir: Path
    max_order: int
    nfft: Optional[int]
    window_len: int
    hop: int
    grid_n: int
    band_margin: float

    @property
    def a(self) -> float:
        return self.echo.amplitude

    @property
    def b(self) -> float:
        return self.interference.amplitude

    @property
    def s_a(self) -> float:
        return self.saturation.s_a

    @property
    def coefficient(self) -> float:
        return self.saturation.coefficient

    @property
    def full_scale(self) -> float:
        """dB reference power: the unsaturated peak amplitude a + b, squared."""
        return (self.a + self.b) ** 2

    @property
    def num_samples(self) -> int:
        if self.duration is not None:
            return int(round(self.duration * self.sample_rate))
        return max(samples_to_cover(p, self.sample_rate, self.t0) for p in (self.echo, self.interference))

    def manifest(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "b": self.b,
            "s_a": self.s_a,
            "C": self.coefficient,
            "fs": self.sample_rate,
            "isr_db": self.isr_db,
            "echo_f_center": self.echo.f_center,
            "echo_bandwidth": self.echo.bandwidth,
            "echo_pulse_width": self.echo.pulse_width,
            "echo_phase0": self.echo.phase0,
            "echo_delay": self.echo.delay,
            "interference_f_center": self.interference.f_center,
            "interference_bandwidth": self.interference.bandwidth,
            "interference_pulse_width": self.interference.pulse_width,
            "interference_phase0": self.interference.phase0,
            "interference_delay": self.interference.delay,
            "t0": self.t0,
            "samples": self.num_samples,
            "seed": self.seed,
            "noise_power": self.noise_power,
            "max_order": self.max_order,
            "nfft": self.nfft,
            "window_len": self.window_len,
            "hop": self.hop,
            "grid_n": self.grid_n,
            "band_margin": self.band_margin,
            "full_scale": self.full_scale,
        }


def parse_value(key: str, raw: str) -> Any:
    if key not in FIELD_TYPES:
        raise ConfigError("unknown configuration key", field=key)
    try:
        return FIELD_TYPES[key](raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"cannot parse {raw!r}: {e}", field=key) from e


def load_config_file(path: Path) -> Dict[str, Any]:
    """Reads a flat ``key = value`` scenario file into typed values."""
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist", field="config")
    values: Dict[str, Any] = {}
    for key, raw in parse_key_values(path.read_text(encoding="utf-8")).items():
        if raw is None or raw == "":
            raise ConfigError("missing value", field=key)
        values[key] = parse_value(key, raw)
    logging.info(f"Loaded {len(values)} setting(s) from {path}.")
    return values


def merge_settings(file_values: Dict[str, Any], flag_values: Dict[str, Any]) -> Dict[str, Any]:
    """Flags win over the file; a flag naming one member of an exclusive pair clears the other from the file."""
    for source, values in (("config file", file_values), ("flags", flag_values)):
        for first, second in EXCLUSIVE_PAIRS:
            if first in values and second in values:
                raise ConfigError(f"give only one of {first} and {second} in the {source}", field=second)
    merged = dict(file_values)
    for key, value in flag_values.items():
        merged[key] = value
        for first, second in EXCLUSIVE_PAIRS:
            if key == first:
                merged.pop(second, None)
            elif key == second:
                merged.pop(first, None)
    return merged


def _chirp(prefix: str, values: Dict[str, Any], amplitude: float) -> ChirpParams:
    try:
        return ChirpParams(
            f_center=values[f"{prefix}_f_center"],
            bandwidth=values[f"{prefix}_bandwidth"],
            pulse_width=values[f"{prefix}_pulse_width"],
            amplitude=amplitude,
            phase0=values[f"{prefix}_phase0"],
            delay=values[f"{prefix}_delay"],
        )
    except InvalidParameterError as e:
        raise ConfigError(str(e), field=prefix) from e


def resolve_scenario(settings: Dict[str, Any]) -> ScenarioConfig:
    """Builds a ScenarioConfig from explicit settings layered over the built-in defaults."""
    for key in settings:
        if key not in FIELD_TYPES:
            raise ConfigError("unknown configuration key", field=key)
    for first, second in EXCLUSIVE_PAIRS:
        if first in settings and second in settings:
            raise ConfigError(f"give only one of {first} and {second}", field=second)
    values = {**DEFAULTS, **settings}

    echo = _chirp("echo", values, values["echo_amplitude"])
    isr_db = values.get("isr_db")
    if "interference_amplitude" in values:
        b = values["interference_amplitude"]
        if not b > 0:
            raise ConfigError(f"must be > 0, got {b}", field="interference_amplitude")
        isr_db = None
    else:
        isr_db = DEFAULT_ISR_DB if isr_db is None else isr_db
        try:
            b = amplitude_from_isr(echo.amplitude, isr_db)
        except InvalidParameterError as e:
            raise ConfigError(str(e), field="echo_amplitude") from e
    interference = _chirp("interference", values, b)

    peak = echo.amplitude + interference.amplitude
    try:
        if "s_a" in values:
            saturation = SaturationConfig.from_level(values["s_a"], peak)
        else:
            coefficient = values.get("coefficient", DEFAULT_COEFFICIENT)
            saturation = SaturationConfig.from_coefficient(coefficient, peak)
    except InvalidParameterError as e:
        raise ConfigError(str(e), field="s_a" if "s_a" in values else "coefficient") from e

    if not values["sample_rate"] > 0:
        raise ConfigError(f"must be > 0, got {values['sample_rate']}", field="sample_rate")
    if values["noise_power"] < 0:
        raise ConfigError(f"must be >= 0, got {values['noise_power']}", field="noise_power")
    if values["max_order"] < 1:
        raise ConfigError(f"must be >= 1, got {values['max_order']}", field="max_order")
    if not 0 < values["hop"] <= values["window_len"]:
        raise ConfigError("need 0 < hop <= window_len", field="hop")
    if values["grid_n"] < 4 * (values["max_order"] + 1):
        raise ConfigError(f"must be >= 4·(max_order + 1) = {4 * (values['max_order'] + 1)}", field="grid_n")
    if values["duration"] is not None and not values["duration"] > 0:
        raise ConfigError(f"must be > 0, got {values['duration']}", field="duration")

    return ScenarioConfig(
        echo=echo,
        interference=interference,
        isr_db=isr_db,
        saturation=saturation,
        sample_rate=values["sample_rate"],
        t0=values["t0"],
        duration=values["duration"],
        seed=values["seed"],
        noise_power=values["noise_power"],
        output_dir=Path(values["output_dir"]),
        max_order=values["max_order"],
        nfft=values["nfft"],
        window_len=values["window_len"],
        hop=values["hop"],
        grid_n=values["grid_n"],
        band_margin=values["band_margin"],
    )


def scenario_from_args(args: argparse.Namespace) -> ScenarioConfig:
    file_values = load_config_file(args.config) if args.config else {}
    flag_values = {key: getattr(args, key) for key in FIELD_TYPES if getattr(args, key, None) is not None}
    return resolve_scenario(merge_settings(file_values, flag_values))


# --- Command line ---

def _scenario_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, default=None, help="Scenario file of key = value lines.")
    parent.add_argument("--log-file", type=str, default=None, help="Log file path (default: satharm.log).")
    parent.add_argument("--plots", action="store_true", help="Also render PNG figures from the CSV artifacts.")

    group = parent.add_argument_group("scenario overrides (win over --config)")
    for key, kind in FIELD_TYPES.items():
        group.add_argument(
            f"--{key.replace('_', '-')}", dest=key, type=kind, default=None,
            help=f"Override '{key}'."
        )
    return parent


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(
        prog="satharm",
        description="Model ADC saturation of radar echoes hit by strong interference."
    )
    parent = _scenario_parent()
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("simulate", parents=[parent], help="Write unsaturated/saturated signals, spectra and TF maps.")
    commands.add_parser("decompose", parents=[parent], help="Write the harmonic decomposition table.")

    cancel = commands.add_parser("cancel", parents=[parent], help="Cancel one harmonic and report the residual.")
    cancel.add_argument("--m", type=int, default=0, help="Echo order of the harmonic.")
    cancel.add_argument("--n", type=int, default=3, help="Interference order of the harmonic.")
    cancel.add_argument("--model", choices=MODELS, default="bessel", help="Model used for the reconstruction.")

    compare = commands.add_parser("compare", parents=[parent], help="Run the cancellation with both models.")
    compare.add_argument("--m", type=int, default=0, help="Echo order of the harmonic.")
    compare.add_argument("--n", type=int, default=3, help="Interference order of the harmonic.")

    verify = commands.add_parser("verify", parents=[parent], help="Run the numerical verification suites.")
    verify.add_argument("--suite", choices=VERIFY_SUITES, default="all", help="Suite to run.")

    return parser.parse_args(argv)
