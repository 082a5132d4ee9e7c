# File: satharm/artifacts.py
import logging
import shutil
from pathlib import Path
from typing import Any, Callable, Dict, List

from satharm.errors import ConfigError
from satharm.utils import parse_key_values


def prepare_output_dir(output_dir: Path) -> Path:
    """Creates the output directory; an unusable path is a configuration error."""
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {output_dir}: {e}", field="output_dir") from e
    if not output_dir.is_dir():
        raise ConfigError(f"{output_dir} is not a directory", field="output_dir")
    return output_dir


def _partial_path(target: Path) -> Path:
    # Keeps the suffix so suffix-dispatching writers still pick the right format.
    return target.with_name(f".{target.stem}.partial{target.suffix}")


def write_atomic(target: Path, writer: Callable[[Path], None]) -> Path:
    """Runs ``writer`` on a temp file next to ``target`` and moves it into place."""
    temp_path = _partial_path(target)
    try:
        writer(temp_path)
        shutil.move(temp_path, target)
    except BaseException as e:
        if isinstance(e, OSError):
            logging.critical(f"Failed to write {target.name}: {e}")
        temp_path.unlink(missing_ok=True)
        raise
    logging.debug(f"Wrote {target}")
    return target


def write_text_atomic(target: Path, text: str) -> Path:
    def writer(path: Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)

    return write_atomic(target, writer)


def format_manifest(entries: Dict[str, Any]) -> str:
    lines: List[str] = ["# satharm run manifest"]
    for key, value in entries.items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_manifest(target: Path, entries: Dict[str, Any]) -> Path:
    return write_text_atomic(target, format_manifest(entries))


def read_manifest(path: Path) -> Dict[str, str]:
    """Parses a manifest or report block back into raw strings."""
    values = parse_key_values(Path(path).read_text(encoding="utf-8"))
    return {key: value or "" for key, value in values.items()}
