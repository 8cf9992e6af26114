# tools/experiment/base.py
"""
Shared infrastructure for the experiment commands.

Provides:
  - ToolkitConfig dataclass (config.yaml + .env + environment + profile overlay)
  - Manifest loading and strict schema validation for `simulate`
  - OutputRecord (metadata + payload) with a JSON codec
  - CSV readers/writers for increments and ensemble samples
  - BaseCommand abstract class
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import time
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml
from dotenv import load_dotenv

from ..errors import ArgumentError, ParseError
from ..normal_analytics import DEFAULT_MAX_TERMS, QUAD_LIMIT
from ..scan_statistics import DEFAULT_BLOCK_SIZE
from ..simulation_harness import ENGINES, P_INF_HORIZON, PICKANDS_T, EmpiricalDistribution, Statistic

load_dotenv()

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"


# =============================================================================
# Configuration
# =============================================================================

@dataclass
class ToolkitConfig:
    """Tunables passed down to library calls. Library code never reads this itself."""
    series_max_terms: int = DEFAULT_MAX_TERMS
    h_tol: float = 1e-3
    quad_limit: int = QUAD_LIMIT
    block_size: int = DEFAULT_BLOCK_SIZE
    oversample: int = 16
    p_inf_horizon: int = P_INF_HORIZON
    pickands_horizon: float = PICKANDS_T
    master_seed: int = 0
    workers: int = 1
    source: Optional[Path] = None
    profile: Optional[str] = None


# config.yaml key -> (environment variable, type)
_CONFIG_KEYS = {
    "series_max_terms": ("SCAN_SERIES_MAX_TERMS", int),
    "h_tol": ("SCAN_H_TOL", float),
    "quad_limit": ("SCAN_QUAD_LIMIT", int),
    "block_size": ("SCAN_BLOCK_SIZE", int),
    "oversample": ("SCAN_OVERSAMPLE", int),
    "p_inf_horizon": ("SCAN_P_INF_HORIZON", int),
    "pickands_horizon": ("SCAN_PICKANDS_HORIZON", float),
    "master_seed": ("SCAN_MASTER_SEED", int),
    "workers": ("SCAN_WORKERS", int),
}


def _find_config_file(explicit_path: str = None) -> Optional[Path]:
    """Locate config.yaml: explicit path > CWD > project root."""
    if explicit_path:
        p = Path(explicit_path)
        if p.exists():
            return p
        raise FileNotFoundError(f"Config file not found: {explicit_path}")

    cwd_config = Path.cwd() / "config.yaml"
    if cwd_config.exists():
        return cwd_config

    # Two levels up from this file: tools/experiment/ -> project root
    project_config = Path(__file__).parent.parent.parent / "config.yaml"
    if project_config.exists():
        return project_config

    return None


def read_text(path) -> str:
    """Whole file as text; undecodable bytes are a ParseError at their line."""
    raw = Path(path).read_bytes()
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        line = exc.object[:exc.start].count(b"\n") + 1
        raise ParseError(f"not valid UTF-8 (byte 0x{exc.object[exc.start]:02x})",
                         path=str(path), line=line) from exc


def _read_yaml(path: Path) -> dict:
    text = read_text(path)
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ParseError(str(exc.problem or exc), path=str(path), line=line) from exc
    except yaml.reader.ReaderError as exc:
        # unprintable character; position is a character offset into the text
        line = text[:exc.position].count("\n") + 1
        raise ParseError(f"unacceptable character {exc.character!r}", path=str(path), line=line) from exc
    except yaml.YAMLError as exc:
        raise ParseError(str(exc), path=str(path)) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ParseError("top level must be a mapping", path=str(path), line=1)
    return data


def _coerce(key: str, value: Any, kind: type) -> Any:
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ArgumentError(f"{key} must be {kind.__name__}, got {value!r}")


def load_config(config_path: str = None, profile: str = None) -> ToolkitConfig:
    """Load config.yaml and return a ToolkitConfig.

    Args:
        config_path: Explicit path to config.yaml.
        profile: Profile name from the `profiles` section, overlaid on the base values.
    """
    config_file = _find_config_file(config_path)
    config: dict = {}
    if config_file:
        config = _read_yaml(config_file)
        logger.info("Config: %s", config_file)

    profiles = config.pop("profiles", None) or {}
    unknown = set(config) - set(_CONFIG_KEYS)
    if unknown:
        raise ArgumentError(f"unknown config keys: {sorted(unknown)}")

    values = {}
    for key, (env_name, kind) in _CONFIG_KEYS.items():
        raw = os.getenv(env_name)
        if raw is None:
            raw = config.get(key)
        if raw is not None:
            values[key] = _coerce(key, raw, kind)

    # Profile overlay
    if profile:
        if profile not in profiles:
            raise ArgumentError(f"Profile '{profile}' not found in config.yaml. Available: {list(profiles.keys())}")
        overlay = profiles[profile] or {}
        unknown = set(overlay) - set(_CONFIG_KEYS)
        if unknown:
            raise ArgumentError(f"unknown keys in profile '{profile}': {sorted(unknown)}")
        for key, raw in overlay.items():
            values[key] = _coerce(key, raw, _CONFIG_KEYS[key][1])
        logger.info("Profile: %s", profile)

    return ToolkitConfig(**values, source=config_file, profile=profile)


# =============================================================================
# Manifests
# =============================================================================

# simulate manifest: key -> (type, required)
MANIFEST_SCHEMA = {
    "statistic": (str, True),
    "n": (int, True),
    "replications": (int, True),
    "master_seed": (int, True),
    "c": (float, False),
    "oversample": (int, False),
    "engine": (str, False),
    "workers": (int, False),
    "out": (str, False),
}


def validate_manifest(data: dict, path: str = None) -> dict:
    """Reject unknown keys, missing required keys and wrongly typed values."""
    tunables = (set(data) & set(_CONFIG_KEYS)) - set(MANIFEST_SCHEMA)
    if tunables:
        raise ArgumentError(f"{path or 'manifest'}: {sorted(tunables)} are tolerance/oracle settings; "
                            "set them in config.yaml, a profile or SCAN_* variables")
    unknown = set(data) - set(MANIFEST_SCHEMA)
    if unknown:
        raise ArgumentError(f"{path or 'manifest'}: unknown keys {sorted(unknown)}")
    clean = {}
    for key, (kind, required) in MANIFEST_SCHEMA.items():
        if data.get(key) is None:
            if required:
                raise ArgumentError(f"{path or 'manifest'}: missing required key '{key}'")
            continue
        value = data[key]
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise ArgumentError(f"{path or 'manifest'}: '{key}' must be an integer, got {value!r}")
        if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
            raise ArgumentError(f"{path or 'manifest'}: '{key}' must be a number, got {value!r}")
        if kind is str and not isinstance(value, str):
            raise ArgumentError(f"{path or 'manifest'}: '{key}' must be a string, got {value!r}")
        clean[key] = kind(value)
    if clean["statistic"] not in {s.value for s in Statistic}:
        raise ArgumentError(f"{path or 'manifest'}: unknown statistic {clean['statistic']!r}")
    if clean.get("engine", "pruned") not in ENGINES:
        raise ArgumentError(f"{path or 'manifest'}: unknown engine {clean['engine']!r}")
    return clean


def load_manifest(path: str) -> dict:
    return validate_manifest(_read_yaml(Path(path)), path)


def manifest_hash(manifest: dict) -> str:
    canonical = json.dumps(manifest, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# =============================================================================
# Output records
# =============================================================================

@dataclass
class OutputRecord:
    metadata: dict
    payload: dict

    @classmethod
    def build(cls, command: str, payload: dict, manifest: dict = None,
              master_seed: int = None, started: float = None) -> "OutputRecord":
        metadata = {
            "tool_version": TOOL_VERSION,
            "command": command,
            "master_seed": master_seed,
            "manifest_hash": manifest_hash(manifest) if manifest is not None else None,
            "wall_time": round(time.perf_counter() - started, 6) if started is not None else None,
        }
        return cls(metadata=metadata, payload=payload)

    def to_json(self) -> str:
        # json writes floats with repr: shortest string that round-trips.
        return json.dumps(asdict(self), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str, path: str = None) -> "OutputRecord":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, path=path, line=exc.lineno) from exc
        if not isinstance(data, dict) or set(data) != {f.name for f in fields(cls)}:
            found = sorted(data) if isinstance(data, dict) else type(data).__name__
            raise ArgumentError(f"not an output record: {found}")
        return cls(metadata=data["metadata"], payload=data["payload"])


def write_text(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def write_record(record: OutputRecord, out: Optional[str]) -> None:
    write_text(record.to_json(), out)


# =============================================================================
# CSV
# =============================================================================

def _parse_float(cell: str, path: str, line: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", path=path, line=line)
    if not np.isfinite(value):
        raise ParseError(f"non-finite cell {cell!r}", path=path, line=line)
    return value


def _rows(path: str) -> list[tuple[int, list[str]]]:
    text = read_text(path)
    return [(idx, [c.strip() for c in row])
            for idx, row in enumerate(csv.reader(io.StringIO(text, newline="")), start=1)
            if row and any(c.strip() for c in row)]


def _is_header(cells: list[str]) -> bool:
    try:
        [float(c) for c in cells]
    except ValueError:
        return True
    return False


def read_increments_csv(path: str) -> np.ndarray:
    """One increment per line; an optional non-numeric header row is skipped."""
    rows = _rows(path)
    if rows and _is_header(rows[0][1]):
        rows = rows[1:]
    values = []
    for line, cells in rows:
        if len(cells) != 1:
            raise ParseError(f"expected 1 column, found {len(cells)}", path=path, line=line)
        values.append(_parse_float(cells[0], path, line))
    if not values:
        raise ParseError("no increments found", path=path)
    return np.asarray(values, dtype=np.float64)


SAMPLE_COLUMNS = ("replication", "raw_value", "standardized_value")


def sidecar_path(csv_path: str) -> str:
    """Metadata record written next to a samples CSV: s.csv -> s.csv.meta.json."""
    return f"{csv_path}.meta.json"


def write_samples_csv(emp: EmpiricalDistribution, out: Optional[str]) -> None:
    lines = [",".join(SAMPLE_COLUMNS)]
    for r, (raw, std) in enumerate(zip(emp.raw, emp.standardized)):
        lines.append(f"{r},{float(raw)!r},{float(std)!r}")
    write_text("\n".join(lines) + "\n", out)


def read_samples(path: str) -> np.ndarray:
    """Standardized samples from a simulate record (.json) or a CSV.

    CSV input is either the three-column samples schema or a single column of
    values with an optional header.
    """
    if path.endswith(".json"):
        record = OutputRecord.from_json(read_text(path), path)
        try:
            return np.asarray(record.payload["standardized_value"], dtype=np.float64)
        except KeyError:
            raise ArgumentError(f"{path}: record has no standardized_value payload")

    rows = _rows(path)
    column = 0
    if rows and _is_header(rows[0][1]):
        header = rows[0][1]
        if "standardized_value" in header:
            column = header.index("standardized_value")
        elif len(header) != 1:
            raise ParseError(f"unrecognised header {header}", path=path, line=rows[0][0])
        rows = rows[1:]
    width = len(rows[0][1]) if rows else 0
    values = []
    for line, cells in rows:
        if len(cells) != width:
            raise ParseError(f"ragged row: {len(cells)} cells, expected {width}", path=path, line=line)
        values.append(_parse_float(cells[column], path, line))
    if not values:
        raise ParseError("no samples found", path=path)
    return np.asarray(values, dtype=np.float64)


# =============================================================================
# Command base
# =============================================================================

class BaseCommand(ABC):
    """Abstract base for all experiment subcommands."""

    name: str = ""
    help: str = ""

    def __init__(self, config: ToolkitConfig):
        self.config = config

    @classmethod
    @abstractmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Register subcommand flags."""

    @abstractmethod
    def run(self, args: argparse.Namespace) -> OutputRecord:
        """Execute and return the record to persist."""

    def banner(self, args: argparse.Namespace) -> list[str]:
        """Key parameters shown in the console banner."""
        return []

    def write(self, record: OutputRecord, args: argparse.Namespace) -> None:
        write_record(record, getattr(args, "out", None))

    def summary(self, record: OutputRecord) -> list[str]:
        return []
