"""Deterministic JSON reports with provenance fields."""

from __future__ import annotations

import hashlib
import json
import platform


def _library_version() -> str:
    try:
        from importlib.metadata import version
        return version("bilevopt")
    except Exception:
        return "unknown"


def report_envelope(payload: dict, config_text: str = "") -> dict:
    """Wrap a payload with version, platform and config-hash provenance."""
    return {
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "library_version": _library_version(),
        "platform": platform.platform(),
        "report": payload,
    }


def write_report_json(report: dict, path) -> None:
    """Serialize with sorted keys so identical reports are byte-identical."""
    try:
        with open(path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read report from {path}: {exc}") from exc
