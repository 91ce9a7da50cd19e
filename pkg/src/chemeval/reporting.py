"""Deterministic JSON/CSV report assembly.

Reports embed the tool version, the SHA-256 of every input file, and the
command parameters, and contain no timestamps: identical inputs and flags
produce byte-identical output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

from . import __version__

FORMATS = ("json", "csv")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_report(command: str, parameters: dict, inputs: dict[str, str], body: dict) -> dict:
    report = {
        "tool": "chemeval",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "inputs": {
            name: {"path": str(path), "sha256": file_digest(path)}
            for name, path in inputs.items()
        },
    }
    report.update(body)
    return report


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def render_csv(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_report(text: str, out_path: str | Path):
    Path(out_path).write_text(text, encoding="utf-8")
