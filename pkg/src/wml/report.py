"""Versioned JSON report envelope shared by all CLI commands.

The timestamp lives outside ``results`` so golden-file comparisons on
the results payload stay byte-stable across runs.
"""

import datetime
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__

SCHEMA_VERSION = "1"

_SCHEMA_PATH = Path(__file__).resolve().parents[2] / "docs" / "report_schema.json"


def load_schema():
    # installed copies may not carry docs/; fall back to package data
    if _SCHEMA_PATH.exists():
        return json.loads(_SCHEMA_PATH.read_text())
    ref = resources.files("wml").joinpath("report_schema.json")
    return json.loads(ref.read_text())


def clean(obj):
    """Make a payload strictly JSON-able: numpy scalars to Python ones,
    non-finite floats to strings (allow_nan=False elsewhere)."""
    import math

    import numpy as np
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return obj


@dataclass
class Report:
    command: str
    manifold: dict | None
    results: dict
    warnings: list = field(default_factory=list)
    timestamp: str = field(
        default_factory=lambda: datetime.datetime.now(
            datetime.timezone.utc).isoformat())

    def to_dict(self):
        return {"schema_version": SCHEMA_VERSION,
                "tool_version": __version__,
                "command": self.command,
                "manifold": self.manifold,
                "timestamp": self.timestamp,
                "results": self.results,
                "warnings": list(self.warnings)}

    def to_json(self):
        doc = self.to_dict()
        jsonschema.validate(doc, load_schema())
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)

    def results_json(self):
        """Deterministic payload only (no timestamp) for golden files."""
        return json.dumps(self.results, indent=2, sort_keys=True,
                          allow_nan=False)


def parse_report(text):
    doc = json.loads(text)
    jsonschema.validate(doc, load_schema())
    return doc
