"""Bundled JSON schema documents for the package's file artifacts."""

import json
from importlib import resources

SCHEMA_NAMES = (
    "checkpoint",
    "history",
    "eval_report",
    "sweep_summary",
    "cohort_meta",
)


def load_schema(name: str) -> dict:
    """Return the bundled schema document called `name`."""
    if name not in SCHEMA_NAMES:
        raise ValueError(f"unknown schema {name!r}; expected one of {SCHEMA_NAMES}")
    text = resources.files(__package__).joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)
