"""Shipped JSON fixtures (contexts and quasimorphism configs) and file loading."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ParseError


def builtin_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("gqm").joinpath("data").iterdir() if p.name.endswith(".json"))


def load_json(name_or_path: str):
    """A shipped fixture by name (``d4``, ``f2_qm`` …) or any JSON file path."""
    path = Path(name_or_path)
    try:
        if path.suffix == ".json" or path.exists():
            return json.loads(path.read_text())
        res = resources.files("gqm").joinpath("data").joinpath(f"{name_or_path}.json")
        if not res.is_file():
            raise ParseError(f"no such file or builtin fixture: {name_or_path!r} (builtins: {', '.join(builtin_names())})")
        return json.loads(res.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {name_or_path!r}: {exc}") from exc
