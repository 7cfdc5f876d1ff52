"""Reading and writing the ``key = value`` section files.

Params, scenarios and scenario sets share one INI-style grammar::

    # comment
    [section]
    key = value        ; trailing comments allowed

Keys are case-sensitive.  Numbers use Python float syntax (``inf`` allowed),
booleans are ``true``/``false``.  No ``%`` interpolation is performed.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from pathlib import Path

from .model_state import Params, param_sections, validate_params


class ConfigError(ValueError):
    """Malformed or invalid configuration file."""


def make_parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        interpolation=None,
        inline_comment_prefixes=("#", ";"),
        comment_prefixes=("#", ";"),
        empty_lines_in_values=False,
    )
    cp.optionxform = str
    return cp


def read_file(path) -> configparser.ConfigParser:
    path = Path(path)
    cp = make_parser()
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cp


def parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def coerce(text: str, kind, where: str = ""):
    try:
        if kind is bool or kind == "bool":
            return parse_bool(text)
        if kind is int or kind == "int":
            return int(text)
        value = float(text)
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"{where}: cannot parse {text!r}") from exc
    if math.isnan(value):
        raise ConfigError(f"{where}: NaN is not allowed")
    return value


def params_from_parser(cp: configparser.ConfigParser, source: str = "<params>",
                       base: Params | None = None) -> Params:
    sections = param_sections()
    types = {f.name: f.type for f in dataclasses.fields(Params)}
    changes = {}
    for sec in cp.sections():
        if sec not in sections:
            raise ConfigError(f"{source}: unknown section [{sec}]")
        for key, raw in cp.items(sec):
            if key not in sections[sec]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{sec}]")
            changes[key] = coerce(raw, types[key], f"{source} [{sec}] {key}")
    return dataclasses.replace(base or Params(), **changes)


def load_params(path=None, check: bool = True) -> Params:
    """Load Params; missing keys keep their reference defaults.

    Raises ConfigError on unknown keys, unparsable values or (when ``check``)
    any invariant violation.
    """
    if path is None:
        return Params()
    params = params_from_parser(read_file(path), str(path))
    if check:
        problems = validate_params(params)
        if problems:
            raise ConfigError(f"{path}: " + "; ".join(problems))
    return params


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value)


def dump_params(params: Params, annotations: dict[str, str] | None = None) -> str:
    """Render every parameter, grouped by section, with optional trailing tags."""
    annotations = annotations or {}
    fields = {f.name: f for f in dataclasses.fields(Params)}
    lines = []
    for sec, names in param_sections().items():
        lines.append(f"[{sec}]")
        for name in names:
            doc = fields[name].metadata.get("doc", "")
            tag = annotations.get(name, "")
            note = " ".join(x for x in (tag, doc) if x)
            line = f"{name} = {_fmt(getattr(params, name))}"
            lines.append(f"{line:<40}# {note}" if note else line)
        lines.append("")
    return "\n".join(lines)
