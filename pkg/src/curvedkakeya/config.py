"""Run configuration: a flat ``key = value`` file plus command-line overrides.

Blank lines and lines starting with ``#`` are ignored. Lists are comma
separated. Numbers may be written as ``2^-16`` for powers of two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import ConfigError


def parse_number(text: str) -> float:
    s = text.strip()
    if s.lower() in ("inf", "infinity"):
        return math.inf
    if "^" in s:
        base, _, exp = s.partition("^")
        try:
            return float(base) ** float(exp)
        except ValueError:
            raise ConfigError(f"bad number {text!r}") from None
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"bad number {text!r}") from None


def parse_int(text: str) -> int:
    v = parse_number(text)
    if not math.isfinite(v) or v != int(v):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(v)


def parse_bool(text: str) -> bool:
    s = text.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _list(conv):
    def parse(text: str):
        return tuple(conv(t) for t in text.split(",") if t.strip())
    return parse


@dataclass
class RunConfig:
    family: str = "parabola"
    a0: float = 1.0
    delta0: float = 1.0
    M: int = 16
    M_values: tuple = (16, 20, 24)
    m_sequence: tuple = (8, 16)
    cutoff: str = "theory"
    steps: Optional[int] = None
    strict: bool = True
    columns: int = 4096
    delta: float = 0.0
    deltas: tuple = tuple(2.0 ** -k for k in range(6, 15, 2))
    kinds: tuple = ("slab_S", "rect_T")
    p: tuple = (2.0,)
    q: tuple = (math.inf,)
    a_points: int = 256
    search: str = "witness"
    rect_budget: int = 2 ** 24
    rescaled: bool = False
    threads: int = 1
    seed: int = 0
    samples: int = 32
    timing: bool = False
    output: str = "out"
    extra: dict = field(default_factory=dict, repr=False)


PARSERS = {
    "family": str.strip,
    "a0": parse_number,
    "delta0": parse_number,
    "M": parse_int,
    "M_values": _list(parse_int),
    "m_sequence": _list(parse_int),
    "cutoff": str.strip,
    "steps": parse_int,
    "strict": parse_bool,
    "columns": parse_int,
    "delta": parse_number,
    "deltas": _list(parse_number),
    "kinds": _list(str.strip),
    "p": _list(parse_number),
    "q": _list(parse_number),
    "a_points": parse_int,
    "search": str.strip,
    "rect_budget": parse_int,
    "rescaled": parse_bool,
    "threads": parse_int,
    "seed": parse_int,
    "samples": parse_int,
    "timing": parse_bool,
    "output": str.strip,
}

assert set(PARSERS) == {f.name for f in fields(RunConfig)} - {"extra"}


def parse_lines(lines, source: str = "config") -> dict:
    """key -> parsed value; errors carry ``source:line``."""
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = PARSERS[key](value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
    return out


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_lines(fh, path))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    for key, text in (overrides or {}).items():
        if text is None:
            continue
        try:
            values[key] = PARSERS[key](text) if isinstance(text, str) else text
        except ConfigError as exc:
            raise ConfigError(f"--{key}: {exc}") from None
    return RunConfig(**values)
