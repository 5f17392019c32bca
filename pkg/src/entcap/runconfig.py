"""Sectioned key = value sweep configuration files.

Grammar: blank lines and ``#`` comments are ignored; ``[name]`` opens a sweep
section; ``key = value`` assigns within the current section.  Unknown keys are
rejected with the offending line number.  ``k`` accepts a comma list
(``1,2,5``) or an inclusive range ``lo:hi`` / ``lo:hi:step``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .criteria import CRITERION_KINDS, KIND_ALIASES


class ConfigError(ValueError):
    """Malformed sweep configuration; message carries the line number."""


_KEYS = {
    "criterion",
    "d_a",
    "d_b",
    "k",
    "n_samples",
    "master_seed",
    "ci_level",
    "bound",
    "output",
}
_REQUIRED = ("criterion", "d_a", "d_b", "k", "n_samples", "master_seed", "output")


@dataclass(frozen=True)
class SweepSection:
    name: str
    criterion: str
    d_a: int
    d_b: int
    k_values: tuple[int, ...]
    n_samples: int
    master_seed: int
    ci_level: float
    bound: str | None
    output: str


@dataclass(frozen=True)
class RunConfig:
    sections: tuple[SweepSection, ...]


def _parse_k(value: str, lineno: int) -> tuple[int, ...]:
    try:
        if ":" in value:
            parts = [int(p) for p in value.split(":")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError
            if step < 1 or hi < lo:
                raise ValueError
            ks = tuple(range(lo, hi + 1, step))
        else:
            ks = tuple(int(p) for p in value.split(","))
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse k list/range {value!r}") from None
    if not ks or any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError(f"line {lineno}: k values must be a nonempty ascending positive list")
    return ks


def _build_section(name: str, fields: dict[str, tuple[str, int]], opened_at: int) -> SweepSection:
    for key in _REQUIRED:
        if key not in fields:
            raise ConfigError(f"section [{name}] (line {opened_at}) is missing key {key!r}")
    crit, lineno = fields["criterion"]
    crit = KIND_ALIASES.get(crit, crit)
    if crit not in CRITERION_KINDS:
        raise ConfigError(
            f"line {lineno}: unknown criterion {crit!r} in section [{name}]; "
            f"valid names: {', '.join(CRITERION_KINDS)}"
        )

    def _int(key: str) -> int:
        raw, ln = fields[key]
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"line {ln}: {key} must be an integer, got {raw!r}") from None

    ci_level = 0.95
    if "ci_level" in fields:
        raw, ln = fields["ci_level"]
        try:
            ci_level = float(raw)
        except ValueError:
            raise ConfigError(f"line {ln}: ci_level must be a number, got {raw!r}") from None
        if not 0.0 < ci_level < 1.0:
            raise ConfigError(f"line {ln}: ci_level must lie in (0, 1)")

    bound = None
    if "bound" in fields:
        raw, ln = fields["bound"]
        if raw not in ("none", "ew", "spectrum"):
            raise ConfigError(f"line {ln}: bound must be none, ew, or spectrum, got {raw!r}")
        bound = None if raw == "none" else raw

    return SweepSection(
        name=name,
        criterion=crit,
        d_a=_int("d_a"),
        d_b=_int("d_b"),
        k_values=_parse_k(*fields["k"]),
        n_samples=_int("n_samples"),
        master_seed=_int("master_seed"),
        ci_level=ci_level,
        bound=bound,
        output=fields["output"][0],
    )


def parse_config(text: str) -> RunConfig:
    sections: list[SweepSection] = []
    name: str | None = None
    opened_at = 0
    fields: dict[str, tuple[str, int]] = {}

    def _flush():
        if name is not None:
            sections.append(_build_section(name, fields, opened_at))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            _flush()
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty section name")
            opened_at = lineno
            fields = {}
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        if name is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} in section [{name}]; "
                f"valid keys: {', '.join(sorted(_KEYS))}"
            )
        if key in fields:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in section [{name}]")
        fields[key] = (value, lineno)
    _flush()
    if not sections:
        raise ConfigError("configuration defines no sweep sections")
    return RunConfig(tuple(sections))


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())
