"""Config-file loading: TOML or JSON descriptions of a scattering system.

A config names a builder with a parameter table, or spells the system out as
explicit mode/hop/port lists. Port couplings are given as rates (gamma); the
square root is taken here so the rest of the package only ever sees
amplitudes. The raw parsed table is kept on the result so outputs can embed
it and reproduce the run exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .fockspace import BOSON, TWO_LEVEL, Hop, ModeSpec, Port, SystemSpec
from .models import (
    CollocatedParams,
    build_bose_hubbard,
    build_collocated,
    build_two_level,
)

_SYSTEM_KEYS = {"builder", "params", "modes", "hops", "ports"}
_MODE_KINDS = {TWO_LEVEL, BOSON}


def _collocated_from_table(**params) -> SystemSpec:
    return build_collocated(CollocatedParams(**params))


BUILDERS = {
    "two_level": build_two_level,
    "collocated": _collocated_from_table,
    "bose_hubbard": build_bose_hubbard,
}


@dataclass(frozen=True)
class LoadedConfig:
    """A parsed config: the system plus display metadata and the raw table."""

    system: SystemSpec
    label: str
    units: str
    source: dict[str, Any]


def _require_number(value: Any, what: str, origin: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{origin}: {what} must be a number, got {value!r}")
    return float(value)


def _parse_modes(raw: Any, origin: str) -> tuple[ModeSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{origin}: 'modes' must be a non-empty list of tables")
    modes = []
    for idx, entry in enumerate(raw):
        where = f"{origin}: mode {idx}"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be a table")
        kind = entry.get("kind")
        if kind not in _MODE_KINDS:
            raise ConfigError(
                f"{where}: 'kind' must be one of {sorted(_MODE_KINDS)}, got {kind!r}"
            )
        if "frequency" not in entry:
            raise ConfigError(f"{where}: missing 'frequency'")
        try:
            modes.append(
                ModeSpec(
                    kind=kind,
                    frequency=_require_number(entry["frequency"], "'frequency'", where),
                    kerr=_require_number(entry.get("kerr", 0.0), "'kerr'", where),
                    loss=_require_number(entry.get("loss", 0.0), "'loss'", where),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        unknown = set(entry) - {"kind", "frequency", "kerr", "loss"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return tuple(modes)


def _parse_hops(raw: Any, origin: str) -> tuple[Hop, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ConfigError(f"{origin}: 'hops' must be a list of tables")
    hops = []
    for idx, entry in enumerate(raw):
        where = f"{origin}: hop {idx}"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be a table")
        for key in ("from", "to", "strength"):
            if key not in entry:
                raise ConfigError(f"{where}: missing '{key}'")
        unknown = set(entry) - {"from", "to", "strength"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        i, j = entry["from"], entry["to"]
        if isinstance(i, bool) or isinstance(j, bool) or not (
            isinstance(i, int) and isinstance(j, int)
        ):
            raise ConfigError(f"{where}: 'from' and 'to' must be mode indices")
        try:
            hops.append(
                Hop(i, j, _require_number(entry["strength"], "'strength'", where))
            )
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return tuple(hops)


def _parse_ports(raw: Any, origin: str) -> tuple[Port, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{origin}: 'ports' must be a non-empty list of tables")
    ports = []
    for idx, entry in enumerate(raw):
        where = f"{origin}: port {idx}"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be a table")
        label = entry.get("label")
        if not isinstance(label, str) or not label:
            raise ConfigError(f"{where}: 'label' must be a non-empty string")
        couplings = entry.get("couplings")
        if not isinstance(couplings, list) or not couplings:
            raise ConfigError(f"{where}: 'couplings' must be a non-empty list")
        unknown = set(entry) - {"label", "couplings"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        terms = []
        for cdx, coupling in enumerate(couplings):
            cwhere = f"{where}, coupling {cdx}"
            if not isinstance(coupling, dict):
                raise ConfigError(f"{cwhere} must be a table")
            unknown = set(coupling) - {"mode", "gamma"}
            if unknown:
                raise ConfigError(f"{cwhere}: unknown keys {sorted(unknown)}")
            mode = coupling.get("mode")
            if isinstance(mode, bool) or not isinstance(mode, int):
                raise ConfigError(f"{cwhere}: 'mode' must be a mode index")
            gamma = _require_number(coupling.get("gamma", None), "'gamma'", cwhere)
            if gamma < 0.0:
                raise ConfigError(f"{cwhere}: 'gamma' must be nonnegative")
            terms.append((mode, gamma**0.5))
        try:
            ports.append(Port(label, tuple(terms)))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return tuple(ports)


def parse_config(table: Mapping[str, Any], origin: str = "<config>") -> LoadedConfig:
    """Build a LoadedConfig from an already-parsed table.

    Raises ConfigError for structural problems. A DefectiveHamiltonian from
    a builder is allowed to propagate: it is a numerical condition, not a
    syntax error.
    """
    if not isinstance(table, Mapping):
        raise ConfigError(f"{origin}: top level must be a table")
    system_table = table.get("system")
    if not isinstance(system_table, dict):
        raise ConfigError(f"{origin}: missing [system] table")
    unknown = set(system_table) - _SYSTEM_KEYS
    if unknown:
        raise ConfigError(f"{origin}: unknown [system] keys {sorted(unknown)}")

    builder_name = system_table.get("builder", "explicit")
    if builder_name == "explicit":
        for key in ("params",):
            if key in system_table:
                raise ConfigError(
                    f"{origin}: 'params' only applies to named builders"
                )
        try:
            system = SystemSpec(
                modes=_parse_modes(system_table.get("modes"), origin),
                hops=_parse_hops(system_table.get("hops"), origin),
                ports=_parse_ports(system_table.get("ports"), origin),
            )
        except ValueError as exc:
            raise ConfigError(f"{origin}: {exc}") from exc
    else:
        if builder_name not in BUILDERS:
            raise ConfigError(
                f"{origin}: unknown builder {builder_name!r}; "
                f"choose from {sorted(BUILDERS)} or 'explicit'"
            )
        for key in ("modes", "hops", "ports"):
            if key in system_table:
                raise ConfigError(
                    f"{origin}: '{key}' conflicts with builder {builder_name!r}"
                )
        params = system_table.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"{origin}: [system.params] must be a table")
        try:
            system = BUILDERS[builder_name](**params)
        except TypeError as exc:
            raise ConfigError(
                f"{origin}: bad parameters for builder {builder_name!r}: {exc}"
            ) from exc
        except ValueError as exc:
            raise ConfigError(f"{origin}: {exc}") from exc

    label = table.get("label", builder_name)
    if not isinstance(label, str):
        raise ConfigError(f"{origin}: 'label' must be a string")
    units = table.get("units", "arbitrary")
    if not isinstance(units, str):
        raise ConfigError(f"{origin}: 'units' must be a string")
    return LoadedConfig(system=system, label=label, units=units, source=dict(table))


def load_table(path) -> dict[str, Any]:
    """Read a TOML (.toml) or JSON (.json) file into a plain table."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if path.suffix == ".toml":
        try:
            table = tomllib.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    elif path.suffix == ".json":
        try:
            table = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        raise ConfigError(
            f"{path}: unsupported format {path.suffix!r} (use .toml or .json)"
        )
    if not isinstance(table, dict):
        raise ConfigError(f"{path}: top level must be a table")
    return table


def load_config(path) -> LoadedConfig:
    """Read a TOML (.toml) or JSON (.json) config file."""
    return parse_config(load_table(path), origin=str(path))
