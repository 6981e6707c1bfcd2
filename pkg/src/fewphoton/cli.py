"""Command-line front end.

Subcommands load a system config and emit deterministic CSV (grids, sweeps,
wavepacket outputs) or JSON (spectra, peak reports). Identical invocations
produce byte-identical files. Exit codes: 0 on success, 2 for configuration
or usage problems, 3 for numerical failures (defective spectra, pole hits,
instability, unresolvable grids).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import LoadedConfig, load_config, load_table
from .diagrams import ascii_profile, diagram_label, enumerate_diagrams
from .errors import (
    ConfigError,
    DefectiveHamiltonian,
    GridTooCoarse,
    InstabilityDetected,
    NonFinite,
)
from .maps import GridJob, find_peaks, parse_channels, run_gmap
from .smatrix import Wavepacket, one_photon_S, wavepacket_output
from .spectral import decompose_all

_FMT = "%.11e"


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _config_header(cfg: LoadedConfig, kind: str) -> list[str]:
    return [
        f"# fewphoton-{kind} {__version__}",
        f"# label: {cfg.label}",
        f"# units: {cfg.units}",
        f"# config: {json.dumps(cfg.source, sort_keys=True)}",
    ]


def _cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    if args.n < 0:
        raise ConfigError("--n must be nonnegative")
    spectra = decompose_all(cfg.system, args.n)
    payload = {
        "fewphoton": __version__,
        "label": cfg.label,
        "units": cfg.units,
        "manifolds": {
            str(n): [[float(e.real), float(e.imag)] for e in spectra[n].eigenvalues]
            for n in range(args.n + 1)
        },
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_one_photon(args) -> int:
    cfg = load_config(args.config)
    if args.steps < 2:
        raise ConfigError("--steps must be at least 2")
    if not args.kmax > args.kmin:
        raise ConfigError("--kmax must exceed --kmin")
    ks = np.linspace(args.kmin, args.kmax, args.steps)
    spectra = decompose_all(cfg.system, 1)
    labels = sorted(cfg.system.port_labels)
    columns = {
        (out, inc): one_photon_S(cfg.system, spectra, out, inc, ks)
        for out in labels
        for inc in labels
    }
    lines = _config_header(cfg, "one-photon")
    lines.append(f"# k: {args.kmin!r} {args.kmax!r} {args.steps}")
    lines.append("# columns: k,out,in,re,im")
    for i in range(ks.shape[0]):
        for out in labels:
            for inc in labels:
                val = columns[(out, inc)][i]
                lines.append(
                    ",".join(
                        (_FMT % ks[i], out, inc, _FMT % val.real, _FMT % val.imag)
                    )
                )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _resolve_energy(text: str, cfg: LoadedConfig) -> float:
    try:
        return float(text)
    except ValueError:
        pass
    if text in ("lowest-pair", "highest-pair"):
        spectrum = decompose_all(cfg.system, 2)[2]
        reals = spectrum.eigenvalues.real
        return float(reals.min() if text == "lowest-pair" else reals.max())
    raise ConfigError(
        f"--etotal must be a number, 'lowest-pair' or 'highest-pair', got {text!r}"
    )


def _cmd_gmap(args) -> int:
    cfg = load_config(args.config)
    out_pair, in_pair = parse_channels(args.channels)
    if len(out_pair) != 2 or len(in_pair) != 2:
        raise ConfigError("gmap channels must name two outputs and two inputs")
    job = GridJob(
        config=cfg,
        out_channels=out_pair,
        in_channels=in_pair,
        e_total=_resolve_energy(args.etotal, cfg),
        dk=args.dk,
        dp=args.dp,
        eta=args.eta,
        out_path=args.out,
    )
    dks, dps, _ = run_gmap(job)
    sys.stdout.write(f"wrote {args.out} ({dks.shape[0]}x{dps.shape[0]} grid)\n")
    return 0


def _cmd_peaks(args) -> int:
    if args.threshold < 0.0:
        raise ConfigError("--threshold must be nonnegative")
    report = find_peaks(args.infile, args.threshold)
    payload = {"fewphoton": __version__, **report.as_dict()}
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_diagrams(args) -> int:
    if args.m < 1:
        raise ConfigError("--m must be at least 1")
    cap = args.m if args.cap is None else args.cap
    if cap < 1:
        raise ConfigError("--cap must be at least 1")
    found = enumerate_diagrams(args.m, cap)
    lines = [f"m={args.m} cap={cap} count={len(found)}"]
    for diagram in found:
        lines.append("")
        lines.append(diagram_label(diagram))
        lines.extend(ascii_profile(diagram).splitlines())
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _parse_scatter_table(table: dict, origin: str):
    photons_raw = table.get("photons")
    if not isinstance(photons_raw, list) or not 1 <= len(photons_raw) <= 2:
        raise ConfigError(f"{origin}: 'photons' must list one or two packets")
    packets = []
    for idx, entry in enumerate(photons_raw):
        where = f"{origin}: photon {idx}"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be a table")
        unknown = set(entry) - {"channel", "center", "width"}
        if unknown:
            raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
        channel = entry.get("channel")
        if not isinstance(channel, str) or not channel:
            raise ConfigError(f"{where}: 'channel' must be a port label")
        try:
            packets.append(
                Wavepacket(
                    channel=channel,
                    center=float(entry.get("center", 0.0)),
                    width=float(entry.get("width", 0.0)),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    output = table.get("output")
    if not isinstance(output, dict):
        raise ConfigError(f"{origin}: missing [output] table")
    unknown = set(output) - {"channels", "kmin", "kmax", "points"}
    if unknown:
        raise ConfigError(f"{origin}: unknown [output] keys {sorted(unknown)}")
    channels = output.get("channels")
    if (
        not isinstance(channels, list)
        or len(channels) != len(packets)
        or not all(isinstance(c, str) and c for c in channels)
    ):
        raise ConfigError(
            f"{origin}: [output] 'channels' must list one label per photon"
        )
    try:
        kmin = float(output["kmin"])
        kmax = float(output["kmax"])
        points = int(output["points"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(
            f"{origin}: [output] needs numeric 'kmin', 'kmax' and integer 'points'"
        ) from exc
    if points < 2 or not kmax > kmin:
        raise ConfigError(f"{origin}: output grid must be increasing with >= 2 points")
    eta = table.get("eta")
    if eta is not None:
        if isinstance(eta, bool) or not isinstance(eta, (int, float)):
            raise ConfigError(f"{origin}: 'eta' must be a number")
        eta = float(eta)
    known = set(table) - {"photons", "output", "eta"}
    if known:
        raise ConfigError(f"{origin}: unknown keys {sorted(known)}")
    return packets, tuple(channels), np.linspace(kmin, kmax, points), eta


def _cmd_scatter(args) -> int:
    cfg = load_config(args.config)
    table = load_table(args.in_spec)
    packets, channels, grid, eta = _parse_scatter_table(table, str(args.in_spec))
    known = set(cfg.system.port_labels)
    for label in [p.channel for p in packets] + list(channels):
        if label not in known:
            raise ConfigError(
                f"channel {label!r} is not a port of this system (ports: {sorted(known)})"
            )
    spectra = decompose_all(cfg.system, len(packets))
    result = wavepacket_output(cfg.system, spectra, packets, channels, grid, eta=eta)
    lines = _config_header(cfg, "scatter")
    lines.append(f"# input: {json.dumps(table, sort_keys=True)}")
    if len(packets) == 1:
        norm = float(np.trapezoid(np.abs(result) ** 2, grid))
        lines.append(f"# norm: {norm!r}")
        lines.append("# columns: k,re,im")
        for i in range(grid.shape[0]):
            lines.append(
                ",".join((_FMT % grid[i], _FMT % result[i].real, _FMT % result[i].imag))
            )
    else:
        norm = 0.5 * float(
            np.trapezoid(np.trapezoid(np.abs(result) ** 2, grid, axis=1), grid)
        )
        lines.append(f"# norm_contribution: {norm!r}")
        lines.append("# columns: p1,p2,re,im")
        for i in range(grid.shape[0]):
            for j in range(grid.shape[0]):
                lines.append(
                    ",".join(
                        (
                            _FMT % grid[i],
                            _FMT % grid[j],
                            _FMT % result[i, j].real,
                            _FMT % result[i, j].imag,
                        )
                    )
                )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _range_triple(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:COUNT, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fewphoton",
        description="few-photon scattering amplitudes for waveguide-coupled systems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="effective eigenvalues per excitation manifold")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, required=True, help="highest manifold to include")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("one-photon", help="one-photon S-matrix sweep over momentum")
    p.add_argument("--config", required=True)
    p.add_argument("--kmin", type=float, required=True)
    p.add_argument("--kmax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_one_photon)

    p = sub.add_parser("gmap", help="two-photon |G|^2 map over (dk, dp)")
    p.add_argument("--config", required=True)
    p.add_argument("--channels", required=True, help="OUT:IN pairs, e.g. RR:LL")
    p.add_argument(
        "--etotal",
        required=True,
        help="total energy: a number, 'lowest-pair' or 'highest-pair'",
    )
    p.add_argument("--dk", type=_range_triple, required=True, metavar="MIN:MAX:COUNT")
    p.add_argument("--dp", type=_range_triple, required=True, metavar="MIN:MAX:COUNT")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gmap)

    p = sub.add_parser("peaks", help="detect strict local maxima in a gmap CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_peaks)

    p = sub.add_parser("diagrams", help="enumerate scattering diagrams")
    p.add_argument("--m", type=int, required=True, help="photon pairs (2m operators)")
    p.add_argument("--cap", type=int, default=None, help="excitation ceiling")
    p.set_defaults(func=_cmd_diagrams)

    p = sub.add_parser(
        "scatter-wavepacket", help="scatter Gaussian wavepackets, sample the output"
    )
    p.add_argument("--config", required=True)
    p.add_argument("--in-spec", dest="in_spec", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_scatter)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (DefectiveHamiltonian, NonFinite, InstabilityDetected, GridTooCoarse) as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
