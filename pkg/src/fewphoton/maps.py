"""Two-photon map jobs: deterministic CSV grids, read-back, peak detection.

A grid job fixes the system, the channel pairs, the total energy and the
(dk, dp) ranges, and produces rows of ``dk, dp, |G|^2`` under a metadata
header that embeds the full config. The header is sufficient to rebuild the
job, and identical jobs produce byte-identical files: coordinates and values
are printed with a fixed 12-significant-digit format and the rows follow the
grid in dk-major order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ._version import __version__
from .config import LoadedConfig, parse_config
from .errors import ConfigError
from .greens import default_eta
from .smatrix import two_photon_grid
from .spectral import decompose_all

_FMT = "%.11e"


def format_channels(out_pair: Sequence[str], in_pair: Sequence[str]) -> str:
    """Render channel pairs as OUT:IN, e.g. ``RR:LL`` or ``R,R:L,L``."""
    def side(labels: Sequence[str]) -> str:
        if all(len(lbl) == 1 for lbl in labels):
            return "".join(labels)
        return ",".join(labels)

    return f"{side(out_pair)}:{side(in_pair)}"


def parse_channels(text: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Parse OUT:IN channel syntax; single characters or comma-separated."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"channels must look like RR:LL, got {text!r}")

    def side(chunk: str) -> tuple[str, ...]:
        if not chunk:
            raise ConfigError(f"empty channel list in {text!r}")
        if "," in chunk:
            labels = tuple(chunk.split(","))
            if any(not lbl for lbl in labels):
                raise ConfigError(f"empty channel label in {text!r}")
            return labels
        return tuple(chunk)

    return side(parts[0]), side(parts[1])


@dataclass(frozen=True)
class GridJob:
    """Everything needed to compute one two-photon map."""

    config: LoadedConfig
    out_channels: tuple[str, str]
    in_channels: tuple[str, str]
    e_total: float
    dk: tuple[float, float, int]
    dp: tuple[float, float, int]
    eta: float | None = None
    out_path: str | Path | None = None

    def __post_init__(self) -> None:
        for name, rng in (("dk", self.dk), ("dp", self.dp)):
            start, stop, count = rng
            if count < 2:
                raise ValueError(f"{name} range needs at least 2 steps")
            if not (math.isfinite(start) and math.isfinite(stop)) or stop <= start:
                raise ValueError(f"{name} range must be finite and increasing")
        if not math.isfinite(self.e_total):
            raise ValueError("total energy must be finite")
        if len(self.out_channels) != 2 or len(self.in_channels) != 2:
            raise ValueError("two-photon maps need two input and two output labels")
        known = set(self.config.system.port_labels)
        for label in (*self.out_channels, *self.in_channels):
            if label not in known:
                raise ConfigError(
                    f"channel {label!r} is not a port of this system "
                    f"(ports: {sorted(known)})"
                )


def _axis(rng: tuple[float, float, int]) -> np.ndarray:
    return np.linspace(rng[0], rng[1], rng[2])


def run_gmap(job: GridJob) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate the job's grid and, if requested, write the CSV file.

    Returns (dk axis, dp axis, |G|^2 grid with dk-major rows).
    """
    spec = job.config.system
    spectra = decompose_all(spec, 2)
    eta = default_eta(spec) if job.eta is None else job.eta
    dks, dps = _axis(job.dk), _axis(job.dp)
    grid = two_photon_grid(
        spec, spectra, (job.out_channels, job.in_channels), job.e_total,
        dks, dps, eta=eta,
    )
    if job.out_path is not None:
        _write_csv(Path(job.out_path), job, eta, dks, dps, grid)
    return dks, dps, grid


def _write_csv(
    path: Path,
    job: GridJob,
    eta: float,
    dks: np.ndarray,
    dps: np.ndarray,
    grid: np.ndarray,
) -> None:
    lines = [
        f"# fewphoton-gmap {__version__}",
        f"# label: {job.config.label}",
        f"# units: {job.config.units}",
        f"# config: {json.dumps(job.config.source, sort_keys=True)}",
        f"# channels: {format_channels(job.out_channels, job.in_channels)}",
        f"# e_total: {job.e_total!r}",
        f"# eta: {eta!r}",
        f"# eta_override: {'none' if job.eta is None else repr(job.eta)}",
        f"# dk: {job.dk[0]!r} {job.dk[1]!r} {job.dk[2]}",
        f"# dp: {job.dp[0]!r} {job.dp[1]!r} {job.dp[2]}",
        "# columns: dk,dp,g2",
    ]
    rows = [
        ",".join(_FMT % v for v in (dks[i], dps[j], grid[i, j]))
        for i in range(dks.shape[0])
        for j in range(dps.shape[0])
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines + rows))
        handle.write("\n")


def read_gmap(path) -> tuple[dict[str, str], np.ndarray, np.ndarray, np.ndarray]:
    """Read a gmap CSV back into (metadata, dk axis, dp axis, grid)."""
    path = Path(path)
    meta: dict[str, str] = {}
    values = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ": " in body:
                key, _, val = body.partition(": ")
                meta[key] = val
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise ConfigError(f"{path}: malformed row {line!r}")
        try:
            values.append(tuple(float(f) for f in fields))
        except ValueError as exc:
            raise ConfigError(f"{path}: malformed row {line!r}") from exc
    for key in ("dk", "dp"):
        if key not in meta:
            raise ConfigError(f"{path}: missing '# {key}:' metadata")
    try:
        dk_parts = meta["dk"].split()
        dp_parts = meta["dp"].split()
        dk_rng = (float(dk_parts[0]), float(dk_parts[1]), int(dk_parts[2]))
        dp_rng = (float(dp_parts[0]), float(dp_parts[1]), int(dp_parts[2]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed range metadata") from exc
    nk, npts = dk_rng[2], dp_rng[2]
    if len(values) != nk * npts:
        raise ConfigError(
            f"{path}: expected {nk * npts} rows for a {nk}x{npts} grid, "
            f"found {len(values)}"
        )
    data = np.asarray(values, dtype=float)
    grid = data[:, 2].reshape(nk, npts)
    return meta, _axis(dk_rng), _axis(dp_rng), grid


def job_from_metadata(meta: Mapping[str, str], out_path=None) -> GridJob:
    """Rebuild the GridJob encoded in a gmap metadata header."""
    for key in ("config", "channels", "e_total", "eta_override", "dk", "dp"):
        if key not in meta:
            raise ConfigError(f"metadata is missing '{key}'")
    try:
        table = json.loads(meta["config"])
    except json.JSONDecodeError as exc:
        raise ConfigError(f"embedded config is not valid JSON: {exc}") from exc
    config = parse_config(table, origin="<embedded config>")
    out_pair, in_pair = parse_channels(meta["channels"])
    if len(out_pair) != 2 or len(in_pair) != 2:
        raise ConfigError("embedded channels are not a two-photon pair")
    dk_parts = meta["dk"].split()
    dp_parts = meta["dp"].split()
    eta_text = meta["eta_override"]
    return GridJob(
        config=config,
        out_channels=out_pair,
        in_channels=in_pair,
        e_total=float(meta["e_total"]),
        dk=(float(dk_parts[0]), float(dk_parts[1]), int(dk_parts[2])),
        dp=(float(dp_parts[0]), float(dp_parts[1]), int(dp_parts[2])),
        eta=None if eta_text == "none" else float(eta_text),
        out_path=out_path,
    )


@dataclass(frozen=True)
class PeakReport:
    """Strict local maxima of a map, with the detection settings used."""

    peaks: tuple[tuple[float, float, float], ...]
    threshold: float
    grid_shape: tuple[int, int]
    dk_range: tuple[float, float]
    dp_range: tuple[float, float]
    source: str

    def as_dict(self) -> dict:
        return {
            "peaks": [
                {"dk": dk, "dp": dp, "height": height}
                for dk, dp, height in self.peaks
            ],
            "threshold": self.threshold,
            "grid_shape": list(self.grid_shape),
            "dk_range": list(self.dk_range),
            "dp_range": list(self.dp_range),
            "source": self.source,
        }


def find_peaks_grid(
    dks: np.ndarray,
    dps: np.ndarray,
    grid: np.ndarray,
    threshold: float,
    source: str = "<array>",
) -> PeakReport:
    """Detect strict 8-neighborhood maxima above threshold * global max.

    Border rows and columns are excluded since their neighborhoods are
    incomplete. Peaks are sorted by height (descending), then coordinates.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.shape != (dks.shape[0], dps.shape[0]):
        raise ValueError("grid shape must match the dk and dp axes")
    cutoff = threshold * float(grid.max(initial=0.0))
    core = grid[1:-1, 1:-1]
    mask = core > cutoff
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neighbor = grid[1 + di : grid.shape[0] - 1 + di,
                            1 + dj : grid.shape[1] - 1 + dj]
            mask &= core > neighbor
    rows, cols = np.nonzero(mask)
    found = [
        (float(dks[i + 1]), float(dps[j + 1]), float(grid[i + 1, j + 1]))
        for i, j in zip(rows, cols)
    ]
    found.sort(key=lambda item: (-item[2], item[0], item[1]))
    return PeakReport(
        peaks=tuple(found),
        threshold=threshold,
        grid_shape=(int(grid.shape[0]), int(grid.shape[1])),
        dk_range=(float(dks[0]), float(dks[-1])),
        dp_range=(float(dps[0]), float(dps[-1])),
        source=source,
    )


def find_peaks(path, threshold: float) -> PeakReport:
    """Run peak detection on a gmap CSV file."""
    _, dks, dps, grid = read_gmap(path)
    return find_peaks_grid(dks, dps, grid, threshold, source=str(Path(path)))


def fwhm(xs: np.ndarray, profile: np.ndarray, peak_index: int) -> float:
    """Full width at half maximum of a 1d profile around one peak.

    Crossing points are located by linear interpolation on each side of the
    peak. Returns NaN when the profile does not fall below half maximum on
    both sides within the sampled range.
    """
    xs = np.asarray(xs, dtype=float)
    profile = np.asarray(profile, dtype=float)
    half = 0.5 * profile[peak_index]

    def cross(direction: int) -> float:
        i = peak_index
        while 0 <= i + direction < profile.shape[0]:
            j = i + direction
            if profile[j] <= half:
                frac = (profile[i] - half) / (profile[i] - profile[j])
                return float(xs[i] + frac * (xs[j] - xs[i]))
            i = j
        return math.nan

    left, right = cross(-1), cross(+1)
    return abs(right - left)
