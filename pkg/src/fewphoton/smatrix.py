"""Assemble S-matrix elements from connected amplitudes.

The n-photon S-matrix splits into a sum over partitions of the photons into
clusters: each 1-cluster contributes a full one-photon factor (identity delta
plus connected 2-point part) and each larger cluster contributes a connected
2m-point amplitude with a single overall momentum-conservation delta. This
module enumerates those terms, evaluates the physically interesting pieces on
momentum grids, and folds everything against Gaussian wavepackets so the
deltas never need a numerical representation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import GridTooCoarse
from .fockspace import SystemSpec
from .greens import connected_batch
from .spectral import Spectrum

# Quadrature controls for wavepacket outputs: Gauss-Legendre nodes per panel,
# the window half-width in units of the combined Gaussian width, and a cap on
# the total node count so pathological scale ratios degrade gracefully
# instead of exploding.
_GL_NODES = 16
_WINDOW_SIGMAS = 12.0
_MAX_PANELS = 512

# Quadrature nodes this close to an output momentum (in units of the
# integrand's feature scale) are pushed to the band edge. The regularized
# propagator average degrades in a narrow ring around each coincidence
# (clean exactly on it, clean well outside it), while the connected
# amplitude is smooth there, so the shift costs only ordinary quadrature
# error.
_COINCIDENCE_MARGIN = 0.03

# An output grid must sample the narrowest wavepacket at least this densely.
POINTS_PER_SIGMA = 8


@dataclass(frozen=True)
class SMatrixTerm:
    """One term of the cluster expansion of the n-photon S-matrix.

    ``clusters`` pairs input photon indices with output photon indices; a
    cluster ``((0, 1), (2, 0))`` scatters inputs 0 and 1 into outputs 2 and 0
    through the connected 4-point amplitude, while a 1-cluster ``((2,), (1,))``
    carries the full one-photon factor (identity plus connected) and a
    delta(p_1 - k_2).
    """

    clusters: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        ins: list[int] = []
        outs: list[int] = []
        for cluster in self.clusters:
            if len(cluster) != 2:
                raise ValueError("each cluster must pair inputs with outputs")
            cin, cout = cluster
            if len(cin) != len(cout) or not cin:
                raise ValueError("cluster input and output sizes must match and be >= 1")
            ins.extend(cin)
            outs.extend(cout)
        n = len(ins)
        if sorted(ins) != list(range(n)) or sorted(outs) != list(range(n)):
            raise ValueError("clusters must partition the photon indices exactly")

    @property
    def n(self) -> int:
        return sum(len(cin) for cin, _ in self.clusters)

    @property
    def fully_elastic(self) -> bool:
        return all(len(cin) == 1 for cin, _ in self.clusters)


def _set_partitions(items: tuple[int, ...]):
    """Yield all partitions of ``items`` into unordered blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [(first,)] + part
        for i, block in enumerate(part):
            merged = tuple(sorted((first,) + block))
            yield part[:i] + [merged] + part[i + 1 :]


def cluster_terms(n: int) -> list[SMatrixTerm]:
    """Enumerate every term of the n-photon cluster expansion, n <= 3.

    The count is 1 for one photon, 3 for two (two elastic pairings plus the
    connected part) and 16 for three (6 fully elastic, 9 mixed, 1 fully
    connected). Terms are returned in a fixed deterministic order.
    """
    if not 1 <= n <= 3:
        raise ValueError("cluster assembly is implemented for 1 to 3 photons")
    indices = tuple(range(n))
    terms = []
    for in_part in _set_partitions(indices):
        in_blocks = sorted(in_part, key=lambda b: (len(b), b))
        sizes = [len(b) for b in in_blocks]
        for out_part in _set_partitions(indices):
            out_blocks = sorted(out_part, key=lambda b: (len(b), b))
            if [len(b) for b in out_blocks] != sizes:
                continue
            # Match blocks of equal size in every possible way; distinct
            # matchings carry distinct delta structures.
            for perm in itertools.permutations(range(len(out_blocks))):
                if any(sizes[i] != len(out_blocks[perm[i]]) for i in range(len(sizes))):
                    continue
                clusters = tuple(
                    sorted(
                        (in_blocks[i], out_blocks[perm[i]])
                        for i in range(len(in_blocks))
                    )
                )
                term = SMatrixTerm(clusters)
                if term not in terms:
                    terms.append(term)
    terms.sort(key=lambda t: (len(t.clusters), t.clusters), reverse=True)
    return terms


def one_photon_S(
    spec: SystemSpec,
    spectra: Mapping[int, Spectrum],
    out_channel: str,
    in_channel: str,
    k,
    boson_cap: int | None = None,
):
    """One-photon S-matrix coefficient of delta(p - k).

    The identity delta contributes only when the photon stays in its own
    channel, so the value is ``[out == in] + G(k)`` with G the connected
    2-point amplitude. ``k`` may be a scalar or an array.
    """
    karr = np.atleast_1d(np.asarray(k, dtype=float))
    kmat = karr[:, None]
    values = connected_batch(
        spec, spectra, (in_channel,), (out_channel,), kmat, kmat, boson_cap=boson_cap
    )
    if out_channel == in_channel:
        values = values + 1.0
    if np.ndim(k) == 0:
        return complex(values[0])
    return values.reshape(np.shape(k))


def two_photon_density(
    spec: SystemSpec,
    spectra: Mapping[int, Spectrum],
    channels: tuple[Sequence[str], Sequence[str]],
    e_total: float,
    dk,
    dp,
    eta: float | None = None,
    boson_cap: int | None = None,
):
    """Squared magnitude of the connected two-photon amplitude, on shell.

    Momenta are parameterized by the total energy and the differences:
    k_1,2 = (e_total +/- dk)/2 and p_1,2 = (e_total +/- dp)/2. ``channels``
    is a pair (output labels, input labels), each of length two. ``dk`` and
    ``dp`` broadcast against each other.
    """
    out_pair, in_pair = channels
    dk_arr, dp_arr = np.broadcast_arrays(
        np.asarray(dk, dtype=float), np.asarray(dp, dtype=float)
    )
    shape = dk_arr.shape
    dk_flat = dk_arr.reshape(-1)
    dp_flat = dp_arr.reshape(-1)
    kmat = 0.5 * np.stack([e_total + dk_flat, e_total - dk_flat], axis=1)
    pmat = 0.5 * np.stack([e_total + dp_flat, e_total - dp_flat], axis=1)
    values = connected_batch(
        spec, spectra, tuple(in_pair), tuple(out_pair), kmat, pmat,
        eta=eta, boson_cap=boson_cap,
    )
    density = np.abs(values) ** 2
    if shape == ():
        return float(density[0])
    return density.reshape(shape)


def two_photon_grid(
    spec: SystemSpec,
    spectra: Mapping[int, Spectrum],
    channels: tuple[Sequence[str], Sequence[str]],
    e_total: float,
    dks,
    dps,
    eta: float | None = None,
    boson_cap: int | None = None,
    chunk: int = 1 << 15,
) -> np.ndarray:
    """Two-photon density on the full (dk, dp) product grid.

    Returns an array of shape ``(len(dks), len(dps))`` with rows indexed by
    dk. Work is chunked so memory stays bounded on large grids; the chunk
    boundaries do not affect the values.
    """
    dks = np.asarray(dks, dtype=float)
    dps = np.asarray(dps, dtype=float)
    dk_mesh, dp_mesh = np.meshgrid(dks, dps, indexing="ij")
    dk_flat = dk_mesh.reshape(-1)
    dp_flat = dp_mesh.reshape(-1)
    out = np.empty(dk_flat.shape[0], dtype=float)
    for start in range(0, dk_flat.shape[0], chunk):
        stop = min(start + chunk, dk_flat.shape[0])
        out[start:stop] = two_photon_density(
            spec, spectra, channels, e_total,
            dk_flat[start:stop], dp_flat[start:stop],
            eta=eta, boson_cap=boson_cap,
        )
    return out.reshape(dks.shape[0], dps.shape[0])


@dataclass(frozen=True)
class Wavepacket:
    """Normalized Gaussian single-photon amplitude in one channel.

    The momentum amplitude is (2 pi width^2)^(-1/4) exp(-(k - center)^2 /
    (4 width^2)), which has unit L2 norm.
    """

    channel: str
    center: float
    width: float

    def __post_init__(self) -> None:
        if not (self.width > 0.0 and math.isfinite(self.width)):
            raise ValueError("wavepacket width must be positive and finite")
        if not math.isfinite(self.center):
            raise ValueError("wavepacket center must be finite")

    def amplitude(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        norm = (2.0 * math.pi * self.width**2) ** -0.25
        return norm * np.exp(-((k - self.center) ** 2) / (4.0 * self.width**2))

    def overlap(self, other: "Wavepacket") -> float:
        """L2 inner product with another Gaussian, zero across channels."""
        if self.channel != other.channel:
            return 0.0
        s1, s2 = self.width, other.width
        ssum = s1 * s1 + s2 * s2
        gap = self.center - other.center
        return math.sqrt(2.0 * s1 * s2 / ssum) * math.exp(-(gap * gap) / (4.0 * ssum))


def _check_grid(grid: np.ndarray, inputs: Sequence[Wavepacket]) -> None:
    if grid.ndim != 1 or grid.shape[0] < 2:
        raise ValueError("output grid must be a 1d array with at least two points")
    spacing = np.diff(grid)
    if np.any(spacing <= 0.0):
        raise ValueError("output grid must be strictly increasing")
    narrowest = min(w.width for w in inputs)
    if np.max(spacing) > narrowest / POINTS_PER_SIGMA:
        raise GridTooCoarse(
            f"grid spacing {np.max(spacing):.3g} exceeds width/"
            f"{POINTS_PER_SIGMA} = {narrowest / POINTS_PER_SIGMA:.3g}; "
            "the output would alias the narrowest wavepacket"
        )


def _connected_window(
    spectra: Mapping[int, Spectrum], sigma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature offsets and weights for the connected-part integral.

    The integrand is a Gaussian of width ``sigma`` times an amplitude whose
    sharpest features have the scale of the smallest single-excitation decay
    width, so panels are sized to the smaller of the two and span a fixed
    multiple of the Gaussian width.
    """
    widths = np.abs(spectra[1].eigenvalues.imag)
    finest = float(np.min(widths[widths > 0.0])) if np.any(widths > 0.0) else sigma
    scale = min(sigma, finest)
    half = _WINDOW_SIGMAS * sigma
    panels = min(_MAX_PANELS, max(8, int(math.ceil(2.0 * half / scale))))
    nodes, weights = np.polynomial.legendre.leggauss(_GL_NODES)
    edges = np.linspace(-half, half, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half_widths = 0.5 * np.diff(edges)
    offsets = (mids[:, None] + half_widths[:, None] * nodes[None, :]).reshape(-1)
    wts = (half_widths[:, None] * weights[None, :]).reshape(-1)
    return offsets, wts, scale


def _nudge_off_coincidences(knode, bad_points, margin):
    """Push quadrature nodes out of the degraded ring around each pole.

    A node exactly on an output momentum evaluates cleanly and one far away
    does too, but in between the averaged complex shift mis-cancels the
    vacuum pole terms. The amplitude being integrated is smooth across the
    whole neighborhood, so moving an offending node to distance ``margin``
    is safe.
    """
    for bad in bad_points:
        gap = knode - bad
        close = np.abs(gap) < margin
        if np.any(close):
            shifted = bad + np.where(gap >= 0.0, margin, -margin)
            knode = np.where(close, shifted, knode)
    return knode


def _one_photon_column(spec, spectra, out_channel, packet, grid, boson_cap):
    filtered = one_photon_S(
        spec, spectra, out_channel, packet.channel, grid, boson_cap=boson_cap
    )
    return filtered * packet.amplitude(grid)


def wavepacket_output(
    spec: SystemSpec,
    spectra: Mapping[int, Spectrum],
    inputs: Sequence[Wavepacket],
    out_channels: Sequence[str],
    grid,
    eta: float | None = None,
    boson_cap: int | None = None,
) -> np.ndarray:
    """Scatter one or two Gaussian wavepackets and sample the output.

    For one photon the result is the 1d amplitude on ``grid`` in the
    requested output channel. For two photons it is the 2d joint amplitude
    f(p_i, p_j) on the grid square for the ordered output channel pair,
    normalized so that (1/2) sum over channel pairs of the double integral
    of |f|^2 is the output probability (1 for lossless systems).

    Raises:
        GridTooCoarse: when the grid cannot resolve the narrowest input.
    """
    grid = np.asarray(grid, dtype=float)
    if len(inputs) not in (1, 2):
        raise ValueError("wavepacket scattering is implemented for one or two photons")
    if len(out_channels) != len(inputs):
        raise ValueError("need one output channel per photon")
    _check_grid(grid, inputs)

    if len(inputs) == 1:
        return _one_photon_column(
            spec, spectra, out_channels[0], inputs[0], grid, boson_cap
        )

    first, second = inputs
    d1, d2 = out_channels
    norm = 1.0 / math.sqrt(1.0 + first.overlap(second) ** 2)

    # Elastic part: symmetrized product of independently filtered photons.
    u1_d1 = _one_photon_column(spec, spectra, d1, first, grid, boson_cap)
    u2_d2 = _one_photon_column(spec, spectra, d2, second, grid, boson_cap)
    u2_d1 = _one_photon_column(spec, spectra, d1, second, grid, boson_cap)
    u1_d2 = _one_photon_column(spec, spectra, d2, first, grid, boson_cap)
    elastic = u1_d1[:, None] * u2_d2[None, :] + u2_d1[:, None] * u1_d2[None, :]

    # Connected part: for each output point the energy is fixed, leaving a
    # single quadrature over how it splits between the incoming photons.
    sigma = first.width * second.width / math.sqrt(first.width**2 + second.width**2)
    offsets, wts, scale = _connected_window(spectra, sigma)
    n = grid.shape[0]
    q = offsets.shape[0]
    e_tot = grid[:, None] + grid[None, :]
    w1, w2 = 1.0 / first.width**2, 1.0 / second.width**2
    mu = (first.center * w1 + (e_tot - second.center) * w2) / (w1 + w2)
    knode = mu[:, :, None] + offsets[None, None, :]
    knode = _nudge_off_coincidences(
        knode,
        (grid[:, None, None], grid[None, :, None]),
        _COINCIDENCE_MARGIN * scale,
    )
    amp_in = first.amplitude(knode) * second.amplitude(e_tot[:, :, None] - knode)

    kmat = np.stack(
        [knode.reshape(-1), (e_tot[:, :, None] - knode).reshape(-1)], axis=1
    )
    pmat = np.stack(
        [
            np.broadcast_to(grid[:, None, None], (n, n, q)).reshape(-1),
            np.broadcast_to(grid[None, :, None], (n, n, q)).reshape(-1),
        ],
        axis=1,
    )
    values = np.empty(kmat.shape[0], dtype=complex)
    step = 1 << 15
    for start in range(0, kmat.shape[0], step):
        stop = min(start + step, kmat.shape[0])
        values[start:stop] = connected_batch(
            spec, spectra,
            (first.channel, second.channel), (d1, d2),
            kmat[start:stop], pmat[start:stop],
            eta=eta, boson_cap=boson_cap,
        )
    connected = np.sum(values.reshape(n, n, q) * amp_in * wts[None, None, :], axis=2)

    return norm * (elastic + connected)
