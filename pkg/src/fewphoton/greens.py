"""Connected 2m-point scattering amplitudes from diagram evaluation.

Each diagram is walked as a chain: starting from the vacuum, every step
applies a port operator (creation for an input photon, annihilation for
an output photon) and every gap between steps applies the resolvent
1/(K - H_eff) of the effective Hamiltonian at the current excitation
level, where K is the running sum of absorbed minus emitted momenta.
Resolvents are applied in the eigenbasis (one division per eigenvalue),
which is algebraically identical to summing over eigenstate tuples with
Lehmann weights but costs O(dim^2) per segment instead of growing with
the number of segments.

Vacuum crossings make some denominators vanish on the real momentum
shell; the pole is resolved by evaluating the whole assignment sum at
momenta pushed slightly off the real axis and averaging the two shift
signs, see `vacuum_pole_value`. The returned value is the coefficient
of the overall momentum-conservation delta and includes the
-i/(2*pi)**(m-1) prefactor and all coupling amplitudes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .diagrams import Diagram, enumerate_diagrams
from .errors import InstabilityDetected, NonFinite
from .fockspace import SystemSpec, excitation_cap, port_block
from .spectral import Spectrum, decompose_all

# A propagator denominator below this magnitude is treated as an exact
# pole; whether that is fatal depends on the weight sitting on it.
DENOM_EPS = 1e-12
# Eigencomponents this far (relatively) below the largest one are dropped
# before dividing, so dark states never produce 0/0.
WEIGHT_EPS = 1e-13
SHELL_RTOL = 1e-9
DEFAULT_M_LIMIT = 4


@dataclass(frozen=True)
class ScatterConfig:
    """One on-shell scattering configuration: m inputs and m outputs,
    each a (channel, momentum) pair."""

    in_channels: tuple[str, ...]
    out_channels: tuple[str, ...]
    k: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "in_channels", tuple(self.in_channels))
        object.__setattr__(self, "out_channels", tuple(self.out_channels))
        object.__setattr__(self, "k", tuple(float(x) for x in self.k))
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        m = len(self.k)
        if m < 1:
            raise ValueError("at least one photon is required")
        if not (len(self.p) == len(self.in_channels) == len(self.out_channels) == m):
            raise ValueError("channel and momentum lists must share one length m")

    @property
    def m(self) -> int:
        return len(self.k)


@dataclass(frozen=True)
class ConnectedAmplitude:
    """Coefficient of delta(sum k - sum p) for one configuration."""

    value: complex
    m: int


def default_eta(spec: SystemSpec) -> float:
    """Default off-axis shift magnitude: 1e-6 times the largest decay rate."""
    gamma = spec.max_gamma()
    return 1e-6 * (gamma if gamma > 0.0 else 1.0)


def shift_patterns(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-photon shift directions (inputs, outputs) used to push momenta
    off the real axis.

    Both patterns sum to the same value, so the complexified momenta stay
    exactly on shell, and no equal-size subset of inputs shares a sum
    with a subset of outputs, so every mid-path vacuum denominator keeps
    a nonzero imaginary part.
    """
    if m == 1:
        return np.array([1.0]), np.array([1.0])
    if m == 2:
        return np.array([1.0, 2.0]), np.array([1.3, 1.7])
    if m == 3:
        return np.array([1.0, 2.0, 3.0]), np.array([1.25, 2.5, 2.25])
    base = np.arange(1.0, m + 1.0)
    # Zero-sum offsets built from distinct powers of two: every proper
    # subset of them has a nonzero sum, so no equal-size subset collision
    # with the integer base sums is possible. A symmetric construction
    # would pair complementary offsets to exactly zero and collide.
    delta = np.append(2.0 ** np.arange(m - 1), -(2.0 ** (m - 1) - 1.0))
    zeta = base + (0.35 / 2.0 ** (m - 1)) * delta
    _validate_patterns(base, zeta)
    return base, zeta


def _validate_patterns(xi: np.ndarray, zeta: np.ndarray) -> None:
    m = len(xi)
    if abs(xi.sum() - zeta.sum()) > 1e-12 * m:
        raise AssertionError("shift patterns must be balanced")
    subset_sums: dict[int, tuple[list[float], list[float]]] = {
        size: ([], []) for size in range(1, m)
    }
    for mask in range(1, 2**m - 1):
        idx = [i for i in range(m) if mask >> i & 1]
        subset_sums[len(idx)][0].append(float(xi[idx].sum()))
        subset_sums[len(idx)][1].append(float(zeta[idx].sum()))
    for size, (a, b) in subset_sums.items():
        gap = np.min(np.abs(np.subtract.outer(a, b)))
        if gap < 1e-3:
            raise AssertionError(
                f"shift pattern subset sums of size {size} nearly collide (gap {gap:.2e})"
            )


def _require_on_shell(ksum: np.ndarray, psum: np.ndarray, scale: float) -> None:
    gap = np.max(np.abs(ksum - psum))
    if gap > SHELL_RTOL * scale:
        raise ValueError(
            f"momenta are off shell by {gap:.3e} (tolerance {SHELL_RTOL * scale:.3e}); "
            "connected amplitudes are defined only at sum(k) == sum(p)"
        )


class _Engine:
    """Port-operator blocks pre-rotated into the eigenbases of adjacent
    manifolds, shared across every diagram walk for one system."""

    def __init__(self, spec: SystemSpec, spectra: dict[int, Spectrum], cap: int,
                 boson_cap: int | None = None):
        self.spectra = spectra
        for n in range(cap + 1):
            if n not in spectra:
                raise ValueError(f"spectrum for manifold {n} is missing")
        self._raw: dict[tuple[str, int], np.ndarray] = {}
        self._maps: dict[tuple[str, int, int], np.ndarray] = {}
        self._spec = spec
        self._boson_cap = boson_cap

    def eigenvalues(self, level: int) -> np.ndarray:
        return self.spectra[level].eigenvalues

    def _port_matrix(self, label: str, n: int) -> np.ndarray:
        key = (label, n)
        if key not in self._raw:
            self._raw[key] = port_block(self._spec, label, n, self._boson_cap).entries
        return self._raw[key]

    def step_map(self, label: str, level_from: int, level_to: int) -> np.ndarray:
        """L_next @ Op @ R_prev for a single creation or annihilation step."""
        key = (label, level_from, level_to)
        if key not in self._maps:
            if level_to == level_from + 1:
                op = self._port_matrix(label, level_to).conj().T
            elif level_to == level_from - 1:
                op = self._port_matrix(label, level_from)
            else:
                raise ValueError("steps change the level by exactly one")
            left = self.spectra[level_to].left
            right = self.spectra[level_from].right
            self._maps[key] = left @ op @ right
        return self._maps[key]


def _resolve(coeff: np.ndarray, denom: np.ndarray) -> np.ndarray:
    """Divide eigencomponents by propagator denominators, dropping
    negligible components and flagging genuine on-pole weight."""
    mags = np.abs(coeff)
    colmax = mags.max(axis=0)
    negligible = mags <= WEIGHT_EPS * colmax[None, :]
    hit = np.abs(denom) < DENOM_EPS
    bad = hit & ~negligible
    if bad.any():
        where = np.argwhere(bad)[0]
        raise NonFinite(
            f"propagator denominator {denom[tuple(where)]:.3e} vanished under a "
            "non-negligible weight; evaluate through the pole-averaged path "
            "or move off the singular momentum surface"
        )
    safe = np.where(negligible | hit, 1.0, denom)
    return np.where(negligible, 0.0, coeff / safe)


def _walk_diagram(
    engine: _Engine,
    diagram: Diagram,
    up_channels: tuple[str, ...],
    down_channels: tuple[str, ...],
    kup: np.ndarray,
    pdn: np.ndarray,
) -> np.ndarray:
    """Amplitude of one diagram under one momentum assignment.

    kup, pdn: complex arrays of shape (B, m); column i carries the
    momentum assigned to the i-th up (down) arrow in time order.
    """
    nbatch = kup.shape[0]
    vec = np.ones((1, nbatch), dtype=complex)
    running = np.zeros(nbatch, dtype=complex)
    level = 0
    iu = idn = 0
    last = len(diagram.steps) - 1
    for j, step in enumerate(diagram.steps):
        if step > 0:
            mat = engine.step_map(up_channels[iu], level, level + 1)
            running = running + kup[:, iu]
            iu += 1
            level += 1
        else:
            mat = engine.step_map(down_channels[idn], level, level - 1)
            running = running - pdn[:, idn]
            idn += 1
            level -= 1
        vec = mat @ vec
        if j < last:
            denom = running[None, :] - engine.eigenvalues(level)[:, None]
            vec = _resolve(vec, denom)
    return vec[0]


def _assignment_sum(
    engine: _Engine,
    diagram: Diagram,
    in_channels: tuple[str, ...],
    out_channels: tuple[str, ...],
    kmat: np.ndarray,
    pmat: np.ndarray,
) -> np.ndarray:
    """Sum over all m! x m! momentum-to-arrow assignments, channels
    traveling with their momenta. Iteration order is fixed, so repeated
    evaluations are bit-identical."""
    m = len(in_channels)
    total = np.zeros(kmat.shape[0], dtype=complex)
    for sigma in permutations(range(m)):
        chan_up = tuple(in_channels[s] for s in sigma)
        kup = kmat[:, list(sigma)]
        for tau in permutations(range(m)):
            chan_dn = tuple(out_channels[t] for t in tau)
            total += _walk_diagram(engine, diagram, chan_up, chan_dn,
                                   kup, pmat[:, list(tau)])
    return total


def _prefactor(m: int) -> complex:
    return -1j / (2.0 * np.pi) ** (m - 1)


def vacuum_pole_value(evaluate, eta: float, check: bool = False,
                      rel_tol: float = 1e-4, floor: float = 0.0):
    """Limit value of a pole-crossing assignment sum.

    ``evaluate`` maps a signed shift magnitude to the amplitude (scalar
    or array) with all momenta complexified along the balanced shift
    patterns. Averaging the two signs cancels the term linear in the
    shift, leaving an error quadratic in eta; the delta-like part of the
    distribution does not belong to the connected amplitude and drops
    out of the average by antisymmetry.

    With ``check=True`` the evaluation is repeated at eta/2 and a
    relative disagreement beyond ``rel_tol`` raises InstabilityDetected;
    ``floor`` suppresses the check where the amplitude itself is
    negligibly small (legitimately zero maps would otherwise trip on
    roundoff noise).
    """
    value = 0.5 * (evaluate(eta) + evaluate(-eta))
    if check:
        halved = 0.5 * (evaluate(eta / 2.0) + evaluate(-eta / 2.0))
        scale = np.maximum(np.maximum(np.abs(value), np.abs(halved)), floor)
        diff = np.abs(value - halved)
        bad = diff > rel_tol * scale
        if np.any(bad):
            worst = float(np.max(np.where(scale > 0, diff / np.maximum(scale, 1e-300), 0.0)))
            raise InstabilityDetected(
                f"halving the pole shift changed the amplitude by a relative "
                f"{worst:.3e} (tolerance {rel_tol:.0e}); an uncancelled pole "
                "suggests an off-shell call or a genuinely singular point"
            )
    return value


def _amplitude_floor(spec: SystemSpec, m: int) -> float:
    """Absolute scale below which amplitudes count as numerically zero."""
    gamma = max(spec.max_gamma(), 1e-300)
    return 1e-14 / ((2.0 * np.pi) ** (m - 1) * gamma ** (m - 1))


def _canonicalize(channels: tuple[str, ...], mom: np.ndarray):
    """Sort (channel, momentum) pairs per row, channels first. Channels
    end up identical across rows, so the engine sees one channel layout;
    the sort makes Bose symmetry of the result exact rather than
    approximate."""
    code_of = {c: i for i, c in enumerate(sorted(set(channels)))}
    codes = np.tile([code_of[c] for c in channels], (mom.shape[0], 1))
    order = np.argsort(mom, axis=1, kind="stable")
    codes = np.take_along_axis(codes, order, axis=1)
    mom = np.take_along_axis(mom, order, axis=1)
    outer = np.argsort(codes, axis=1, kind="stable")
    mom = np.take_along_axis(mom, outer, axis=1)
    return tuple(sorted(channels)), mom


# Gaps between an input and an output momentum below this fraction of the
# momentum scale are rounding debris, not physics.
_SNAP_RTOL = 1e-12


def _snap_coincidences(kmat: np.ndarray, pmat: np.ndarray, scale: float):
    """Replace input momenta a few ulp from an output momentum by it exactly.

    Exactly coincident momenta cancel their vacuum pole terms cleanly in
    the averaged evaluation, but a gap of rounding size (for example
    ``k2 = e_total - k1`` reconstructing one of the outputs) lands in the
    regime where that cancellation is worst. Aligning such momenta bitwise
    restores the clean case without moving anything physically.
    """
    gaps = np.abs(kmat[:, :, None] - pmat[:, None, :])
    nearest = np.take_along_axis(
        pmat, np.argmin(gaps, axis=2), axis=1
    )
    snap = np.abs(kmat - nearest) <= _SNAP_RTOL * scale
    if np.any(snap):
        kmat = np.where(snap, nearest, kmat)
    return kmat


def connected_batch(
    spec: SystemSpec,
    spectra: dict[int, Spectrum],
    in_channels: tuple[str, ...],
    out_channels: tuple[str, ...],
    kmat: np.ndarray,
    pmat: np.ndarray,
    eta: float | None = None,
    check_eta: bool = False,
    boson_cap: int | None = None,
) -> np.ndarray:
    """Connected amplitudes for a batch of on-shell configurations.

    kmat and pmat have shape (B, m); row b is one configuration. All
    rows share the channel tuples. Returns a length-B complex array.

    Accuracy note: the pole average converges quadratically in eta at
    generic momenta and exactly coincident input/output momenta are
    snapped and evaluate cleanly, but a configuration where some k sits
    within roughly [1e-10, 1e-2] * gamma of some p (without being equal)
    degrades like (eta / gap)**2. Integrators over momenta should keep
    their nodes off those rings; `wavepacket_output` does.
    """
    kmat = np.atleast_2d(np.asarray(kmat, dtype=float))
    pmat = np.atleast_2d(np.asarray(pmat, dtype=float))
    m = kmat.shape[1]
    if pmat.shape != kmat.shape:
        raise ValueError("input and output momentum arrays must match in shape")
    if m > DEFAULT_M_LIMIT:
        warnings.warn(
            f"m={m} exceeds the tested range (cost grows like (m!)^2); "
            "results are unchecked against closed forms",
            stacklevel=2,
        )
    labels = set(spec.port_labels)
    for ch in tuple(in_channels) + tuple(out_channels):
        if ch not in labels:
            raise ValueError(f"unknown channel {ch!r}")
    scale = max(1.0, float(np.max(np.abs(kmat))), float(np.max(np.abs(pmat))))
    _require_on_shell(kmat.sum(axis=1), pmat.sum(axis=1), scale)

    in_channels, kmat = _canonicalize(tuple(in_channels), kmat)
    out_channels, pmat = _canonicalize(tuple(out_channels), pmat)
    kmat = _snap_coincidences(kmat, pmat, scale)

    cap = excitation_cap(spec, m)
    engine = _Engine(spec, spectra, cap, boson_cap)
    diags = enumerate_diagrams(m, cap)

    def total_at(shift: float) -> np.ndarray:
        if shift == 0.0:
            ks, ps = kmat.astype(complex), pmat.astype(complex)
        else:
            xi, zeta = shift_patterns(m)
            ks = kmat + 1j * shift * xi[None, :]
            ps = pmat + 1j * shift * zeta[None, :]
        acc = np.zeros(kmat.shape[0], dtype=complex)
        for d in diags:
            acc += _assignment_sum(engine, d, in_channels, out_channels, ks, ps)
        return acc

    if m == 1:
        # The single two-point diagram never revisits the vacuum midway,
        # so there is no pole to resolve.
        return _prefactor(m) * total_at(0.0)

    if eta is None:
        eta = default_eta(spec)
    value = vacuum_pole_value(
        total_at, eta, check=check_eta,
        floor=_amplitude_floor(spec, m) / abs(_prefactor(m)),
    )
    return _prefactor(m) * value


def connected_green(
    spec: SystemSpec,
    spectra: dict[int, Spectrum],
    config: ScatterConfig,
    eta: float | None = None,
    check_eta: bool = False,
    boson_cap: int | None = None,
) -> ConnectedAmplitude:
    """Connected 2m-point amplitude for a single configuration."""
    value = connected_batch(
        spec, spectra,
        config.in_channels, config.out_channels,
        np.array([config.k]), np.array([config.p]),
        eta=eta, check_eta=check_eta, boson_cap=boson_cap,
    )
    return ConnectedAmplitude(value=complex(value[0]), m=config.m)


def evaluate_diagram(
    spec: SystemSpec,
    spectra: dict[int, Spectrum],
    diagram: Diagram,
    config: ScatterConfig,
    eta: float | None = None,
    boson_cap: int | None = None,
) -> complex:
    """Contribution of a single diagram, summed over all momentum
    assignments and including the -i/(2*pi)**(m-1) prefactor.

    ``eta=0`` evaluates directly at the real momenta and raises
    NonFinite on any vacuum pole; otherwise the patterned-shift average
    of `vacuum_pole_value` is applied (only meaningful for the full
    diagram sum when poles cancel across diagrams, but exact for
    diagrams whose poles cancel internally).
    """
    if diagram.m != config.m:
        raise ValueError("diagram size and configuration size disagree")
    scale = max(1.0, max(abs(x) for x in config.k + config.p))
    _require_on_shell(np.array(sum(config.k)), np.array(sum(config.p)), scale)
    cap = excitation_cap(spec, config.m)
    if diagram.max_level > cap:
        raise ValueError(
            f"diagram reaches level {diagram.max_level} but the system caps at {cap}"
        )
    engine = _Engine(spec, spectra, cap, boson_cap)
    kmat = np.array([config.k], dtype=float)
    pmat = np.array([config.p], dtype=float)

    def total_at(shift: float) -> np.ndarray:
        if shift == 0.0:
            ks, ps = kmat.astype(complex), pmat.astype(complex)
        else:
            xi, zeta = shift_patterns(config.m)
            ks = kmat + 1j * shift * xi[None, :]
            ps = pmat + 1j * shift * zeta[None, :]
        return _assignment_sum(engine, diagram, config.in_channels,
                               config.out_channels, ks, ps)

    if config.m == 1 or not diagram.touches_vacuum_midway():
        value = total_at(0.0)
    else:
        if eta is None:
            eta = default_eta(spec)
        value = total_at(0.0) if eta == 0.0 else vacuum_pole_value(total_at, eta)
    return complex(_prefactor(config.m) * value[0])
