"""Excitation-number manifolds and the operator blocks that act on them.

A system is declared as an ordered list of modes (two-level or bosonic),
a list of hopping terms, and a list of waveguide ports. Everything built
here conserves the total excitation number, so operators are stored as
dense blocks that either act within one fixed-excitation manifold
(Hamiltonians) or map a manifold to the one below it (annihilation and
port operators). Two-level modes are treated as hard-core bosons: the
matrix elements coincide with the spin-lowering ones for every
number-conserving Hamiltonian handled here.

Port couplings are specified as decay rates gamma; a port term stores
the amplitude sqrt(gamma) that multiplies the mode's annihilation
operator. (The underlying waveguide coupling xi with gamma = 2*pi*xi**2
is never needed explicitly.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

TWO_LEVEL = "two-level"
BOSON = "boson"


@dataclass(frozen=True)
class ModeSpec:
    """One mode of the array.

    ``kind`` is ``"two-level"`` or ``"boson"``. ``kerr`` is the on-site
    interaction energy U (ignored for two-level modes, where double
    occupation is impossible anyway). ``loss`` is a nonnegative
    free-space decay rate that enters the effective Hamiltonian as
    -i*loss/2 per excitation without any port collecting the photons.
    """

    kind: str
    frequency: float
    kerr: float = 0.0
    loss: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (TWO_LEVEL, BOSON):
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if not math.isfinite(self.frequency):
            raise ValueError("mode frequency must be finite")
        if not (self.loss >= 0.0 and math.isfinite(self.loss)):
            raise ValueError("free-space loss must be finite and nonnegative")
        if self.kind == TWO_LEVEL:
            object.__setattr__(self, "kerr", 0.0)


@dataclass(frozen=True)
class Hop:
    """Symmetric hopping term strength * (a_i^dag a_j + a_j^dag a_i)."""

    i: int
    j: int
    strength: float

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise ValueError("a hop must connect two distinct modes")


@dataclass(frozen=True)
class Port:
    """A waveguide channel collapsing onto one collective mode operator.

    ``terms`` maps mode indices to real nonnegative amplitudes sqrt(gamma);
    the port operator is P = sum_j amp_j * a_j.
    """

    label: str
    terms: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        terms = tuple((int(j), float(a)) for j, a in self.terms)
        if not terms:
            raise ValueError(f"port {self.label!r} needs at least one term")
        for _, amp in terms:
            if not (amp >= 0.0 and math.isfinite(amp)):
                raise ValueError(f"port {self.label!r} has an invalid amplitude")
        object.__setattr__(self, "terms", terms)


@dataclass(frozen=True)
class SystemSpec:
    """Declarative description of modes, hops, and ports."""

    modes: tuple[ModeSpec, ...]
    hops: tuple[Hop, ...] = ()
    ports: tuple[Port, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "hops", tuple(self.hops))
        object.__setattr__(self, "ports", tuple(self.ports))
        if not self.modes:
            raise ValueError("a system needs at least one mode")
        if not self.ports:
            raise ValueError("a system needs at least one port")
        nmodes = len(self.modes)
        for hop in self.hops:
            if not (0 <= hop.i < nmodes and 0 <= hop.j < nmodes):
                raise ValueError(f"hop ({hop.i}, {hop.j}) is out of range")
        labels = [p.label for p in self.ports]
        if len(set(labels)) != len(labels):
            raise ValueError("port labels must be unique")
        for port in self.ports:
            for j, _ in port.terms:
                if not 0 <= j < nmodes:
                    raise ValueError(f"port {port.label!r} references mode {j}")

    def port(self, label: str) -> Port:
        for p in self.ports:
            if p.label == label:
                return p
        raise KeyError(f"no port labeled {label!r}")

    @property
    def port_labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.ports)

    def max_gamma(self) -> float:
        """Largest single-term decay rate over all ports (sets the eta scale)."""
        return max((amp * amp for p in self.ports for _, amp in p.terms), default=0.0)


def excitation_cap(spec: SystemSpec, m: int) -> int:
    """Highest excitation level reachable during an m-photon process.

    Bosonic modes absorb any number of photons, so the cap is m itself;
    a purely two-level array saturates at one excitation per mode.
    """
    if any(mode.kind == BOSON for mode in spec.modes):
        return m
    return min(m, sum(1 for mode in spec.modes if mode.kind == TWO_LEVEL))


@dataclass(frozen=True)
class Manifold:
    """Basis of all occupation vectors with a fixed total excitation number."""

    n: int
    basis: tuple[tuple[int, ...], ...]
    index: dict = field(compare=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)


def _occupations(caps: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    """All occupation tuples under per-mode caps summing to `total`, in
    ascending lexicographic order."""

    def rec(prefix: tuple[int, ...], remaining: int, idx: int) -> Iterator[tuple[int, ...]]:
        if idx == len(caps) - 1:
            if remaining <= caps[idx]:
                yield prefix + (remaining,)
            return
        for v in range(min(caps[idx], remaining) + 1):
            yield from rec(prefix + (v,), remaining - v, idx + 1)

    if caps:
        yield from rec((), total, 0)
    elif total == 0:
        yield ()


def mode_caps(spec: SystemSpec, n: int, boson_cap: int | None = None) -> tuple[int, ...]:
    """Per-mode occupation caps for the n-excitation manifold.

    Bosonic occupation is naturally bounded by n (the total is conserved);
    ``boson_cap`` tightens that bound for truncation experiments and should
    normally be left as None.
    """
    bcap = n if boson_cap is None else min(boson_cap, n)
    return tuple(1 if m.kind == TWO_LEVEL else bcap for m in spec.modes)


def build_manifold(spec: SystemSpec, n: int, boson_cap: int | None = None) -> Manifold:
    """Enumerate the manifold with total excitation number n.

    The basis is ordered lexicographically on occupation vectors, which
    pins down eigenvector phases and output ordering everywhere
    downstream. An empty basis is legitimate (e.g. two excitations on a
    single two-level mode).
    """
    if n < 0:
        raise ValueError("excitation number must be nonnegative")
    basis = tuple(_occupations(mode_caps(spec, n, boson_cap), n))
    return Manifold(n=n, basis=basis, index={s: i for i, s in enumerate(basis)})


@dataclass(frozen=True)
class OperatorBlock:
    """Complex matrix mapping the `cols`-excitation manifold to `rows`."""

    rows: int
    cols: int
    entries: np.ndarray = field(compare=False)

    @property
    def dim(self) -> tuple[int, int]:
        return self.entries.shape


def _annihilation_entries(upper: Manifold, lower: Manifold, j: int) -> np.ndarray:
    mat = np.zeros((lower.dim, upper.dim), dtype=complex)
    for col, occ in enumerate(upper.basis):
        nj = occ[j]
        if nj == 0:
            continue
        target = occ[:j] + (nj - 1,) + occ[j + 1 :]
        row = lower.index.get(target)
        if row is not None:
            mat[row, col] = math.sqrt(nj)
    return mat


def annihilation_block(
    spec: SystemSpec, j: int, n: int, boson_cap: int | None = None
) -> OperatorBlock:
    """Matrix of a_j from the n-excitation manifold to the one below it."""
    if n < 1:
        raise ValueError("annihilation needs at least one excitation")
    upper = build_manifold(spec, n, boson_cap)
    lower = build_manifold(spec, n - 1, boson_cap)
    return OperatorBlock(rows=n - 1, cols=n, entries=_annihilation_entries(upper, lower, j))


def creation_block(
    spec: SystemSpec, j: int, n: int, boson_cap: int | None = None
) -> OperatorBlock:
    """Matrix of a_j^dag from the n-excitation manifold to the one above it."""
    ann = annihilation_block(spec, j, n + 1, boson_cap)
    return OperatorBlock(rows=n + 1, cols=n, entries=ann.entries.conj().T)


def port_block(
    spec: SystemSpec, port: str | Port, n: int, boson_cap: int | None = None
) -> OperatorBlock:
    """Port operator P = sum_j sqrt(gamma_j) a_j on the n-excitation manifold.

    This is the operator whose matrix elements enter every scattering
    amplitude for the given channel.
    """
    if isinstance(port, str):
        port = spec.port(port)
    upper = build_manifold(spec, n, boson_cap)
    lower = build_manifold(spec, n - 1, boson_cap)
    mat = np.zeros((lower.dim, upper.dim), dtype=complex)
    for j, amp in port.terms:
        if amp != 0.0:
            mat += amp * _annihilation_entries(upper, lower, j)
    return OperatorBlock(rows=n - 1, cols=n, entries=mat)


def effective_hamiltonian_block(
    spec: SystemSpec, n: int, boson_cap: int | None = None
) -> OperatorBlock:
    """Non-Hermitian effective Hamiltonian restricted to the n manifold.

    H_eff = H_sys - (i/2) sum_ports P^dag P - (i/2) sum_j loss_j a_j^dag a_j.
    The anti-Hermitian part is negative semidefinite by construction, and
    the vacuum block is exactly the 1x1 zero matrix.
    """
    man = build_manifold(spec, n, boson_cap)
    h = np.zeros((man.dim, man.dim), dtype=complex)
    for idx, occ in enumerate(man.basis):
        e = 0.0 + 0.0j
        for j, mode in enumerate(spec.modes):
            nj = occ[j]
            if nj:
                e += mode.frequency * nj + 0.5 * mode.kerr * nj * (nj - 1)
                e -= 0.5j * mode.loss * nj
        h[idx, idx] = e
    if n >= 1 and man.dim:
        lower = build_manifold(spec, n - 1, boson_cap)
        ann = [
            _annihilation_entries(man, lower, j) for j in range(len(spec.modes))
        ]
        for hop in spec.hops:
            hop_op = ann[hop.i].conj().T @ ann[hop.j]
            h += hop.strength * (hop_op + hop_op.conj().T)
        for port in spec.ports:
            p = sum(amp * ann[j] for j, amp in port.terms if amp != 0.0)
            if not np.isscalar(p):
                h -= 0.5j * (p.conj().T @ p)
    return OperatorBlock(rows=n, cols=n, entries=h)
