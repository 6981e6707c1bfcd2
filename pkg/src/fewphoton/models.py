"""Reference systems and the closed-form results used to cross-check the engine.

Three builders assemble :class:`~fewphoton.fockspace.SystemSpec` objects for
standard setups: a single two-level emitter with a port on each side, a pair
of collocated two-level emitters sharing one port, and an open Bose-Hubbard
chain with ports on its end sites.

The ``tl_*``, ``coll_*`` and ``dimer_*`` functions evaluate known analytic
amplitudes, spectra and peak positions for those systems. They are written as
direct formula evaluations that share no code with the resolvent engine, so
the two computation paths stay independent and can be compared in tests.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DefectiveHamiltonian
from .fockspace import TWO_LEVEL, BOSON, Hop, ModeSpec, Port, SystemSpec

# Relative half-width of the parameter window around the non-diagonalizable
# manifold (equal decay rates, splitting equal to half the decay rate) inside
# which build_collocated refuses to construct a system. Within this window the
# single-excitation block is numerically indistinguishable from a Jordan
# block, and eigenvector-based propagators are meaningless.
CRITICAL_WINDOW = 2e-6

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CollocatedParams:
    """Mean/half-difference parameterization of a collocated emitter pair.

    The individual transition frequencies are ``omega_c +/- omega_d`` and the
    individual decay rates are ``gamma_c +/- gamma_d``, so ``gamma_c`` must
    dominate ``|gamma_d|`` for both rates to stay nonnegative.
    """

    omega_c: float
    omega_d: float
    gamma_c: float
    gamma_d: float = 0.0

    def __post_init__(self) -> None:
        values = (self.omega_c, self.omega_d, self.gamma_c, self.gamma_d)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("collocated parameters must be finite")
        if self.gamma_c < abs(self.gamma_d):
            raise ValueError(
                "gamma_c must be at least |gamma_d|, otherwise one emitter "
                "would have a negative decay rate"
            )

    @property
    def omega_1(self) -> float:
        return self.omega_c + self.omega_d

    @property
    def omega_2(self) -> float:
        return self.omega_c - self.omega_d

    @property
    def gamma_1(self) -> float:
        return self.gamma_c + self.gamma_d

    @property
    def gamma_2(self) -> float:
        return self.gamma_c - self.gamma_d


@dataclass(frozen=True)
class DimerAnalytics:
    """Closed-form peak data for a two-site Bose-Hubbard system.

    Bundles the interaction ``u``, hopping ``j`` and bare frequency
    ``omega0`` and exposes the predicted two-photon map peak offsets and the
    probe energy of the lower doubly-excited state.
    """

    u: float
    j: float
    omega0: float

    def __post_init__(self) -> None:
        if self.j == 0.0:
            raise ValueError("peak formulas require a nonzero hopping")

    @property
    def peaks(self) -> tuple[float, float]:
        return dimer_peaks(self.u, self.j)

    @property
    def probe_energy(self) -> float:
        return dimer_probe_energy(self.omega0, self.u, self.j)


def build_two_level(omega: float, gamma_left: float, gamma_right: float) -> SystemSpec:
    """Single two-level emitter with one port on each side.

    Args:
        omega: transition frequency.
        gamma_left: decay rate into the left port ("L").
        gamma_right: decay rate into the right port ("R").

    Returns:
        A SystemSpec whose single-excitation block is the 1x1 matrix
        ``omega - i(gamma_left + gamma_right)/2``.
    """
    if gamma_left < 0.0 or gamma_right < 0.0:
        raise ValueError("decay rates must be nonnegative")
    mode = ModeSpec(kind=TWO_LEVEL, frequency=omega)
    ports = (
        Port("L", ((0, math.sqrt(gamma_left)),)),
        Port("R", ((0, math.sqrt(gamma_right)),)),
    )
    return SystemSpec(modes=(mode,), ports=ports)


def _critical_distance(params: CollocatedParams) -> float:
    """Relative distance from the non-diagonalizable parameter manifold.

    The single-excitation block fails to diagonalize exactly when the decay
    rates are equal (gamma_d = 0) and the frequency splitting matches half
    the common decay rate (|omega_d| = gamma_c / 2). Both conditions are
    measured relative to gamma_c.
    """
    if params.gamma_c <= 0.0:
        # A Hermitian block (no decay) is always diagonalizable.
        return math.inf
    half = 0.5 * params.gamma_c
    split = abs(abs(params.omega_d) - half) / half
    rates = abs(params.gamma_d) / params.gamma_c
    return max(split, rates)


def build_collocated(params: CollocatedParams) -> SystemSpec:
    """Two two-level emitters at the same point, sharing a single port.

    The shared port makes the effective single-excitation block non-Hermitian
    with an imaginary cross coupling:

        [[omega_1 - i gamma_1/2,  -i sqrt(gamma_1 gamma_2)/2],
         [-i sqrt(gamma_1 gamma_2)/2,  omega_2 - i gamma_2/2]]

    Raises:
        DefectiveHamiltonian: when the parameters sit on (or within a
            relative window of 2e-6 around) the manifold gamma_d = 0,
            |omega_d| = gamma_c/2 where this block has a single Jordan
            chain instead of two eigenvectors.
    """
    if _critical_distance(params) <= CRITICAL_WINDOW:
        raise DefectiveHamiltonian(
            "parameters lie within a relative window of "
            f"{CRITICAL_WINDOW:g} around the non-diagonalizable manifold "
            "gamma_d = 0, |omega_d| = gamma_c/2; the single-excitation "
            "block has no eigenvector basis there"
        )
    modes = (
        ModeSpec(kind=TWO_LEVEL, frequency=params.omega_1),
        ModeSpec(kind=TWO_LEVEL, frequency=params.omega_2),
    )
    port = Port(
        "L",
        ((0, math.sqrt(params.gamma_1)), (1, math.sqrt(params.gamma_2))),
    )
    return SystemSpec(modes=modes, ports=(port,))


def build_bose_hubbard(
    n_sites: int,
    omega0: float,
    u: float,
    j: float,
    gamma_first: float,
    gamma_last: float,
    ring: bool = False,
) -> SystemSpec:
    """Bose-Hubbard chain with ports on the first and last sites.

    Each site is a bosonic mode with frequency ``omega0`` and on-site
    interaction ``u``; neighboring sites are coupled with hopping ``j``
    (positive sign convention, H contains +j(a_i^dag a_i+1 + h.c.)). Port "L"
    reads out site 0 with rate ``gamma_first`` and port "R" reads out site
    n_sites - 1 with rate ``gamma_last``.

    Args:
        ring: also couple the last site back to the first, which requires at
            least three sites (a two-site ring would double the single bond).
    """
    if n_sites < 1:
        raise ValueError("need at least one site")
    if gamma_first < 0.0 or gamma_last < 0.0:
        raise ValueError("decay rates must be nonnegative")
    if ring and n_sites < 3:
        raise ValueError("a ring needs at least three sites")
    modes = tuple(
        ModeSpec(kind=BOSON, frequency=omega0, kerr=u) for _ in range(n_sites)
    )
    hops = [Hop(i, i + 1, j) for i in range(n_sites - 1)]
    if ring:
        hops.append(Hop(n_sites - 1, 0, j))
    ports = (
        Port("L", ((0, math.sqrt(gamma_first)),)),
        Port("R", ((n_sites - 1, math.sqrt(gamma_last)),)),
    )
    return SystemSpec(modes=modes, hops=tuple(hops), ports=ports)


# ---------------------------------------------------------------------------
# Closed forms: single two-level emitter, symmetric two-sided coupling.
# ---------------------------------------------------------------------------


def tl_one_photon(omega: float, gamma: float, k):
    """Reflection and transmission amplitudes of a two-level emitter.

    Assumes the symmetric two-port system of :func:`build_two_level` with
    ``gamma_left = gamma_right = gamma``, for which

        t(k) = -i gamma / (k - omega + i gamma),   r(k) = 1 + t(k).

    ``k`` may be a scalar or an array; the return is a pair ``(r, t)`` of
    matching shape.
    """
    k = np.asarray(k, dtype=float)
    t = -1j * gamma / (k - omega + 1j * gamma)
    r = 1.0 + t
    if k.ndim == 0:
        return complex(r), complex(t)
    return r, t


def tl_green_2m(omega: float, gamma: float, k: Sequence[float], p: Sequence[float]) -> complex:
    """Connected 2m-point amplitude of a two-level emitter, m <= 3.

    Evaluates the explicit permutation sum over input and output momenta of
    the alternating excite/de-excite chain

        1/(k1 - omega + i gamma) * 1/(k1 - p1)
          * 1/(k1 + k2 - p1 - omega + i gamma) * ...

    with prefactor -i gamma^m / (2 pi)^(m-1). Only meaningful on shell
    (sum k = sum p) and at generic momenta: coincident input/output values
    put a permutation term on a vacuum pole even though the full sum stays
    finite, so this transcription is used off the diagonal only.
    """
    kvals = tuple(float(x) for x in k)
    pvals = tuple(float(x) for x in p)
    m = len(kvals)
    if len(pvals) != m:
        raise ValueError("need equally many input and output momenta")
    if not 1 <= m <= 3:
        raise ValueError("the explicit permutation sum is kept to m <= 3")
    pole = omega - 1j * gamma
    total = 0.0 + 0.0j
    for sigma in itertools.permutations(kvals):
        for tau in itertools.permutations(pvals):
            run = 0.0
            term = 1.0 + 0.0j
            for i in range(m):
                run += sigma[i]
                term /= run - pole
                if i < m - 1:
                    run -= tau[i]
                    term /= run
            total += term
    prefactor = -1j * gamma**m / _TWO_PI ** (m - 1)
    return prefactor * total


def tl_two_photon_connected(omega: float, gamma: float, k1, k2, p1, p2):
    """Closed-form connected 4-point amplitude of a two-level emitter.

    On shell (k1 + k2 = p1 + p2) the permutation sum of :func:`tl_green_2m`
    collapses to

        i gamma^2 (k1 + k2 - 2 omega + 2 i gamma)
          / (pi * prod_x (x - omega + i gamma))

    over x in {k1, k2, p1, p2}. Unlike the permutation sum this form is
    regular at coincident momenta, so it serves as the reference on the
    k1 = p1 diagonal. Accepts scalars or broadcastable arrays.
    """
    k1 = np.asarray(k1, dtype=float)
    den = 1.0 + 0.0j
    for x in (k1, k2, p1, p2):
        den = den * (np.asarray(x, dtype=float) - omega + 1j * gamma)
    num = 1j * gamma**2 * (k1 + np.asarray(k2, dtype=float) - 2.0 * omega + 2j * gamma)
    value = num / (math.pi * den)
    if value.ndim == 0:
        return complex(value)
    return value


# ---------------------------------------------------------------------------
# Closed forms: collocated emitter pair, single shared port.
# ---------------------------------------------------------------------------


def coll_eigenvalues(params: CollocatedParams) -> tuple[complex, complex, complex, complex]:
    """All effective eigenvalues of the collocated pair, as closed forms.

    Returns ``(e0, e_minus, e_plus, e2)``: the vacuum value 0, the two
    single-excitation eigenvalues

        omega_c - i gamma_c/2 -/+ sqrt(omega_d^2 - i omega_d gamma_d - gamma_c^2/4)

    and the doubly-excited value ``2 omega_c - i gamma_c`` (both emitters
    excited; hard-core modes leave a single state there).
    """
    root = cmath.sqrt(
        params.omega_d**2
        - 1j * params.omega_d * params.gamma_d
        - 0.25 * params.gamma_c**2
    )
    base = params.omega_c - 0.5j * params.gamma_c
    e2 = 2.0 * params.omega_c - 1j * params.gamma_c
    return 0.0 + 0.0j, base - root, base + root, e2


def coll_one_photon_g(params: CollocatedParams, k):
    """Connected one-photon amplitude g(k) of the collocated pair.

    Written for equal decay rates (gamma_d = 0), where

        g(k) = -2 i gamma_c (k - omega_c)
               / ((k - omega_1 + i gamma_c/2)(k - omega_2 + i gamma_c/2)
                  + gamma_c^2/4).

    The single-channel scattering amplitude is ``1 + g(k)``, a ratio of
    conjugate polynomials, hence unimodular for real k.
    """
    if params.gamma_d != 0.0:
        raise ValueError("closed form assumes equal decay rates (gamma_d = 0)")
    gc = params.gamma_c
    k = np.asarray(k, dtype=float)
    den = (k - params.omega_1 + 0.5j * gc) * (k - params.omega_2 + 0.5j * gc) + 0.25 * gc * gc
    value = -2j * gc * (k - params.omega_c) / den
    if value.ndim == 0:
        return complex(value)
    return value


def coll_four_point(
    params: CollocatedParams, k: Sequence[float], p: Sequence[float]
) -> complex:
    """Exact connected 4-point amplitude of the collocated pair.

    Direct evaluation of the closed form for equal decay rates
    (gamma_d = 0). With E = k1 + k2 and d = E - 2 omega_c the amplitude is

        i/(32 pi gamma_c^2) * d/(d + i gamma_c) * g(k1)g(k2)g(p1)g(p2)
          * [4(d + 2i gamma_c) + omega_d^2 f2 + omega_d^4 f4]

    where f2 and f4 carry the extra resolvent factors 1/((x - omega_c) ...)
    that cancel against the (x - omega_c) zeros of the g factors; the
    implementation multiplies those factors symbolically (via
    g(x)/(x - omega_c) = -2i gamma_c / D(x)) so nothing blows up when a
    momentum hits omega_c.
    """
    if params.gamma_d != 0.0:
        raise ValueError("closed form assumes equal decay rates (gamma_d = 0)")
    if params.gamma_c <= 0.0:
        raise ValueError("closed form requires a positive decay rate")
    k1, k2 = (float(x) for x in k)
    p1, p2 = (float(x) for x in p)
    e_in = k1 + k2
    if abs(e_in - (p1 + p2)) > 1e-9 * max(1.0, abs(e_in)):
        raise ValueError("momenta are off shell: k1 + k2 must equal p1 + p2")
    wc, wd, gc = params.omega_c, params.omega_d, params.gamma_c

    def denom(x: float) -> complex:
        return (x - params.omega_1 + 0.5j * gc) * (x - params.omega_2 + 0.5j * gc) + 0.25 * gc * gc

    def g(x: float) -> complex:
        return -2j * gc * (x - wc) / denom(x)

    def g_over(x: float) -> complex:
        # g(x) / (x - omega_c) with the removable factor cancelled.
        return -2j * gc / denom(x)

    d = e_in - 2.0 * wc
    gggg = g(k1) * g(k2) * g(p1) * g(p2)
    hhhh = g_over(k1) * g_over(k2) * g_over(p1) * g_over(p2)
    lead = 4.0 * (d + 2j * gc) * gggg
    f2 = d * ((k1 - k2) ** 2 + (p1 - p2) ** 2 + 4.0 * gc * gc + 2.0 * (d + 2j * gc) ** 2)
    f4 = -4.0 * (3.0 * d + 2j * gc)
    bracket = lead + wd**2 * f2 * hhhh + wd**4 * f4 * hhhh
    return 1j / (32.0 * math.pi * gc * gc) * d / (d + 1j * gc) * bracket


# ---------------------------------------------------------------------------
# Closed forms: Bose-Hubbard dimer.
# ---------------------------------------------------------------------------


def dimer_peaks(u: float, j: float) -> tuple[float, float]:
    """Predicted |momentum difference| peak positions of the dimer map.

    The two values are |+-2j - u/2 + sqrt(4j^2 + u^2/4)|, returned ascending.
    The absolute value matters: the minus branch goes negative once u > 0,
    while the observed maps are symmetric in the momentum differences.
    """
    if j == 0.0:
        raise ValueError("peak formulas require a nonzero hopping")
    s = math.sqrt(4.0 * j * j + 0.25 * u * u)
    pair = (abs(2.0 * j - 0.5 * u + s), abs(-2.0 * j - 0.5 * u + s))
    return tuple(sorted(pair))


def dimer_probe_energy(omega0: float, u: float, j: float) -> float:
    """Total two-photon energy resonant with the lower doubly-excited state.

    Equals ``2 omega0 + u/2 - sqrt(4j^2 + u^2/4)``, the eigenvalue of the
    state that interpolates between the symmetric superfluid combination at
    u = 0 and the one-particle-per-site state as u/j grows.
    """
    return 2.0 * omega0 + 0.5 * u - math.sqrt(4.0 * j * j + 0.25 * u * u)
