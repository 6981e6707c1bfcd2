import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fewphoton as fp
from fewphoton.errors import DefectiveHamiltonian
from fewphoton.fockspace import effective_hamiltonian_block
from fewphoton.models import (
    CollocatedParams,
    DimerAnalytics,
    coll_eigenvalues,
    coll_four_point,
    coll_one_photon_g,
    dimer_peaks,
    dimer_probe_energy,
    tl_green_2m,
    tl_one_photon,
    tl_two_photon_connected,
)

from _oracles import brute_force_connected


def test_two_level_builder_structure():
    spec = fp.build_two_level(5.0, 0.3, 0.7)
    assert spec.port_labels == ("L", "R")
    h1 = effective_hamiltonian_block(spec, 1).entries
    assert h1[0, 0] == pytest.approx(5.0 - 0.5j * (0.3 + 0.7))
    with pytest.raises(ValueError):
        fp.build_two_level(5.0, -0.1, 0.7)


def test_collocated_parameterization():
    params = CollocatedParams(omega_c=12.0, omega_d=2.0, gamma_c=0.25, gamma_d=0.05)
    assert params.omega_1 == 14.0
    assert params.omega_2 == 10.0
    assert params.gamma_1 == pytest.approx(0.30)
    assert params.gamma_2 == pytest.approx(0.20)
    with pytest.raises(ValueError):
        CollocatedParams(12.0, 2.0, 0.1, 0.2)
    with pytest.raises(ValueError):
        CollocatedParams(float("inf"), 2.0, 0.25)


def test_collocated_block_matches_documented_matrix():
    params = CollocatedParams(omega_c=12.0, omega_d=2.0, gamma_c=0.25, gamma_d=0.05)
    spec = fp.build_collocated(params)
    assert spec.port_labels == ("L",)
    h1 = effective_hamiltonian_block(spec, 1).entries
    cross = -0.5j * math.sqrt(params.gamma_1 * params.gamma_2)
    # Lexicographic basis order puts (0,1), the omega_2 state, first.
    want = np.array(
        [
            [params.omega_2 - 0.5j * params.gamma_2, cross],
            [cross, params.omega_1 - 0.5j * params.gamma_1],
        ]
    )
    assert np.allclose(h1, want, atol=1e-15)


def test_collocated_rejects_critical_window():
    with pytest.raises(DefectiveHamiltonian):
        fp.build_collocated(CollocatedParams(12.0, 0.125, 0.25))
    with pytest.raises(DefectiveHamiltonian):
        fp.build_collocated(CollocatedParams(12.0, 0.125 * (1 + 0.5e-6), 0.25))
    with pytest.raises(DefectiveHamiltonian):
        fp.build_collocated(CollocatedParams(12.0, -0.125, 0.25))
    # Just outside the window the construction must go through.
    fp.build_collocated(CollocatedParams(12.0, 0.125 * (1 + 3e-6), 0.25))
    # Unequal decay rates move the parameters off the critical manifold.
    fp.build_collocated(CollocatedParams(12.0, 0.125, 0.25, gamma_d=0.05))


def test_collocated_eigenvalues_match_engine():
    for params in (
        CollocatedParams(12.0, 2.0, 0.25),
        CollocatedParams(12.0, 0.05, 0.25),
        CollocatedParams(12.0, 1.0, 0.4, gamma_d=0.1),
    ):
        spec = fp.build_collocated(params)
        spectra = fp.decompose_all(spec, 2)
        e0, em, ep, e2 = coll_eigenvalues(params)
        assert spectra[0].eigenvalues[0] == e0
        # Match each predicted eigenvalue to its nearest computed one;
        # sort-based comparisons flip on 1e-15 noise in the real parts.
        remaining = list(spectra[1].eigenvalues)
        for want in (em, ep):
            dist = [abs(g - want) for g in remaining]
            assert min(dist) < 1e-10
            remaining.pop(int(np.argmin(dist)))
        assert spectra[2].eigenvalues[0] == pytest.approx(e2, abs=1e-12)


def test_collocated_one_photon_is_unimodular():
    params = CollocatedParams(12.0, 2.0, 0.25)
    k = np.linspace(10.0, 14.0, 401)
    s = 1.0 + coll_one_photon_g(params, k)
    assert np.max(np.abs(np.abs(s) - 1.0)) < 1e-12
    with pytest.raises(ValueError):
        coll_one_photon_g(CollocatedParams(12.0, 2.0, 0.25, gamma_d=0.1), 12.0)


def test_coll_four_point_against_oracle():
    params = CollocatedParams(12.0, 2.0, 0.25)
    spec = fp.build_collocated(params)
    k = (12.9, 11.3)
    p = (12.5, 11.7)
    closed = coll_four_point(params, k, p)
    oracle = brute_force_connected(spec, ("L", "L"), ("L", "L"), k, p)
    assert abs(closed - oracle) <= 1e-12 * abs(oracle)


def test_coll_four_point_symmetry_and_regularity():
    params = CollocatedParams(12.0, 2.0, 0.25)
    base = coll_four_point(params, (12.9, 11.3), (12.5, 11.7))
    swapped = coll_four_point(params, (11.3, 12.9), (11.7, 12.5))
    # Equal up to re-association roundoff of the factor products.
    assert swapped == pytest.approx(base, rel=1e-13)
    # A momentum right on omega_c is a removable point of the formula.
    onres = coll_four_point(params, (12.0, 12.4), (12.3, 12.1))
    assert cmath.isfinite(onres)
    near = coll_four_point(params, (12.0 + 1e-7, 12.4 - 1e-7), (12.3, 12.1))
    assert abs(onres - near) < 1e-5 * abs(onres)


def test_coll_four_point_validation():
    params = CollocatedParams(12.0, 2.0, 0.25)
    with pytest.raises(ValueError, match="off shell"):
        coll_four_point(params, (12.9, 11.3), (12.5, 11.8))
    with pytest.raises(ValueError):
        coll_four_point(CollocatedParams(12.0, 2.0, 0.25, gamma_d=0.1), (12.9, 11.3), (12.5, 11.7))
    with pytest.raises(ValueError):
        coll_four_point(CollocatedParams(12.0, 2.0, 0.0), (12.9, 11.3), (12.5, 11.7))


def test_tl_one_photon_unitarity_and_resonance():
    r, t = tl_one_photon(5.0, 0.8, np.linspace(3.0, 7.0, 201))
    assert np.max(np.abs(np.abs(r) ** 2 + np.abs(t) ** 2 - 1.0)) < 1e-12
    assert np.allclose(r, 1.0 + t, atol=0.0)
    r0, t0 = tl_one_photon(5.0, 0.8, 5.0)
    assert t0 == pytest.approx(-1.0)
    assert r0 == pytest.approx(0.0, abs=1e-15)


def test_tl_green_2m_reduces_to_transmission_at_m1():
    _, t = tl_one_photon(5.0, 0.8, 5.7)
    assert tl_green_2m(5.0, 0.8, (5.7,), (5.7,)) == pytest.approx(t)


def test_tl_green_2m_matches_closed_form_at_m2():
    k = (5.7, 4.6)
    p = (5.2, 5.1)
    got = tl_green_2m(5.0, 0.8, k, p)
    want = tl_two_photon_connected(5.0, 0.8, *k, *p)
    assert got == pytest.approx(want, rel=1e-12)


def test_tl_green_2m_validation():
    with pytest.raises(ValueError):
        tl_green_2m(5.0, 0.8, (5.0, 5.1), (5.1,))
    with pytest.raises(ValueError):
        tl_green_2m(5.0, 0.8, (5.0,) * 4, (5.0,) * 4)


def test_resonant_two_photon_value():
    gamma = 0.8
    got = tl_two_photon_connected(5.0, gamma, 5.0, 5.0, 5.0, 5.0)
    assert got == pytest.approx(-2.0 / (math.pi * gamma), rel=1e-12)
    arr = tl_two_photon_connected(5.0, gamma, np.array([5.0, 5.2]), 5.0, 5.0, np.array([5.0, 5.2]))
    assert arr.shape == (2,)


def test_dimer_peak_values():
    assert dimer_peaks(4.0, 1.0) == pytest.approx(
        (1.1715728752538097, 2.8284271247461903), rel=1e-15
    )
    assert dimer_peaks(0.0, 1.0) == pytest.approx((0.0, 4.0), rel=1e-15)
    with pytest.raises(ValueError):
        dimer_peaks(4.0, 0.0)


def test_dimer_probe_energy_matches_spectrum():
    omega0, u, j = 100.0, 4.0, 1.0
    assert dimer_probe_energy(omega0, u, j) == pytest.approx(199.17157287525382)
    closed = fp.build_bose_hubbard(2, omega0, u, j, 0.0, 0.0)
    h2 = effective_hamiltonian_block(closed, 2).entries
    lowest = np.min(np.linalg.eigvalsh(h2.real))
    assert dimer_probe_energy(omega0, u, j) == pytest.approx(lowest, abs=1e-10)


def test_dimer_analytics_bundle():
    d = DimerAnalytics(u=4.0, j=1.0, omega0=100.0)
    assert d.peaks == dimer_peaks(4.0, 1.0)
    assert d.probe_energy == dimer_probe_energy(100.0, 4.0, 1.0)
    with pytest.raises(ValueError):
        DimerAnalytics(u=4.0, j=0.0, omega0=100.0)


def test_bose_hubbard_builder_structure():
    spec = fp.build_bose_hubbard(3, 100.0, 4.0, 1.0, 0.25, 0.5, ring=True)
    assert len(spec.modes) == 3
    assert len(spec.hops) == 3
    assert spec.port("L").terms == ((0, math.sqrt(0.25)),)
    assert spec.port("R").terms == ((2, math.sqrt(0.5)),)
    with pytest.raises(ValueError):
        fp.build_bose_hubbard(0, 100.0, 4.0, 1.0, 0.25, 0.25)
    with pytest.raises(ValueError):
        fp.build_bose_hubbard(2, 100.0, 4.0, 1.0, 0.25, 0.25, ring=True)
    with pytest.raises(ValueError):
        fp.build_bose_hubbard(2, 100.0, 4.0, 1.0, -0.25, 0.25)


@settings(deadline=None, max_examples=80)
@given(st.floats(0.0, 300.0), st.floats(0.1, 5.0))
def test_dimer_peaks_properties(u, j):
    d1, d2 = dimer_peaks(u, j)
    assert 0.0 <= d1 <= d2
    assert dimer_probe_energy(50.0, u, j) <= 2 * 50.0 + 1e-12


@settings(deadline=None, max_examples=40)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_tl_closed_form_is_bose_symmetric(a, b, c):
    omega, gamma = 5.0, 0.8
    k = (omega + a, omega + b)
    p = (omega + c, k[0] + k[1] - omega - c)
    v = tl_two_photon_connected(omega, gamma, k[0], k[1], p[0], p[1])
    w = tl_two_photon_connected(omega, gamma, k[1], k[0], p[1], p[0])
    assert w == pytest.approx(v, rel=1e-12)
