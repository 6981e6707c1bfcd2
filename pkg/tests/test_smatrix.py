import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fewphoton as fp
from fewphoton.errors import GridTooCoarse
from fewphoton.models import tl_one_photon
from fewphoton.smatrix import SMatrixTerm, cluster_terms


def test_cluster_term_counts():
    assert len(cluster_terms(1)) == 1
    assert len(cluster_terms(2)) == 3
    assert len(cluster_terms(3)) == 16


def test_cluster_term_breakdown():
    two = cluster_terms(2)
    assert sum(1 for t in two if t.fully_elastic) == 2
    assert sum(1 for t in two if len(t.clusters) == 1) == 1
    three = cluster_terms(3)
    assert sum(1 for t in three if t.fully_elastic) == 6
    assert sum(1 for t in three if len(t.clusters) == 1) == 1
    mixed = [t for t in three if not t.fully_elastic and len(t.clusters) == 2]
    assert len(mixed) == 9
    assert len(set(three)) == 16
    assert all(t.n == 3 for t in three)


def test_cluster_terms_out_of_range():
    with pytest.raises(ValueError):
        cluster_terms(0)
    with pytest.raises(ValueError):
        cluster_terms(4)


def test_smatrix_term_validation():
    SMatrixTerm((((0,), (1,)), ((1,), (0,))))
    with pytest.raises(ValueError):
        SMatrixTerm((((0,), (0,)),) * 2)  # photon 0 used twice
    with pytest.raises(ValueError):
        SMatrixTerm((((0, 1), (0,)),))
    with pytest.raises(ValueError):
        SMatrixTerm((((), ()),))
    with pytest.raises(ValueError):
        SMatrixTerm((((0,), (1,)),))


def test_one_photon_matches_closed_form():
    omega, gamma = 5.0, 0.8
    spec = fp.build_two_level(omega, gamma, gamma)
    spectra = fp.decompose_all(spec, 1)
    k = np.linspace(3.0, 7.0, 101)
    r, t = tl_one_photon(omega, gamma, k)
    got_t = fp.one_photon_S(spec, spectra, "R", "L", k)
    got_r = fp.one_photon_S(spec, spectra, "L", "L", k)
    assert np.max(np.abs(got_t - t)) < 1e-12
    assert np.max(np.abs(got_r - r)) < 1e-12
    scalar = fp.one_photon_S(spec, spectra, "R", "L", float(k[58]))
    assert isinstance(scalar, complex)
    assert scalar == pytest.approx(got_t[58], rel=1e-12)


def test_one_photon_unitarity_columns():
    spec = fp.build_two_level(5.0, 0.4, 0.9)
    spectra = fp.decompose_all(spec, 1)
    k = np.linspace(3.0, 7.0, 57)
    total = sum(
        np.abs(fp.one_photon_S(spec, spectra, out, "L", k)) ** 2
        for out in ("L", "R")
    )
    assert np.max(np.abs(total - 1.0)) < 1e-12


def test_two_photon_density_matches_batch():
    spec = fp.build_bose_hubbard(2, 100.0, 4.0, 1.0, 0.25, 0.25)
    spectra = fp.decompose_all(spec, 2)
    e_total = 199.2
    dk, dp = 1.3, 0.4
    kmat = np.array([[(e_total + dk) / 2, (e_total - dk) / 2]])
    pmat = np.array([[(e_total + dp) / 2, (e_total - dp) / 2]])
    direct = fp.connected_batch(spec, spectra, ("L", "L"), ("R", "R"), kmat, pmat)[0]
    dens = fp.two_photon_density(
        spec, spectra, (("R", "R"), ("L", "L")), e_total, dk, dp
    )
    assert isinstance(dens, float)
    assert dens == pytest.approx(abs(direct) ** 2, rel=1e-12)


def test_two_photon_grid_layout_and_chunking():
    spec = fp.build_bose_hubbard(2, 100.0, 4.0, 1.0, 0.25, 0.25)
    spectra = fp.decompose_all(spec, 2)
    e_total = 199.2
    dks = np.linspace(-2.0, 2.0, 5)
    dps = np.linspace(-1.0, 1.0, 3)
    grid = fp.two_photon_grid(spec, spectra, (("R", "R"), ("L", "L")), e_total, dks, dps)
    assert grid.shape == (5, 3)
    small = fp.two_photon_grid(
        spec, spectra, (("R", "R"), ("L", "L")), e_total, dks, dps, chunk=4
    )
    assert np.array_equal(grid, small)
    one = fp.two_photon_density(
        spec, spectra, (("R", "R"), ("L", "L")), e_total, dks[3], dps[2]
    )
    assert grid[3, 2] == pytest.approx(one, rel=1e-13)


def test_grid_symmetric_under_sign_flips():
    # k and p enter as +/- dk/2, so the density cannot depend on the signs.
    spec = fp.build_bose_hubbard(2, 100.0, 4.0, 1.0, 0.25, 0.25)
    spectra = fp.decompose_all(spec, 2)
    dks = np.array([-1.4, 1.4])
    dps = np.array([-0.6, 0.6])
    grid = fp.two_photon_grid(spec, spectra, (("R", "R"), ("L", "L")), 199.2, dks, dps)
    assert grid[0, 0] == grid[1, 1]
    assert grid[0, 1] == grid[1, 0]


def test_wavepacket_norm_and_overlap():
    w = fp.Wavepacket("L", 5.0, 0.3)
    k = np.linspace(2.0, 8.0, 4001)
    assert np.trapezoid(np.abs(w.amplitude(k)) ** 2, k) == pytest.approx(1.0, abs=1e-10)
    v = fp.Wavepacket("L", 5.4, 0.5)
    numeric = np.trapezoid(w.amplitude(k) * v.amplitude(k), k)
    assert w.overlap(v) == pytest.approx(numeric, abs=1e-10)
    assert w.overlap(fp.Wavepacket("R", 5.0, 0.3)) == 0.0
    with pytest.raises(ValueError):
        fp.Wavepacket("L", 5.0, 0.0)
    with pytest.raises(ValueError):
        fp.Wavepacket("L", math.inf, 0.3)


def test_one_photon_wavepacket_norm_conserved():
    spec = fp.build_two_level(5.0, 0.5, 0.5)
    spectra = fp.decompose_all(spec, 1)
    packet = fp.Wavepacket("L", 5.0, 0.5)
    grid = np.linspace(-1.0, 11.0, 241)
    total = sum(
        np.trapezoid(
            np.abs(fp.wavepacket_output(spec, spectra, (packet,), (out,), grid)) ** 2,
            grid,
        )
        for out in ("L", "R")
    )
    assert total == pytest.approx(1.0, abs=1e-6)


def test_two_photon_wavepacket_reduces_to_elastic_at_u0():
    spec = fp.build_bose_hubbard(2, 100.0, 0.0, 1.0, 1.0, 1.0)
    spectra = fp.decompose_all(spec, 2)
    first = fp.Wavepacket("L", 100.9, 0.8)
    second = fp.Wavepacket("L", 99.2, 0.6)
    grid = np.linspace(99.0, 101.0, 33)
    out = fp.wavepacket_output(spec, spectra, (first, second), ("R", "R"), grid)
    norm = 1.0 / math.sqrt(1.0 + first.overlap(second) ** 2)
    cols = {
        (pkt, ch): fp.one_photon_S(spec, spectra, ch, pkt.channel, grid)
        * pkt.amplitude(grid)
        for pkt in (first, second)
        for ch in ("R",)
    }
    a, b = cols[(first, "R")], cols[(second, "R")]
    elastic = norm * (a[:, None] * b[None, :] + b[:, None] * a[None, :])
    assert np.max(np.abs(out - elastic)) <= 1e-8 * np.max(np.abs(elastic))
    # Identical output channels make the joint amplitude symmetric.
    assert np.allclose(out, out.T, atol=1e-10 * np.max(np.abs(out)))


def test_wavepacket_output_validation():
    spec = fp.build_two_level(5.0, 0.5, 0.5)
    spectra = fp.decompose_all(spec, 2)
    packet = fp.Wavepacket("L", 5.0, 0.5)
    fine = np.linspace(4.0, 6.0, 101)
    with pytest.raises(ValueError):
        fp.wavepacket_output(spec, spectra, (), (), fine)
    with pytest.raises(ValueError):
        fp.wavepacket_output(spec, spectra, (packet,), ("L", "R"), fine)
    with pytest.raises(GridTooCoarse):
        fp.wavepacket_output(spec, spectra, (packet,), ("L",), np.linspace(4.0, 6.0, 5))
    with pytest.raises(ValueError):
        fp.wavepacket_output(spec, spectra, (packet,), ("L",), fine[::-1])


@settings(deadline=None, max_examples=30)
@given(
    st.floats(4.0, 6.0),
    st.floats(0.1, 1.0),
    st.floats(4.0, 6.0),
    st.floats(0.1, 1.0),
)
def test_overlap_is_symmetric_and_bounded(c1, w1, c2, w2):
    a = fp.Wavepacket("L", c1, w1)
    b = fp.Wavepacket("L", c2, w2)
    assert a.overlap(b) == pytest.approx(b.overlap(a), rel=1e-12)
    assert 0.0 < a.overlap(b) <= 1.0 + 1e-12
    assert a.overlap(a) == pytest.approx(1.0, rel=1e-12)
