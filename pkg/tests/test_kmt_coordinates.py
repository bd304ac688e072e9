import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_moebius
from packrig import moebius_geometry as mg
from packrig.kmt_coordinates import (
    CONVENTION, CrossRatioError, cr_derivative, cross_ratio, cross_ratio_map, cross_ratio_raw,
    kmt_differential_rank, normalized_coordinate, per_edge_iff,
)
from packrig.surface_complex import automorphisms

INF = np.array([1.0 + 0j, 0.0])


@pytest.fixture(scope="module")
def kmt(fuchsian, model, jreport):
    return kmt_differential_rank(fuchsian, model, jreport)


def half_plane_points(x0, y0, h):
    """Tangency points around an edge tangent at infinity.

    Two disks {Re z < x0} and {Re z > x0 + 1} touch at infinity; unit-diameter
    circles between them at heights y0 and y0 - h close the two triangles, so
    the dual disks are the half-planes above Im z = y0 and below Im z = y0 - h.
    """
    return [INF, mg.rp1(complex(x0, y0)), mg.rp1(complex(x0 + 1, y0)),
            mg.rp1(complex(x0, y0 - h))]


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.01, 10))
def test_half_plane_gap(x0, y0, h):
    pts = half_plane_points(x0, y0, h)
    z = CONVENTION * normalized_coordinate(*pts)
    assert abs(z - h) < 1e-10 * max(1.0, h)


def test_half_plane_gap_after_moebius():
    rng = np.random.default_rng(0)
    for _ in range(20):
        h = rng.uniform(0.1, 5)
        B = random_moebius(rng)
        pts = [mg.act_on_point(B, q) for q in half_plane_points(*rng.normal(size=2), h)]
        assert abs(CONVENTION * normalized_coordinate(*pts) - h) < 1e-10 * max(1.0, h)


def test_degenerate_neighbourhood():
    p = mg.rp1(0.5)
    with pytest.raises(CrossRatioError):
        normalized_coordinate(p, p, mg.rp1(1.0), mg.rp1(2.0))


def test_values_real_and_positive(fuchsian):
    crm = cross_ratio_map(fuchsian)
    assert crm["values"].shape == (36,)
    assert crm["max_imag"] < 1e-8 and crm["real"]
    assert (crm["values"] > 0).all()
    for k in (0, 17, 35):
        assert cross_ratio(fuchsian, k) == pytest.approx(crm["values"][k], abs=1e-15)


def test_global_moebius_invariance(fuchsian):
    base = cross_ratio_map(fuchsian)["raw"]
    rng = np.random.default_rng(1)
    for _ in range(3):
        moved = cross_ratio_map(fuchsian.apply_global(random_moebius(rng)))["raw"]
        assert np.abs(moved - base).max() < 1e-12 * max(1.0, np.abs(base).max())


@pytest.mark.parametrize("b", [3, 11, 20])
def test_chart_independence(fuchsian, b):
    base = cross_ratio_map(fuchsian)["values"]
    assert np.abs(cross_ratio_map(fuchsian.regauge(b))["values"] - base).max() < 1e-10
    sc = fuchsian.complex
    home = {a: sc.vertex_star(a)[1] for a in range(sc.n_vertices)}
    assert np.abs(cross_ratio_map(fuchsian.rehome(home))["values"] - base).max() < 1e-10


def test_corrupted_packing_is_flagged(fuchsian):
    rng = np.random.default_rng(2)
    sel = dict(fuchsian.selection)
    A = mg.sl2(*(rng.normal(size=3) + 1j * rng.normal(size=3)))
    sel[4] = mg.act_on_herm(mg.expm_sl2(1e-3 * A), sel[4])
    bad = fuchsian.replace(selection=sel)
    crm = cross_ratio_map(bad, strict=False)
    assert not crm["real"] and crm["max_imag"] > 1e-6
    with pytest.raises(CrossRatioError):
        cross_ratio_map(bad)
    worst = int(np.argmax(np.abs(crm["raw"].imag)))
    with pytest.raises(CrossRatioError):
        cross_ratio(bad, worst)


def test_symmetric_edges_agree(fuchsian):
    """Edges exchanged by a combinatorial automorphism carry equal values."""
    sc = fuchsian.complex
    values = cross_ratio_map(fuchsian)["values"]
    auts = automorphisms(sc)
    assert len(auts) > 1
    for phi in auts:
        for k in range(sc.n_edges):
            j = sc.edge_id(phi[sc.edge_rep(k)])
            assert abs(values[k] - values[j]) < 1e-8


def test_differential_rank(kmt):
    assert kmt["shape"] == [36, 6]
    assert kmt["rank"] == 6 and kmt["status"] == "ok"
    assert kmt["max_imag_derivative"] < 1e-6
    assert kmt["richardson_diagnostic"] < 1e-4


def test_zero_tangent_gives_zero_column(fuchsian, model):
    D, diag = cr_derivative(fuchsian, model, np.zeros(model.matrix.shape[1]))
    assert np.abs(D).max() == 0 and diag == 0


def test_derivative_is_linear(fuchsian, model, jreport):
    HR = jreport["hr_basis"]
    a, _ = cr_derivative(fuchsian, model, HR[:, 0])
    b, _ = cr_derivative(fuchsian, model, HR[:, 1])
    c, _ = cr_derivative(fuchsian, model, 2 * HR[:, 0] - HR[:, 1])
    assert np.abs(c - (2 * a - b)).max() < 1e-6


def test_per_edge_iff(kmt):
    res = per_edge_iff(kmt)
    assert res["holds"]
    assert len(res["edges"]) == 36
    for r in res["edges"]:
        assert r["dcr_when_Q_zero"] < 1e-6
        assert r["min_dcr_when_Q_nonzero"] > 1e-3
        assert r["fit"] < 1e-5


def test_raw_matches_convention(fuchsian):
    k = 5
    from packrig.kmt_coordinates import edge_points
    assert cross_ratio_raw(fuchsian, k) == CONVENTION * normalized_coordinate(*edge_points(fuchsian, k))
