import numpy as np
import pytest

from conftest import random_sl2
from packrig import moebius_geometry as mg
from packrig.numrank import numerical_rank
from packrig.packing_engine import evaluate_tangency
from packrig.rigidity_lab import (
    RigidityError, delta_on_v_report, frozen_report, orbit_basis, projective_rigidity_report,
    real_split, realify, tangent_frame, totally_real_report, triangle_motion, triangle_motion_disks,
    v_basis, v_matrix, vanishing_certificate,
)
from packrig.twisted_cochains import CochainComplex


def triangle_disks(p, t=0):
    return [p.corner_disk(t, i) for i in range(3)]


def test_triangle_motion_recovers_generator(fuchsian):
    rng = np.random.default_rng(0)
    Xs = triangle_disks(fuchsian, 5)
    for _ in range(10):
        A = random_sl2(rng)
        got = triangle_motion_disks(Xs, [mg.infinitesimal_action(A, X) for X in Xs])
        assert np.abs(got - A).max() < 1e-9
    assert np.abs(triangle_motion(fuchsian, 5, [np.zeros((2, 2))] * 3)).max() == 0


def test_triangle_motion_admissible_velocities(fuchsian):
    """Project random velocities onto the linearized tangency conditions, then solve."""
    rng = np.random.default_rng(1)
    Xs = triangle_disks(fuchsian, 9)
    F = [tangent_frame(X) for X in Xs]
    L = np.zeros((3, 9))
    for row, (i, j) in enumerate([(0, 1), (1, 2), (2, 0)]):
        for k in range(3):
            L[row, 3 * i + k] = mg.mink(mg.vec_to_herm(F[i][:, k]), Xs[j])
            L[row, 3 * j + k] = mg.mink(Xs[i], mg.vec_to_herm(F[j][:, k]))
    _, _, vh = np.linalg.svd(L)
    N = vh[3:].T
    for _ in range(10):
        y = N @ (N.T @ rng.normal(size=9))
        Xdots = [mg.vec_to_herm(F[i] @ y[3 * i:3 * i + 3]) for i in range(3)]
        A = triangle_motion_disks(Xs, Xdots)
        for X, Xd in zip(Xs, Xdots):
            assert np.abs(mg.infinitesimal_action(A, X) - Xd).max() < 1e-9
    # a velocity breaking the linearized tangency is rejected
    bad = [mg.vec_to_herm(F[0] @ [1.0, 0, 0]), np.zeros((2, 2)), np.zeros((2, 2))]
    if abs(L[0, 0]) > 1e-6 or abs(L[2, 0]) > 1e-6:
        with pytest.raises(RigidityError):
            triangle_motion_disks(Xs, bad)


def test_jacobian_shape_and_finite_differences(fuchsian, model):
    assert model.matrix.shape == (36, 48)
    d = model.deformation
    rng = np.random.default_rng(2)
    h = 1e-5
    for _ in range(3):
        u = rng.normal(size=model.matrix.shape[1])
        u /= np.linalg.norm(u)
        xf = model.to_full(u)
        plus = evaluate_tangency(d.displaced(xf, h))["residual"]
        minus = evaluate_tangency(d.displaced(xf, -h))["residual"]
        assert np.abs(model.matrix @ u - (plus - minus) / (2 * h)).max() < 1e-6


def test_orbit_lies_in_kernel(model, jreport):
    B = orbit_basis(model)
    assert np.abs(model.matrix @ B).max() < 1e-8
    assert jreport["orbit_dim"] == 6


def test_rank_report(jreport):
    assert jreport["status"] == "ok"
    assert (jreport["rank"], jreport["kernel"], jreport["kernel_mod_orbit"]) == (36, 12, 6)
    assert jreport["rank"] + jreport["kernel"] == 48
    assert jreport["hr_basis"].shape == (48, 6)


def test_kernel_splits_into_orbit_and_hr(model, jreport):
    both = np.hstack([orbit_basis(model), jreport["hr_basis"]])
    assert numerical_rank(both)["rank"] == 12
    assert np.abs(model.matrix @ jreport["hr_basis"]).max() < 1e-8


def test_rank_is_stable(model):
    J = model.matrix
    assert numerical_rank(np.vstack([J, J[3]]))["rank"] == 36
    rng = np.random.default_rng(3)
    for _ in range(3):
        E = rng.normal(size=J.shape)
        assert numerical_rank(J + 1e-9 * E / np.linalg.norm(E, 2))["rank"] == 36
    Fz = model.vertex_block
    assert numerical_rank(Fz + 1e-9 * rng.normal(size=Fz.shape))["rank"] == 30


def test_frozen_holonomy(fuchsian, model):
    fr = frozen_report(model)
    assert fr["shape"] == [36, 30] and fr["kernel"] == 0 and fr["status"] == "ok"
    proj = projective_rigidity_report(fuchsian, model)
    assert proj["kernel"] == 0 and proj["orbit_min_holonomy_part"] > 1e-3
    assert proj["proof_route_mismatch"] > 1e-6


def test_orbit_direction_is_not_frozen(model):
    B = orbit_basis(model)
    n = model.n_holonomy
    for j in range(B.shape[1]):
        s = B[n:, j]
        assert np.linalg.norm(model.vertex_block @ s) > 1e-3 * np.linalg.norm(s)


def test_v_basis(fuchsian):
    sc = fuchsian.complex
    rng = np.random.default_rng(4)
    for k, N in enumerate(v_basis(fuchsian)):
        q = fuchsian.tangency_point(sc.edge_rep(k))
        # double zero at the tangency point, isotropic
        assert abs(mg.discriminant(mg.vector_field_poly(N))) < 1e-12 * np.abs(N).max() ** 2
        assert abs(mg.field_value(N, q)[0]) < 1e-12 * max(1.0, np.abs(N).max())
        assert abs(mg.killing(N, N)) < 1e-12 * np.abs(N).max() ** 2
        # orthogonality criterion: pairing with C vanishes iff C's field vanishes at q
        M = np.column_stack([q, rng.normal(size=2) + 1j * rng.normal(size=2)])
        C = M @ np.diag([1.0, -1.0]) @ np.linalg.inv(M)
        assert abs(mg.field_value(C, q)[0]) < 1e-9
        assert abs(mg.killing(N, C)) < 1e-9 * np.abs(N).max() * np.abs(C).max()
        C = random_sl2(rng)
        assert abs(mg.field_value(C, q, "z")[0]) > 1e-6
        assert abs(mg.killing(N, C)) > 1e-9


def test_delta_on_v(fuchsian):
    dv = delta_on_v_report(fuchsian)
    assert dv["shape"] == [30, 36]
    assert (dv["rank"], dv["dim_H"], dv["status"]) == (30, 6, "ok")
    assert dv["gap"] >= 1e3
    assert dv["kernel_residual"] < 1e-9
    Q = (v_matrix(fuchsian) @ dv["H_basis"])
    assert np.abs(CochainComplex(fuchsian).Delta1 @ Q).max() < 1e-9


def test_real_split(fuchsian):
    sc = fuchsian.complex
    rng = np.random.default_rng(5)
    basis = [mg.sl2_to_vec(N) for N in v_basis(fuchsian)]
    c = rng.normal(size=sc.n_edges) + 1j * rng.normal(size=sc.n_edges)
    Q = np.array([ck * n for ck, n in zip(c, basis)])
    Q1, Q2 = real_split(fuchsian, Q)
    assert np.abs(Q1 + 1j * Q2 - Q).max() < 1e-10 * np.abs(Q).max()
    for k in range(sc.n_edges):
        t, s = sc.edge_rep(k)
        for X in (fuchsian.corner_disk(t, s), fuchsian.corner_disk(t, (s + 1) % 3)):
            for part in (Q1[k], Q2[k]):
                assert np.abs(mg.infinitesimal_action(mg.vec_to_sl2(part), X)).max() < 1e-9
    # real and purely imaginary tangential cochains
    R1, R2 = real_split(fuchsian, Q1)
    assert np.abs(R2).max() < 1e-12 and np.allclose(R1, Q1)
    R1, R2 = real_split(fuchsian, 1j * Q2)
    assert np.abs(R1).max() < 1e-12 and np.allclose(R2, Q2)
    with pytest.raises(RigidityError):
        real_split(fuchsian, Q + rng.normal(size=Q.shape))


def test_totally_real(fuchsian, model, jreport):
    tr = totally_real_report(fuchsian, model, jreport)
    assert tr["dim_HR"] == 6 and tr["complex_rank"] == 6 and tr["real_rank"] == 6
    assert tr["v_residual"] < 1e-8 and tr["delta_residual"] < 1e-7
    assert tr["max_angle_sine"] < 1e-5
    # H_R meets i H_R only in 0: the real span of [A, iA] has dimension 12
    A = tr["coords"]
    assert numerical_rank(realify(A))["rank"] == 12


@pytest.mark.parametrize("base", [0, 9, 17])
def test_routes_agree_after_regauge(fuchsian, base):
    from packrig.rigidity_lab import build_jacobian, jacobian_rank_report
    p = fuchsian.regauge(base)
    m = build_jacobian(p)
    jr = jacobian_rank_report(m)
    tr = totally_real_report(p, m, jr)
    assert jr["kernel_mod_orbit"] == tr["complex_rank"] == delta_on_v_report(p)["dim_H"] == 6
    assert tr["max_angle_sine"] < 1e-5


def test_vanishing_certificate(fuchsian):
    van = vanishing_certificate(fuchsian)
    assert van["shape"] == [72, 60]
    assert van["kernel"] == 0 and van["alt_kernel"] == 0 and van["status"] == "ok"
    assert van["ratio"] > 1e-6
    assert van["assembly_difference"] < 1e-10
    assert van["alt_sigma_min"] == pytest.approx(van["sigma_min"], rel=1e-8)
