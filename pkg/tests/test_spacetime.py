import math

import numpy as np
import pytest

from services.cone import FourTuple, isotropic_form
from services.errors import DomainError, RicciDefinitenessError
from services.geometries import GridSpec, cigar_flow, flat_flow, sphere_flow, warped_flow
from services.spacetime import (
    HarnackMode,
    SolitonMode,
    assemble_spacetime_S,
    compute_point,
    equality_vector,
    evolution_residual,
    evolution_terms,
    h_evolution_check,
    hamilton_identity_residual,
    harnack_form,
    harnack_min,
    kn_perturbation,
    parallel_transport,
    residual_study,
    soliton_detect,
    trace_harnack,
    trace_harnack_min,
)

T = 0.1


@pytest.fixture(scope="module")
def sphere():
    return sphere_flow(3, 1.0)


@pytest.fixture(scope="module")
def warped():
    return warped_flow(3, "perturbed", GridSpec(ns=41, save_every=4), t_end=0.05)


def kappa_terms(sphere, t=T):
    kappa = sphere.kappa(t)
    return kappa, 4.0 * kappa**2 + kappa / t


def unit(pt, w):
    w = np.asarray(w, dtype=float)
    return w / math.sqrt(w @ pt.g @ w)


def test_flat_space_time_quantities_vanish():
    pt = compute_point(flat_flow(3), np.array([0.3, 0.1, -0.2]), 0.5)
    assert np.all(pt.P == 0.0) and np.all(pt.M == 0.0)
    assert assemble_spacetime_S(pt).norm() == 0.0
    with pytest.raises(RicciDefinitenessError):
        trace_harnack_min(pt)
    value, _, _ = harnack_min(pt, starts=3)
    assert value == pytest.approx(0.0, abs=1e-12)


def test_sphere_m_and_p(sphere):
    kappa, m = kappa_terms(sphere)
    for x in (np.zeros(3), np.array([0.4, -0.2, 0.7])):
        pt = compute_point(sphere, x, T)
        assert np.allclose(pt.M, m * pt.g, rtol=1e-10, atol=1e-10 * m)
        assert np.max(np.abs(pt.P)) <= 1e-10 * m
        assert pt.scal == pytest.approx(6.0 * kappa)


def test_mode_switch_moves_only_the_ricci_term(sphere):
    x = np.array([0.2, 0.3, -0.1])
    with_t = compute_point(sphere, x, T, HarnackMode.WITH_1_OVER_T)
    ancient = compute_point(sphere, x, T, HarnackMode.ANCIENT)
    assert np.allclose(ancient.m_for(HarnackMode.WITH_1_OVER_T), with_t.M, rtol=1e-10)
    assert np.allclose(with_t.m_for(HarnackMode.ANCIENT), ancient.M, rtol=1e-10, atol=1e-10)
    assert np.allclose(with_t.M - ancient.M, with_t.ric / (2.0 * T), rtol=1e-10)


@pytest.mark.parametrize("mode", list(HarnackMode))
def test_sphere_evolution_and_hamilton_residuals(sphere, mode):
    for x, t in sphere.sample_points(2, 3):
        terms = evolution_terms(sphere, x, t, mode=mode)
        assert terms.relative() <= 1e-9
        pt = compute_point(sphere, x, t, mode)
        residual = hamilton_identity_residual(sphere, x, t, mode=mode)
        assert np.linalg.norm(residual) <= 1e-9 * max(np.linalg.norm(pt.M), 1.0)


def test_cigar_evolution_residual():
    cigar = cigar_flow()
    for x, t in cigar.sample_points(2, 2):
        assert evolution_terms(cigar, x, t, mode=HarnackMode.ANCIENT).relative() <= 1e-9


def test_time_floor_is_enforced(sphere):
    with pytest.raises(DomainError):
        evolution_residual(sphere, np.zeros(3), 5.0e-4)
    with pytest.raises(DomainError):
        compute_point(sphere, np.zeros(3), 0.0)
    with pytest.raises(DomainError):
        compute_point(sphere, np.zeros(3), 0.3)


def test_h_identities_on_flat_space():
    v = np.array([1.0, 0.0, 0.0])
    lhs, rhs, grad_lhs, grad_rhs = h_evolution_check(flat_flow(3), np.zeros(3), 0.4, v)
    assert rhs == pytest.approx(1.5)
    assert grad_rhs == pytest.approx(0.5)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert grad_lhs == pytest.approx(grad_rhs, rel=1e-10)


def test_h_identities_on_the_sphere(sphere):
    lhs, rhs, grad_lhs, grad_rhs = h_evolution_check(sphere, np.zeros(3), T, np.ones(3))
    assert rhs == pytest.approx(4.1666666666666667, rel=1e-10)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert grad_lhs == pytest.approx(grad_rhs, rel=1e-10)


def test_sphere_harnack_form(sphere):
    kappa, m = kappa_terms(sphere)
    pt = compute_point(sphere, np.zeros(3), T)
    w = unit(pt, [1.0, 0.0, 0.0])
    v = unit(pt, [0.0, 1.0, 0.0])
    assert harnack_form(pt, np.zeros(3), w).value == pytest.approx(m, rel=1e-10)
    report = harnack_form(pt, v, w)
    assert report.r_term == pytest.approx(kappa, rel=1e-10)
    assert report.p_term == pytest.approx(0.0, abs=1e-10)
    assert report.value == pytest.approx(m + kappa, rel=1e-10)
    assert harnack_form(pt, v, w, HarnackMode.ANCIENT).value == pytest.approx(4.0 * kappa**2 + kappa, rel=1e-10)


def test_harnack_form_is_the_isotropic_form_of_s():
    cigar = cigar_flow()
    rng = np.random.default_rng(3)
    pt = compute_point(cigar, np.array([0.5, -0.8]), 0.4, HarnackMode.ANCIENT)
    S = assemble_spacetime_S(pt)
    for _ in range(5):
        v, w = rng.standard_normal((2, 2))
        tuple_ = FourTuple(np.append(v, 1.0), np.zeros(3), np.append(w, 0.0), np.zeros(3))
        assert harnack_form(pt, v, w).value == pytest.approx(isotropic_form(S, tuple_), rel=1e-10, abs=1e-12)


def test_traced_form_is_half_the_trace_harnack(sphere):
    rng = np.random.default_rng(5)
    for provider, x, t in ((sphere, np.array([0.3, 0.2, -0.5]), 0.15), (cigar_flow(), np.array([0.7, 0.1]), 0.3)):
        pt = compute_point(provider, x, t)
        basis = np.linalg.cholesky(pt.g_inv)
        v = rng.standard_normal(provider.n)
        traced = sum(harnack_form(pt, v, basis[:, j]).value for j in range(provider.n))
        assert traced == pytest.approx(0.5 * trace_harnack(pt, v), rel=1e-10)


def test_sphere_trace_minimum(sphere):
    value, v_star = trace_harnack_min(compute_point(sphere, np.zeros(3), T))
    assert value == pytest.approx(166.66666666666666, rel=1e-10)
    assert np.allclose(v_star, 0.0, atol=1e-10)


@pytest.mark.parametrize("mode", list(HarnackMode))
def test_trace_minimum_is_attained_at_v_star(mode):
    pt = compute_point(cigar_flow(), np.array([0.7, -0.4]), 0.3, mode)
    assert np.linalg.norm(pt.dscal) > 1e-3
    value, v_star = trace_harnack_min(pt)
    assert value == pytest.approx(trace_harnack(pt, v_star), rel=1e-10, abs=1e-12)
    rng = np.random.default_rng(2)
    for dv in rng.standard_normal((5, 2)):
        assert trace_harnack(pt, v_star + 0.1 * dv) >= value


def test_sphere_harnack_minimum(sphere):
    _, m = kappa_terms(sphere)
    pt = compute_point(sphere, np.array([0.1, 0.2, 0.3]), T)
    value, v, w = harnack_min(pt, starts=4, seed=1)
    assert value == pytest.approx(m, rel=1e-8)
    assert w @ pt.g @ w == pytest.approx(1.0)


def test_cigar_is_an_equality_case():
    cigar = cigar_flow()
    for x, t in cigar.sample_points(3, 2):
        pt = compute_point(cigar, x, t, HarnackMode.ANCIENT)
        value, v_star = trace_harnack_min(pt)
        assert abs(value) <= 1e-8 * max(abs(pt.dt_scal), 1.0)
        assert np.allclose(v_star, cigar.soliton_field(x), rtol=1e-8, atol=1e-10)
        assert equality_vector(pt) is not None


def test_soliton_detect_on_the_cigar():
    cigar = cigar_flow()
    points = [x for x, _ in cigar.sample_points(4, 1)]
    result = soliton_detect(cigar, 0.5, points, SolitonMode.STEADY)
    assert result.is_soliton
    for x, V in zip(result.points, result.V):
        assert np.allclose(V, cigar.soliton_field(x), rtol=1e-8, atol=1e-10)


def test_soliton_detect_on_the_sphere(sphere):
    kappa = sphere.kappa(T)
    points = [np.zeros(3), np.array([0.3, -0.4, 0.2])]
    expanding = soliton_detect(sphere, T, points, SolitonMode.EXPANDING)
    assert not expanding.is_soliton
    assert expanding.residual_norm == pytest.approx((2.0 * kappa + 0.5 / T) * math.sqrt(3), rel=1e-9)
    steady = soliton_detect(sphere, T, points, "steady")
    assert steady.residual_norm == pytest.approx(2.0 * kappa * math.sqrt(3), rel=1e-9)


def test_soliton_detect_needs_positive_ricci():
    with pytest.raises(RicciDefinitenessError):
        soliton_detect(flat_flow(2), 0.5, [np.zeros(2)])


def test_flat_transport_of_the_time_direction():
    t0 = 0.25
    path = np.array([[0.0, 0.0, 0.0], [0.5, 0.2, 0.0], [0.5, -0.4, 1.0]])
    moved = parallel_transport(flat_flow(3), t0, path, np.array([0.0, 0.0, 0.0, 1.0]))
    assert np.allclose(moved, np.append((path[-1] - path[0]) / (2.0 * t0), 1.0), atol=1e-12)
    steady = parallel_transport(flat_flow(3), t0, path, np.array([0.0, 0.0, 0.0, 1.0]), HarnackMode.ANCIENT)
    assert np.allclose(steady, [0.0, 0.0, 0.0, 1.0], atol=1e-12)
    spatial = np.array([0.3, -1.0, 2.0, 0.0])
    assert np.allclose(parallel_transport(flat_flow(3), t0, path, spatial), spatial, atol=1e-12)


def test_cigar_transport_keeps_the_equality_vector():
    cigar = cigar_flow()
    t0 = 0.5
    path = np.array([[0.2, -0.3], [0.9, 0.1], [0.4, 0.8]])
    _, v_star = trace_harnack_min(compute_point(cigar, path[0], t0, HarnackMode.ANCIENT))
    moved = parallel_transport(cigar, t0, path, np.append(v_star, 1.0), HarnackMode.ANCIENT, steps=64)
    end = compute_point(cigar, path[-1], t0, HarnackMode.ANCIENT)
    assert abs(trace_harnack(end, moved[:-1] / moved[-1])) <= 1e-6 * max(abs(end.dt_scal), 1.0)


def test_kn_perturbation(sphere):
    pt = compute_point(sphere, np.array([0.2, 0.0, 0.1]), T)
    for C in (0.0, 1.0):
        perturbed, cert, ratio = kn_perturbation(pt, C, starts=8)
        assert cert.member
        assert ratio > 0
    with pytest.raises(ValueError):
        kn_perturbation(pt, -1.0)


@pytest.mark.slow
def test_warped_p_is_antisymmetric_and_nonzero(warped):
    x, t = warped.sample_points(3, 2)[0]
    pt = compute_point(warped, x, t)
    assert np.max(np.abs(pt.P + np.swapaxes(pt.P, 0, 1))) <= 1e-10 * np.max(np.abs(pt.P))
    assert np.max(np.abs(pt.P)) > 1e-6


@pytest.mark.slow
def test_warped_harnack_minimum_is_nonnegative(warped):
    for x, t in warped.sample_points(2, 2):
        pt = compute_point(warped, x, t)
        value, _, _ = harnack_min(pt, starts=4)
        assert value >= -1e-6 * max(assemble_spacetime_S(pt).scale(), 1.0)


@pytest.mark.slow
def test_warped_residuals_converge_at_second_order(warped):
    flow = warped.flow
    node = int(round(0.35 * (flow.ns - 1)))
    x = np.array([node * flow.dx, math.pi / 2 - 0.3, math.pi / 2 - 0.1])
    t = float(flow.times[flow.nt // 2 + 1])
    fine = warped_flow(3, "perturbed", warped.grid.refined(), float(flow.times[-1]))
    study = residual_study([warped, fine], x, t, "evolution")
    assert list(study.columns) == ["h_grid", "residual_norm", "rate"]
    assert math.isnan(study["rate"].iloc[0])
    assert 1.5 < study["rate"].iloc[-1] < 2.5
