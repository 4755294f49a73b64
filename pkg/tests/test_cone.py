import json

import numpy as np
import pytest

from services.acvt import AlgCurvTensor, constant_curvature, pullback, random_acvt, random_cone_tensor
from services.cone import (
    FourTuple,
    build_block_matrix,
    cone_membership,
    deform_to_boundary,
    frame_form,
    frame_scan_min,
    isotropic_form,
    q_boundary_decomposition,
    second_variation_fd,
    second_variation_form,
    trace_inequality_value,
    tuple_nondegeneracy,
)
from services.errors import DimensionMismatchError, ValidationError


def random_tuple(rng, d):
    return FourTuple.from_array(rng.standard_normal((4, d)))


@pytest.fixture(scope="module")
def boundary_instances():
    return [deform_to_boundary(random_cone_tensor(seed, d), seed=seed) for d in (4, 5) for seed in range(3)]


def test_isotropic_form_on_round_tensor():
    e = np.eye(4)
    S = constant_curvature(1.0, np.eye(4))
    assert isotropic_form(S, FourTuple(e[0], e[1], e[2], e[3])) == pytest.approx(4.0)


def test_trivial_zero_is_degenerate():
    rng = np.random.default_rng(0)
    v, w = rng.standard_normal((2, 4))
    trivial = FourTuple(v, w, v, w)
    S = random_acvt(rng, 4)
    assert isotropic_form(S, trivial) == pytest.approx(0.0, abs=1e-10 * S.norm())
    assert tuple_nondegeneracy(trivial) == pytest.approx(0.0, abs=1e-12)


def test_frame_form_matches_isotropic_form():
    rng = np.random.default_rng(1)
    S = random_acvt(rng, 5)
    frame = np.linalg.qr(rng.standard_normal((5, 4)))[0].T
    lam, mu = 0.3, -0.7
    e1, e2, e3, e4 = frame
    expected = isotropic_form(S, FourTuple(e1, mu * e2, e3, lam * e4))
    assert frame_form(S, frame, lam, mu) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_frame_form_requires_orthonormal_frame():
    S = constant_curvature(1.0, np.eye(4))
    with pytest.raises(ValidationError):
        frame_form(S, 2.0 * np.eye(4), 0.5, 0.5)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_cone_tensors_are_members(d):
    for seed in range(5):
        cert = cone_membership(random_cone_tensor(seed, d), seed=seed)
        assert cert.member
        assert cert.min_value >= -1e-8 * cert.scale


def test_negative_curvature_certificate_is_exact():
    S = constant_curvature(-1.0, np.eye(4))
    cert = cone_membership(S)
    assert not cert.member
    assert cert.min_value < 0
    witness = FourTuple.from_array(json.loads(cert.to_json())["argmin"])
    assert isotropic_form(S, witness) == pytest.approx(cert.min_value, rel=1e-12)


def test_membership_is_invariant_under_linear_maps():
    rng = np.random.default_rng(4)
    S = random_cone_tensor(4, 4)
    L = np.eye(4) + 0.4 * rng.standard_normal((4, 4))
    assert cone_membership(pullback(S, L)).member


def test_membership_rejects_invalid_tensor():
    comps = np.zeros((3,) * 4)
    comps[0, 1, 0, 1] = 1.0
    with pytest.raises(ValidationError):
        cone_membership(AlgCurvTensor(comps))


def test_frame_scan_agrees_with_membership():
    assert frame_scan_min(random_cone_tensor(0, 4), samples=100) >= -1e-10
    assert frame_scan_min(constant_curvature(-1.0, np.eye(4)), samples=20) < 0
    with pytest.raises(DimensionMismatchError):
        frame_scan_min(constant_curvature(1.0, np.eye(3)))


def test_second_variation_matches_finite_differences():
    rng = np.random.default_rng(2)
    for _ in range(25):
        S = random_acvt(rng, 4)
        v, w = random_tuple(rng, 4), random_tuple(rng, 4)
        exact = second_variation_form(S, v, w)
        assert second_variation_fd(S, v, w) == pytest.approx(exact, rel=1e-6, abs=1e-6)


def test_q_identity_holds_for_random_tensors():
    rng = np.random.default_rng(3)
    for d in (3, 4, 5):
        for _ in range(10):
            S = random_acvt(rng, d)
            lhs, rhs = q_boundary_decomposition(S, random_tuple(rng, d).normalized())
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_block_matrix_reproduces_second_variation():
    rng = np.random.default_rng(5)
    S = random_acvt(rng, 5)
    v = random_tuple(rng, 5)
    rows = rng.standard_normal((4, 5))
    rows[:, -1] = 0.0
    w = FourTuple.from_array(rows)
    bundle = build_block_matrix(S, v)
    x = np.concatenate([rows[k, :4] for k in range(4)])
    assert bundle.big.shape == (16, 16)
    assert x @ bundle.big @ x == pytest.approx(second_variation_form(S, v, w), rel=1e-10)


def test_boundary_deformation_finds_a_nondegenerate_zero(boundary_instances):
    for B, witness, theta in boundary_instances:
        assert abs(isotropic_form(B, witness)) <= 1e-8 * B.norm()
        assert tuple_nondegeneracy(witness.normalized()) > 1e-6
        assert cone_membership(B, starts=8).min_value >= -1e-8 * B.norm()


def test_positivity_at_boundary_tuples(boundary_instances):
    rng = np.random.default_rng(6)
    for B, witness, _ in boundary_instances:
        scale = B.scale()
        bundle = build_block_matrix(B, witness)
        assert bundle.min_eigenvalue() >= -1e-6 * scale
        assert trace_inequality_value(bundle) >= -1e-6 * scale**2
        lhs, _ = q_boundary_decomposition(B, witness)
        assert lhs >= -1e-6 * scale**2
        assert second_variation_form(B, witness, random_tuple(rng, B.dim)) >= -1e-6 * scale


def test_tuple_dimension_must_match():
    with pytest.raises(DimensionMismatchError):
        isotropic_form(constant_curvature(1.0, np.eye(4)), FourTuple.from_array(np.ones((4, 3))))
