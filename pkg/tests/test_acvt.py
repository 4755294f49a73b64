import io

import numpy as np
import pytest

from services.acvt import (
    AlgCurvTensor,
    ContractionMetric,
    axiom_residuals,
    constant_curvature,
    contract_ricci,
    contract_scal,
    dump_acvt,
    kulkarni_nomizu,
    load_acvt,
    pullback,
    q_map,
    random_acvt,
    random_cone_tensor,
    tensor_norm,
    validate_acvt,
)
from services.errors import DimensionMismatchError, ValidationError


def test_kulkarni_nomizu_is_a_curvature_tensor():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    T = kulkarni_nomizu(A + A.T, B + B.T)
    assert validate_acvt(T).ok


def test_kulkarni_nomizu_rejects_asymmetric_input():
    with pytest.raises(ValidationError):
        kulkarni_nomizu(np.arange(9.0).reshape(3, 3), np.eye(3))


def test_constant_curvature_sectional_and_ricci():
    R = constant_curvature(2.0, np.eye(4))
    e = np.eye(4)
    assert R(e[0], e[1], e[0], e[1]) == pytest.approx(2.0)
    assert R(e[0], e[1], e[1], e[0]) == pytest.approx(-2.0)
    ric = contract_ricci(R, ContractionMetric.identity(4))
    assert np.allclose(ric, 6.0 * np.eye(4))
    assert contract_scal(ric, ContractionMetric.identity(4)) == pytest.approx(24.0)


def test_spatial_contraction_ignores_last_index():
    R = constant_curvature(1.0, np.eye(4))
    ric = contract_ricci(R, ContractionMetric.spatial(np.eye(3)))
    assert np.allclose(np.diag(ric), [2.0, 2.0, 2.0, 3.0])


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_q_map_preserves_curvature_symmetries(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        Q = q_map(random_acvt(rng, d), ContractionMetric.identity(d))
        assert max(axiom_residuals(Q.comps).values()) <= 1e-10 * max(1.0, Q.scale())


def test_q_of_round_curvature_is_riccati_rate():
    Q = q_map(constant_curvature(1.0, np.eye(3)), ContractionMetric.identity(3))
    assert np.allclose(Q.comps, constant_curvature(4.0, np.eye(3)).comps)


def test_q_of_zero_is_zero():
    assert q_map(AlgCurvTensor.zeros(4), ContractionMetric.identity(4)).norm() == 0.0


def test_tensor_validation_errors():
    with pytest.raises(DimensionMismatchError):
        AlgCurvTensor(np.zeros((3, 3, 3)))
    with pytest.raises(DimensionMismatchError):
        AlgCurvTensor.zeros(17)
    with pytest.raises(DimensionMismatchError):
        AlgCurvTensor.zeros(3) + AlgCurvTensor.zeros(4)
    T = AlgCurvTensor.zeros(3)
    with pytest.raises(ValueError):
        T.comps[0, 1, 0, 1] = 1.0


def test_validate_flags_broken_bianchi():
    # (e0 ^ e1) (.) (e2 ^ e3): antisymmetric and pair symmetric, not Bianchi
    comps = np.zeros((4,) * 4)
    comps[0, 1, 2, 3] = comps[1, 0, 3, 2] = comps[2, 3, 0, 1] = comps[3, 2, 1, 0] = 1.0
    comps[1, 0, 2, 3] = comps[0, 1, 3, 2] = comps[3, 2, 0, 1] = comps[2, 3, 1, 0] = -1.0
    report = validate_acvt(AlgCurvTensor(comps))
    assert not report.ok
    assert report.violations == ["first_bianchi"]


def test_contraction_metric_must_be_psd():
    with pytest.raises(ValidationError):
        ContractionMetric(np.diag([1.0, -1.0]))
    assert ContractionMetric(np.diag([1.0, 0.0])).dim == 2


def test_pullback_scales_quartically():
    S = random_cone_tensor(3, 4)
    assert np.allclose(pullback(S, np.eye(4)).comps, S.comps)
    assert np.allclose(pullback(S, 2.0 * np.eye(4)).comps, 16.0 * S.comps)


def test_tensor_norm_matches_frobenius_for_identity():
    S = random_acvt(np.random.default_rng(1), 4)
    assert tensor_norm(S, ContractionMetric.identity(4)) == pytest.approx(S.norm())
    assert tensor_norm(S, 4.0 * np.eye(4)) == pytest.approx(16.0 * S.norm())


def test_embed_pads_with_zeros():
    R = constant_curvature(1.0, np.eye(3)).embed(4)
    assert R.dim == 4
    assert np.all(R.comps[3] == 0.0)
    assert validate_acvt(R).ok


def test_text_format_round_trip():
    S = random_acvt(np.random.default_rng(2), 3)
    buffer = io.StringIO()
    dump_acvt(S, buffer)
    buffer.seek(0)
    assert np.array_equal(load_acvt(buffer).comps, S.comps)


def test_text_format_requires_header(tmp_path):
    path = tmp_path / "bad.acvt"
    path.write_text("0 1 0 1 1.0\n")
    with pytest.raises(ValidationError):
        load_acvt(path)


@pytest.mark.parametrize("entry", ["-1 0 0 1 1.0", "0 1 0 3 1.0"])
def test_text_format_rejects_out_of_range_indices(entry):
    with pytest.raises(ValidationError, match="line 2"):
        load_acvt(io.StringIO(f"acvt d=3\n{entry}\n"))
