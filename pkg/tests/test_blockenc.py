import numpy as np
import pytest

from qmarch.blockenc import (
    BlockEncoding,
    Placement,
    camps_encode,
    hamsim_encode,
    lin_encode,
    success_probability,
)
from qmarch.operators import BoundaryType, MarchingSpec, marching_matrix
from qmarch.statevector import GateOp, StateVector, apply_gate, project_zero


def unitarity_defect(u):
    return np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))


def random_hermitian_contraction(dim, rng):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (raw + raw.conj().T) / 2
    return h / (np.linalg.norm(h, 2) * 1.01)


def sine_transform(m, theta):
    w, s, xh = np.linalg.svd(m)
    return (w * np.sin(s * theta)) @ xh


def test_camps_zero_block():
    u = camps_encode(np.zeros((2, 2))).u
    expect = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    assert np.allclose(u, expect)


def test_camps_half_identity():
    be = camps_encode(np.eye(2) / 2)
    c = 0.8660254037844386
    expect = np.block([[0.5 * np.eye(2), c * np.eye(2)], [c * np.eye(2), -0.5 * np.eye(2)]])
    assert np.allclose(be.u, expect, atol=1e-12)
    assert be.placement is Placement.UPPER_LEFT
    assert be.alpha == 1.0


def test_camps_marching_matrix():
    a = marching_matrix(MarchingSpec(4, 0.2, (BoundaryType.PERIODIC,)))
    be = camps_encode(a)
    assert unitarity_defect(be.u) <= 1e-12
    assert np.allclose(be.block, a, atol=1e-12)


def test_camps_rejects_expansion():
    with pytest.raises(ValueError, match="spectral norm"):
        camps_encode(2.0 * np.eye(2))


def test_camps_rejects_noncommuting():
    nilpotent = np.array([[0.0, 0.5], [0.0, 0.0]])
    with pytest.raises(ValueError, match="commute"):
        camps_encode(nilpotent)


def test_lin_identity():
    be = lin_encode(np.eye(2), seed=0)
    assert np.allclose(be.block, np.eye(2), atol=1e-12)
    assert np.allclose(be.u[2:, :2], 0.0, atol=1e-12)
    assert be.alpha == 1.0


def test_lin_rescales_by_largest_singular_value():
    be = lin_encode(np.diag([2.0, 1.0]), seed=7)
    assert be.alpha == pytest.approx(2.0)
    assert np.allclose(be.block, np.diag([1.0, 0.5]), atol=1e-12)
    assert unitarity_defect(be.u) <= 1e-10
    assert np.allclose(be.block * be.alpha, be.source, atol=1e-10)


def test_lin_first_block_column_is_seed_free():
    rng = np.random.default_rng(11)
    m = rng.standard_normal((4, 4))
    a = lin_encode(m, seed=3)
    b = lin_encode(m, seed=4)
    assert unitarity_defect(a.u) <= 1e-10
    assert unitarity_defect(b.u) <= 1e-10
    assert np.array_equal(a.u[:, :4], b.u[:, :4])
    assert not np.allclose(a.u[:, 4:], b.u[:, 4:])


def test_lin_rejects_zero():
    with pytest.raises(ValueError, match="zero"):
        lin_encode(np.zeros((3, 3)), seed=0)


def test_hamsim_identity_quarter_turn():
    be = hamsim_encode(np.eye(2), np.pi / 2)
    assert be.placement is Placement.LOWER_LEFT
    assert be.postselect_outcome == 1
    assert np.allclose(be.block, np.eye(2), atol=1e-12)


def test_hamsim_zero_angle():
    rng = np.random.default_rng(2)
    m = random_hermitian_contraction(3, rng)
    be = hamsim_encode(m, 0.0)
    assert np.allclose(be.u, np.eye(6), atol=1e-12)
    assert np.allclose(be.block, 0.0, atol=1e-12)


def test_hamsim_matches_svd_closed_form():
    a = marching_matrix(MarchingSpec(4, 0.2, (BoundaryType.PERIODIC,)))
    be = hamsim_encode(a, np.pi / 2)
    assert np.allclose(be.block, sine_transform(a, np.pi / 2), atol=1e-10)
    rng = np.random.default_rng(17)
    for _ in range(10):
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        m /= np.linalg.norm(m, 2) * 1.05
        theta = rng.uniform(-3.0, 3.0)
        assert np.allclose(hamsim_encode(m, theta).block, sine_transform(m, theta), atol=1e-10)


def test_hamsim_block_is_odd_in_theta():
    rng = np.random.default_rng(29)
    m = rng.standard_normal((4, 4)) / 4
    assert np.allclose(hamsim_encode(m, 0.7).block, -hamsim_encode(m, -0.7).block, atol=1e-12)


@pytest.mark.parametrize("encoder", ["camps", "lin", "hamsim"])
def test_unitarity_over_random_inputs(encoder):
    for seed in range(50):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 17))
        if encoder == "camps":
            be = camps_encode(random_hermitian_contraction(dim, rng))
        elif encoder == "lin":
            be = lin_encode(rng.standard_normal((dim, dim)), seed=seed)
        else:
            be = hamsim_encode(
                rng.standard_normal((dim, dim)) / (2 * dim), rng.uniform(-2, 2)
            )
        assert unitarity_defect(be.u) <= 1e-10


def test_extraction_times_alpha_recovers_source():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((6, 6))
    be = lin_encode(m, seed=1)
    assert np.allclose(be.block * be.alpha, m, atol=1e-10)
    h = random_hermitian_contraction(6, rng)
    assert np.allclose(camps_encode(h).block, h, atol=1e-10)
    # the dilation encoder lands the sine transform, not the source
    be = hamsim_encode(h, np.pi / 2)
    assert np.allclose(be.block, sine_transform(h, np.pi / 2), atol=1e-10)
    assert not np.allclose(be.block, h, atol=1e-3)


def test_success_probability_identity():
    be = camps_encode(np.eye(4))
    psi = np.array([0.5, 0.5, 0.5, 0.5])
    assert success_probability(be, psi) == pytest.approx(1.0, abs=1e-12)


def test_success_probability_uniform_fixed_point():
    a = marching_matrix(MarchingSpec(8, 0.2, (BoundaryType.NEUMANN,)))
    be = camps_encode(a)
    psi = StateVector(3, np.full(8, 1 / np.sqrt(8)))
    assert success_probability(be, psi) == pytest.approx(1.0, abs=1e-12)


def test_success_probability_matches_dilated_run():
    a = marching_matrix(MarchingSpec(8, 0.2, (BoundaryType.PERIODIC,)))
    be = hamsim_encode(a, np.pi / 4)
    psi = np.full(8, 1 / np.sqrt(8))
    # ancilla is the top qubit of the 16-dim dilation
    full = StateVector(4, np.kron([1.0, 0.0], psi))
    gate = GateOp.unitary(be.u, (0, 1, 2, 3))
    out = apply_gate(full, gate)
    # the block lives on ancilla |1>: flip, then keep |0>
    flipped = apply_gate(out, GateOp.x(0))
    _, p = project_zero(flipped, [0])
    assert success_probability(be, psi) == pytest.approx(p, abs=1e-12)


def test_success_probability_upper_left_matches_projection():
    rng = np.random.default_rng(13)
    h = random_hermitian_contraction(4, rng)
    be = camps_encode(h)
    psi = rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    full = StateVector(3, np.kron([1.0, 0.0], psi))
    out = apply_gate(full, GateOp.unitary(be.u, (0, 1, 2)))
    _, p = project_zero(out, [0])
    assert success_probability(be, psi) == pytest.approx(p, abs=1e-12)


def test_success_probability_validation():
    be = camps_encode(np.eye(2))
    with pytest.raises(ValueError, match="length"):
        success_probability(be, np.ones(3) / np.sqrt(3))
    with pytest.raises(ValueError, match="normalized"):
        success_probability(be, np.array([1.0, 1.0]))


def test_block_encoding_validation():
    with pytest.raises(ValueError, match="not unitary"):
        BlockEncoding(np.eye(4) * 1.5, 1.0, Placement.UPPER_LEFT, np.eye(2))
    with pytest.raises(ValueError, match="dilate"):
        BlockEncoding(np.eye(4), 1.0, Placement.UPPER_LEFT, np.eye(3))
    with pytest.raises(ValueError, match="alpha"):
        BlockEncoding(np.eye(4), 0.5, Placement.UPPER_LEFT, np.eye(2))
