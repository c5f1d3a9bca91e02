import numpy as np
import pytest

from qmarch.operators import (
    BoundaryType,
    LcuTerm,
    MarchingSpec,
    StabilityError,
    decompose,
    marching_matrix,
    shift_circuit,
    shift_matrix,
    stability_check,
    term_matrix,
)
from qmarch.statevector import StateVector, circuit_to_matrix, run_circuit

P, N, D = BoundaryType.PERIODIC, BoundaryType.NEUMANN, BoundaryType.DIRICHLET


def test_s0_matrix_band_structure():
    m = shift_matrix("s0", 2)
    expect = np.zeros((4, 4))
    for r, c in [(0, 1), (1, 2), (2, 3), (3, 0)]:
        expect[r, c] = 1
    assert np.array_equal(m, expect)


def test_s1_matrix_is_kron_identity_x():
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(shift_matrix("s1", 2), np.kron(np.eye(2), x))
    assert np.array_equal(shift_matrix("s1", 3), np.kron(np.eye(4), x))


def test_s2_matrix_corners_fixed():
    m = shift_matrix("s2", 2)
    expect = np.zeros((4, 4))
    for r, c in [(0, 0), (1, 2), (2, 1), (3, 3)]:
        expect[r, c] = 1
    assert np.array_equal(m, expect)


def test_s0_moves_basis_vectors_down():
    m = shift_matrix("s0", 3)
    for j in range(8):
        e = np.zeros(8)
        e[j] = 1
        assert np.argmax(m @ e) == (j - 1) % 8


@pytest.mark.parametrize("kind", ["s0", "s0dag", "s1", "s2"])
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_shift_circuits_match_matrices_exactly(kind, n):
    got = circuit_to_matrix(shift_circuit(kind, n)).real
    assert np.array_equal(got, shift_matrix(kind, n))


def test_s0_circuit_on_basis_one():
    out = run_circuit(StateVector.basis(3, 1), shift_circuit("s0", 3))
    assert np.allclose(out.amps, StateVector.basis(3, 0).amps)


def test_shift_involutions_and_inverse():
    for n in (2, 3):
        assert np.array_equal(shift_matrix("s0", n) @ shift_matrix("s0dag", n), np.eye(1 << n))
        for kind in ("s1", "s2"):
            m = shift_matrix(kind, n)
            assert np.array_equal(m @ m, np.eye(1 << n))


def test_s1_circuit_is_single_x_on_lsb():
    c = shift_circuit("s1", 4)
    assert len(c.ops) == 1
    assert c.ops[0].kind == "x" and c.ops[0].targets == (3,)


def test_shift_rejects_bad_sizes():
    with pytest.raises(ValueError):
        shift_matrix("s0", 0)
    with pytest.raises(ValueError):
        shift_matrix("s2", 1)
    with pytest.raises(ValueError):
        shift_circuit("s2", 1)


def test_marching_periodic_rows():
    a = marching_matrix(MarchingSpec(4, 0.2, (P,)))
    assert np.allclose(a[0], [0.6, 0.2, 0.0, 0.2])
    assert np.allclose(a[2], [0.0, 0.2, 0.6, 0.2])


def test_marching_neumann_corners():
    a = marching_matrix(MarchingSpec(4, 0.2, (N,)))
    assert a[0, 0] == pytest.approx(0.8)
    assert a[3, 3] == pytest.approx(0.8)
    assert a[0, 3] == 0.0 and a[3, 0] == 0.0
    assert np.allclose(a[1], [0.2, 0.6, 0.2, 0.0])


def test_marching_dirichlet_corners():
    a = marching_matrix(MarchingSpec(4, 0.2, (D,)))
    assert a[0, 0] == pytest.approx(0.6)
    assert a[3, 3] == pytest.approx(0.6)
    assert a[0, 3] == 0.0 and a[3, 0] == 0.0


def test_row_sums_conservative():
    for bc in (P, N):
        for d in (1, 2):
            a = marching_matrix(MarchingSpec(8, 0.2, (bc,) * d))
            assert np.allclose(a.sum(axis=1), 1.0, atol=1e-14)


def test_marching_2d_is_kron_sum():
    spec = MarchingSpec(4, 0.1, (N, P))
    a = marching_matrix(spec)
    c_n = marching_matrix(MarchingSpec(4, 0.1, (N,))) - 0.8 * np.eye(4)
    c_p = marching_matrix(MarchingSpec(4, 0.1, (P,))) - 0.8 * np.eye(4)
    expect = 0.6 * np.eye(16) + np.kron(c_n, np.eye(4)) + np.kron(np.eye(4), c_p)
    assert np.allclose(a, expect, atol=1e-14)


def test_periodic_matrix_matches_shift_sum():
    spec = MarchingSpec(8, 0.2, (P,))
    a = marching_matrix(spec)
    s = shift_matrix("s0", 3)
    assert np.allclose(a, 0.6 * np.eye(8) + 0.2 * (s + s.T), atol=1e-15)


def test_neumann_matrix_matches_s1_s2_sum():
    spec = MarchingSpec(8, 0.2, (N,))
    a = marching_matrix(spec)
    expect = 0.6 * np.eye(8) + 0.2 * (shift_matrix("s1", 3) + shift_matrix("s2", 3))
    assert np.allclose(a, expect, atol=1e-15)


def test_decompose_1d_periodic_weights():
    terms = decompose(MarchingSpec(8, 0.2, (P,)))
    assert [t.kind for t in terms] == ["i", "s0", "s0dag", "i"]
    assert np.allclose([t.kappa for t in terms], [1.0, 1 / 3, 1 / 3, 0.0])


def test_decompose_2d_neumann_weights_and_order():
    terms = decompose(MarchingSpec(8, 0.2, (N, N)))
    assert [(t.kind, t.dim) for t in terms[:5]] == [
        ("i", 0),
        ("s1", 1),
        ("s2", 1),
        ("s1", 0),
        ("s2", 0),
    ]
    assert np.allclose([t.kappa for t in terms], [1, 1, 1, 1, 1, 0, 0, 0])


def test_decompose_padding_is_power_of_two():
    for d, bc in [(1, (P,)), (2, (N, N))]:
        terms = decompose(MarchingSpec(4, 0.1, bc))
        assert len(terms) in (4, 8)
        assert all(t.kappa == 0 and t.kind == "i" for t in terms[2 * d + 1 :])


def test_decompose_resum_reconstructs_marching_matrix():
    for d, bc in [(1, (P,)), (1, (N,)), (2, (P, P)), (2, (N, N))]:
        n_q = {1: (3,), 2: (2, 2)}[d]
        n_pts = 1 << n_q[0]
        for r_h in (0.05, 0.125, 0.2, 1.0 / (2 * d)):
            spec = MarchingSpec(n_pts, r_h, bc)
            terms = decompose(spec)
            total = sum(t.kappa for t in terms)
            resum = sum(t.kappa * term_matrix(t, n_q) for t in terms) / total
            assert np.allclose(resum, marching_matrix(spec), atol=1e-14)


def test_decompose_resum_interior_normalization():
    # away from the stability boundary the identity weight is exactly 1
    spec = MarchingSpec(8, 0.1, (P,))
    terms = decompose(spec)
    assert terms[0].kappa == 1.0
    resum = (1 - 2 * 0.1) * sum(t.kappa * term_matrix(t, (3,)) for t in terms)
    assert np.allclose(resum, marching_matrix(spec), atol=1e-14)
    assert (1 - 2 * 0.1) * sum(t.kappa for t in terms) == pytest.approx(1.0, abs=1e-15)


def test_decompose_kappas_nonnegative():
    for r_h in (0.05, 0.25):
        terms = decompose(MarchingSpec(4, r_h, (N, N)))
        assert all(t.kappa >= 0 for t in terms)


def test_decompose_rejects_dirichlet_and_mixed():
    with pytest.raises(ValueError):
        decompose(MarchingSpec(4, 0.2, (D,)))
    with pytest.raises(ValueError):
        decompose(MarchingSpec(4, 0.2, (P, N)))


def test_stability_check():
    stability_check(0.2, 2)
    stability_check(0.25, 2)  # boundary case allowed
    with pytest.raises(StabilityError):
        stability_check(0.3, 2)
    with pytest.raises(StabilityError):
        stability_check(0.6, 1)
    with pytest.raises(StabilityError):
        stability_check(0.0, 1)


def test_spec_validation():
    with pytest.raises(ValueError):
        MarchingSpec(6, 0.2, (P,))  # not a power of two
    with pytest.raises(ValueError):
        MarchingSpec(2, 0.2, (P,))  # too small
    with pytest.raises(StabilityError):
        MarchingSpec(8, 0.26, (P, P))
    with pytest.raises(ValueError):
        LcuTerm(-0.1, "s0")


def test_term_matrix_placement():
    t = LcuTerm(1.0, "s1", 1)
    m = term_matrix(t, (2, 2))
    assert np.array_equal(m, np.kron(np.eye(4), shift_matrix("s1", 2)))
    t0 = LcuTerm(1.0, "s0", 0)
    assert np.array_equal(term_matrix(t0, (2, 2)), np.kron(shift_matrix("s0", 2), np.eye(4)))
