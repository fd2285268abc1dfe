import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import entropy_logm, random_density
from qcatn import channels as C
from qcatn.entanglement import (
    InvalidStateError,
    NonProductInputError,
    araki_lieb_bound_check,
    audit_area_law,
    cjs_mutual_information,
    doubled,
    entanglement_entropy,
    lpqc_cjs_bound,
    mutual_information,
    spectrum_entropy,
    vector_entropy,
    von_neumann_entropy,
)
from qcatn.lattice import Lattice
from qcatn.tensor_core import DenseOperator, phys

Q = [phys(k) for k in range(6)]


def pure(vec, labels):
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    return DenseOperator(labels, np.outer(vec, vec.conj()))


def test_entropy_trivial_values():
    assert von_neumann_entropy(pure([1, 0], Q[:1])) == 0.0
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-14)
    assert von_neumann_entropy(np.eye(27) / 27) == pytest.approx(3 * np.log2(3), abs=1e-12)


def test_entropy_rejects_invalid_states():
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(np.eye(2))
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(np.array([[0.5, 1], [0, 0.5]]))
    # tiny negative eigenvalues are rounding and get clamped
    assert spectrum_entropy(np.array([1.0, -1e-13])) == 0.0


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3))
def test_entropy_matches_matrix_log(seed, n):
    rho = random_density(2**n, np.random.default_rng(seed))
    assert abs(von_neumann_entropy(rho) - entropy_logm(rho)) < 1e-9


def test_entanglement_entropy_examples():
    bell = pure([1, 0, 0, 1], Q[:2])
    assert entanglement_entropy(bell, [Q[0]]) == pytest.approx(1.0, abs=1e-12)
    prod = pure(np.kron([1, 1], [1, 2j]), Q[:2])
    assert entanglement_entropy(prod, [Q[1]]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidStateError):
        entanglement_entropy(DenseOperator(Q[:1], np.eye(2) / 2), [Q[0]])


@given(seed=st.integers(0, 2**32 - 1))
def test_entanglement_entropy_symmetric(seed):
    rng = np.random.default_rng(seed)
    psi = pure(rng.standard_normal(16) + 1j * rng.standard_normal(16), Q[:4])
    assert abs(entanglement_entropy(psi, Q[:1]) - entanglement_entropy(psi, Q[1:4])) < 1e-10
    vec = np.linalg.eigh(psi.data)[1][:, -1]
    assert abs(vector_entropy(vec, [2] * 4, [0]) - entanglement_entropy(psi, Q[:1])) < 1e-10


def test_mutual_information_examples():
    classical = DenseOperator(Q[:2], np.diag([0.5, 0, 0, 0.5]))
    assert mutual_information(classical, [Q[0]]) == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(0)
    prod = DenseOperator(Q[:2], np.kron(random_density(2, rng), random_density(2, rng)))
    assert mutual_information(prod, [Q[0]]) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        mutual_information(classical, [Q[0]], [Q[0]])


def test_mutual_information_is_twice_entanglement_for_pure_states():
    rng = np.random.default_rng(1)
    psi = pure(rng.standard_normal(8) + 1j * rng.standard_normal(8), Q[:3])
    assert mutual_information(psi, Q[:1]) == pytest.approx(2 * entanglement_entropy(psi, Q[:1]), abs=1e-10)


def test_mutual_information_additive():
    rng = np.random.default_rng(2)
    r1, r2 = random_density(4, rng), random_density(4, rng)
    joint = DenseOperator(Q[:4], np.kron(r1, r2))
    a = mutual_information(DenseOperator(Q[:2], r1), [Q[0]])
    b = mutual_information(DenseOperator(Q[2:4], r2), [Q[2]])
    assert mutual_information(joint, [Q[0], Q[2]], [Q[1], Q[3]]) == pytest.approx(a + b, abs=1e-10)


def test_entropy_invariant_under_local_unitaries():
    rng = np.random.default_rng(3)
    rho = DenseOperator(Q[:3], random_density(8, rng))
    u = np.kron(np.kron(C.random_unitary(2, rng), C.random_unitary(2, rng)), C.random_unitary(2, rng))
    rot = DenseOperator(Q[:3], u @ rho.data @ u.conj().T)
    for A in ([Q[0]], [Q[0], Q[2]]):
        assert abs(mutual_information(rho, A) - mutual_information(rot, A)) < 1e-10


def test_araki_lieb_examples():
    rng = np.random.default_rng(4)
    prod = DenseOperator(Q[:3], np.kron(np.kron(random_density(2, rng), random_density(2, rng)),
                                        random_density(2, rng)))
    check = araki_lieb_bound_check(prod, [Q[0]], [Q[1]], [Q[2]])
    S_a = von_neumann_entropy(prod.reduce_to([Q[1]]))
    assert check.passed and check.slack == pytest.approx(2 * S_a, abs=1e-10)
    ghz = pure([1, 0, 0, 0, 0, 0, 0, 1], Q[:3])
    check = araki_lieb_bound_check(ghz, [Q[0]], [Q[1]], [Q[2]])
    # I(Aa:B) = 2, I(A:B) = 1, S(a) = 1
    assert check.passed and check.slack == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        araki_lieb_bound_check(ghz, [Q[0]], [Q[0]], [Q[2]])


def test_araki_lieb_on_random_states():
    rng = np.random.default_rng(5)
    for _ in range(25):
        rho = DenseOperator(Q[:4], random_density(16, rng, rank=int(rng.integers(1, 17))))
        assert araki_lieb_bound_check(rho, [Q[0]], [Q[1], Q[2]], [Q[3]]).passed


def test_example3_pair_mutual_information():
    lat = Lattice(1, 4)
    ch = C.example3(lat)
    for n, m in C.half_shift_pairs(lat):
        assert cjs_mutual_information(ch, doubled([n]), doubled([m])) == pytest.approx(1.0, abs=1e-9)
    # uncorrelated pair
    assert cjs_mutual_information(ch, doubled([0]), doubled([1])) == pytest.approx(0.0, abs=1e-9)


def test_cjs_bound_on_lpqc_fixture():
    lat = Lattice(1, 5)
    ch = C.unitary_channel(lat, C.brickwork_unitary(lat, 1, seed=0))
    for A in lat.enumerate_S(2):
        check = lpqc_cjs_bound(ch, A)
        assert check.passed and check.value <= check.bound


def test_shift_entanglement_bounded_by_bond_dimension():
    lat = Lattice(1, 6, boundary="periodic")
    U = C.shift_unitary(lat)
    neel = np.zeros(64)
    neel[0b010101] = 1
    out = U @ neel
    for A in lat.blocks():
        assert vector_entropy(out, [2] * 6, [lat.index[s] for s in A]) <= 2 * lat.boundary_size(A)


def test_audit_verdicts():
    shift = audit_area_law(C.shift_channel, [4, 5, 6], Lattice(1, 4, boundary="periodic"),
                           metric="ee", samples=4, c_bound=2.0)
    assert shift.verdict == "consistent_with_area_law"
    assert shift.disclaimer and shift.to_csv().startswith("M,size_A,boundary_A,value")
    assert all(row["value"] >= 0 for row in shift.per_region)
    ex3 = audit_area_law(C.example3, [4, 6, 8], Lattice(1, 4), metric="mi", samples=2, regions="half")
    assert ex3.verdict == "violating"
    assert [ex3.c_by_size[M] for M in (4, 6, 8)] == pytest.approx([2, 3, 4], abs=1e-9)


def test_audit_of_dilated_family_is_consistent():
    def family(lat):
        gates = [C.site_pair_gate(lat, s, C.CNOT) for s in lat.sites]
        gates += [C.physical_gate(lat, [k, k + 1], C.CNOT) for k in range(0, lat.M - 1, 2)]
        return C.dilated_channel(lat, C.Circuit(gates), ancilla_init=np.ones(2) / np.sqrt(2))
    rep = audit_area_law(family, [4, 5, 6], Lattice(1, 4), metric="mi", samples=3, c_bound=2.0)
    assert rep.verdict == "consistent_with_area_law"


def test_audit_input_validation():
    with pytest.raises(NonProductInputError):
        audit_area_law(C.shift_channel, [4], Lattice(1, 4, boundary="periodic"),
                       input_states=lambda lat, rng: [np.ones(16) / 4])
    with pytest.raises(InvalidStateError):
        audit_area_law(C.example1, [4], Lattice(1, 4), metric="ee", samples=1)
    with pytest.raises(ValueError):
        audit_area_law(C.shift_channel, [4], Lattice(1, 4, boundary="periodic"), metric="renyi")
