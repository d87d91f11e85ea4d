import numpy as np
import pytest

from simulator.utils.errors import ConfigError, DimensionError, DomainError, StructuralError
from simulator.utils.stabilizer import (
    PauliOperator,
    Syndrome,
    coset_partition,
    format_partition_table,
    load_code,
    pauli_multiply,
    phase_flip_code,
    syndrome_of,
    z_configurations,
)


def test_pauli_multiply_tracks_phase():
    x = PauliOperator.from_string("X")
    z = PauliOperator.from_string("Z")
    # XZ = -iY
    assert pauli_multiply(x, z).to_string() == "-iY"
    assert pauli_multiply(z, x).to_string() == "iY"


def test_commutation_is_symplectic():
    assert PauliOperator.from_string("XXI").commutes(PauliOperator.from_string("ZZI"))
    assert not PauliOperator.from_string("XII").commutes(PauliOperator.from_string("ZII"))
    with pytest.raises(DimensionError):
        PauliOperator.from_string("XX").commutes(PauliOperator.from_string("ZZZ"))


def test_bad_pauli_string():
    with pytest.raises(DomainError):
        PauliOperator.from_string("XQZ")


def test_matrix_matches_string():
    zi = PauliOperator.from_string("ZI").matrix()
    np.testing.assert_allclose(np.diag(zi).real, [1, 1, -1, -1])


def test_syndromes_of_single_flips(code3):
    assert syndrome_of(code3, PauliOperator.from_string("III")) == Syndrome((0, 0))
    assert syndrome_of(code3, PauliOperator.from_string("ZII")) == Syndrome((1, 0))
    assert syndrome_of(code3, PauliOperator.from_string("IZI")) == Syndrome((1, 1))
    assert syndrome_of(code3, PauliOperator.from_string("IIZ")) == Syndrome((0, 1))


def test_syndrome_outside_error_set(code3):
    with pytest.raises(DomainError):
        syndrome_of(code3, PauliOperator.from_string("XII"))


def test_partition_table_has_four_classes(code3):
    assert format_partition_table(code3) == [
        "(0,0)  {I, Z1Z2Z3}  ->  I",
        "(1,0)  {Z1, Z2Z3}  ->  Z1",
        "(1,1)  {Z2, Z1Z3}  ->  Z2",
        "(0,1)  {Z3, Z1Z2}  ->  Z3",
    ]


def test_partition_labels_follow_recovery_weight(code3):
    entries = list(coset_partition(code3).values())
    assert [e.label for e in entries] == [0, 1, 2, 3]
    assert entries[0].recovery.weight == 0
    assert all(e.recovery.weight == 1 for e in entries[1:])


def test_packaged_codes_load():
    code = load_code("phase_flip_3")
    assert code.n == 3 and code.n_syndromes == 4
    five = load_code("phase_flip_5")
    assert len(coset_partition(five)) == 16


def test_unknown_code_descriptor():
    with pytest.raises(ConfigError):
        load_code("no_such_code")


def test_open_error_set_is_rejected(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("[code]\nname = broken\nqubits = 3\nstabilizers = XXI, IXX\n"
                    "logical_z = ZZZ\nlogical_x = XXX\nerror_set = III, ZII, ZZZ\n")
    with pytest.raises(StructuralError):
        coset_partition(load_code(str(path)))


def test_logical_basis_is_stabilised(code3):
    zero, one = code3.logical_basis()
    projector = code3.stabilizer_projector()
    np.testing.assert_allclose(projector @ zero, zero, atol=1e-12)
    np.testing.assert_allclose(code3.logical_Z.matrix() @ one, -one, atol=1e-12)


def test_z_configurations_parity():
    rows = z_configurations(3, parity=-1)
    assert rows.shape == (4, 3)
    assert np.all(np.prod(rows, axis=1) == -1)


def test_five_qubit_code_recoveries_are_minimum_weight():
    code = phase_flip_code(5)
    for entry in coset_partition(code).values():
        assert entry.recovery.weight <= 2
