"""
Stabilizer Module for the QEC Simulator

Pauli group elements in symplectic bit form, phase-flip repetition code
descriptors, syndromes, and the coset partition of the error set with its
recovery map.
"""

import os
import logging
import configparser
from dataclasses import dataclass
from functools import reduce
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, DimensionError, DomainError, StructuralError

logger = logging.getLogger(__name__)

CODES_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "codes")

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PHASE_PREFIX = {"+": 0, "": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}


def _popcount(value: int) -> int:
    return bin(value).count("1")


@dataclass(frozen=True)
class PauliOperator:
    """
    i**phase_exp * prod_j X_j**x_j Z_j**z_j, qubit j stored at bit j.
    """
    n: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """
        Parse strings such as "XXI", "-ZZZ" or "iYII" (qubit 1 leftmost).
        """
        text = text.strip()
        body = text.lstrip("+-i")
        prefix = text[: len(text) - len(body)]
        if prefix not in _PHASE_PREFIX or not body:
            raise DomainError(f"Cannot parse Pauli string '{text}'")
        x_mask = z_mask = 0
        phase = _PHASE_PREFIX[prefix]
        for j, letter in enumerate(body.upper()):
            if letter == "X":
                x_mask |= 1 << j
            elif letter == "Z":
                z_mask |= 1 << j
            elif letter == "Y":
                # Y = i X Z
                x_mask |= 1 << j
                z_mask |= 1 << j
                phase += 1
            elif letter != "I":
                raise DomainError(f"Unknown Pauli letter '{letter}' in '{text}'")
        return cls(len(body), x_mask, z_mask, phase)

    @classmethod
    def z_string(cls, n: int, support) -> "PauliOperator":
        mask = 0
        for j in support:
            mask |= 1 << j
        return cls(n, 0, mask, 0)

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def support(self) -> Tuple[int, ...]:
        mask = self.x_mask | self.z_mask
        return tuple(j for j in range(self.n) if mask >> j & 1)

    def commutes(self, other: "PauliOperator") -> bool:
        if other.n != self.n:
            raise DimensionError(f"Pauli operators act on {self.n} and {other.n} qubits")
        symplectic = _popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)
        return symplectic % 2 == 0

    def equal_up_to_phase(self, other: "PauliOperator") -> bool:
        return self.n == other.n and self.x_mask == other.x_mask and self.z_mask == other.z_mask

    def to_string(self) -> str:
        letters = []
        phase = self.phase_exp
        for j in range(self.n):
            x, z = self.x_mask >> j & 1, self.z_mask >> j & 1
            if x and z:
                letters.append("Y")
                phase -= 1
            else:
                letters.append("X" if x else "Z" if z else "I")
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[phase % 4]
        return prefix + "".join(letters)

    def label(self) -> str:
        """Compact label such as 'I', 'Z1' or 'Z2Z3' (qubits counted from 1)."""
        parts = []
        for j in range(self.n):
            x, z = self.x_mask >> j & 1, self.z_mask >> j & 1
            if x or z:
                parts.append(("Y" if x and z else "X" if x else "Z") + str(j + 1))
        text = "".join(parts) or "I"
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[self.phase_exp]
        return prefix + text

    def matrix(self) -> np.ndarray:
        """Dense 2**n matrix, qubit 1 as the most significant tensor factor."""
        factors = []
        for j in range(self.n):
            x, z = self.x_mask >> j & 1, self.z_mask >> j & 1
            factor = _SINGLE["I"]
            if x and z:
                factor = _SINGLE["X"] @ _SINGLE["Z"]
            elif x:
                factor = _SINGLE["X"]
            elif z:
                factor = _SINGLE["Z"]
            factors.append(factor)
        dense = reduce(np.kron, factors, np.eye(1, dtype=complex))
        return (1j ** self.phase_exp) * dense

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return pauli_multiply(self, other)

    def __str__(self) -> str:
        return self.to_string()


def pauli_multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """
    Group product a*b with the phase tracked mod 4.

    Args:
        a: Left factor
        b: Right factor

    Returns:
        The product as a PauliOperator
    """
    if a.n != b.n:
        raise DimensionError(f"Cannot multiply Pauli operators on {a.n} and {b.n} qubits")
    # moving Z^{z_a} through X^{x_b} picks up (-1)^{z_a . x_b}
    phase = a.phase_exp + b.phase_exp + 2 * _popcount(a.z_mask & b.x_mask)
    return PauliOperator(a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, phase)


@dataclass(frozen=True)
class Syndrome:
    bits: Tuple[int, ...]

    @property
    def index(self) -> int:
        return sum(bit << i for i, bit in enumerate(self.bits))

    def to_string(self) -> str:
        return "".join(str(bit) for bit in self.bits)


@dataclass(frozen=True)
class CosetEntry:
    label: int
    syndrome: Syndrome
    coset: Tuple[PauliOperator, ...]
    recovery: PauliOperator


@dataclass
class StabilizerCode:
    name: str
    n: int
    stabilizer_generators: List[PauliOperator]
    logical_Z: PauliOperator
    logical_X: PauliOperator
    error_set: List[PauliOperator]
    logical_subgroup: List[PauliOperator]

    @property
    def n_syndromes(self) -> int:
        return 2 ** len(self.stabilizer_generators)

    def stabilizer_projector(self) -> np.ndarray:
        dim = 2 ** self.n
        projector = np.eye(dim, dtype=complex)
        for generator in self.stabilizer_generators:
            projector = projector @ (np.eye(dim) + generator.matrix()) / 2
        return projector

    def syndrome_projector(self, syndrome: Syndrome) -> np.ndarray:
        dim = 2 ** self.n
        projector = np.eye(dim, dtype=complex)
        for bit, generator in zip(syndrome.bits, self.stabilizer_generators):
            projector = projector @ (np.eye(dim) + (-1) ** bit * generator.matrix()) / 2
        return projector

    def logical_basis(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Logical states |0> (Z-bar = +1) and |1> = X-bar|0> as dense vectors.
        """
        up = np.zeros(2 ** self.n, dtype=complex)
        up[0] = 1.0
        zero = self.stabilizer_projector() @ up
        norm = np.linalg.norm(zero)
        if norm == 0:
            raise StructuralError(f"Code '{self.name}' has no stabilizer state overlapping |0...0>")
        zero = zero / norm
        return zero, self.logical_X.matrix() @ zero


def phase_flip_code(n: int = 3) -> StabilizerCode:
    """Phase-flip repetition code with generators X_j X_{j+1}."""
    generators = []
    for j in range(n - 1):
        generators.append(PauliOperator(n, (1 << j) | (1 << (j + 1)), 0))
    return _build_code(
        name=f"phase_flip_{n}",
        n=n,
        generators=generators,
        logical_z=PauliOperator(n, 0, (1 << n) - 1),
        logical_x=PauliOperator(n, (1 << n) - 1, 0),
        error_set=[PauliOperator.z_string(n, [j for j in range(n) if mask >> j & 1]) for mask in range(2 ** n)],
    )


def _build_code(name, n, generators, logical_z, logical_x, error_set) -> StabilizerCode:
    for op in list(generators) + [logical_z, logical_x] + list(error_set):
        if op.n != n:
            raise DimensionError(f"Operator {op} in code '{name}' does not act on {n} qubits")
    for i, gi in enumerate(generators):
        for gj in generators[i + 1:]:
            if not gi.commutes(gj):
                raise StructuralError(f"Stabilizer generators {gi} and {gj} anticommute")
    if logical_z.commutes(logical_x):
        raise StructuralError("Logical Z and X must anticommute")
    logical_subgroup = [e for e in error_set if all(e.commutes(g) for g in generators)]
    return StabilizerCode(
        name=name,
        n=n,
        stabilizer_generators=list(generators),
        logical_Z=logical_z,
        logical_X=logical_x,
        error_set=list(error_set),
        logical_subgroup=logical_subgroup,
    )


def load_code(name_or_path: str = "phase_flip_3") -> StabilizerCode:
    """
    Load a code descriptor from a packaged name or a path to a .cfg file.

    Args:
        name_or_path: Packaged descriptor name (e.g. 'phase_flip_3') or file path

    Returns:
        StabilizerCode built from the descriptor
    """
    path = name_or_path
    if not os.path.exists(path):
        path = os.path.join(CODES_DIR, f"{name_or_path}.cfg")
    if not os.path.exists(path):
        raise ConfigError(f"Unknown code descriptor '{name_or_path}'")

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
        section = parser["code"]
        n = section.getint("qubits")
        generators = [PauliOperator.from_string(s) for s in section["stabilizers"].split(",")]
        logical_z = PauliOperator.from_string(section["logical_z"])
        logical_x = PauliOperator.from_string(section["logical_x"])
        error_spec = section.get("error_set", "z_strings").strip()
    except (configparser.Error, KeyError, ValueError) as e:
        raise ConfigError(f"Malformed code descriptor {path}: {e}")

    if error_spec == "z_strings":
        error_set = [PauliOperator(n, 0, mask) for mask in range(2 ** n)]
    else:
        error_set = [PauliOperator.from_string(s) for s in error_spec.split(",")]
    code = _build_code(section.get("name", os.path.basename(path)), n, generators, logical_z, logical_x, error_set)
    logger.debug(f"Loaded code '{code.name}' from {path}")
    return code


def syndrome_of(code: StabilizerCode, error: PauliOperator) -> Syndrome:
    """
    Syndrome bit i is 1 iff the error anticommutes with generator i.

    Args:
        code: The stabilizer code
        error: An element of the code's error set

    Returns:
        Syndrome of the error
    """
    if error.n != code.n:
        raise DimensionError(f"Error acts on {error.n} qubits, code has {code.n}")
    if not any(error.equal_up_to_phase(e) for e in code.error_set):
        raise DomainError(f"{error.to_string()} is not in the error set of '{code.name}'")
    return Syndrome(tuple(0 if error.commutes(g) else 1 for g in code.stabilizer_generators))


def _recovery_key(op: PauliOperator) -> Tuple[int, Tuple[int, ...]]:
    return op.weight, op.support


def coset_partition(code: StabilizerCode) -> Dict[Syndrome, CosetEntry]:
    """
    Partition the error set into left cosets of the logical subgroup.

    Each coset is labelled by its syndrome; its recovery is the coset element
    of minimum weight (ties broken by lowest qubit indices). Entries are
    numbered 0, 1, ... in order of their recovery, so label 0 is the trivial
    syndrome.

    Returns:
        Mapping syndrome -> CosetEntry, in label order
    """
    if not code.error_set or not code.logical_subgroup:
        raise StructuralError(f"Code '{code.name}' has an empty error set or logical subgroup")

    cosets: List[List[PauliOperator]] = []
    seen = set()
    for error in code.error_set:
        key = (error.x_mask, error.z_mask)
        if key in seen:
            continue
        coset = [pauli_multiply(error, element) for element in code.logical_subgroup]
        for member in coset:
            if not any(member.equal_up_to_phase(e) for e in code.error_set):
                raise StructuralError(
                    f"Error set of '{code.name}' is not closed: {member.to_string()} is missing"
                )
            seen.add((member.x_mask, member.z_mask))
        cosets.append(coset)

    entries = []
    for coset in cosets:
        syndromes = {syndrome_of(code, member) for member in coset}
        if len(syndromes) != 1:
            raise StructuralError(f"Coset {[m.to_string() for m in coset]} mixes syndromes")
        recovery = min(coset, key=_recovery_key)
        recovery = PauliOperator(code.n, recovery.x_mask, recovery.z_mask, 0)
        for member in coset:
            product_op = pauli_multiply(recovery, member)
            if not any(product_op.equal_up_to_phase(e) for e in code.logical_subgroup):
                raise StructuralError(f"Recovery {recovery.label()} does not map {member.label()} into E0")
        ordered = tuple(sorted(coset, key=_recovery_key))
        entries.append((syndromes.pop(), ordered, recovery))

    if len({syndrome for syndrome, _, _ in entries}) != len(entries):
        raise StructuralError(f"Two cosets of '{code.name}' share a syndrome")

    entries.sort(key=lambda item: _recovery_key(item[2]))
    return {
        syndrome: CosetEntry(label, syndrome, coset, recovery)
        for label, (syndrome, coset, recovery) in enumerate(entries)
    }


def format_partition_table(code: StabilizerCode) -> List[str]:
    """One line per coset: syndrome bits, coset members and recovery."""
    lines = []
    for entry in coset_partition(code).values():
        members = ", ".join(member.label() for member in entry.coset)
        lines.append(f"({','.join(str(b) for b in entry.syndrome.bits)})  {{{members}}}  ->  {entry.recovery.label()}")
    return lines


def z_configurations(n: int, parity: Optional[int] = None) -> np.ndarray:
    """
    All +-1 vectors of length n, optionally restricted to a product parity.

    Rows follow the integer order of the bit pattern (bit j set means
    z_j = -1).
    """
    rows = np.array([[1 - 2 * (c >> j & 1) for j in range(n)] for c in range(2 ** n)], dtype=float)
    if parity is not None:
        rows = rows[np.prod(rows, axis=1) == parity]
    return rows
