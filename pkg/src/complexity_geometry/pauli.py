"""Generalized Pauli strings on N qubits, stored as a pair of bit masks.

Qubit ``j`` corresponds to bit ``j`` of both masks and to character ``j`` of
the text form, so ``"XIZ"`` has ``x_mask = 0b001`` and ``z_mask = 0b100``.
Per qubit the encoding is

    (x, z) = (0, 0) -> I,  (1, 0) -> X,  (1, 1) -> Y,  (0, 1) -> Z

Products carry an exact phase i**k, tracked as the integer ``k`` mod 4.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import comb
from typing import Iterator, Optional

#: Largest register size accepted by :func:`enumerate_paulis`.
MAX_ENUM_QUBITS = 12

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}
_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full or self.x_mask < 0 or self.z_mask < 0:
            raise ValueError(f"masks exceed {self.n_qubits} qubits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse an uppercase I/X/Y/Z string; character 0 is qubit 0."""
        if not label:
            raise ValueError("empty Pauli label")
        x = z = 0
        for j, ch in enumerate(label):
            try:
                xb, zb = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x |= xb << j
            z |= zb << j
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        xb, zb = _LETTER_BITS[letter]
        return cls(n_qubits, xb << qubit, zb << qubit)

    @classmethod
    def from_index(cls, n_qubits: int, index: int) -> "PauliString":
        """Inverse of :attr:`index`."""
        full = (1 << n_qubits) - 1
        return cls(n_qubits, index & full, index >> n_qubits)

    @property
    def index(self) -> int:
        """Dense basis position ``x_mask | z_mask << n``, in ``[0, 4**n)``."""
        return self.x_mask | (self.z_mask << self.n_qubits)

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return _popcount(self.support)

    def letter(self, qubit: int) -> str:
        return _BITS_LETTER[((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)]

    def qubits(self) -> list[int]:
        """Qubits acted on non-trivially, ascending."""
        return [j for j in range(self.n_qubits) if (self.support >> j) & 1]

    @property
    def label(self) -> str:
        return "".join(self.letter(j) for j in range(self.n_qubits))

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


@dataclass(frozen=True)
class PhasedPauli:
    """``i**power * pauli``."""

    power: int
    pauli: PauliString

    def __post_init__(self):
        object.__setattr__(self, "power", self.power % 4)

    @property
    def phase(self) -> complex:
        return _PHASES[self.power]

    def __mul__(self, other: "PhasedPauli") -> "PhasedPauli":
        prod = multiply(self.pauli, other.pauli)
        return PhasedPauli(self.power + other.power + prod.power, prod.pauli)


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def weight(p: PauliString) -> int:
    return p.weight


def multiply(a: PauliString, b: PauliString) -> PhasedPauli:
    """Exact product ``a * b`` as a phased Pauli string."""
    _check_sizes(a, b)
    ax, az, bx, bz = a.x_mask, a.z_mask, b.x_mask, b.z_mask
    a_x, a_y, a_z = ax & ~az, ax & az, az & ~ax
    b_x, b_y, b_z = bx & ~bz, bx & bz, bz & ~bx
    # XY = iZ, YZ = iX, ZX = iY and their reverses
    plus = _popcount(a_x & b_y) + _popcount(a_y & b_z) + _popcount(a_z & b_x)
    minus = _popcount(a_y & b_x) + _popcount(a_z & b_y) + _popcount(a_x & b_z)
    return PhasedPauli(plus - minus, PauliString(a.n_qubits, ax ^ bx, az ^ bz))


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_sizes(a, b)
    return (_popcount(a.x_mask & b.z_mask) + _popcount(a.z_mask & b.x_mask)) % 2 == 0


def commutator(a: PauliString, b: PauliString) -> Optional[tuple[complex, PauliString]]:
    """``[a, b]`` as ``(coefficient, pauli)``, or None when they commute.

    The coefficient is always ``+2i`` or ``-2i``.
    """
    if commutes(a, b):
        return None
    prod = multiply(a, b)
    return 2 * prod.phase, prod.pauli


def count_weight(n_qubits: int, k: int) -> int:
    """Number of Pauli strings of weight exactly ``k``: C(n, k) 3**k."""
    if k < 0 or k > n_qubits:
        return 0
    return comb(n_qubits, k) * 3**k


def enumerate_paulis(n_qubits: int, max_weight: Optional[int] = None) -> Iterator[PauliString]:
    """Yield every Pauli string (of weight at most ``max_weight``) exactly once.

    Strings come out grouped by weight, then by support, then by letters.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if n_qubits > MAX_ENUM_QUBITS:
        raise ValueError(f"enumeration capped at {MAX_ENUM_QUBITS} qubits, got {n_qubits}")
    kmax = n_qubits if max_weight is None else min(max_weight, n_qubits)
    for k in range(kmax + 1):
        for support in combinations(range(n_qubits), k):
            for letters in product("XYZ", repeat=k):
                x = z = 0
                for q, ch in zip(support, letters):
                    xb, zb = _LETTER_BITS[ch]
                    x |= xb << q
                    z |= zb << q
                yield PauliString(n_qubits, x, z)
