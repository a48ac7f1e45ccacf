"""Piecewise-constant curves through U(2**N) and their lengths.

Segment 0 acts first, so ``evolve`` returns
``exp(i H_{S-1} t_{S-1}) ... exp(i H_0 t_0)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .pauli import PauliString, commutator, enumerate_paulis
from .schedule import PenaltySchedule

NORM_TOL = 1e-9
#: Largest register for the coefficient-space geodesic integrator.
MAX_GEODESIC_QUBITS = 5


class Hamiltonian:
    """Real combination ``sum_I h_I sigma_I`` of Pauli strings.

    Zero coefficients are dropped on construction.  Instances are treated as
    immutable.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Mapping | Iterable = ()):
        self.n_qubits = int(n_qubits)
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean = {}
        for p, h in items:
            if isinstance(p, str):
                p = PauliString.from_label(p)
            if p.n_qubits != self.n_qubits:
                raise ValueError(f"term {p} does not act on {self.n_qubits} qubits")
            if isinstance(h, complex) or not isinstance(h, (int, float, np.floating, np.integer)):
                raise TypeError(f"coefficient of {p} must be real, got {h!r}")
            h = float(h)
            if not math.isfinite(h):
                raise ValueError(f"coefficient of {p} is not finite")
            if h != 0.0:
                clean[p] = clean.get(p, 0.0) + h
        self._terms = {p: h for p, h in clean.items() if h != 0.0}

    @property
    def terms(self) -> dict:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        return isinstance(other, Hamiltonian) and self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self):
        body = " + ".join(f"{h:.4g}*{p.label}" for p, h in sorted(self._terms.items()))
        return f"Hamiltonian({body or '0'})"

    def coeff(self, p: PauliString) -> float:
        return self._terms.get(p, 0.0)

    def norm_fbar(self) -> float:
        return math.sqrt(math.fsum(h * h for h in self._terms.values()))

    def scaled(self, c: float) -> "Hamiltonian":
        return Hamiltonian(self.n_qubits, {p: c * h for p, h in self._terms.items()})

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        out = dict(self._terms)
        for p, h in other.terms.items():
            out[p] = out.get(p, 0.0) + h
        return Hamiltonian(self.n_qubits, out)

    def without_identity(self) -> tuple["Hamiltonian", float]:
        ident = PauliString.identity(self.n_qubits)
        h0 = self._terms.get(ident, 0.0)
        return Hamiltonian(self.n_qubits, {p: h for p, h in self._terms.items() if p != ident}), h0

    def to_vector(self) -> np.ndarray:
        v = np.zeros(4**self.n_qubits)
        for p, h in self._terms.items():
            v[p.index] = h
        return v

    @classmethod
    def from_vector(cls, n_qubits: int, v: np.ndarray) -> "Hamiltonian":
        nz = np.flatnonzero(v)
        return cls(n_qubits, {PauliString.from_index(n_qubits, int(i)): float(v[i]) for i in nz})

    def dense(self) -> np.ndarray:
        return linalg.dense(self)

    def to_json(self) -> list:
        return [{"pauli": p.label, "coeff": h} for p, h in sorted(self._terms.items())]

    @classmethod
    def from_json(cls, n_qubits: int, items: Sequence) -> "Hamiltonian":
        terms = {}
        for item in items:
            coeff = item["coeff"]
            if isinstance(coeff, (list, tuple, dict, str)) or isinstance(coeff, bool):
                raise ValueError(f"complex or non-numeric coefficient for {item.get('pauli')!r}: {coeff!r}")
            p = PauliString.from_label(item["pauli"])
            terms[p] = terms.get(p, 0.0) + float(coeff)
        return cls(n_qubits, terms)


@dataclass(frozen=True)
class Segment:
    duration: float
    hamiltonian: Hamiltonian

    def __post_init__(self):
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ValueError(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class Path:
    n_qubits: int
    segments: tuple
    global_phase: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        for seg in self.segments:
            if seg.hamiltonian.n_qubits != self.n_qubits:
                raise ValueError("segment Hamiltonian size does not match the path")

    @classmethod
    def constant(cls, h: Hamiltonian, duration: float) -> "Path":
        return cls(h.n_qubits, (Segment(duration, h),))

    @property
    def total_time(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    def to_json(self) -> dict:
        out = {
            "n_qubits": self.n_qubits,
            "segments": [{"duration": s.duration, "terms": s.hamiltonian.to_json()} for s in self.segments],
        }
        if self.global_phase != 1:
            out["global_phase"] = [self.global_phase.real, self.global_phase.imag]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Path":
        n = int(data["n_qubits"])
        segs = [Segment(float(s["duration"]), Hamiltonian.from_json(n, s["terms"])) for s in data["segments"]]
        phase = data.get("global_phase", [1.0, 0.0])
        return cls(n, tuple(segs), complex(phase[0], phase[1]))


def normalize(p: Path) -> Path:
    """Rescale every segment to unit normalized-Frobenius Hamiltonian.

    Durations absorb the scale, so the generated unitary is unchanged.  An
    identity-string component only contributes a global phase; it is removed
    and folded into ``global_phase``.
    """
    phase = p.global_phase
    out = []
    for seg in p.segments:
        h, h0 = seg.hamiltonian.without_identity()
        if h0:
            phase *= cmath.exp(1j * h0 * seg.duration)
        norm = h.norm_fbar()
        if norm == 0.0:
            raise ValueError("cannot normalize a segment with a zero (or pure-phase) Hamiltonian")
        if abs(norm - 1.0) <= 1e-15:
            out.append(Segment(seg.duration, h))
        else:
            out.append(Segment(seg.duration * norm, h.scaled(1.0 / norm)))
    return Path(p.n_qubits, tuple(out), phase)


def is_normalized(p: Path, tol: float = NORM_TOL) -> bool:
    return all(abs(s.hamiltonian.norm_fbar() - 1.0) <= tol for s in p.segments)


def _weighted_norm(h: Hamiltonian, s: PenaltySchedule) -> float:
    return math.sqrt(math.fsum(s.penalty(p) * c * c for p, c in h.terms.items()))


def killing_length(p: Path) -> float:
    return math.fsum(seg.duration * seg.hamiltonian.norm_fbar() for seg in p.segments)


def complexity_length(p: Path, s: PenaltySchedule) -> float:
    if s.n_qubits != p.n_qubits:
        raise ValueError(f"schedule has {s.n_qubits} qubits, path has {p.n_qubits}")
    return math.fsum(seg.duration * _weighted_norm(seg.hamiltonian, s) for seg in p.segments)


@dataclass(frozen=True)
class Difficulty:
    gamma: float


def difficulty(h: Hamiltonian, s: PenaltySchedule) -> Difficulty:
    """Penalty-weighted norm of a unit-norm Hamiltonian."""
    if abs(h.norm_fbar() - 1.0) > NORM_TOL:
        raise ValueError("difficulty is defined for Hamiltonians with unit normalized Frobenius norm")
    if s.n_qubits != h.n_qubits:
        raise ValueError("schedule/Hamiltonian size mismatch")
    return Difficulty(_weighted_norm(h, s))


def evolve(p: Path) -> np.ndarray:
    linalg._check_cap(p.n_qubits)
    u = np.eye(1 << p.n_qubits, dtype=complex)
    for seg in p.segments:
        u = linalg.expm_hermitian(linalg.dense(seg.hamiltonian), seg.duration) @ u
    return p.global_phase * u


# -- Euler-Arnold flow -----------------------------------------------------

@dataclass(frozen=True)
class _Structure:
    """``i [sigma_L, sigma_K] = coeff[L, K] * sigma_{L ^ K}`` on basis indices."""

    coeff: np.ndarray
    partner: np.ndarray


_STRUCTURE_CACHE: dict[int, _Structure] = {}


def structure_constants(n_qubits: int) -> _Structure:
    if n_qubits > MAX_GEODESIC_QUBITS:
        raise ValueError(f"geodesic integration capped at {MAX_GEODESIC_QUBITS} qubits")
    if n_qubits not in _STRUCTURE_CACHE:
        basis = sorted(enumerate_paulis(n_qubits), key=lambda q: q.index)
        dim = len(basis)
        coeff = np.zeros((dim, dim))
        idx = np.arange(dim)
        # partner index of a product: masks XOR, which is index XOR
        partner = idx[:, None] ^ idx[None, :]
        for a in basis:
            for b in basis:
                c = commutator(a, b)
                if c is not None:
                    coeff[a.index, b.index] = (1j * c[0]).real
        _STRUCTURE_CACHE[n_qubits] = _Structure(coeff, partner)
    return _STRUCTURE_CACHE[n_qubits]


def euler_arnold_rhs(h: np.ndarray, penalties: np.ndarray, st: _Structure) -> np.ndarray:
    """``dh_K/dt = (1/I_K) sum_J I_J h_J c_{J,K}`` with ``i[H, sigma_K] = sum_J c_{J,K} sigma_J``."""
    weighted = penalties * h
    return np.einsum("lk,l,lk->k", st.coeff, h, weighted[st.partner]) / penalties


def geodesic_samples(h0: Hamiltonian, s: PenaltySchedule, total_time: float, dt: float):
    """RK4 trajectory of the Euler-Arnold flow in Pauli-coefficient space.

    Returns ``(steps, states)``: the step lengths and the coefficient vectors
    at every step boundary (``len(states) == len(steps) + 1``).
    """
    n = h0.n_qubits
    if s.n_qubits != n:
        raise ValueError("schedule/Hamiltonian size mismatch")
    if abs(h0.norm_fbar() - 1.0) > NORM_TOL:
        raise ValueError("initial Hamiltonian must have unit normalized Frobenius norm")
    if not (0 < dt <= total_time):
        raise ValueError("need 0 < dt <= total_time")
    st = structure_constants(n)
    pen = s.penalty_vector()
    h = h0.to_vector()
    n_steps = max(1, math.ceil(total_time / dt - 1e-9))
    steps = [dt] * (n_steps - 1) + [total_time - dt * (n_steps - 1)]
    states = [h]
    for i, step in enumerate(steps):
        k1 = euler_arnold_rhs(h, pen, st)
        k2 = euler_arnold_rhs(h + 0.5 * step * k1, pen, st)
        k3 = euler_arnold_rhs(h + 0.5 * step * k2, pen, st)
        k4 = euler_arnold_rhs(h + step * k3, pen, st)
        h = h + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(h)):
            raise FloatingPointError(f"geodesic integration produced non-finite values at step {i}")
        states.append(h)
    return steps, np.array(states)


def integrate_geodesic(h0: Hamiltonian, s: PenaltySchedule, total_time: float, dt: float) -> Path:
    """Integrate the Euler-Arnold equation with fixed-step classical RK4.

    Returns the trajectory as piecewise-constant segments, each carrying the
    Hamiltonian at the start of its step.  H(t) is not renormalized along the
    way: the flow conserves the difficulty, not the Frobenius norm.
    """
    steps, states = geodesic_samples(h0, s, total_time, dt)
    n = h0.n_qubits
    return Path(n, tuple(Segment(step, Hamiltonian.from_vector(n, v)) for step, v in zip(steps, states)))


def geodesic_drift(states: np.ndarray, s: PenaltySchedule) -> dict:
    """Drift statistics over trajectory samples (rows are coefficient vectors)."""
    pen = s.penalty_vector()
    gammas = np.sqrt(states**2 @ pen)
    norms = np.sqrt(np.sum(states**2, axis=1))
    return {
        "gamma_initial": float(gammas[0]),
        "gamma_relative_drift": float(np.max(np.abs(gammas - gammas[0])) / gammas[0]),
        "fbar_norm_min": float(norms.min()),
        "fbar_norm_max": float(norms.max()),
        "hamiltonian_max_drift": float(np.max(np.abs(states - states[0]))),
        "n_steps": int(len(states) - 1),
    }
