"""Lowering of a Path to a circuit of two-local gates.

The pipeline is: prune expensive directions, average the Hamiltonian over
windows of length delta, Trotterize each window into monomial exponentials,
and synthesize each monomial exactly from two-local gates.

Gate blocks use the same ordering as :mod:`linalg`: for a gate on qubits
``(a, b)`` the 4x4 block is written as ``kron(op_a, op_b)``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .path import Hamiltonian, Path, Segment, _weighted_norm, complexity_length, evolve, is_normalized, killing_length
from .pauli import PauliString
from .schedule import PenaltySchedule

BLOCK_UNITARY_TOL = 1e-10
#: Trotter orders accepted by :func:`trotter_order`.
ORDERS = ("greedy", "naive")

_I2 = np.eye(2, dtype=complex)
_PAULI_2x2 = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# letter on the shared qubit -> (B on the inner string, A on the conjugator); B A = i * letter
_CONJ_PARTNERS = {"Z": ("X", "Y"), "X": ("Y", "Z"), "Y": ("Z", "X")}


class BudgetInfeasible(ValueError):
    """Raised when no pruning threshold can meet the requested error budget."""


# -- circuits ---------------------------------------------------------------


@dataclass(frozen=True)
class TwoLocalGate:
    qubits: tuple
    block: np.ndarray = field(compare=False)

    def __post_init__(self):
        a, b = self.qubits
        object.__setattr__(self, "qubits", (int(a), int(b)))
        if a == b:
            raise ValueError("two-local gate needs two distinct qubits")
        blk = np.asarray(self.block, dtype=complex)
        if blk.shape != (4, 4):
            raise ValueError("gate block must be 4x4")
        if not linalg.is_unitary(blk, BLOCK_UNITARY_TOL):
            raise ValueError("gate block is not unitary")
        object.__setattr__(self, "block", blk)


@dataclass
class Circuit:
    n_qubits: int
    gates: list = field(default_factory=list)
    global_phase: complex = 1 + 0j

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g: TwoLocalGate):
        if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
            raise ValueError(f"gate on {g.qubits} outside a {self.n_qubits}-qubit register")

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def append(self, g: TwoLocalGate) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, other: "Circuit") -> None:
        if other.n_qubits != self.n_qubits:
            raise ValueError("circuit size mismatch")
        self.gates.extend(other.gates)
        self.global_phase *= other.global_phase

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "global_phase": [self.global_phase.real, self.global_phase.imag],
            "gates": [{"qubits": list(g.qubits), "block": linalg.matrix_to_json(g.block)} for g in self.gates],
        }

    @classmethod
    def from_json(cls, data) -> "Circuit":
        re, im = data.get("global_phase", [1.0, 0.0])
        gates = [TwoLocalGate(tuple(g["qubits"]), linalg.matrix_from_json(g["block"])) for g in data["gates"]]
        return cls(int(data["n_qubits"]), gates, complex(re, im))


def _apply_gates(c: Circuit, tensor: np.ndarray) -> np.ndarray:
    for g in c.gates:
        a, b = g.qubits
        blk = g.block.reshape(2, 2, 2, 2)
        tensor = np.tensordot(blk, tensor, axes=([2, 3], [a, b]))
        tensor = np.moveaxis(tensor, [0, 1], [a, b])
    return tensor


def circuit_to_dense(c: Circuit) -> np.ndarray:
    """Dense unitary of a circuit; gate 0 acts first."""
    linalg._check_cap(c.n_qubits)
    dim = 1 << c.n_qubits
    t = np.eye(dim, dtype=complex).reshape((2,) * c.n_qubits + (dim,))
    return c.global_phase * _apply_gates(c, t).reshape(dim, dim)


def apply_circuit(c: Circuit, psi: np.ndarray) -> np.ndarray:
    """Act with a circuit on a state vector."""
    t = np.asarray(psi, dtype=complex).reshape((2,) * c.n_qubits)
    return c.global_phase * _apply_gates(c, t).reshape(-1)


# -- monomial synthesis -----------------------------------------------------


@lru_cache(maxsize=None)
def _pair_generator(la: str, lb: str) -> np.ndarray:
    return np.kron(_PAULI_2x2[la], _PAULI_2x2[lb])


def _pair_rotation(la: str, lb: str, theta: float) -> np.ndarray:
    """``exp(i theta kron(la, lb))`` for Pauli letters (not both I)."""
    return math.cos(theta) * np.eye(4, dtype=complex) + 1j * math.sin(theta) * _pair_generator(la, lb)


@lru_cache(maxsize=None)
def _conjugator(la: str, lb: str, sign: int) -> np.ndarray:
    return _pair_rotation(la, lb, sign * math.pi / 4)


def synthesize_monomial(p: PauliString, angle: float) -> Circuit:
    """Exact circuit for ``exp(i * angle * p)``.

    Weight 1 and 2 strings need a single gate.  Longer strings are reduced by
    conjugating with ``exp(-+ i pi/4 Q)``, where ``Q`` is two-local on the two
    lowest support qubits and anticommutes with the shorter inner string.
    This costs two gates per removed qubit, ``2k - 3`` in total.
    """
    n = p.n_qubits
    angle = float(angle)
    if p.weight == 0:
        return Circuit(n, [], complex(math.cos(angle), math.sin(angle)))
    if n < 2:
        raise ValueError("two-local synthesis needs at least two qubits")
    qs = p.qubits()
    letters = [p.letter(q) for q in qs]
    if len(qs) == 1:
        q = qs[0]
        other = q + 1 if q + 1 < n else q - 1
        return Circuit(n, [TwoLocalGate((q, other), _pair_rotation(letters[0], "I", angle))])
    gates = _monomial_gates(qs, letters, angle)
    return Circuit(n, gates)


def _monomial_gates(qs: Sequence[int], letters: Sequence[str], angle: float) -> list:
    if len(qs) == 2:
        return [TwoLocalGate((qs[0], qs[1]), _pair_rotation(letters[0], letters[1], angle))]
    b, a = _CONJ_PARTNERS[letters[1]]
    pair = (qs[0], qs[1])
    inner = _monomial_gates(qs[1:], [b] + list(letters[2:]), angle)
    return (
        [TwoLocalGate(pair, _conjugator(letters[0], a, -1))]
        + inner
        + [TwoLocalGate(pair, _conjugator(letters[0], a, +1))]
    )


def monomial_gate_count(k: int) -> int:
    return 0 if k == 0 else max(1, 2 * k - 3)


# -- approximations 1 and 2 -------------------------------------------------


def prune(h: Hamiltonian, s: PenaltySchedule, threshold: float) -> Hamiltonian:
    """Keep only the terms with penalty <= threshold."""
    if threshold < 1:
        raise ValueError("pruning threshold must be >= 1")
    return Hamiltonian(h.n_qubits, {p: c for p, c in h.terms.items() if s.penalty(p) <= threshold})


def prune_path(p: Path, s: PenaltySchedule, threshold: float) -> Path:
    segs = tuple(Segment(seg.duration, prune(seg.hamiltonian, s, threshold)) for seg in p.segments)
    return Path(p.n_qubits, segs, p.global_phase)


def window_durations(total_time: float, delta: float) -> list[float]:
    """Split ``[0, total_time]`` into ``ceil(total_time/delta)`` windows."""
    if not (0 < delta):
        raise ValueError("delta must be positive")
    n = max(1, math.ceil(total_time / delta - 1e-9))
    last = total_time - delta * (n - 1)
    return [delta] * (n - 1) + [last]


def segment_average(p: Path, delta: float) -> list[Hamiltonian]:
    """Duration-weighted average Hamiltonian on each window of length delta."""
    return [h for _, h in averaged_windows(p, delta)]


def averaged_windows(p: Path, delta: float) -> list[tuple[float, Hamiltonian]]:
    """``(window duration, average Hamiltonian)`` for each window."""
    total = p.total_time
    if not (0 < delta <= total * (1 + 1e-12)):
        raise ValueError("need 0 < delta <= total time of the path")
    out = []
    seg_i, seg_left = 0, p.segments[0].duration
    for w in window_durations(total, delta):
        acc: dict = {}
        need = w
        while need > 1e-15 * max(1.0, total) and seg_i < len(p.segments):
            take = min(need, seg_left)
            for q, c in p.segments[seg_i].hamiltonian.terms.items():
                acc[q] = acc.get(q, 0.0) + c * take
            need -= take
            seg_left -= take
            if seg_left <= 1e-15 * max(1.0, total):
                seg_i += 1
                if seg_i < len(p.segments):
                    seg_left = p.segments[seg_i].duration
        out.append((w, Hamiltonian(p.n_qubits, {q: c / w for q, c in acc.items()})))
    return out


# -- approximation 3: Trotter ordering --------------------------------------


def _commutator_signs(n: int, xt: int, zt: int, xs: np.ndarray, zs: np.ndarray):
    """For ``[sigma_t, sigma_P] = 2i * sign * sigma_c``: (anticommute mask, sign, c index)."""
    pc = np.bitwise_count
    anti = (pc(xt & zs) + pc(zt & xs)) % 2 == 1
    t_x, t_y, t_z = xt & ~zt, xt & zt, zt & ~xt
    p_x, p_y, p_z = xs & ~zs, xs & zs, zs & ~xs
    plus = pc(t_x & p_y) + pc(t_y & p_z) + pc(t_z & p_x)
    minus = pc(t_y & p_x) + pc(t_z & p_y) + pc(t_x & p_z)
    power = (plus.astype(np.int64) - minus) % 4
    sign = np.where(power == 1, 1.0, -1.0)
    idx = (xs ^ xt) | ((zs ^ zt) << n)
    return anti, sign, idx


class _ErrorAccumulator:
    """Leading Trotter error ``E = i * sum_c r_c sigma_c`` in Pauli space."""

    def __init__(self):
        self.r: dict = {}

    def contribution(self, n, xt, zt, ht, xs, zs, hs):
        anti, sign, idx = _commutator_signs(n, xt, zt, xs, zs)
        # factor t acting after all of P: 1/2 [A_t, A_P] with A = i h sigma
        return idx[anti], -(ht * hs[anti] * sign[anti])

    def overlap(self, idx, vals) -> float:
        g = self.r.get
        return math.fsum(g(int(i), 0.0) * v for i, v in zip(idx, vals))

    def add(self, idx, vals, scale: float):
        for i, v in zip(idx, vals):
            i = int(i)
            self.r[i] = self.r.get(i, 0.0) + scale * v

    def norm2(self) -> float:
        return math.fsum(v * v for v in self.r.values())


def _term_arrays(terms):
    xs = np.array([p.x_mask for p, _ in terms], dtype=np.int64)
    zs = np.array([p.z_mask for p, _ in terms], dtype=np.int64)
    hs = np.array([c for _, c in terms], dtype=float)
    return xs, zs, hs


def trotter_order_greedy(h: Hamiltonian) -> list[tuple[PauliString, float]]:
    """Deque ordering that keeps the leading Trotter error small.

    Terms are taken by descending ``|h_I|`` (ties by Pauli index) and each is
    placed at the front or back of the product, whichever gives the smaller
    normalized-Frobenius norm of the accumulated leading error.  Ties go to
    the back.  Index 0 of the result acts first.
    """
    n = h.n_qubits
    items = sorted(h.terms.items(), key=lambda kv: (-abs(kv[1]), kv[0].index))
    order: deque = deque()
    acc = _ErrorAccumulator()
    xs = np.zeros(len(items), dtype=np.int64)
    zs = np.zeros(len(items), dtype=np.int64)
    hs = np.zeros(len(items))
    for m, (p, c) in enumerate(items):
        if m:
            idx, vals = acc.contribution(n, p.x_mask, p.z_mask, c, xs[:m], zs[:m], hs[:m])
            if len(idx):
                if acc.overlap(idx, vals) <= 0.0:
                    acc.add(idx, vals, 1.0)
                    order.append((p, c))
                else:
                    acc.add(idx, vals, -1.0)
                    order.appendleft((p, c))
            else:
                order.append((p, c))
        else:
            order.append((p, c))
        xs[m], zs[m], hs[m] = p.x_mask, p.z_mask, c
    return list(order)


def trotter_order_naive(h: Hamiltonian) -> list[tuple[PauliString, float]]:
    """Terms in Pauli enumeration order (by weight, then support, then letters)."""
    return sorted(h.terms.items(), key=lambda kv: (kv[0].weight, _support_key(kv[0]), kv[0].label))


def _support_key(p: PauliString):
    return tuple(p.qubits())


def trotter_order(h: Hamiltonian, method: str = "greedy") -> list[tuple[PauliString, float]]:
    if method == "greedy":
        return trotter_order_greedy(h)
    if method == "naive":
        return trotter_order_naive(h)
    raise ValueError(f"unknown Trotter order {method!r}; expected one of {ORDERS}")


def leading_error_terms(order: Sequence[tuple[PauliString, float]]) -> dict:
    """Coefficients ``r_c`` of the leading error ``i * sum_c r_c sigma_c``.

    For the product ``exp(A_{m-1}) ... exp(A_0)`` with ``A_a = i h_a sigma_a``
    the leading (second order) error is ``1/2 sum_{a > b} [A_a, A_b]``.  Keys
    are :attr:`PauliString.index` values.
    """
    if not order:
        return {}
    n = order[0][0].n_qubits
    xs, zs, hs = _term_arrays(order)
    acc = _ErrorAccumulator()
    for a in range(1, len(order)):
        idx, vals = acc.contribution(n, int(xs[a]), int(zs[a]), hs[a], xs[:a], zs[:a], hs[:a])
        acc.add(idx, vals, 1.0)
    return {k: v for k, v in acc.r.items() if v != 0.0}


def leading_error_norm2(order: Sequence[tuple[PauliString, float]]) -> float:
    """Squared normalized-Frobenius norm of the leading Trotter error."""
    return math.fsum(v * v for v in leading_error_terms(order).values())


def pairwise_bound(h: Hamiltonian) -> float:
    """``sum_{I<J} h_I**2 h_J**2``."""
    sq = np.array([c * c for c in h.terms.values()])
    return float((sq.sum() ** 2 - np.sum(sq**2)) / 2)


def trotter_product(order: Sequence[tuple[PauliString, float]], t: float = 1.0) -> np.ndarray:
    """Dense ``prod exp(i h_a t sigma_a)``, index 0 acting first."""
    if not order:
        raise ValueError("empty Trotter product")
    n = order[0][0].n_qubits
    u = np.eye(1 << n, dtype=complex)
    for p, c in order:
        # exp(i theta sigma) = cos theta + i sin theta sigma for a Pauli string
        u = (math.cos(c * t) * u) + 1j * math.sin(c * t) * (linalg.dense(p) @ u)
    return u


def trotterize(order: Sequence[tuple[PauliString, float]], t: float, n_qubits: int) -> Circuit:
    """Synthesize ``prod exp(i h_a t sigma_a)`` gate by gate."""
    c = Circuit(n_qubits)
    for p, coeff in order:
        c.extend(synthesize_monomial(p, coeff * t))
    return c


# -- end-to-end compile -----------------------------------------------------


@dataclass(frozen=True)
class Budget:
    target_error: float
    error_norm: str = "killing"

    def __post_init__(self):
        if not (self.target_error > 0 and math.isfinite(self.target_error)):
            raise ValueError("target error must be positive and finite")
        if self.error_norm not in ("killing", "op"):
            raise ValueError(f"error norm must be 'killing' or 'op', got {self.error_norm!r}")


@dataclass
class CompileReport:
    error_kind: str
    target_error: float
    gate_count: int
    segment_count: int
    delta: float
    threshold: float
    n_cheap: int
    n_kept_max: int
    pruned_terms: int
    gamma_min: float
    killing_length: float
    complexity_length: float
    variant: str
    trotter_order: str
    measured_killing: float
    measured_fbar: float
    measured_op: float
    predicted_killing: float
    predicted_op: float
    predicted_gate_bound: float
    accounting_bound: int

    @property
    def measured_error(self) -> float:
        return self.measured_killing if self.error_kind == "killing" else self.measured_op

    @property
    def predicted_error(self) -> float:
        return self.predicted_killing if self.error_kind == "killing" else self.predicted_op

    def to_json(self) -> dict:
        return asdict(self)


def op_threshold(s: PenaltySchedule, length: float, eps: float) -> tuple[float, str]:
    """Pruning threshold for an operator-norm budget and the rule that set it.

    Prefers the smallest distinct penalty whose harmonic tail is at most
    ``eps**2 / (4 L**2)``; if only the maximal penalty qualifies, falls back
    to ``2**N * 4 L**2 / eps**2``.
    """
    target = eps * eps / (4 * length * length)
    top = s.max_penalty()
    for v in s.distinct_penalties():
        if v < top and s.harmonic_tail(v) <= target:
            return v, "tail"
    fallback = max(1.0, 2**s.n_qubits * 4 * length * length / (eps * eps))
    if fallback >= top:
        raise BudgetInfeasible(
            f"harmonic tail condition sum(1/I over I > threshold) <= eps^2/(4L^2) = {target:.6g} "
            f"cannot be met below the maximal penalty {top:.6g}, and the fallback threshold "
            f"2^N*4L^2/eps^2 = {fallback:.6g} is not below it either"
        )
    return fallback, "2N"


def compile_path(
    p: Path,
    s: PenaltySchedule,
    budget: Budget,
    order: str = "greedy",
    measure: bool = True,
    delta: Optional[float] = None,
) -> tuple[Circuit, CompileReport]:
    """Compile a normalized path to two-local gates within an error budget.

    ``delta`` overrides the window length chosen from the budget; the
    predicted errors are then evaluated at the override.
    """
    if s.n_qubits != p.n_qubits:
        raise ValueError("schedule/path size mismatch")
    if not is_normalized(p):
        raise ValueError("compile requires a normalized path (see path.normalize)")
    n = p.n_qubits
    eps = budget.target_error
    length = complexity_length(p, s)
    total = p.total_time
    gamma_min = min(_weighted_norm(seg.hamiltonian, s) for seg in p.segments)

    if budget.error_norm == "killing":
        # thresholds below 1 keep nothing; 1 still satisfies Ibar >= 4L^2/s^2
        threshold = max(1.0, 4 * length * length / (eps * eps))
        variant = "killing"
        n_cheap = s.count_cheap(threshold)
        auto_delta = gamma_min * eps / (3 * math.pi * math.sqrt(n_cheap) * length)
    else:
        threshold, variant = op_threshold(s, length, eps)
        n_cheap = s.count_cheap(threshold)
        auto_delta = gamma_min * eps / (6 * n_cheap * length)
    if delta is None:
        # keep the per-window bounds valid
        delta = min(auto_delta, 0.999 / math.sqrt(n_cheap), total)
    elif not (0 < delta <= total):
        raise ValueError(f"delta must lie in (0, total time {total:.6g}]")

    pruned = prune_path(p, s, threshold)
    windows = averaged_windows(pruned, delta)
    circuit = Circuit(n, [], p.global_phase)
    n_kept_max = 0
    for w, h in windows:
        ordered = trotter_order(h, order)
        n_kept_max = max(n_kept_max, len(ordered))
        circuit.extend(trotterize(ordered, w, n))
    pruned_terms = len({q for seg in p.segments for q in seg.hamiltonian.terms if s.penalty(q) > threshold})

    sqrt_n = math.sqrt(n_cheap)
    prune_killing = length / math.sqrt(threshold)
    prune_op = length * min(math.sqrt(s.harmonic_tail(threshold)), 2 ** (n / 2) / math.sqrt(threshold))
    predicted_killing = length * (1.5 * math.pi * sqrt_n * delta / gamma_min) + prune_killing
    predicted_op = length * (3 * n_cheap * delta / gamma_min) + prune_op
    if budget.error_norm == "killing":
        gate_bound = 6 * math.pi * n * n_cheap**1.5 * length**2 / eps
    else:
        gate_bound = 12 * n * n_cheap**2 * length**2 / eps

    mk = mf = mo = float("nan")
    if measure:
        u_target = evolve(p)
        u_circ = circuit_to_dense(circuit)
        mk = linalg.killing_distance(u_circ, u_target)
        mf = linalg.fbar_distance(u_circ, u_target)
        mo = linalg.op_distance(u_circ, u_target)

    report = CompileReport(
        error_kind=budget.error_norm,
        target_error=eps,
        gate_count=circuit.gate_count,
        segment_count=len(windows),
        delta=delta,
        threshold=threshold,
        n_cheap=n_cheap,
        n_kept_max=n_kept_max,
        pruned_terms=pruned_terms,
        gamma_min=gamma_min,
        killing_length=killing_length(p),
        complexity_length=length,
        variant=variant,
        trotter_order=order,
        measured_killing=mk,
        measured_fbar=mf,
        measured_op=mo,
        predicted_killing=predicted_killing,
        predicted_op=predicted_op,
        predicted_gate_bound=gate_bound,
        accounting_bound=2 * n * len(windows) * n_kept_max,
    )
    return circuit, report
