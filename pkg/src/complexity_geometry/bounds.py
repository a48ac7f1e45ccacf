"""Closed-form gate-count and diameter bounds evaluated from schedule summaries.

Everything here is arithmetic over ``count_cheap``, ``harmonic_tail`` and the
distinct penalty values of a schedule; nothing builds a matrix.

The diameter functions come in two flavours.  The ``diameter_lowerbound_*``
functions evaluate the max-min expression exactly over the schedule's
penalty steps.  The ``diameter_simplified_*`` functions return the
order-of-magnitude closed forms obtained by dropping sub-exponential factors
(polynomial direction counts), which is how the bounds are usually quoted.
Both are order-of-magnitude estimates: hidden constants are not tracked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.optimize import brentq

from .pauli import count_weight
from .schedule import PenaltySchedule


@dataclass(frozen=True)
class BoundQuery:
    n_qubits: int
    schedule: PenaltySchedule
    length: float
    error: float
    error_kind: str = "killing"

    def __post_init__(self):
        if not (self.length > 0 and self.error > 0):
            raise ValueError("L and error must be positive")
        if self.error_kind not in ("killing", "op"):
            raise ValueError(f"error kind must be 'killing' or 'op', got {self.error_kind!r}")
        if self.schedule.n_qubits != self.n_qubits:
            raise ValueError("schedule/query size mismatch")


def trivial_gate_cap(n_qubits: int) -> int:
    """Generic two-local gate count ``N**2 4**N`` for any unitary."""
    return n_qubits * n_qubits * 4**n_qubits


def gate_bound_killing(q: BoundQuery) -> dict:
    """Gate count to reach Killing distance ``q.error`` along a length-L path."""
    if q.error_kind != "killing":
        raise ValueError("gate_bound_killing needs error_kind 'killing'")
    n, length, err = q.n_qubits, q.length, q.error
    threshold = 4 * length * length / (err * err)
    n_cheap = q.schedule.count_cheap(threshold)
    bound = 6 * math.pi * n * n_cheap**1.5 * length * length / err
    cap = trivial_gate_cap(n)
    return {
        "bound": bound,
        "threshold_used": threshold,
        "n_cheap": n_cheap,
        "trivial_cap": cap,
        "min_bound": min(bound, cap),
        "variant": "killing",
    }


def _op_bound(n: int, n_cheap: int, length: float, eps: float) -> float:
    if eps >= 2 * length:
        return 0.0
    return 12 * n * n_cheap**2 * length * length / eps


def op_variants(q: BoundQuery) -> dict:
    """Both operator-norm variants: ``tail`` and ``2N``.

    ``tail`` uses the smallest distinct penalty whose harmonic tail is at most
    ``eps**2/(4 L**2)``; ``2N`` uses the threshold ``2**N 4 L**2 / eps**2``.
    """
    s, n, length, eps = q.schedule, q.n_qubits, q.length, q.error
    target = eps * eps / (4 * length * length)
    tail_thr = next(v for v in s.distinct_penalties() if s.harmonic_tail(v) <= target)
    b_thr = 2**n * 4 * length * length / (eps * eps)
    out = {}
    for name, thr in (("tail", tail_thr), ("2N", b_thr)):
        nc = s.count_cheap(thr)
        out[name] = {"threshold_used": thr, "n_cheap": nc, "bound": _op_bound(n, nc, length, eps)}
    return out


def gate_bound_op(q: BoundQuery) -> dict:
    """Smaller of the two operator-norm gate bounds, tagged with its variant.

    Ties go to ``2N``.  When ``eps >= 2L`` no gates are needed and the bound
    is clamped to 0.
    """
    if q.error_kind != "op":
        raise ValueError("gate_bound_op needs error_kind 'op'")
    v = op_variants(q)
    name = "tail" if v["tail"]["bound"] < v["2N"]["bound"] else "2N"
    best = v[name]
    return {
        "bound": best["bound"],
        "variant": name,
        "threshold_used": best["threshold_used"],
        "n_cheap": best["n_cheap"],
        "other_bound": v["2N" if name == "tail" else "tail"]["bound"],
    }


def state_gate_bound(q: BoundQuery) -> dict:
    """Gates to reach inner-product error ``q.error`` between states.

    Same arithmetic as :func:`gate_bound_op` with the inner-product error in
    place of the operator-norm error.
    """
    return gate_bound_op(q)


def gate_bound(q: BoundQuery) -> dict:
    return gate_bound_killing(q) if q.error_kind == "killing" else gate_bound_op(q)


# -- diameters ---------------------------------------------------------------


def _steps(s: PenaltySchedule):
    """``(lo, hi, n_cheap)`` for each threshold interval ``[lo, hi)``; last hi is inf."""
    vals = s.distinct_penalties()
    his = vals[1:] + [math.inf]
    return [(lo, hi, s.count_cheap(lo)) for lo, hi in zip(vals, his)]


def diameter_lowerbound_unitary(s: PenaltySchedule) -> float:
    """``max_I sqrt(min(4**N n_cheap(I)**-1.5, I))`` over thresholds I.

    On each step ``[v_i, v_{i+1})`` the count is constant, so the supremum
    there is ``min(4**N n_i**-1.5, v_{i+1})``.
    """
    n = s.n_qubits
    best = 0.0
    for _, hi, nc in _steps(s):
        best = max(best, min(4.0**n * nc**-1.5, hi))
    return math.sqrt(best)


def diameter_state_bound1(s: PenaltySchedule) -> float:
    """``max_I min(2**(N/2) / n_cheap(I), tail(I)**-1/2)``."""
    n = s.n_qubits
    best = 0.0
    for lo, _, nc in _steps(s):
        tail = s.harmonic_tail(lo)
        second = math.inf if tail == 0 else tail**-0.5
        best = max(best, min(2 ** (n / 2) / nc, second))
    return best


def diameter_state_bound2(s: PenaltySchedule) -> float:
    """``max_I min(2**(N/2) / n_cheap(I), sqrt(I / 2**N))``."""
    n = s.n_qubits
    best = 0.0
    for _, hi, nc in _steps(s):
        best = max(best, min(2 ** (n / 2) / nc, math.sqrt(hi / 2**n)))
    return best


def diameter_lowerbound_state(s: PenaltySchedule) -> float:
    """Larger of the two state-space diameter bounds."""
    return max(diameter_state_bound1(s), diameter_state_bound2(s))


def _log_count(n: int, k: float) -> float:
    """``log(C(n, k) 3**k)`` continued to real ``k`` through lgamma."""
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) + k * math.log(3)


def exponential_crossing(n: int, x: float, power: float, target_log: float) -> Optional[float]:
    """Real ``k`` in (0, n) with ``power*log N_k + 2k log x = target_log``, or None."""
    f = lambda k: power * _log_count(n, k) + 2 * k * math.log(x) - target_log
    lo, hi = 1e-9, n - 1e-9
    if f(lo) > 0 or f(hi) < 0:
        return None
    return brentq(f, lo, hi, xtol=1e-14)


def diameter_simplified_unitary(s: PenaltySchedule) -> Optional[float]:
    """Closed forms with sub-exponential factors dropped; None for other kinds.

    cliff ``min(2**N, C**0.5)``; binomial ``(2**N)**(2a/(3+2a))``;
    exponential ``x**k`` for the least integer ``k`` with
    ``N_k**1.5 x**(2k) >= 4**N``.
    """
    n = s.n_qubits
    if s.kind == "cliff":
        return min(2.0**n, math.sqrt(s.params["cliff"]))
    if s.kind == "binomial":
        a = s.params["alpha"]
        return (2.0**n) ** (2 * a / (3 + 2 * a))
    if s.kind == "exponential":
        x = s.params["x"]
        for k in range(n + 1):
            if count_weight(n, k) ** 1.5 * x ** (2 * k) >= 4.0**n:
                return x**k
        return x**n
    return None


def diameter_simplified_state(s: PenaltySchedule) -> Optional[float]:
    """State-space closed forms; None where no simplified form is quoted.

    cliff ``min(2**(N/2), 2**(-N/2) C**0.5)``; binomial with ``a >= 1``
    ``(2**(N/2))**((a-1)/(a+1))``; exponential ``2**(-N/2) x**(2k)`` with
    ``N_k x**(2k) = 2**N`` solved for real ``k``.
    """
    n = s.n_qubits
    if s.kind == "cliff":
        return min(2 ** (n / 2), 2 ** (-n / 2) * math.sqrt(s.params["cliff"]))
    if s.kind == "binomial":
        a = s.params["alpha"]
        return (2 ** (n / 2)) ** ((a - 1) / (a + 1)) if a >= 1 else None
    if s.kind == "exponential":
        x = s.params["x"]
        k = exponential_crossing(n, x, 1.0, n * math.log(2))
        return None if k is None else 2 ** (-n / 2) * x ** (2 * k)
    return None


def op_vs_complexity_sandwich(s: PenaltySchedule) -> dict:
    """Coefficients relating operator-norm distance to complexity length.

    ``||U1 - U2||_op <= upper_coeff * L`` and
    ``||U1 - U2||_op >= lower_coeff * L`` for nearby unitaries.
    """
    return {
        "upper_coeff": math.sqrt(s.harmonic_sum()),
        "lower_coeff": (2 / math.pi) / math.sqrt(s.max_penalty()),
    }


def bound_row(q: BoundQuery) -> dict:
    """One row of the bounds table."""
    r = gate_bound(q)
    return {
        "schedule": q.schedule.name,
        "N": q.n_qubits,
        "L": q.length,
        "error": q.error,
        "kind": q.error_kind,
        "threshold": r["threshold_used"],
        "n_cheap": r["n_cheap"],
        "bound": r["bound"],
        "variant": r["variant"],
    }
