"""Randomized inequality suites shared by the ``verify`` command and the tests.

Each check compares a measured left side against a bound on the right and
records the worst slack ``rhs - lhs`` over all trials.  The first failing
instance is kept with enough data to replay it (seed, suite key, trial).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linalg
from .bounds import op_vs_complexity_sandwich
from .compiler import (
    averaged_windows,
    circuit_to_dense,
    leading_error_norm2,
    monomial_gate_count,
    pairwise_bound,
    prune_path,
    synthesize_monomial,
    trotter_order,
    trotter_product,
)
from .path import Path, complexity_length, evolve
from .pauli import PauliString, enumerate_paulis
from .sampling import random_hamiltonian, random_path, random_state, random_unitary, trial_rng
from .schedule import PenaltySchedule

#: Negative-control hooks that deliberately corrupt one quantity.
FAULTS = ("fbar", "op")


@dataclass
class Check:
    name: str
    tol: float = 1e-9
    trials: int = 0
    failures: int = 0
    worst_slack: float = math.inf
    first_failure: Optional[dict] = None

    def record(self, lhs: float, rhs: float, instance: Callable[[], dict]) -> None:
        self.trials += 1
        slack = rhs - lhs
        self.worst_slack = min(self.worst_slack, slack)
        if not lhs <= rhs + self.tol:
            self.failures += 1
            if self.first_failure is None:
                self.first_failure = {"lhs": lhs, "rhs": rhs, **instance()}

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "tol": self.tol,
            "trials": self.trials,
            "failures": self.failures,
            "worst_slack": self.worst_slack,
            "passed": self.passed,
            "first_failure": self.first_failure,
        }


class Suite:
    """Collection of checks keyed by name."""

    def __init__(self):
        self.checks: dict[str, Check] = {}

    def check(self, name: str, tol: float = 1e-9) -> Check:
        if name not in self.checks:
            self.checks[name] = Check(name, tol)
        return self.checks[name]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json(self) -> list:
        return [c.to_json() for c in self.checks.values()]


def _replay(seed: int, key: int, trial: int, **extra) -> Callable[[], dict]:
    return lambda: {"seed": seed, "suite_key": key, "trial": trial, **extra}


# -- linalg ------------------------------------------------------------------


def norm_suite(suite: Suite, n: int, trials: int, seed: int, fault: Optional[str] = None) -> None:
    fbar = linalg.fbar_distance
    if fault == "fbar":
        fbar = lambda a, b: 2.0 * linalg.fbar_distance(a, b)
    norm_op = linalg.norm_op
    if fault == "op":
        norm_op = lambda a: 0.5 * linalg.norm_op(a)
    dim = 1 << n
    lo = suite.check("fbar_le_killing")
    hi = suite.check("killing_le_half_pi_fbar")
    o1 = suite.check("fbar_norm_le_op_norm")
    o2 = suite.check("op_norm_le_2^(N/2)_fbar_norm")
    bi = suite.check("bi_invariance", tol=1e-8)
    comp_f = suite.check("composition_fbar")
    comp_o = suite.check("composition_op")
    st = suite.check("state_error_le_op_distance")
    for i in range(trials):
        rng = trial_rng(seed, 1, i)
        u1, u2 = random_unitary(rng, n), random_unitary(rng, n)
        inst = _replay(seed, 1, i, u1=linalg.matrix_to_json(u1), u2=linalg.matrix_to_json(u2))
        s = linalg.killing_distance(u1, u2)
        f = fbar(u1, u2)
        lo.record(f, s, inst)
        hi.record(s, math.pi / 2 * f, inst)

        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        o1.record(linalg.norm_fbar(a), norm_op(a), _replay(seed, 1, i))
        o2.record(norm_op(a), 2 ** (n / 2) * linalg.norm_fbar(a), _replay(seed, 1, i))

        ul, ur = random_unitary(rng, n), random_unitary(rng, n)
        for dist in (linalg.killing_distance, linalg.fbar_distance, linalg.op_distance):
            d0, d1 = dist(u1, u2), dist(ul @ u1 @ ur, ul @ u2 @ ur)
            bi.record(abs(d1 - d0), 0.0, _replay(seed, 1, i, distance=dist.__name__))

        v1, v2 = random_unitary(rng, n), random_unitary(rng, n)
        lhs = u1 @ u2 - v1 @ v2
        comp_f.record(linalg.norm_fbar(lhs), fbar(u1, v1) + fbar(u2, v2), _replay(seed, 1, i))
        comp_o.record(norm_op(lhs), norm_op(u1 - v1) + norm_op(u2 - v2), _replay(seed, 1, i))

        psi = random_state(rng, n)
        st.record(linalg.state_error(u1, u2, psi), norm_op(u1 - u2), _replay(seed, 1, i))


def hamiltonian_norm_suite(suite: Suite, n: int, trials: int, seed: int) -> None:
    c1 = suite.check("hamiltonian_op_le_l1")
    c2 = suite.check("hamiltonian_l1_le_sqrtN_fbar")
    pool = [p for p in enumerate_paulis(n) if p.weight > 0]
    for i in range(trials):
        rng = trial_rng(seed, 2, i)
        k = int(rng.integers(1, min(len(pool), 20) + 1))
        h = random_hamiltonian(rng, n, n_terms=k).scaled(float(rng.uniform(0.1, 3.0)))
        l1 = math.fsum(abs(c) for c in h.terms.values())
        c1.record(linalg.norm_op(linalg.dense(h)), l1, _replay(seed, 2, i))
        c2.record(l1, math.sqrt(len(h)) * h.norm_fbar(), _replay(seed, 2, i))


def arc_chord_table(samples: int = 100) -> list[dict]:
    """Chord ``|1 - e^{it}|`` against ``2 sin(t/2)`` and arc length on U(1)."""
    rows = []
    one = np.ones((1, 1), dtype=complex)
    for j in range(1, samples + 1):
        t = math.pi * j / samples
        u = np.array([[complex(math.cos(t), math.sin(t))]])
        rows.append(
            {
                "t": t,
                "chord": linalg.fbar_distance(one, u),
                "expected_chord": 2 * math.sin(t / 2),
                "arc": linalg.killing_distance(one, u),
            }
        )
    return rows


# -- compile pipeline ---------------------------------------------------------


def pruning_suite(
    suite: Suite, n: int, trials: int, seed: int, schedule: PenaltySchedule, thresholds, tol: float = 1e-8
) -> None:
    ck = suite.check(f"pruning_killing[{schedule.name}]", tol)
    co = suite.check(f"pruning_op[{schedule.name}]", tol)
    for i in range(trials):
        rng = trial_rng(seed, 3, i)
        # alternate plain and schedule-shaped coefficients
        p = random_path(rng, n, 3, schedule if i % 2 else None, total_time=float(rng.uniform(0.2, 2.0)))
        u = evolve(p)
        length = complexity_length(p, schedule)
        for thr in thresholds:
            up = evolve(prune_path(p, schedule, thr))
            inst = lambda: {"seed": seed, "suite_key": 3, "trial": i, "threshold": thr, "path": p.to_json()}
            ck.record(linalg.killing_distance(u, up), length / math.sqrt(thr), inst)
            tail = schedule.harmonic_tail(thr)
            co.record(
                linalg.op_distance(u, up), length * min(math.sqrt(tail), 2 ** (n / 2) / math.sqrt(thr)), inst
            )


def random_window(rng: np.random.Generator, n: int, n_terms: int, delta: float, pieces: int = 3) -> Path:
    """Path of total duration ``delta`` whose pieces share one support of ``n_terms`` strings."""
    pool = [p for p in enumerate_paulis(n) if p.weight > 0]
    pick = rng.choice(len(pool), size=n_terms, replace=False)
    support = [pool[j] for j in sorted(pick)]
    return random_path(rng, n, pieces, total_time=delta, support=support)


def segment_suite(suite: Suite, n: int, trials: int, seed: int, deltas=(0.01, 0.05, 0.1)) -> None:
    for delta in deltas:
        n_terms = min(4**n - 1, 40, math.ceil(1 / delta**2) - 1)
        if not delta < n_terms**-0.5:
            raise ValueError("window size violates delta < N^-1/2")
        ak = suite.check(f"averaging_killing[delta={delta:g}]")
        ao = suite.check(f"averaging_op[delta={delta:g}]")
        tk = suite.check(f"trotter_killing[delta={delta:g}]")
        to = suite.check(f"trotter_op[delta={delta:g}]")
        for i in range(trials):
            rng = trial_rng(seed, 4, int(delta * 1e6), i)
            win = random_window(rng, n, n_terms, delta)
            inst = lambda: {"seed": seed, "suite_key": 4, "trial": i, "path": win.to_json()}
            (_, h_avg), = averaged_windows(win, delta)
            exact = evolve(win)
            u_avg = linalg.expm_hermitian(linalg.dense(h_avg), delta)
            ak.record(linalg.killing_distance(exact, u_avg), math.pi * math.sqrt(n_terms) * delta**2, inst)
            ao.record(linalg.op_distance(exact, u_avg), 2 * n_terms * delta**2, inst)
            u_trot = trotter_product(trotter_order(h_avg, "greedy"), delta)
            k = len(h_avg)
            tk.record(linalg.killing_distance(u_avg, u_trot), math.pi / 2 * math.sqrt(k) * delta**2, inst)
            to.record(linalg.op_distance(u_avg, u_trot), k * delta**2, inst)


def greedy_suite(suite: Suite, n: int, trials: int, seed: int, n_terms: int = 50) -> None:
    g1 = suite.check("greedy_leading_le_pairwise", tol=1e-12)
    g2 = suite.check("pairwise_le_half_square", tol=1e-12)
    n_terms = min(n_terms, 4**n - 1)
    for i in range(trials):
        rng = trial_rng(seed, 5, i)
        h = random_hamiltonian(rng, n, n_terms=n_terms)
        inst = lambda: {"seed": seed, "suite_key": 5, "trial": i, "terms": h.to_json()}
        pw = pairwise_bound(h)
        g1.record(leading_error_norm2(trotter_order(h, "greedy")), pw, inst)
        g2.record(pw, 0.5 * h.norm_fbar() ** 4, inst)


def monomial_suite(suite: Suite, n: int, trials: int, seed: int) -> None:
    if n < 2:
        return
    c = suite.check("monomial_exact")
    g = suite.check("monomial_gate_count", tol=0.0)
    for i in range(trials):
        rng = trial_rng(seed, 6, i)
        p = PauliString.from_index(n, int(rng.integers(1, 4**n)))
        angle = float(rng.uniform(-math.pi, math.pi))
        circ = synthesize_monomial(p, angle)
        err = linalg.op_distance(circuit_to_dense(circ), linalg.expm_hermitian(linalg.dense(p), angle))
        inst = _replay(seed, 6, i, pauli=p.label, angle=angle)
        c.record(err, 0.0, inst)
        g.record(abs(circ.gate_count - monomial_gate_count(p.weight)), 0.0, inst)


def sandwich_suite(suite: Suite, n: int, trials: int, seed: int, schedules) -> None:
    up = suite.check("op_distance_le_upper_coeff_L", tol=1e-8)
    kl = suite.check("killing_distance_le_L", tol=1e-8)
    for i in range(trials):
        rng = trial_rng(seed, 7, i)
        s = schedules[i % len(schedules)]
        p = random_path(rng, n, 3, total_time=float(rng.uniform(0.1, 3.0)))
        u = evolve(p)
        eye = np.eye(1 << n)
        length = complexity_length(p, s)
        inst = lambda: {"seed": seed, "suite_key": 7, "trial": i, "schedule": s.descriptor(), "path": p.to_json()}
        up.record(linalg.op_distance(u, eye), op_vs_complexity_sandwich(s)["upper_coeff"] * length, inst)
        kl.record(linalg.killing_distance(u, eye), length, inst)


def default_schedules(n: int) -> list[PenaltySchedule]:
    return [PenaltySchedule.cliff(n, 100.0), PenaltySchedule.binomial(n, 1.0), PenaltySchedule.exponential(n, 2.0)]


def run_all(n: int = 3, trials: int = 200, seed: int = 0, fault: Optional[str] = None) -> dict:
    """Every suite at register size ``n``; returns a JSON-ready summary."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; expected one of {FAULTS}")
    suite = Suite()
    norm_suite(suite, n, trials, seed, fault)
    hamiltonian_norm_suite(suite, n, trials, seed)
    cliff = PenaltySchedule.cliff(n, 1e4)
    pruning_suite(suite, n, trials, seed, cliff, (10.0, 100.0, 1000.0))
    segment_suite(suite, n, max(1, trials // 4), seed)
    greedy_suite(suite, n, trials, seed)
    monomial_suite(suite, n, trials, seed)
    sandwich_suite(suite, n, trials, seed, default_schedules(n))
    table = arc_chord_table()
    arc = suite.check("arc_chord_2sin_half_t", tol=1e-12)
    for j, row in enumerate(table):
        arc.record(abs(row["chord"] - row["expected_chord"]), 0.0, lambda: {"row": j, **row})
    return {
        "config": {"n_qubits": n, "trials": trials, "seed": seed},
        "checks": suite.to_json(),
        "arc_chord": table,
        "passed": suite.passed,
    }
