"""Seeded random Hamiltonians, paths, unitaries and states.

Every random suite draws from ``trial_rng(seed, *keys)``, a Philox stream
keyed by the tuple, so any single trial can be replayed on its own.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from . import linalg
from .path import Hamiltonian, Path, Segment
from .pauli import PauliString, enumerate_paulis
from .schedule import PenaltySchedule


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def _non_identity(n_qubits: int) -> list[PauliString]:
    return [p for p in enumerate_paulis(n_qubits) if p.weight > 0]


def random_hamiltonian(
    rng: np.random.Generator,
    n_qubits: int,
    n_terms: Optional[int] = None,
    schedule: Optional[PenaltySchedule] = None,
    support: Optional[list] = None,
) -> Hamiltonian:
    """Unit-norm Hamiltonian with normal coefficients.

    ``n_terms`` picks that many distinct non-identity strings (default all of
    them, or all of ``support``).  With a schedule, coefficient ``I`` is
    scaled by ``penalty(I)**-1/2`` before normalizing, so expensive
    directions are small, as they are on short paths.
    """
    pool = list(support) if support is not None else _non_identity(n_qubits)
    if n_terms is not None:
        if n_terms > len(pool):
            raise ValueError(f"asked for {n_terms} terms out of {len(pool)}")
        pick = rng.choice(len(pool), size=n_terms, replace=False)
        pool = [pool[i] for i in sorted(pick)]
    g = rng.normal(size=len(pool))
    if schedule is not None:
        g = g / np.sqrt([schedule.penalty(p) for p in pool])
    g = g / np.linalg.norm(g)
    return Hamiltonian(n_qubits, dict(zip(pool, g)))


def random_path(
    rng: np.random.Generator,
    n_qubits: int,
    n_segments: int = 3,
    schedule: Optional[PenaltySchedule] = None,
    total_time: float = 1.0,
    n_terms: Optional[int] = None,
    support: Optional[list] = None,
) -> Path:
    """Normalized path of ``n_segments`` random segments.

    Durations are uniform on [0.5, 1.5] and then rescaled to ``total_time``.
    """
    d = rng.uniform(0.5, 1.5, size=n_segments)
    d = d * (total_time / d.sum())
    segs = [
        Segment(float(t), random_hamiltonian(rng, n_qubits, n_terms, schedule, support)) for t in d
    ]
    return Path(n_qubits, tuple(segs))


def random_unitary(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    """``exp(i H t)`` with H over all 4**N strings normalized to unit norm, t uniform on [0, pi]."""
    dim = 4**n_qubits
    g = rng.normal(size=dim)
    g /= np.linalg.norm(g)
    h = Hamiltonian(n_qubits, {PauliString.from_index(n_qubits, i): float(g[i]) for i in range(dim)})
    return linalg.expm_hermitian(linalg.dense(h), rng.uniform(0.0, math.pi))


def random_state(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)
