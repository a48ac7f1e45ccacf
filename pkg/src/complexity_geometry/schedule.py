"""Penalty schedules diagonal in the Pauli basis.

A schedule assigns a penalty factor >= 1 to each of the 4**N Pauli
directions.  Weight-dependent kinds (cliff, binomial, exponential,
delayed_cliff, table) are summarized by one penalty per weight, which makes
direction counts and harmonic sums closed-form; the explicit kind stores a
per-string map and falls back to enumeration.

Thresholds follow one convention throughout: a direction is *cheap* when its
penalty is <= threshold and *pruned* when it is > threshold.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .pauli import PauliString, count_weight, enumerate_paulis

KINDS = ("cliff", "binomial", "exponential", "delayed_cliff", "table", "explicit")


@dataclass(frozen=True)
class PenaltySchedule:
    kind: str
    n_qubits: int
    params: Mapping = field(default_factory=dict)
    # per-weight penalties (weight-dependent kinds) or None
    weight_penalties: Optional[tuple] = None
    explicit: Optional[Mapping] = None
    default: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        values = list(self.weight_penalties or ()) + list((self.explicit or {}).values())
        if self.kind == "explicit":
            values.append(self.default)
        for v in values:
            if not math.isfinite(v) or v < 1.0:
                raise ValueError(f"penalties must be finite and >= 1, got {v}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def cliff(cls, n_qubits: int, cliff: float) -> "PenaltySchedule":
        w = tuple(1.0 if k <= 2 else float(cliff) for k in range(n_qubits + 1))
        return cls("cliff", n_qubits, {"cliff": float(cliff)}, w)

    @classmethod
    def binomial(cls, n_qubits: int, alpha: float) -> "PenaltySchedule":
        if alpha < 0:
            raise ValueError("binomial exponent must be non-negative")
        w = tuple(float(count_weight(n_qubits, k)) ** alpha for k in range(n_qubits + 1))
        return cls("binomial", n_qubits, {"alpha": float(alpha)}, w)

    @classmethod
    def exponential(cls, n_qubits: int, x: float) -> "PenaltySchedule":
        if x < 1:
            raise ValueError("exponential base must be >= 1")
        w = tuple(float(x) ** (2 * k) for k in range(n_qubits + 1))
        return cls("exponential", n_qubits, {"x": float(x)}, w)

    @classmethod
    def delayed_cliff(cls, n_qubits: int, k0: int, cliff: float) -> "PenaltySchedule":
        if k0 < 1:
            raise ValueError("delayed cliff onset k0 must be >= 1")
        w = tuple(1.0 if k < k0 else float(cliff) for k in range(n_qubits + 1))
        return cls("delayed_cliff", n_qubits, {"k0": int(k0), "cliff": float(cliff)}, w)

    @classmethod
    def table(cls, n_qubits: int, penalties: Mapping) -> "PenaltySchedule":
        """Per-weight table; keys are weights 0..N (ints or digit strings).

        A missing weight-0 entry defaults to 1.
        """
        by_weight = {int(k): float(v) for k, v in penalties.items()}
        by_weight.setdefault(0, 1.0)
        missing = [k for k in range(n_qubits + 1) if k not in by_weight]
        if missing:
            raise ValueError(f"table schedule missing weights {missing}")
        extra = [k for k in by_weight if k < 0 or k > n_qubits]
        if extra:
            raise ValueError(f"table schedule has weights outside 0..{n_qubits}: {extra}")
        w = tuple(by_weight[k] for k in range(n_qubits + 1))
        return cls("table", n_qubits, {"penalties": {str(k): v for k, v in enumerate(w)}}, w)

    @classmethod
    def explicit_map(cls, n_qubits: int, penalties: Mapping, default: float = 1.0) -> "PenaltySchedule":
        """Per-string penalties; strings not listed get ``default``."""
        table = {}
        for key, v in penalties.items():
            p = key if isinstance(key, PauliString) else PauliString.from_label(key)
            if p.n_qubits != n_qubits:
                raise ValueError(f"{p} does not have {n_qubits} qubits")
            table[p] = float(v)
        params = {"penalties": {p.label: v for p, v in sorted(table.items())}, "default": float(default)}
        return cls("explicit", n_qubits, params, None, table, float(default))

    @classmethod
    def uniform(cls, n_qubits: int) -> "PenaltySchedule":
        """All penalties 1: the bi-invariant (Killing) metric."""
        return cls.table(n_qubits, {k: 1.0 for k in range(n_qubits + 1)})

    @classmethod
    def from_descriptor(cls, desc: Mapping, n_qubits: Optional[int] = None) -> "PenaltySchedule":
        """Build from the JSON descriptor ``{"kind": ..., parameters...}``."""
        desc = dict(desc)
        n = desc.get("n_qubits", n_qubits)
        if n is None:
            raise ValueError("schedule descriptor needs n_qubits")
        n = int(n)
        kind = desc.get("kind")
        try:
            if kind == "cliff":
                return cls.cliff(n, desc["cliff"])
            if kind == "binomial":
                return cls.binomial(n, desc["alpha"])
            if kind == "exponential":
                return cls.exponential(n, desc["x"])
            if kind == "delayed_cliff":
                return cls.delayed_cliff(n, desc["k0"], desc["cliff"])
            if kind == "table":
                return cls.table(n, desc["penalties"])
            if kind == "explicit":
                return cls.explicit_map(n, desc["penalties"], desc.get("default", 1.0))
        except KeyError as exc:
            raise ValueError(f"{kind} schedule descriptor missing {exc.args[0]!r}") from None
        raise ValueError(f"unknown schedule kind {kind!r}")

    @classmethod
    def from_json(cls, text: str, n_qubits: Optional[int] = None) -> "PenaltySchedule":
        return cls.from_descriptor(json.loads(text), n_qubits)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "n_qubits": self.n_qubits, **self.params}

    @property
    def name(self) -> str:
        if self.kind in ("table", "explicit"):
            return self.kind
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.kind}({args})"

    # -- queries ------------------------------------------------------------

    @property
    def weight_dependent(self) -> bool:
        return self.weight_penalties is not None

    def penalty(self, p: PauliString) -> float:
        if p.n_qubits != self.n_qubits:
            raise ValueError(f"size mismatch: schedule has {self.n_qubits} qubits, string has {p.n_qubits}")
        if self.weight_dependent:
            return self.weight_penalties[p.weight]
        return self.explicit.get(p, self.default)

    def _classes(self):
        """(penalty, multiplicity) pairs covering all 4**N directions."""
        if self.weight_dependent:
            return [(v, count_weight(self.n_qubits, k)) for k, v in enumerate(self.weight_penalties)]
        n_listed = len(self.explicit)
        out = [(v, 1) for v in self.explicit.values()]
        rest = 4**self.n_qubits - n_listed
        if rest:
            out.append((self.default, rest))
        return out

    def count_cheap(self, threshold: float) -> int:
        """Number of directions with penalty <= threshold."""
        return sum(m for v, m in self._classes() if v <= threshold)

    def harmonic_tail(self, threshold: float) -> float:
        """Sum of 1/penalty over directions with penalty > threshold."""
        return math.fsum(m / v for v, m in self._classes() if v > threshold)

    def harmonic_sum(self) -> float:
        """Sum of 1/penalty over all 4**N directions."""
        return math.fsum(m / v for v, m in self._classes())

    def max_penalty(self) -> float:
        return max(v for v, m in self._classes() if m)

    def min_penalty(self) -> float:
        return min(v for v, m in self._classes() if m)

    def distinct_penalties(self) -> list[float]:
        return sorted({v for v, m in self._classes() if m})

    def penalty_vector(self) -> np.ndarray:
        """Penalties indexed by :attr:`PauliString.index`."""
        n = self.n_qubits
        out = np.ones(4**n)
        for p in enumerate_paulis(n):
            out[p.index] = self.penalty(p)
        return out
