import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import strategies as st

from complexity_geometry.pauli import PauliString

PAULI_2x2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_oracle(label: str) -> np.ndarray:
    """Dense Pauli string by explicit Kronecker products (qubit 0 leftmost)."""
    return reduce(np.kron, [PAULI_2x2[c] for c in label])


def taylor_expm(a: np.ndarray) -> np.ndarray:
    """exp(a) by scaling and squaring with a truncated Taylor series."""
    norm = np.linalg.norm(a, 1)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    b = a / 2**s
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, 30):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def pauli_labels(n_min=1, n_max=4):
    return st.integers(n_min, n_max).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def pauli_pair(n_min=1, n_max=4):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))
    )


def pauli_triple(n_min=1, n_max=4):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.tuples(*(st.text("IXYZ", min_size=n, max_size=n) for _ in range(3)))
    )


def P(label: str) -> PauliString:
    return PauliString.from_label(label)


# -- acceptance summary ---------------------------------------------------------

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "ok": True, "seen": False})
    if rep.when == "call" or rep.failed:
        entry["seen"] = True
        if rep.failed:
            entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        status = "PASS" if e["ok"] and e["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {e['title']}")
