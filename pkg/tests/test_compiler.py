import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complexity_geometry import linalg
from complexity_geometry.compiler import (
    Budget,
    BudgetInfeasible,
    Circuit,
    TwoLocalGate,
    apply_circuit,
    averaged_windows,
    circuit_to_dense,
    compile_path,
    leading_error_norm2,
    leading_error_terms,
    monomial_gate_count,
    op_threshold,
    pairwise_bound,
    prune,
    segment_average,
    synthesize_monomial,
    trotter_order,
    trotter_product,
    trotterize,
    window_durations,
)
from complexity_geometry.path import Hamiltonian, Path, Segment, complexity_length, evolve
from complexity_geometry.pauli import PauliString
from complexity_geometry.sampling import random_hamiltonian, random_path, random_state, random_unitary, trial_rng
from complexity_geometry.schedule import PenaltySchedule

from conftest import P, kron_oracle


def embed_oracle(n, a, b, block):
    """Embed a 4x4 block on qubits (a, b) by permuting basis states explicitly."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub_in = 2 * bits[a] + bits[b]
        for sub_out in range(4):
            amp = block[sub_out, sub_in]
            if amp == 0:
                continue
            ob = list(bits)
            ob[a], ob[b] = sub_out >> 1, sub_out & 1
            row = sum(bit << (n - 1 - q) for q, bit in enumerate(ob))
            out[row, col] += amp
    return out


def random_block(rng):
    return random_unitary(rng, 2)


class TestCircuit:
    def test_empty_is_identity(self):
        assert np.array_equal(circuit_to_dense(Circuit(3)), np.eye(8))

    def test_single_gate_is_block(self):
        blk = random_block(trial_rng(1))
        c = Circuit(2, [TwoLocalGate((0, 1), blk)])
        assert np.allclose(circuit_to_dense(c), blk, atol=1e-15)

    def test_reversed_pair_swaps_qubits(self):
        blk = random_block(trial_rng(2))
        swap = np.eye(4)[[0, 2, 1, 3]]
        c = Circuit(2, [TwoLocalGate((1, 0), blk)])
        assert np.allclose(circuit_to_dense(c), swap @ blk @ swap, atol=1e-15)

    @pytest.mark.parametrize("a,b", list(itertools.permutations(range(4), 2)))
    def test_embedding_matches_oracle(self, a, b):
        blk = random_block(trial_rng(3, a, b))
        c = Circuit(4, [TwoLocalGate((a, b), blk)])
        assert np.allclose(circuit_to_dense(c), embed_oracle(4, a, b, blk), atol=1e-14)

    def test_order_gate_zero_first(self):
        rng = trial_rng(4)
        g0, g1 = TwoLocalGate((0, 2), random_block(rng)), TwoLocalGate((1, 2), random_block(rng))
        c = Circuit(3, [g0, g1], global_phase=1j)
        expect = 1j * embed_oracle(3, 1, 2, g1.block) @ embed_oracle(3, 0, 2, g0.block)
        assert np.allclose(circuit_to_dense(c), expect, atol=1e-14)

    def test_apply_matches_dense(self):
        rng = trial_rng(5)
        c = Circuit(3, [TwoLocalGate((a, b), random_block(rng)) for a, b in [(0, 1), (2, 0), (1, 2)]])
        psi = random_state(rng, 3)
        assert np.allclose(apply_circuit(c, psi), circuit_to_dense(c) @ psi, atol=1e-14)

    def test_rejects_bad_gates(self):
        with pytest.raises(ValueError):
            TwoLocalGate((0, 0), np.eye(4))
        with pytest.raises(ValueError):
            TwoLocalGate((0, 1), 2 * np.eye(4))
        with pytest.raises(ValueError):
            Circuit(2, [TwoLocalGate((0, 2), np.eye(4))])

    def test_json_round_trip(self):
        c = synthesize_monomial(P("XYZI"), 0.37)
        again = Circuit.from_json(c.to_json())
        assert again.gate_count == c.gate_count
        assert np.array_equal(circuit_to_dense(again), circuit_to_dense(c))

    def test_cap(self):
        with pytest.raises(ValueError):
            circuit_to_dense(Circuit(linalg.MAX_DENSE_QUBITS + 1))


class TestMonomial:
    @pytest.mark.parametrize("label", ["XI", "IZ", "XY", "ZZI", "XYZ", "YIXZ", "ZXYXZ", "XXXXXX"])
    @pytest.mark.parametrize("angle", [0.37, math.pi / 4, -1.2, 7.5])
    def test_exact(self, label, angle):
        p = P(label)
        c = synthesize_monomial(p, angle)
        expect = linalg.expm_hermitian(kron_oracle(label), angle)
        assert linalg.op_distance(circuit_to_dense(c), expect) <= 1e-9
        assert c.gate_count == max(1, 2 * p.weight - 3)

    def test_weight_five_uses_seven(self):
        assert synthesize_monomial(P("XYZXY"), 0.2).gate_count == 7
        assert monomial_gate_count(5) == 7

    def test_identity_is_phase(self):
        c = synthesize_monomial(P("III"), 0.4)
        assert c.gate_count == 0
        assert c.global_phase == pytest.approx(np.exp(0.4j))

    def test_needs_two_qubits(self):
        with pytest.raises(ValueError):
            synthesize_monomial(P("X"), 0.1)

    @given(st.integers(2, 5).flatmap(lambda n: st.integers(1, 4**n - 1).map(lambda i: (n, i))), st.floats(-10, 10))
    @settings(max_examples=100, deadline=None)
    def test_random_exact(self, ni, angle):
        n, i = ni
        p = PauliString.from_index(n, i)
        c = synthesize_monomial(p, angle)
        assert linalg.op_distance(circuit_to_dense(c), linalg.expm_hermitian(linalg.dense(p), angle)) <= 1e-9


class TestPrune:
    def test_cliff_example(self):
        h = Hamiltonian(3, {P("XXI"): 0.6, P("XYZ"): 0.8})
        assert prune(h, PenaltySchedule.cliff(3, 100), 10) == Hamiltonian(3, {P("XXI"): 0.6})

    def test_above_max_is_identity(self):
        s = PenaltySchedule.binomial(3, 2)
        h = random_hamiltonian(trial_rng(1), 3)
        assert prune(h, s, s.max_penalty()) == h

    def test_rejects_sub_unit(self):
        with pytest.raises(ValueError):
            prune(Hamiltonian(1, {P("X"): 1.0}), PenaltySchedule.uniform(1), 0.5)

    @given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.floats(1, 1e4))
    @settings(max_examples=50)
    def test_dropped_mass(self, n, seed, thr):
        s = PenaltySchedule.binomial(n, 2)
        h = random_hamiltonian(trial_rng(seed), n, schedule=s)
        gamma2 = sum(s.penalty(p) * c * c for p, c in h.terms.items())
        dropped = sum(c * c for p, c in h.terms.items() if s.penalty(p) > thr)
        assert dropped <= gamma2 / thr * (1 + 1e-12)


class TestSegmentAverage:
    def test_windows(self):
        assert window_durations(1.0, 0.3) == pytest.approx([0.3, 0.3, 0.3, 0.1])
        assert window_durations(1.0, 0.25) == pytest.approx([0.25] * 4)

    def test_constant_path(self):
        h = random_hamiltonian(trial_rng(1), 2)
        for avg in segment_average(Path.constant(h, 1.0), 0.3):
            assert np.allclose(avg.to_vector(), h.to_vector(), atol=1e-15)

    def test_two_halves(self):
        h1 = Hamiltonian(2, {P("XI"): 1.0})
        h2 = Hamiltonian(2, {P("IZ"): 1.0})
        p = Path(2, (Segment(0.5, h1), Segment(0.5, h2)))
        (avg,) = segment_average(p, 1.0)
        assert avg == Hamiltonian(2, {P("XI"): 0.5, P("IZ"): 0.5})

    def test_straddling_window(self):
        h1 = Hamiltonian(1, {P("X"): 1.0})
        h2 = Hamiltonian(1, {P("Z"): 1.0})
        p = Path(1, (Segment(0.3, h1), Segment(0.7, h2)))
        w = averaged_windows(p, 0.5)
        assert [d for d, _ in w] == pytest.approx([0.5, 0.5])
        assert w[0][1].coeff(P("X")) == pytest.approx(0.6)
        assert w[0][1].coeff(P("Z")) == pytest.approx(0.4)
        assert w[1][1].coeff(P("Z")) == pytest.approx(1.0) and len(w[1][1]) == 1

    def test_rejects_bad_delta(self):
        p = random_path(trial_rng(2), 2, 2)
        with pytest.raises(ValueError):
            segment_average(p, 0)
        with pytest.raises(ValueError):
            segment_average(p, 2 * p.total_time)

    def test_fbar_error_per_window(self):
        # N=4 at delta = 0.05: every window within 2 sqrt(N) delta^2 of the path-ordered truth
        delta = 0.05
        for i in range(20):
            rng = trial_rng(3, i)
            n_terms = int(rng.integers(5, 40))
            p = random_path(rng, 4, 5, total_time=0.5, n_terms=n_terms)
            windows = averaged_windows(p, delta)
            t0 = 0.0
            for w, h in windows:
                exact = evolve(_slice(p, t0, t0 + w))
                approx = linalg.expm_hermitian(linalg.dense(h), w)
                kept = len({q for seg in p.segments for q in seg.hamiltonian.terms})
                assert linalg.fbar_distance(exact, approx) <= 2 * math.sqrt(kept) * w**2
                t0 += w


def _slice(p: Path, a: float, b: float) -> Path:
    segs, t = [], 0.0
    for seg in p.segments:
        lo, hi = max(a, t), min(b, t + seg.duration)
        if hi > lo + 1e-15:
            segs.append(Segment(hi - lo, seg.hamiltonian))
        t += seg.duration
    return Path(p.n_qubits, tuple(segs))


def dense_leading_error(order):
    """(1/2) sum over a acting after b of [A_a, A_b] with A = i h sigma, as a matrix."""
    mats = [1j * c * linalg.dense(p) for p, c in order]
    dim = mats[0].shape[0]
    e = np.zeros((dim, dim), dtype=complex)
    for a in range(len(mats)):
        for b in range(a):
            e += 0.5 * (mats[a] @ mats[b] - mats[b] @ mats[a])
    return e


class TestTrotter:
    def test_all_commuting(self):
        h = Hamiltonian(2, {P("ZI"): 0.5, P("IZ"): 0.5, P("ZZ"): 0.7})
        assert leading_error_norm2(trotter_order(h)) == 0.0

    def test_two_terms_either_order(self):
        h = Hamiltonian(1, {P("X"): 0.6, P("Y"): 0.8})
        a = [(P("X"), 0.6), (P("Y"), 0.8)]
        assert leading_error_norm2(a) == pytest.approx(leading_error_norm2(a[::-1]))
        assert leading_error_norm2(trotter_order(h)) == pytest.approx((0.6 * 0.8) ** 2)

    @pytest.mark.parametrize("method", ["greedy", "naive"])
    def test_leading_terms_match_dense(self, method):
        h = random_hamiltonian(trial_rng(6), 3, n_terms=15)
        order = trotter_order(h, method)
        r = leading_error_terms(order)
        expect = dense_leading_error(order)
        got = sum(1j * v * linalg.dense(PauliString.from_index(3, k)) for k, v in r.items())
        assert np.allclose(got, expect, atol=1e-13)
        assert leading_error_norm2(order) == pytest.approx(linalg.norm_fbar(expect) ** 2)

    def test_leading_term_predicts_product(self):
        # U_trot - U_exact ~ delta^2 * E for small delta
        h = random_hamiltonian(trial_rng(7), 2, n_terms=8)
        order = trotter_order(h)
        e = dense_leading_error(order)
        exact = lambda d: linalg.expm_hermitian(linalg.dense(h), d)
        for d in (1e-2, 1e-3):
            diff = trotter_product(order, d) - exact(d)
            assert linalg.norm_op(diff - d * d * e) <= 10 * d**3

    def test_orders_are_permutations(self):
        h = random_hamiltonian(trial_rng(8), 3, n_terms=20)
        for m in ("greedy", "naive"):
            assert sorted(p.index for p, _ in trotter_order(h, m)) == sorted(p.index for p in h.terms)

    def test_naive_order_is_enumeration(self):
        h = Hamiltonian(2, {P("ZZ"): 0.1, P("XI"): 0.2, P("IY"): 0.3, P("YI"): 0.4})
        assert [p.label for p, _ in trotter_order(h, "naive")] == ["XI", "YI", "IY", "ZZ"]

    def test_unknown(self):
        with pytest.raises(ValueError):
            trotter_order(Hamiltonian(1, {P("X"): 1.0}), "random")

    def test_trotterize_matches_product(self):
        h = random_hamiltonian(trial_rng(9), 3, n_terms=12)
        order = trotter_order(h)
        c = trotterize(order, 0.3, 3)
        assert np.allclose(circuit_to_dense(c), trotter_product(order, 0.3), atol=1e-12)

    @given(st.integers(2, 4), st.integers(2, 50), st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_greedy_guarantee(self, n, k, seed):
        k = min(k, 4**n - 1)
        h = random_hamiltonian(trial_rng(seed), n, n_terms=k)
        pw = pairwise_bound(h)
        assert leading_error_norm2(trotter_order(h, "greedy")) <= pw * (1 + 1e-12) + 1e-15
        assert pw <= 0.5 * h.norm_fbar() ** 4 * (1 + 1e-12)


class TestCompile:
    def test_two_local_constant_path(self):
        h = Hamiltonian(3, {P("XXI"): 0.6, P("IZY"): 0.8})
        p = Path.constant(h, 1.0)
        s = PenaltySchedule.cliff(3, 1e6)
        c, r = compile_path(p, s, Budget(0.2))
        assert r.pruned_terms == 0
        assert r.measured_killing <= 0.2
        assert r.gate_count == c.gate_count <= r.accounting_bound

    def test_report_fields(self):
        p = random_path(trial_rng(10), 3, 3, PenaltySchedule.cliff(3, 100), total_time=0.5)
        c, r = compile_path(p, PenaltySchedule.cliff(3, 100), Budget(0.5))
        d = r.to_json()
        for key in ("gate_count", "segment_count", "delta", "threshold", "measured_killing", "measured_fbar",
                    "measured_op", "predicted_killing", "predicted_op", "predicted_gate_bound"):
            assert key in d
        assert r.measured_killing >= 0 and r.measured_fbar >= 0 and r.measured_op >= 0
        assert r.threshold == pytest.approx(4 * r.complexity_length**2 / 0.25)
        assert r.segment_count == math.ceil(p.total_time / r.delta - 1e-9)
        assert r.measured_killing <= 0.5

    def test_op_budget(self):
        s = PenaltySchedule.binomial(3, 2)
        # same draws, rescaled to complexity length 1.5
        length = complexity_length(random_path(trial_rng(11), 3, 3, s), s)
        p = random_path(trial_rng(11), 3, 3, s, total_time=1.5 / length)
        c, r = compile_path(p, s, Budget(0.8, "op"))
        assert r.complexity_length == pytest.approx(1.5)
        assert r.measured_op <= 0.8
        assert r.gate_count <= r.accounting_bound

    def test_infeasible(self):
        s = PenaltySchedule.binomial(3, 0.1)
        p = random_path(trial_rng(12), 3, 2, total_time=3.0)
        with pytest.raises(BudgetInfeasible, match="harmonic tail"):
            compile_path(p, s, Budget(1e-3, "op"))

    @pytest.mark.parametrize("kind", ["killing", "op"])
    def test_generous_budget(self, kind):
        # s_err > 2L would put 4L^2/s^2 below every penalty
        s = PenaltySchedule.cliff(3, 1e6)
        p = random_path(trial_rng(14), 3, 3, s, total_time=0.05)
        assert 4 * complexity_length(p, s) ** 2 / 0.25 < 1
        _, r = compile_path(p, s, Budget(0.5, kind))
        assert r.threshold == 1.0 and r.n_cheap == 37
        assert r.measured_error <= 0.5

    def test_rejects_unnormalized(self):
        p = Path.constant(Hamiltonian(2, {P("XX"): 2.0}), 1.0)
        with pytest.raises(ValueError):
            compile_path(p, PenaltySchedule.cliff(2, 10), Budget(0.5))

    def test_delta_override_and_orders(self):
        s = PenaltySchedule.cliff(2, 1e6)
        p = random_path(trial_rng(13), 2, 3)
        for order in ("greedy", "naive"):
            _, r = compile_path(p, s, Budget(0.1), order=order, delta=0.05)
            assert r.delta == 0.05 and r.segment_count == 20
            assert r.measured_killing <= r.predicted_killing

    def test_op_threshold_tail(self):
        s = PenaltySchedule.binomial(4, 2)
        thr, rule = op_threshold(s, 2.0, 0.5)
        assert s.harmonic_tail(thr) <= 0.25**2 / 4
        assert rule in ("tail", "2N")

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            Budget(0.0)
        with pytest.raises(ValueError):
            Budget(0.1, "diamond")
