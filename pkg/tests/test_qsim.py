"""Engine tests: registers, gates, measurement, reduced states.

Oracle values are either hand-derived literals or recomputed here through
an independent dense implementation (explicit projectors, double-loop
partial trace) rather than through the code under test.
"""

import math

import numpy as np
import pytest

from bqtsim.qsim import (
    ATOL,
    GATES,
    MAX_QUBITS,
    DensityMatrix,
    Register,
    apply_cnot,
    apply_gate1,
    equal_up_to_global_phase,
    fidelity_pure,
    make_register,
    measure,
    outcome_probabilities,
    permute,
    reduced_density,
    tensor,
)

SQH = 1.0 / math.sqrt(2.0)


def _rand_register(rng, n, prefix="q"):
    vec = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Register(tuple(f"{prefix}{k}" for k in range(n)), vec)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

class TestRegister:
    def test_msb_convention(self):
        # labels[0] is the most significant index bit: |q0 q1> = |10> sits at
        # flat index 2.
        reg = Register(("q0", "q1"), [0, 0, 1, 0])
        assert reg.amplitude("10") == 1.0 + 0j
        assert reg.index_of({"q0": 1, "q1": 0}) == 2
        assert reg.index_of({"q0": 0, "q1": 1}) == 1

    def test_normalizes_on_entry(self):
        reg = Register(("q",), [3.0, 4.0])
        assert reg.amps[0] == pytest.approx(0.6)
        assert reg.amps[1] == pytest.approx(0.8)

    def test_amps_read_only(self):
        reg = Register(("q",), [1.0, 0.0])
        with pytest.raises(ValueError):
            reg.amps[0] = 0.5

    def test_duplicate_labels(self):
        with pytest.raises(ValueError, match="duplicate"):
            Register(("a", "a"), [1, 0, 0, 0])

    def test_qubit_cap(self):
        labels = tuple(f"q{i}" for i in range(MAX_QUBITS + 1))
        with pytest.raises(ValueError, match="cap"):
            Register(labels, np.zeros(1 << len(labels)))

    def test_wrong_amplitude_count(self):
        with pytest.raises(ValueError, match="expected 4 amplitudes"):
            Register(("a", "b"), [1, 0])

    def test_zero_vector(self):
        with pytest.raises(ValueError, match="zero vector"):
            Register(("a",), [0, 0])

    def test_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            Register(("a",), [np.inf, 0])

    def test_scalar_register(self):
        reg = Register((), [1.0])
        assert reg.n_qubits == 0
        assert reg.amplitude("") == 1.0 + 0j
        assert reg.nonzero_terms() == [("", 1.0 + 0j)]

    def test_axis_lookup(self):
        reg = Register(("x", "y", "z"), np.eye(8)[0])
        assert reg.axis("y") == 1
        with pytest.raises(ValueError, match="no qubit labeled"):
            reg.axis("w")

    def test_index_of_requires_full_assignment(self):
        reg = Register(("x", "y"), [1, 0, 0, 0])
        with pytest.raises(ValueError, match="cover exactly"):
            reg.index_of({"x": 0})

    def test_amplitude_validates_bitstring(self):
        reg = Register(("x", "y"), [1, 0, 0, 0])
        with pytest.raises(ValueError):
            reg.amplitude("0")
        with pytest.raises(ValueError):
            reg.amplitude("02")


def test_make_register_accumulates_duplicates():
    reg = make_register([("0", 1.0), ("1", 1.0), ("0", 1.0)], ("q",))
    # amplitudes 2 and 1 before normalization
    assert reg.amps[0] == pytest.approx(2 / math.sqrt(5))
    assert reg.amps[1] == pytest.approx(1 / math.sqrt(5))


def test_make_register_rejects_bad_strings():
    with pytest.raises(ValueError):
        make_register([("00", 1.0)], ("q",))


def test_tensor_order_and_collision():
    left = Register(("a",), [0.6, 0.8])
    right = Register(("b",), [0.0, 1.0])
    joint = tensor(left, right)
    assert joint.labels == ("a", "b")
    assert joint.amplitude("01") == pytest.approx(0.6)
    assert joint.amplitude("11") == pytest.approx(0.8)
    with pytest.raises(ValueError, match="collision"):
        tensor(left, Register(("a",), [1, 0]))


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------

def test_single_qubit_gate_literals():
    zero = Register(("q",), [1, 0])
    assert np.allclose(apply_gate1(zero, "q", "X").amps, [0, 1])
    assert np.allclose(apply_gate1(zero, "q", "H").amps, [SQH, SQH])
    minus = apply_gate1(apply_gate1(zero, "q", "X"), "q", "Z")
    assert np.allclose(minus.amps, [0, -1])


def test_unknown_gate():
    with pytest.raises(ValueError, match="unknown gate"):
        apply_gate1(Register(("q",), [1, 0]), "q", "Y")


def test_gate_targets_named_qubit_not_position():
    reg = make_register([("00", 0.6), ("11", 0.8)], ("u", "v"))
    flipped = apply_gate1(reg, "v", "X")
    assert flipped.amplitude("01") == pytest.approx(0.6)
    assert flipped.amplitude("10") == pytest.approx(0.8)


def test_cnot_truth_table():
    for a in (0, 1):
        for b in (0, 1):
            reg = make_register([(f"{a}{b}", 1.0)], ("c", "t"))
            out = apply_cnot(reg, "c", "t")
            assert out.amplitude(f"{a}{b ^ a}") == pytest.approx(1.0)


def test_cnot_reversed_roles():
    reg = make_register([("01", 1.0)], ("c", "t"))
    out = apply_cnot(reg, "t", "c")  # control is the second label here
    assert out.amplitude("11") == pytest.approx(1.0)
    with pytest.raises(ValueError, match="differ"):
        apply_cnot(reg, "c", "c")


def test_gate_words_norm_and_involution():
    rng = np.random.default_rng(11)
    for _ in range(200):
        reg = _rand_register(rng, int(rng.integers(1, 6)))
        q = reg.labels[rng.integers(0, reg.n_qubits)]
        g = ("X", "Z", "H")[rng.integers(0, 3)]
        once = apply_gate1(reg, q, g)
        assert abs(np.linalg.norm(once.amps) - 1.0) <= ATOL
        assert np.allclose(apply_gate1(once, q, g).amps, reg.amps, atol=ATOL)


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------

def test_measure_mode_exclusivity():
    reg = Register(("q",), [1, 0])
    with pytest.raises(ValueError, match="exactly one"):
        measure(reg, "q")
    with pytest.raises(ValueError, match="exactly one"):
        measure(reg, "q", force=0, rng=np.random.default_rng(0))


def test_measure_forced_literal():
    plus = Register(("q",), [SQH, SQH])
    res = measure(plus, "q", "Z", force=1)
    assert res.outcome == 1
    assert res.probability == pytest.approx(0.5, abs=ATOL)
    assert res.register.labels == ()

    res = measure(Register(("q",), [1, 0]), "q", "X", force="-")
    assert res.probability == pytest.approx(0.5, abs=ATOL)


def test_measure_forcing_impossible_outcome():
    zero = Register(("q",), [1, 0])
    with pytest.raises(ValueError, match="probability"):
        measure(zero, "q", "Z", force=1)


def test_measure_rejects_foreign_alphabet():
    reg = Register(("q",), [1, 0])
    with pytest.raises(ValueError, match="not in"):
        measure(reg, "q", "Z", force="+")
    with pytest.raises(ValueError, match="not in"):
        measure(reg, "q", "X", force=0)


def test_measure_removes_qubit_and_collapses():
    bell = make_register([("00", 1.0), ("11", 1.0)], ("a", "b"))
    res = measure(bell, "a", "Z", force=1)
    assert res.register.labels == ("b",)
    assert np.allclose(res.register.amps, [0, 1])
    assert res.probability == pytest.approx(0.5, abs=ATOL)


def test_measure_consumes_exactly_one_draw():
    # After a sampled measurement the generator must sit exactly one draw
    # ahead of a fresh clone.
    reg = make_register([("00", 1.0), ("11", 1.0)], ("a", "b"))
    rng = np.random.default_rng(123)
    clone = np.random.default_rng(123)
    measure(reg, "a", rng=rng)
    clone.random()
    assert rng.random() == clone.random()


def test_measure_against_projector_oracle():
    # Independent oracle: explicit rank-2^{n-1} projectors on the flat vector.
    rng = np.random.default_rng(17)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        reg = _rand_register(rng, n)
        q = reg.labels[rng.integers(0, n)]
        basis = "ZX"[rng.integers(0, 2)]
        axis = reg.axis(q)
        if basis == "Z":
            vecs = (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))
        else:
            vecs = (np.array([SQH, SQH], dtype=complex), np.array([SQH, -SQH], dtype=complex))
        for pick, v in enumerate(vecs):
            ops = [np.eye(2, dtype=complex)] * n
            ops[axis] = np.outer(v, v.conj())
            proj = ops[0]
            for op in ops[1:]:
                proj = np.kron(proj, op)
            expected_p = float(np.real(np.vdot(reg.amps, proj @ reg.amps)))
            got0, got1 = outcome_probabilities(reg, q, basis)
            assert (got0, got1)[pick] == pytest.approx(expected_p, abs=ATOL)
            alphabet = (0, 1) if basis == "Z" else ("+", "-")
            res = measure(reg, q, basis, force=alphabet[pick])
            assert res.probability == pytest.approx(expected_p, abs=ATOL)
            # collapsed amplitudes: project, renormalize, then drop the axis
            collapsed = (proj @ reg.amps) / math.sqrt(expected_p)
            kept = np.tensordot(
                v.conj(), np.moveaxis(collapsed.reshape((2,) * n), axis, 0), axes=(0, 0)
            ).reshape(-1)
            assert np.allclose(res.register.amps, kept, atol=1e-10)


def test_sampled_and_forced_collapse_agree():
    rng = np.random.default_rng(29)
    for _ in range(100):
        reg = _rand_register(rng, int(rng.integers(1, 5)))
        q = reg.labels[rng.integers(0, reg.n_qubits)]
        basis = "ZX"[rng.integers(0, 2)]
        sampled = measure(reg, q, basis, rng=rng)
        forced = measure(reg, q, basis, force=sampled.outcome)
        assert sampled.probability == forced.probability
        assert np.array_equal(sampled.register.amps, forced.register.amps)


# ---------------------------------------------------------------------------
# density matrices
# ---------------------------------------------------------------------------

def test_density_matrix_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        DensityMatrix(("q",), np.array([[0.5, 1.0], [0.0, 0.5]]))
    with pytest.raises(ValueError, match="unit trace"):
        DensityMatrix(("q",), np.eye(2))
    with pytest.raises(ValueError, match="semidefinite"):
        DensityMatrix(("q",), np.diag([1.5, -0.5]).astype(complex))
    with pytest.raises(ValueError, match="2x2"):
        DensityMatrix(("q",), np.eye(4) / 4)


def test_reduced_density_against_double_loop_oracle():
    # Independent partial trace: rho[i,j] = sum_k psi[i,k] conj(psi[j,k])
    # after regrouping axes by hand.
    rng = np.random.default_rng(41)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        reg = _rand_register(rng, n)
        k = int(rng.integers(1, n))
        keep = list(rng.permutation(reg.labels)[:k])
        rho = reduced_density(reg, keep)
        axes = [reg.axis(q) for q in keep]
        rest = [a for a in range(n) if a not in axes]
        psi = reg.amps.reshape((2,) * n).transpose(axes + rest).reshape(1 << k, -1)
        expected = np.zeros((1 << k, 1 << k), dtype=complex)
        for i in range(1 << k):
            for j in range(1 << k):
                expected[i, j] = np.sum(psi[i] * psi[j].conj())
        assert np.allclose(rho.mat, expected, atol=ATOL)
        assert rho.labels == tuple(keep)


def test_reduced_density_of_entangled_half_is_mixed():
    bell = make_register([("00", 1.0), ("11", 1.0)], ("a", "b"))
    rho = reduced_density(bell, ("a",))
    assert np.allclose(rho.mat, np.eye(2) / 2, atol=ATOL)
    assert rho.purity() == pytest.approx(0.5, abs=ATOL)


def test_reduced_density_argument_errors():
    bell = make_register([("00", 1.0), ("11", 1.0)], ("a", "b"))
    with pytest.raises(ValueError, match="at least one"):
        reduced_density(bell, ())
    with pytest.raises(ValueError, match="duplicate"):
        reduced_density(bell, ("a", "a"))


def test_fidelity_pure_literals():
    epr = make_register([("00", 0.6), ("11", 0.8)], ("a", "b"))
    rho = reduced_density(tensor(epr, Register(("c",), [1, 0])), ("a", "b"))
    assert fidelity_pure(rho, epr) == pytest.approx(1.0, abs=ATOL)
    # dephased EPR against the pure EPR: 0.36^2 + 0.64^2 = 0.5392
    dephased = DensityMatrix(("a", "b"), np.diag([0.36, 0, 0, 0.64]).astype(complex))
    assert fidelity_pure(dephased, epr) == pytest.approx(0.5392, abs=ATOL)


def test_fidelity_pure_aligns_label_order():
    asym = make_register([("01", 1.0)], ("a", "b"))
    rho = reduced_density(asym, ("b", "a"))
    target = make_register([("01", 1.0)], ("a", "b"))
    assert fidelity_pure(rho, target) == pytest.approx(1.0, abs=ATOL)
    with pytest.raises(ValueError, match="label mismatch"):
        fidelity_pure(rho, Register(("a", "c"), [1, 0, 0, 0]))


# ---------------------------------------------------------------------------
# phase comparison and permutation
# ---------------------------------------------------------------------------

def test_equal_up_to_global_phase():
    rng = np.random.default_rng(53)
    reg = _rand_register(rng, 3)
    phased = Register(reg.labels, reg.amps * np.exp(1.7j))
    assert equal_up_to_global_phase(reg, phased)
    assert equal_up_to_global_phase(reg, permute(phased, reg.labels[::-1]))
    other = _rand_register(rng, 3)
    assert not equal_up_to_global_phase(reg, other)
    with pytest.raises(ValueError, match="label mismatch"):
        equal_up_to_global_phase(reg, _rand_register(rng, 2))


def test_global_phase_not_fooled_by_relative_phase():
    plus = Register(("q",), [SQH, SQH])
    minus = Register(("q",), [SQH, -SQH])
    assert not equal_up_to_global_phase(plus, minus)


def test_permute_moves_amplitudes():
    reg = make_register([("01", 0.6), ("10", 0.8)], ("a", "b"))
    swapped = permute(reg, ("b", "a"))
    assert swapped.amplitude("10") == pytest.approx(0.6)
    assert swapped.amplitude("01") == pytest.approx(0.8)
    assert permute(swapped, ("a", "b")).amplitude("01") == pytest.approx(0.6)
    with pytest.raises(ValueError, match="not a permutation"):
        permute(reg, ("a", "c"))


def test_permute_identity_returns_same_object():
    reg = make_register([("01", 1.0)], ("a", "b"))
    assert permute(reg, ("a", "b")) is reg


def test_gates_table_is_unitary():
    for name, g in GATES.items():
        assert np.allclose(g @ g.conj().T, np.eye(2), atol=ATOL), name
