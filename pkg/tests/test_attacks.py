import math

import numpy as np
import pytest

from qpvlab.attacks import (
    EMPTY,
    SWAP_LOOKUP,
    AttackStrategy,
    Message,
    Resources,
    answer_distribution,
    answer_zero_fraction,
    compare_with_honest,
    doubled_symasym_qc_attack,
    entanglement_bound,
    epr_swap_attack,
    generate_swap_lookup,
    guessing_round_input,
    honest_answer_distribution,
    mub_locc_attack,
    purified_round_input,
    run_rounds,
    sample_answers,
    sample_symasym_input,
    swap_round_input,
    swap_simulation_operators,
    symasym_success,
    teleport_answer_rate,
    teleport_demo,
    teleport_guess_attack,
    verify_swap_simulation_identity,
    xor_locc_attack,
)
from qpvlab.certificates import single_round_povm, to_float
from qpvlab.errors import DomainError, StructuralError
from qpvlab.states import haar_qubits, honest_p0, rho_beta

BETAS = (0.0, 0.25, 0.5, 0.75, 1.0)


class _Snoop(AttackStrategy):
    name = "snoop"

    def local(self, view):
        other = "B1" if view.side == "A" else "A1"
        view.measure_basis([np.array([1, 0]), np.array([0, 1])], [other])
        return Message()


class _PeekInput(AttackStrategy):
    name = "peek"

    def local(self, view):
        key = "y" if view.side == "A" else "x"
        return Message(view.inputs[key])


class _QubitOverClassical(AttackStrategy):
    name = "leaky"
    resources = Resources(0, "classical")

    def local(self, view):
        return Message(qubits=(f"{view.side}1",))


def test_cannot_touch_other_register():
    with pytest.raises(StructuralError):
        answer_distribution(_Snoop(), swap_round_input(0.5))


def test_cannot_read_other_input():
    with pytest.raises(StructuralError):
        answer_distribution(_PeekInput(), guessing_round_input(2, 2, 0, 1))


def test_no_qubits_over_classical_channel():
    with pytest.raises(StructuralError):
        answer_distribution(_QubitOverClassical(), swap_round_input(0.5))


def test_epr_swap_needs_purified_mode():
    with pytest.raises(StructuralError):
        answer_distribution(epr_swap_attack(), swap_round_input(0.5))


def test_resources_validate():
    with pytest.raises(DomainError):
        Resources(0, "telepathy")


def test_swap_lookup_matches_generator():
    assert generate_swap_lookup() == SWAP_LOOKUP
    assert len(SWAP_LOOKUP) == 16


@pytest.mark.parametrize("beta", BETAS)
def test_swap_simulation_identity(beta):
    assert verify_swap_simulation_identity(beta) <= 1e-12


def test_swap_simulation_projectors_complete():
    w, pi0, pi1 = swap_simulation_operators()
    assert np.abs(pi0 + pi1 - np.eye(16)).max() <= 1e-12
    assert np.abs(w @ w.conj().T - np.eye(16)).max() <= 1e-12


@pytest.mark.parametrize("beta", BETAS)
def test_epr_swap_reproduces_honest_law(beta):
    law = answer_distribution(epr_swap_attack(), purified_round_input(beta))
    assert set(law) <= {(0, 0), (1, 1)}
    assert abs(law.get((0, 0), 0.0) - honest_p0(beta)) <= 1e-12
    assert abs(honest_answer_distribution(beta)[0] - honest_p0(beta)) <= 1e-12


@pytest.mark.parametrize("beta", BETAS)
def test_epr_swap_indistinguishable_from_honest(beta):
    rng = np.random.default_rng(int(beta * 100))
    p = compare_with_honest(epr_swap_attack(), beta, 100_000, rng, purified=True)
    assert p > 1e-3


@pytest.mark.parametrize("beta", BETAS)
def test_mub_law_matches_povm(beta):
    pi0 = to_float(single_round_povm().elements["0"])
    expected = float(np.trace(pi0 @ rho_beta(beta)).real)
    law = answer_distribution(mub_locc_attack(), swap_round_input(beta))
    assert abs(law[(0, 0)] - expected) <= 1e-12
    pairs = sample_answers(mub_locc_attack(), swap_round_input(beta), 100_000, np.random.default_rng(7))
    tv = abs(answer_zero_fraction(pairs) - expected)
    assert tv <= 0.01


def test_mub_success_is_two_thirds():
    p0 = answer_distribution(mub_locc_attack(), swap_round_input(1.0))[(0, 0)]
    p1 = answer_distribution(mub_locc_attack(), swap_round_input(0.0))[(1, 1)]
    assert abs((p0 + p1) / 2 - 2 / 3) <= 1e-12


def test_mub_on_pure_states_runs_operationally(rng):
    from qpvlab.attacks import pure_pair_input
    psi = haar_qubits(rng, 20)
    inputs = [pure_pair_input(v, v) for v in psi]
    pairs = run_rounds(mub_locc_attack(), inputs, rng)
    assert pairs.shape == (20, 2)
    assert np.all(pairs[:, 0] == pairs[:, 1])


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (1, 3)])
def test_teleport_guess(d, k):
    rng = np.random.default_rng(d * 10 + k)
    n = 10_000
    strat = teleport_guess_attack(d, k)
    xs = rng.integers(k, size=n)
    ys = rng.integers(k, size=n)
    answered = correct = 0
    laws = {}
    for x, y in zip(xs, ys):
        key = (int(x), int(y))
        if key not in laws:
            laws[key] = answer_distribution(strat, guessing_round_input(d, k, *key))
        law = laws[key]
        for a, b in law:
            assert a == b
            assert a == EMPTY or a == (x + y) % k
    for key, law in laws.items():
        sub = int(np.sum((xs == key[0]) & (ys == key[1])))
        pairs = sample_answers(strat, guessing_round_input(d, k, *key), sub, rng)
        answered += int(np.sum(pairs[:, 0] != EMPTY))
        correct += int(np.sum(pairs[:, 0] == (key[0] + key[1]) % k))
    assert correct == answered
    rate = teleport_answer_rate(d, k)
    sigma = math.sqrt(rate * (1 - rate) / n)
    assert abs(answered / n - rate) <= 3 * sigma


def test_teleport_rejects_bad_dims():
    with pytest.raises(DomainError):
        teleport_guess_attack(0, 1)


def test_teleport_demo_corrects_every_outcome(rng):
    psi = haar_qubits(rng, 1)[0]
    out = teleport_demo(psi)
    assert abs(sum(v["probability"] for v in out.values()) - 1) <= 1e-12
    for v in out.values():
        assert abs(v["probability"] - 0.25) <= 1e-12
        assert abs(v["fidelity_corrected"] - 1) <= 1e-12


def test_entanglement_bound_examples():
    b = entanglement_bound(100, 10)
    assert abs(b.threshold - 25 * math.log2(4 / 3)) <= 1e-12
    assert round(b.threshold, 2) == 10.38
    assert not b.breakable_expected
    assert entanglement_bound(100, 11).breakable_expected
    zero = entanglement_bound(0, 0)
    assert zero.threshold == 0 and zero.breakable_expected
    with pytest.raises(DomainError):
        entanglement_bound(-1, 0)


def test_symasym_values():
    assert abs(symasym_success(xor_locc_attack(False), False) - 5 / 6) <= 1e-12
    assert abs(symasym_success(xor_locc_attack(True), True) - 17 / 18) <= 1e-12
    assert abs(symasym_success(doubled_symasym_qc_attack(), True) - 1) <= 1e-12


def test_symasym_qc_operational():
    rng = np.random.default_rng(3)
    inputs = [sample_symasym_input(rng, True) for _ in range(300)]
    pairs = run_rounds(doubled_symasym_qc_attack(), inputs, rng)
    labels = np.array([r.label for r in inputs])
    assert np.all(pairs[:, 0] == labels) and np.all(pairs[:, 1] == labels)


def test_sampling_is_deterministic():
    a = sample_answers(mub_locc_attack(), swap_round_input(0.5), 1000, np.random.default_rng(5))
    b = sample_answers(mub_locc_attack(), swap_round_input(0.5), 1000, np.random.default_rng(5))
    assert np.array_equal(a, b)
