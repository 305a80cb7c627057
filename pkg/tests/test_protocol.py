import json
import math

import numpy as np
import pytest

from qpvlab.attacks import EMPTY
from qpvlab.errors import DomainError, StructuralError
from qpvlab.protocol import (
    ProtocolConfig,
    acceptance_rate,
    arrival_times,
    inconclusive_rate_check,
    run,
    subset_loss_check,
)
from qpvlab.states import honest_p0


def _attack(**kw):
    base = dict(mode="attack", strategy="mub", a_pos=0.5, b_pos=1.5)
    base.update(kw)
    return ProtocolConfig(**base)


def test_run_is_deterministic():
    cfg = ProtocolConfig(overlaps=(0, 0.5, 1), eta=0.6, rounds_per_overlap=300, seed=11)
    (v1, t1), (v2, t2) = run(cfg), run(cfg)
    assert v1.to_dict() == v2.to_dict()
    for name in ("round_id", "beta", "answer_v0", "answer_v1", "loss"):
        assert np.array_equal(getattr(t1, name), getattr(t2, name))
    other = run(ProtocolConfig(**{**cfg.to_dict(), "seed": 12}))[1]
    assert not np.array_equal(t1.answer_v0[:300], other.answer_v0[:300])


def test_stopping_rule_reaches_r_exactly():
    cfg = ProtocolConfig(overlaps=(0, 1), eta=0.5, rounds_per_overlap=200, seed=3)
    verdict, tr = run(cfg)
    counts = [row["R_beta"] for row in verdict.per_beta]
    assert min(counts) == 200
    assert tr.round_id[-1] == len(tr) - 1


@pytest.mark.parametrize("kw", [
    dict(prover_pos=3.0),
    dict(v0_pos=2.0, v1_pos=0.0),
])
def test_geometry_errors(kw):
    with pytest.raises(StructuralError):
        ProtocolConfig(**kw)


def test_attack_geometry_errors():
    with pytest.raises(StructuralError):
        _attack(a_pos=1.2)
    with pytest.raises(StructuralError):
        _attack(b_pos=None)
    with pytest.raises(StructuralError):
        _attack(strategy="epr-swap")


def test_domain_errors():
    with pytest.raises(DomainError):
        ProtocolConfig(eta=0.0)
    with pytest.raises(DomainError):
        ProtocolConfig(alpha=1.0)
    with pytest.raises(DomainError):
        ProtocolConfig(mode="sneaky")


def test_unknown_config_key():
    with pytest.raises(StructuralError):
        ProtocolConfig.from_dict({"eta": 0.5, "colour": "red"})


def test_json_round_trip(tmp_path):
    cfg = ProtocolConfig(overlaps=(0.25, 0.75), eta=0.3, seed=9)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ProtocolConfig.from_json(path) == cfg


def test_honest_timing_and_attack_timing():
    honest = ProtocolConfig(v0_pos=0, v1_pos=3, prover_pos=1)
    assert arrival_times(honest) == honest.expected_arrivals() == (3.0, 4.0)
    pair = _attack(v0_pos=0, v1_pos=3, prover_pos=1, a_pos=0.5, b_pos=2.0)
    t = arrival_times(pair)
    assert all(abs(x - e) <= 1e-12 for x, e in zip(t, pair.expected_arrivals()))
    single = ProtocolConfig(mode="attack", strategy="single", a_pos=0.5)
    assert any(x > e for x, e in zip(arrival_times(single), single.expected_arrivals()))


def test_single_attacker_is_late():
    verdict, _ = run(ProtocolConfig(mode="attack", strategy="single", a_pos=0.5, rounds_per_overlap=50))
    assert not verdict.accepted
    assert any(r.startswith("timing") for r in verdict.reasons)


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
def test_honest_estimates_within_three_sigma(beta):
    cfg = ProtocolConfig(overlaps=(beta,), rounds_per_overlap=5000, seed=21)
    verdict, _ = run(cfg)
    row = verdict.per_beta[0]
    p = honest_p0(beta)
    sigma = math.sqrt(max(p * (1 - p), 1e-12) / row["R_beta"])
    assert abs(row["p_hat"] - p) <= 3 * sigma + 1e-12


def test_loss_rate_matches_eta():
    cfg = ProtocolConfig(eta=0.3, rounds_per_overlap=1000, seed=2)
    verdict, tr = run(cfg)
    assert verdict.inconclusive["pass"]
    assert np.all((tr.answer_v0 == EMPTY) == tr.loss)


def test_answering_everything_fails_inconclusive_test():
    cfg = _attack(eta=0.25, attackers_mimic_loss=False, rounds_per_overlap=300)
    verdict, tr = run(cfg)
    assert not inconclusive_rate_check(tr, 0.25, 1e-3)["pass"]
    assert not verdict.accepted


def test_random_subset_keeps_r_answers():
    cfg = ProtocolConfig(eta=0.5, rounds_per_overlap=100, random_subset=True, seed=4)
    verdict, _ = run(cfg)
    assert all(row["R_beta"] == 100 for row in verdict.per_beta)


def test_honest_and_attack_acceptance():
    assert acceptance_rate(ProtocolConfig(rounds_per_overlap=500), 50) >= 0.98
    assert acceptance_rate(_attack(rounds_per_overlap=500), 50) == 0.0


def test_epr_swap_attack_is_accepted():
    cfg = _attack(strategy="epr-swap", purified=True, rounds_per_overlap=500, seed=1)
    assert run(cfg)[0].accepted


def test_subset_loss():
    assert subset_loss_check(2, 0)["pass"]
    one = subset_loss_check(2, 1)
    assert one["pass"]
    assert all(abs(s["value"] - 2 / 3) <= 1e-6 for s in one["subsets"])
    with pytest.raises(DomainError):
        subset_loss_check(2, 3)


def test_csv_transcript(tmp_path):
    cfg = ProtocolConfig(eta=0.5, rounds_per_overlap=20)
    _, tr = run(cfg)
    path = tmp_path / "t.csv"
    tr.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "round_id,beta,answer,t_v0,t_v1,loss"
    assert len(lines) == len(tr) + 1
    assert any(",null," in line for line in lines[1:])
