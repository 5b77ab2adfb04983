"""Attack scenarios: rates against independent oracles, findings, audits."""

import numpy as np
import pytest

from aqsig.adversary import (SCENARIOS, Scenario, guess_acceptance_oracle,
                             run_scenario, tamper_acceptance_oracle)
from aqsig.errors import ProtocolError
from aqsig.protocol import Message, random_message
from aqsig.rng import root_rng


def exhaustive_guess_oracle(amplitudes, reps):
    """Independent enumeration oracle: mean pass rate over the 4 net Pauli
    guesses per qubit, raw numpy only."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    I2 = np.eye(2, dtype=complex)
    total = 1.0
    for a, b in amplitudes:
        psi = np.array([a, b], dtype=complex)
        rho = np.outer(psi, psi.conj())
        acc = 0.0
        for x in (0, 1):
            for z in (0, 1):
                u = (X if x else I2) @ (Z if z else I2)
                f = np.trace(rho @ u @ rho @ u.conj().T).real
                acc += ((1.0 + f) / 2.0) ** reps
        total *= acc / 4.0
    return total


class TestOracles:
    def test_guess_oracle_matches_independent_enumeration(self):
        rng = root_rng(3)
        for reps in (1, 2, 3):
            m = random_message(6, rng)
            assert guess_acceptance_oracle(m, reps) == pytest.approx(
                exhaustive_guess_oracle(m.amplitudes, reps), abs=1e-12)

    def test_guess_oracle_is_three_quarters_per_qubit_at_one_rep(self):
        # for any pure qubit the overlaps with its X, Y, Z images sum to 1,
        # so the per-position mean pass rate at one repetition is exactly 3/4
        rng = root_rng(4)
        for n in (1, 4, 8):
            m = random_message(n, rng)
            assert guess_acceptance_oracle(m, 1) == pytest.approx(
                0.75 ** n, abs=1e-9)

    def test_tamper_oracle_values(self):
        assert tamper_acceptance_oracle(1, 1, "A") == 0.5
        assert tamper_acceptance_oracle(3, 1, "A") == 0.125
        assert tamper_acceptance_oracle(2, 2, "A") == 0.0625
        assert tamper_acceptance_oracle(1, 1, "B") == pytest.approx(0.375)


class TestValidation:
    def test_unknown_scenario(self):
        with pytest.raises(ProtocolError):
            Scenario("bogus").validate()

    def test_scheme_mismatches(self):
        with pytest.raises(ProtocolError):
            Scenario("no-early-knowledge", scheme="A").validate()
        with pytest.raises(ProtocolError):
            Scenario("statement1-variant", scheme="A").validate()
        with pytest.raises(ProtocolError):
            Scenario("bob-forgery", scheme="B").validate()

    def test_secrecy_requires_b(self):
        with pytest.raises(ProtocolError):
            Scenario("honest", scheme="A", secrecy=True).validate()

    def test_ranges(self):
        with pytest.raises(ProtocolError):
            Scenario("honest", trials=0).validate()
        with pytest.raises(ProtocolError):
            Scenario("eve-tamper", scheme="A", n=4, tamper_positions=5).validate()

    def test_all_names_validate(self):
        for name in SCENARIOS:
            scheme = "A" if name == "bob-forgery" else "B"
            Scenario(name, scheme=scheme).validate()


class TestHonest:
    def test_all_trials_accept(self):
        rep = run_scenario(Scenario("honest", scheme="B", n=6, trials=40, seed=1))
        assert rep.acceptance_rate == 1.0
        assert rep.findings["all_accepted"]
        assert rep.findings["ordering_ok"]
        assert not rep.findings["no_arbitrator_contact"]
        assert len(rep.trial_records) == 40
        assert rep.transmissions["alice_to_bob_qubits"] == 18

    def test_report_records_deterministic(self):
        s = Scenario("honest", scheme="A", n=4, trials=10, seed=5)
        assert run_scenario(s).to_records() == run_scenario(s).to_records()


class TestForgery:
    def test_bob_forgery_matches_oracle(self):
        s = Scenario("bob-forgery", scheme="A", n=8, copies=1,
                     trials=3000, seed=11)
        rep = run_scenario(s)
        assert rep.prediction == pytest.approx(0.75 ** 8, abs=1e-9)
        assert abs(rep.acceptance_rate - rep.prediction) <= 3 * max(
            rep.stderr, np.sqrt(rep.prediction * (1 - rep.prediction) / s.trials))

    def test_bob_forgery_with_repetitions(self):
        s = Scenario("bob-forgery", scheme="A", n=4, copies=3,
                     trials=3000, seed=12)
        rep = run_scenario(s)
        se = np.sqrt(max(rep.prediction * (1 - rep.prediction), 1e-9) / s.trials)
        assert abs(rep.acceptance_rate - rep.prediction) <= 3 * max(se, rep.stderr)

    def test_eve_forgery_rarely_succeeds(self):
        rep = run_scenario(Scenario("eve-forgery", scheme="A", n=8, copies=1,
                                    trials=800, seed=13))
        assert rep.prediction is None
        assert rep.acceptance_rate < 0.05
        rep_b = run_scenario(Scenario("eve-forgery", scheme="B", n=8, copies=1,
                                      trials=400, seed=14))
        assert rep_b.acceptance_rate < 0.05


class TestTamper:
    @pytest.mark.parametrize("reps", [1, 2])
    def test_detection_amplification(self, reps):
        s = Scenario("eve-tamper", scheme="A", n=8, copies=reps,
                     trials=3000, seed=21)
        rep = run_scenario(s)
        expected = 0.5 ** reps
        se = np.sqrt(expected * (1 - expected) / s.trials)
        assert abs(rep.acceptance_rate - expected) <= 3 * se
        assert rep.findings["detection_rate"] == 1 - rep.acceptance_rate

    def test_detection_monotone_in_positions(self):
        rates = []
        for k in (1, 2, 3):
            s = Scenario("eve-tamper", scheme="A", n=8, copies=1,
                         trials=2500, seed=22, tamper_positions=k)
            rates.append(run_scenario(s).findings["detection_rate"])
        assert rates[0] < rates[1] < rates[2]


class TestDisputeScenarios:
    def test_alice_disavow_honest(self):
        rep = run_scenario(Scenario("alice-disavow", scheme="A", n=6,
                                    trials=30, seed=31))
        assert rep.acceptance_rate == 1.0
        assert rep.prediction == 1.0
        assert all(r["ruling"] == "signed" for r in rep.trial_records)

    def test_alice_disavow_forged_matches_detection_oracle(self):
        s = Scenario("alice-disavow", scheme="A", n=8, copies=1,
                     trials=3000, seed=32, forged_sa=True)
        rep = run_scenario(s)
        se = np.sqrt(rep.prediction * (1 - rep.prediction) / s.trials)
        assert abs(rep.acceptance_rate - rep.prediction) <= 3 * se
        assert any(r["ruling"] == "not signed" for r in rep.trial_records)

    def test_bob_disavow_receipt(self):
        for scheme in ("A", "B"):
            rep = run_scenario(Scenario("bob-disavow-receipt", scheme=scheme,
                                        n=6, trials=20, seed=33))
            assert rep.acceptance_rate == 1.0


class TestFindings:
    def test_repudiation_reachable_only_on_scheme_a(self):
        rep_a = run_scenario(Scenario("scheme-a-repudiation", scheme="A",
                                      n=6, trials=10, seed=41))
        assert rep_a.findings["repudiation_path_reachable"] is True
        assert rep_a.findings["bob_held_exact_message"] is True
        rep_b = run_scenario(Scenario("scheme-a-repudiation", scheme="B",
                                      n=6, trials=10, seed=41))
        assert rep_b.findings["repudiation_path_reachable"] is False

    def test_statement1_contrast(self):
        rep = run_scenario(Scenario("statement1-variant", scheme="B",
                                    n=6, trials=10, seed=42))
        assert rep.findings["variant_no_arbitrator_contact"] is True
        assert rep.findings["real_scheme_b_no_arbitrator_contact"] is False
        assert rep.findings["variant_window_reachable"] is True

    def test_no_early_knowledge_denied_every_trial(self):
        rep = run_scenario(Scenario("no-early-knowledge", scheme="B",
                                    n=6, trials=50, seed=43))
        assert rep.findings["denial_rate"] == 1.0
        assert rep.findings["capability_denied_every_trial"] is True
        assert rep.findings["ordering_ok"] is True


def test_reports_carry_transmissions_and_samples():
    rep = run_scenario(Scenario("honest", scheme="B", n=4, trials=3, seed=51))
    records = rep.to_records()
    summary = records[-1]
    assert summary["record"] == "summary"
    assert summary["alice_to_bob_qubits"] == 12
    assert summary["bell_reference"] == [16, 16, 25, 0, 0]
    assert len(rep.transcript_sample) > 0
    assert {r["key"] for r in rep.key_sample} == {"K_Aa", "K_AB", "K_Ba"}
    assert [r["trial"] for r in records[:-1]] == [0, 1, 2]
