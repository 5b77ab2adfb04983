"""Protocol engine: both schemes end to end, transcripts, the board,
phases, capability discipline, and dispute resolution."""

import numpy as np
import pytest

from aqsig.errors import ProtocolError
from aqsig.keyring import SharedKey, required_key_lengths
from aqsig.protocol import (ALICE, ARBITRATOR, BOB, PHASES_A, PHASES_B, Hooks,
                            Message, PublicBoard, basis_message,
                            random_message, read_public_values,
                            resolve_dispute, run_scheme, scheme_a_sign,
                            scheme_b_ordering_ok, setup_run,
                            verification_without_arbitrator)
from aqsig.quantum import fidelity_oracle, pure
from aqsig.rng import trial_rng


def zero_keyed_context(scheme, n, rng):
    ctx = setup_run(scheme, n, rng)
    for key_id, key in list(ctx.keyring.keys.items()):
        ctx.keyring.keys[key_id] = SharedKey(key_id, key.parties,
                                             [0] * len(key.bits))
    return ctx


class TestSigning:
    def test_identity_pads_expose_structure(self):
        # all-zero keys: the signature is the three message blocks in order
        rng = trial_rng(100, 0)
        ctx = zero_keyed_context("A", 2, rng)
        s = scheme_a_sign(ctx, basis_message([0, 0]))
        assert len(s) == 6
        for i in range(6):
            assert s.qubit(i).close_to(pure(1, 0))

    def test_insufficient_copies(self):
        rng = trial_rng(101, 0)
        ctx = setup_run("A", 2, rng)
        with pytest.raises(ProtocolError, match="copies"):
            scheme_a_sign(ctx, Message([(1, 0), (1, 0)], copies=2))

    def test_message_length_checked(self):
        with pytest.raises(ProtocolError, match="qubits"):
            run_scheme("A", 4, trial_rng(102, 0), message=basis_message([0, 0]))

    def test_copies_must_be_positive(self):
        with pytest.raises(ProtocolError):
            setup_run("A", 2, trial_rng(103, 0), copies=0)

    def test_secrecy_requires_scheme_b(self):
        with pytest.raises(ProtocolError):
            setup_run("A", 2, trial_rng(104, 0), secrecy=True)


class TestHonestRuns:
    @pytest.mark.parametrize("scheme", ["A", "B"])
    def test_completeness(self, scheme):
        for t in range(50):
            r = run_scheme(scheme, 8, trial_rng(110, t))
            assert r.verdict.gamma == 1
            assert r.verdict.bob_accepts
            assert r.reject_stage is None
            assert r.transcript.complete

    @pytest.mark.parametrize("scheme", ["A", "B"])
    def test_bob_recovers_the_exact_message(self, scheme):
        rng = trial_rng(111, 0)
        message = random_message(8, rng)
        r = run_scheme(scheme, 8, rng, message=message)
        states = message.states()
        for i in range(8):
            assert fidelity_oracle(r.bob_message.qubit(i), states[i]) >= 1 - 1e-9

    def test_scheme_a_transcript_counts(self):
        r = run_scheme("A", 4, trial_rng(112, 0))
        sends = [(e.sender, e.recipient, e.qubits) for e in
                 r.transcript.find(kind="qsend")]
        assert sends == [(ALICE, BOB, 12), (BOB, ARBITRATOR, 8),
                         (ARBITRATOR, BOB, 5)]
        assert not r.transcript.find(kind="board")

    def test_scheme_b_transcript_counts_and_order(self):
        r = run_scheme("B", 4, trial_rng(113, 0))
        sends = [(e.sender, e.recipient, e.qubits) for e in
                 r.transcript.find(kind="qsend")]
        assert sends == [(ALICE, BOB, 12), (BOB, ARBITRATOR, 8)]
        boards = [(e.sender, e.bits, e.step) for e in r.transcript.find(kind="board")]
        assert boards == [(ARBITRATOR, 2, "V4'"), (ALICE, 8, "V5'")]
        assert scheme_b_ordering_ok(r.transcript)

    @pytest.mark.parametrize("scheme,phases", [("A", PHASES_A), ("B", PHASES_B)])
    def test_phase_order(self, scheme, phases):
        r = run_scheme(scheme, 4, trial_rng(114, 0))
        for party, expected in phases.items():
            assert r.parties[party].phases == expected

    def test_counts_are_pure_function_of_scheme_and_n(self):
        for copies in (1, 2, 3):
            for t in range(5):
                r = run_scheme("B", 4, trial_rng(115, t), copies=copies)
                sends = [e.qubits for e in r.transcript.find(kind="qsend")]
                assert sends == [12, 8]

    def test_ledger_totals_match_required_lengths(self):
        for scheme in ("A", "B"):
            for secrecy in ((False, True) if scheme == "B" else (False,)):
                r = run_scheme(scheme, 4, trial_rng(116, 0), secrecy=secrecy)
                assert (r.keyring.consumed_totals()
                        == required_key_lengths(scheme, 4, secrecy))

    @pytest.mark.parametrize("scheme", ["A", "B"])
    def test_strict_mode_runs_clean(self, scheme):
        for t in range(10):
            r = run_scheme(scheme, 4, trial_rng(117, t), key_mode="strict")
            assert r.verdict.bob_accepts

    def test_secrecy_masks_the_board_nonce(self):
        rng = trial_rng(118, 0)
        message = random_message(4, rng)
        r = run_scheme("B", 4, rng, secrecy=True, message=message)
        assert r.verdict.bob_accepts
        assert r.nonce.masked and r.nonce.published
        posted = r.board.latest("nonce").payload
        assert posted != r.nonce.bits  # masked with overwhelming probability
        states = message.states()
        for i in range(4):
            assert fidelity_oracle(r.bob_message.qubit(i), states[i]) >= 1 - 1e-9
        assert r.keyring.consumed_totals()["K_AB"] == 32


class TestAdversarialPaths:
    def test_tamper_on_woven_block_keeps_gamma_one(self):
        # scheme A: damage to the receiver-side block is invisible to the
        # arbitrator; detection can only happen at Bob's final comparison
        rejected = 0
        for t in range(300):
            r = run_scheme("A", 8, trial_rng(120, t),
                           copies=1, message=basis_message([0] * 8),
                           hooks=Hooks(tamper_s=((0, 1, 0),)))
            assert r.verdict.gamma == 1
            if not r.verdict.bob_accepts:
                assert r.reject_stage == "V7"
                rejected += 1
        assert 0.4 < rejected / 300 < 0.6

    def test_scheme_b_rejects_before_arbitrator_contact(self):
        # a V2' reject ends the run with no arbitrator contact at all; a
        # missed detection leaves a maximally mixed position that the
        # arbitrator's own check may still catch at V4'
        stages = {"V2'": 0, "V4'": 0, None: 0}
        for t in range(100):
            r = run_scheme("B", 8, trial_rng(121, t),
                           copies=3, message=basis_message([0] * 8),
                           hooks=Hooks(tamper_s=((8, 1, 0),)))
            stages[r.reject_stage] += 1
            if r.reject_stage == "V2'":
                assert not r.transcript.find(kind="qsend", step="V2'")
                assert not r.transcript.find(kind="board")
            elif r.reject_stage == "V4'":
                board = r.transcript.find(kind="board")
                assert len(board) == 1 and board[0].note == "gamma=0"
        assert stages["V2'"] > stages["V4'"] > 0 or stages["V2'"] > 80

    def test_gamma_zero_forces_reject(self):
        # a forged inner block is usually caught by the arbitrator; when it
        # is, Bob must reject at the gamma check
        saw_gamma_zero = False
        for t in range(60):
            message = random_message(8, trial_rng(122, t))

            def forge(rng, m=message):
                from aqsig.pads import E_PAD, R_PAD, PadKeyView, qotp_encrypt, rk_apply
                from aqsig.quantum import concat
                fake = Message(m.amplitudes, copies=6)
                guess = tuple(rng.integers(0, 2, 32))
                woven = rk_apply(fake.take("bob"),
                                 PadKeyView(guess[:9], ("guess", 1), R_PAD))
                return qotp_encrypt(concat([fake.take("bob"), woven]),
                                    PadKeyView(guess, ("guess", 1), E_PAD))

            r = run_scheme("A", 8, trial_rng(122, t), copies=3,
                           message=Message(message.amplitudes),
                           hooks=Hooks(forge_sa=forge))
            if r.verdict.gamma == 0:
                saw_gamma_zero = True
                assert not r.verdict.bob_accepts
                assert r.reject_stage == "V6"
                # the relay still carried n+1 qubits to Bob
                assert r.transcript.find(kind="qsend", step="V5")[0].qubits == 9
        assert saw_gamma_zero

    def test_repudiation_hook_drives_reject_with_message_in_hand(self):
        rng = trial_rng(123, 0)
        message = random_message(8, rng)
        r = run_scheme("A", 8, rng, message=message,
                       hooks=Hooks(bob_rejects_at_v7=True))
        assert r.verdict.gamma == 1
        assert not r.verdict.bob_accepts
        assert r.reject_stage == "V7"
        assert r.bob_window_reachable
        states = message.states()
        for i in range(8):
            assert fidelity_oracle(r.bob_message.qubit(i), states[i]) >= 1 - 1e-9

    def test_scheme_b_window_is_closed(self):
        r = run_scheme("B", 8, trial_rng(124, 0))
        assert not r.bob_window_reachable
        assert r.bob_decision_event < r.bob_message_event

    def test_plain_variant_completes_without_arbitrator(self):
        rng = trial_rng(125, 0)
        message = random_message(8, rng)
        r = run_scheme("B", 8, rng, message=message,
                       hooks=Hooks(plain_variant=True))
        assert r.verdict.bob_accepts
        assert verification_without_arbitrator(r)
        assert r.bob_window_reachable
        states = message.states()
        for i in range(8):
            assert fidelity_oracle(r.bob_message.qubit(i), states[i]) >= 1 - 1e-9

    def test_real_scheme_b_contacts_arbitrator(self):
        r = run_scheme("B", 8, trial_rng(126, 0))
        assert not verification_without_arbitrator(r)

    def test_probe_hook_is_denied(self):
        r = run_scheme("B", 8, trial_rng(127, 0), hooks=Hooks(probe_early=True))
        assert r.denials == {"nonce": True, "K_Aa": True}
        assert r.verdict.bob_accepts


class TestBoardGuard:
    def test_no_verdict_no_decryption(self):
        board = PublicBoard()
        with pytest.raises(ProtocolError):
            read_public_values(board)
        board.post(ARBITRATOR, (1, 0), "verdict")  # reject code
        with pytest.raises(ProtocolError):
            read_public_values(board)

    def test_nonce_required_even_after_accept(self):
        board = PublicBoard()
        board.post(ARBITRATOR, (0, 1), "verdict")
        with pytest.raises(ProtocolError):
            read_public_values(board)
        board.post(ALICE, (1, 0, 1, 0), "nonce")
        verdict, nonce = read_public_values(board)
        assert verdict == (0, 1) and nonce == (1, 0, 1, 0)

    def test_board_is_append_only(self):
        board = PublicBoard()
        p1 = board.post(ALICE, (1,), "nonce")
        p2 = board.post(BOB, (0,), "other")
        assert [p.seq for p in board.posts] == [0, 1]
        assert board.posts[0] is p1 and board.posts[1] is p2


class TestDisputes:
    def test_honest_alice_disavow_ruled_signed(self):
        for scheme in ("A", "B"):
            r = run_scheme(scheme, 4, trial_rng(130, 0))
            assert resolve_dispute("alice_disavows_signing", r.transcript) == "signed"

    def test_honest_bob_disavow_ruled_received(self):
        for scheme in ("A", "B"):
            r = run_scheme(scheme, 4, trial_rng(131, 0))
            assert resolve_dispute("bob_disavows_receipt", r.transcript) == "received"

    def test_missing_events_insufficient_evidence(self):
        from aqsig.protocol import Transcript
        empty = Transcript()
        assert (resolve_dispute("alice_disavows_signing", empty)
                == "insufficient evidence")
        assert (resolve_dispute("bob_disavows_receipt", empty)
                == "insufficient evidence")

    def test_scheme_b_early_reject_leaves_no_receipt_evidence(self):
        # Bob who rejects at his own check never relayed anything
        for t in range(40):
            r = run_scheme("B", 8, trial_rng(132, t), copies=3,
                           message=basis_message([0] * 8),
                           hooks=Hooks(tamper_s=((8, 1, 0), (9, 1, 0), (10, 1, 0))))
            if not r.verdict.bob_accepts:
                assert (resolve_dispute("bob_disavows_receipt", r.transcript)
                        == "insufficient evidence")

    def test_unknown_claim(self):
        r = run_scheme("A", 2, trial_rng(133, 0))
        with pytest.raises(ValueError):
            resolve_dispute("bogus", r.transcript)


def test_transcript_export_field_order():
    r = run_scheme("B", 2, trial_rng(140, 0))
    record = r.transcript.export_records()[0]
    assert list(record.keys()) == ["seq", "kind", "from", "to", "qubits",
                                   "bits", "step", "note"]


def test_determinism_same_seed_same_run():
    a = run_scheme("B", 6, trial_rng(141, 5))
    b = run_scheme("B", 6, trial_rng(141, 5))
    assert a.transcript.export_records() == b.transcript.export_records()
    assert a.nonce.bits == b.nonce.bits
    assert [k.bits for k in a.keyring.keys.values()] == \
           [k.bits for k in b.keyring.keys.values()]
