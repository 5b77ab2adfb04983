"""Party state machines and message flow for the two signature schemes.

Scheme A relays the verified message back to the receiver over a quantum
channel; scheme B blinds the message with a nonce and replaces the return
channel with an unblockable public board. Runs are single deterministic
streams: parties interact only through explicit send and board events,
all of which land on the transcript in execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapabilityError, ProtocolError, ShapeError
from .keyring import PAPER_LITERAL, Keyring, Nonce, fresh_nonce, pad_schedule
from .pads import E_PAD, PadKeyView, mask_r, qotp_decrypt, qotp_encrypt, rk_apply, rk_invert
from .quantum import (QuantumRegister, basis_register, compare_registers, concat,
                      measure_all, pure, split)

ALICE, BOB, ARBITRATOR = "alice", "bob", "arbitrator"

BOARD_ACCEPT = (0, 1)   # fixed 2-bit verdict codes
BOARD_REJECT = (1, 0)

PHASES_A = {
    ALICE: ["I1", "S1", "S2"],
    BOB: ["I1", "V1", "V2", "V6", "V7"],
    ARBITRATOR: ["I1", "V3", "V4", "V5"],
}
PHASES_B = {
    ALICE: ["I1'", "S1'", "S2'", "S3'", "V5'"],
    BOB: ["I1'", "V1'", "V2'", "V6'"],
    ARBITRATOR: ["I1'", "V3'", "V4'"],
}


class Message:
    """A pure product message of n qubits, available as identical copies.

    The signing phase draws three copies to build the signature's three
    blocks; drawing more than ``copies`` raises."""

    def __init__(self, amplitudes, copies: int = 3):
        self.amplitudes = tuple((complex(a), complex(b)) for a, b in amplitudes)
        self.copies = copies
        self._taken = 0

    @property
    def n(self) -> int:
        return len(self.amplitudes)

    def states(self):
        return [pure(a, b) for a, b in self.amplitudes]

    def take(self, holder: str) -> QuantumRegister:
        if self._taken >= self.copies:
            raise ProtocolError(
                f"insufficient copies: message provides {self.copies}")
        self._taken += 1
        return QuantumRegister(self.states(), holder)


def random_message(n: int, rng: np.random.Generator, copies: int = 3) -> Message:
    amps = []
    for _ in range(n):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        amps.append((v[0], v[1]))
    return Message(amps, copies)


def basis_message(bits, copies: int = 3) -> Message:
    return Message([((0, 1) if b else (1, 0)) for b in bits], copies)


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    kind: str        # qsend | csend | board | verdict
    sender: str
    recipient: str
    qubits: int
    bits: int
    step: str
    note: str = ""

    def export(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "from": self.sender,
                "to": self.recipient, "qubits": self.qubits, "bits": self.bits,
                "step": self.step, "note": self.note}


class Transcript:
    """Ordered event log of quantum sends, classical sends, board posts,
    and verdicts; the object disputes and cost accounting operate on."""

    def __init__(self):
        self.events: list[TranscriptEvent] = []
        self.complete = False

    def _add(self, kind, sender, recipient, qubits, bits, step, note=""):
        if qubits < 0 or bits < 0:
            raise ShapeError("negative transmission count")
        ev = TranscriptEvent(len(self.events), kind, sender, recipient,
                             qubits, bits, step, note)
        self.events.append(ev)
        return ev

    def qsend(self, sender, recipient, qubits, step, note=""):
        return self._add("qsend", sender, recipient, qubits, 0, step, note)

    def csend(self, sender, recipient, bits, step, note=""):
        return self._add("csend", sender, recipient, 0, bits, step, note)

    def board_post(self, author, bits, step, note=""):
        return self._add("board", author, "all", 0, bits, step, note)

    def verdict(self, author, step, note):
        return self._add("verdict", author, "", 0, 0, step, note)

    def find(self, kind=None, step=None) -> list[TranscriptEvent]:
        return [e for e in self.events
                if (kind is None or e.kind == kind)
                and (step is None or e.step == step)]

    def export_records(self) -> list[dict]:
        return [e.export() for e in self.events]


@dataclass(frozen=True)
class BoardPost:
    author: str
    payload: tuple[int, ...]
    seq: int
    label: str


class PublicBoard:
    """Append-only classical broadcast; readable by everyone, never blocked."""

    def __init__(self):
        self.posts: list[BoardPost] = []

    def post(self, author: str, payload, label: str) -> BoardPost:
        p = BoardPost(author, tuple(int(b) for b in payload), len(self.posts), label)
        self.posts.append(p)
        return p

    def latest(self, label: str) -> BoardPost | None:
        for p in reversed(self.posts):
            if p.label == label:
                return p
        return None


@dataclass
class Verdict:
    gamma: int
    bob_accepts: bool
    dispute_ruling: str | None = None


@dataclass
class PartyState:
    role: str
    keys: frozenset = frozenset()
    registers: dict = field(default_factory=dict)
    phases: list[str] = field(default_factory=list)

    def phase(self, marker: str):
        self.phases.append(marker)


@dataclass
class Hooks:
    """Adversary extension points; all default to honest behavior."""
    tamper_s: tuple = ()                      # (position, x, z) Paulis applied in transit
    replace_s: Callable | None = None         # outsider substitutes the whole signature
    forge_sa: Callable | None = None          # receiver substitutes the inner block
    bob_rejects_at_v7: bool = False           # drive the integrality-repudiation path
    plain_variant: bool = False               # scheme B counterfactual: no nonce blinding
    probe_early: bool = False                 # receiver read attempts before the nonce post


@dataclass
class RunResult:
    scheme: str
    n: int
    copies: int
    secrecy: bool
    key_mode: str
    verdict: Verdict
    transcript: Transcript
    board: PublicBoard | None
    keyring: Keyring
    nonce: Nonce | None
    message: Message
    parties: dict[str, PartyState]
    bob_message: QuantumRegister | None = None
    reject_stage: str | None = None
    bob_message_event: int | None = None      # transcript index when Bob first holds the message
    bob_decision_event: int | None = None     # transcript index of Bob's own accept/reject call
    denials: dict[str, bool] = field(default_factory=dict)

    @property
    def bob_window_reachable(self) -> bool:
        """True when Bob already held the message-bearing registers at a step
        where he could still output reject."""
        return (self.bob_message_event is not None
                and self.bob_decision_event is not None
                and self.bob_message_event <= self.bob_decision_event)


@dataclass
class RunContext:
    scheme: str
    n: int
    copies: int
    secrecy: bool
    key_mode: str
    rng: np.random.Generator
    keyring: Keyring
    transcript: Transcript
    board: PublicBoard | None
    parties: dict[str, PartyState]
    schedule: dict
    nonce: Nonce | None = None

    def view(self, key_id: str, use: str, reader: str) -> PadKeyView:
        start, length, purpose = self.schedule[key_id][use]
        return self.keyring[key_id].view(reader, purpose, start, length)


def setup_run(scheme: str, n: int, rng: np.random.Generator, copies: int = 3,
              key_mode: str = PAPER_LITERAL, secrecy: bool = False) -> RunContext:
    """Initializing phase: establish the three shared keys and fresh parties."""
    if scheme not in ("A", "B"):
        raise ProtocolError(f"unknown scheme {scheme!r}")
    if secrecy and scheme != "B":
        raise ProtocolError("secrecy mode is defined for scheme B only")
    if copies < 1:
        raise ProtocolError("at least one verification copy pair is required")
    ring = Keyring(strict=(key_mode == "strict"))
    ring.establish_all(scheme, n, rng, key_mode, secrecy)
    init = "I1" if scheme == "A" else "I1'"
    parties = {
        ALICE: PartyState(ALICE, frozenset({"K_Aa", "K_AB"})),
        BOB: PartyState(BOB, frozenset({"K_AB", "K_Ba"})),
        ARBITRATOR: PartyState(ARBITRATOR, frozenset({"K_Aa", "K_Ba"})),
    }
    for p in parties.values():
        p.phase(init)
    return RunContext(scheme, n, copies, secrecy, key_mode, rng, ring,
                      Transcript(), PublicBoard() if scheme == "B" else None,
                      parties, pad_schedule(scheme, n, key_mode, secrecy))


# --- scheme A ---------------------------------------------------------------

def scheme_a_sign(ctx: RunContext, source: Message) -> QuantumRegister:
    """Signing phase: build the 3n-qubit signature and send it to Bob."""
    alice = ctx.parties[ALICE]
    alice.phase("S1")
    p_keep = source.take(ALICE)
    r_weave = rk_apply(source.take(ALICE), ctx.view("K_Aa", "weave", ALICE))
    s_a = qotp_encrypt(concat([p_keep, r_weave]), ctx.view("K_Aa", "pad", ALICE))
    alice.phase("S2")
    r_ab = rk_apply(source.take(ALICE), ctx.view("K_AB", "weave", ALICE))
    s = qotp_encrypt(concat([r_ab, s_a]), ctx.view("K_AB", "pad", ALICE))
    ctx.transcript.qsend(ALICE, BOB, len(s), "S2")
    return s


def scheme_a_verify(ctx: RunContext, s: QuantumRegister,
                    hooks: Hooks) -> tuple[Verdict, dict]:
    """Verifying phase V1..V7. Returns the verdict plus bookkeeping for the
    run result (reject stage, Bob's message/decision event indices)."""
    bob, arb = ctx.parties[BOB], ctx.parties[ARBITRATOR]
    t = ctx.transcript
    info: dict = {"bob_message": None, "reject_stage": None,
                  "bob_message_event": None, "bob_decision_event": None}
    n = ctx.n

    s.holder = BOB
    bob.phase("V1")
    blocks = qotp_decrypt(s, ctx.view("K_AB", "pad", BOB))
    r_ab_b, s_a_b = split(blocks, [n, 2 * n])

    bob.phase("V2")
    if hooks.forge_sa is not None:
        s_a_b.mark_consumed()
        s_a_b = hooks.forge_sa(ctx.rng)
        s_a_b.holder = BOB
    y_b = qotp_encrypt(s_a_b, ctx.view("K_Ba", "pad", BOB))
    if len(y_b) != 2 * n:
        raise ProtocolError(f"relay register must hold 2n qubits, got {len(y_b)}")
    t.qsend(BOB, ARBITRATOR, len(y_b), "V2", note="key=K_Ba")
    y_b.holder = ARBITRATOR

    arb.phase("V3")
    s_a_arb = qotp_decrypt(y_b, ctx.view("K_Ba", "pad", ARBITRATOR))
    opened = qotp_decrypt(s_a_arb, ctx.view("K_Aa", "pad", ARBITRATOR))
    p_arb, r_weave_arb = split(opened, [n, n])

    arb.phase("V4")
    p_a = rk_invert(r_weave_arb, ctx.view("K_Aa", "weave", ARBITRATOR))
    gamma = 1 if compare_registers(p_a, p_arb, ctx.rng, reps=ctx.copies) == "equal" else 0
    t.verdict(ARBITRATOR, "V4", f"gamma={gamma}")

    arb.phase("V5")
    gamma_qubit = basis_register([gamma], ARBITRATOR)
    y_ab = qotp_encrypt(concat([p_arb, gamma_qubit]),
                        ctx.view("K_Ba", "relay_pad", ARBITRATOR))
    t.qsend(ARBITRATOR, BOB, len(y_ab), "V5")
    y_ab.holder = BOB

    bob.phase("V6")
    opened_relay = qotp_decrypt(y_ab, ctx.view("K_Ba", "relay_pad", BOB))
    p_from_arb, gamma_reg = split(opened_relay, [n, 1])
    gamma_read = measure_all(gamma_reg, ctx.rng)[0]
    info["bob_message"] = p_from_arb
    info["bob_message_event"] = len(t.events)
    t.verdict(BOB, "V6", f"gamma={gamma_read}")
    if gamma_read == 0:
        info["reject_stage"] = "V6"
        return Verdict(gamma=0, bob_accepts=False), info

    bob.phase("V7")
    p_b = rk_invert(r_ab_b, ctx.view("K_AB", "weave", BOB))
    equal = compare_registers(p_b, p_from_arb, ctx.rng, reps=ctx.copies) == "equal"
    accept = equal and not hooks.bob_rejects_at_v7
    info["bob_decision_event"] = len(t.events)
    t.verdict(BOB, "V7", "accept" if accept else "reject")
    if not accept:
        info["reject_stage"] = "V7"
    return Verdict(gamma=gamma, bob_accepts=accept), info


# --- scheme B ---------------------------------------------------------------

def scheme_b_sign(ctx: RunContext, source: Message,
                  hooks: Hooks) -> QuantumRegister:
    """Signing phase S1'..S3': blind the message with a fresh nonce (unless
    running the plain counterfactual) and send the 3n-qubit signature."""
    alice = ctx.parties[ALICE]
    n = ctx.n

    def blind(reg):
        if hooks.plain_variant:
            return reg
        return qotp_encrypt(reg, ctx.nonce.pad_view(ALICE))

    alice.phase("S1'")
    if not hooks.plain_variant:
        ctx.nonce = fresh_nonce(n, ctx.rng)
    p_prime = blind(source.take(ALICE))
    r_ab = rk_apply(blind(source.take(ALICE)), ctx.view("K_AB", "weave", ALICE))
    alice.phase("S2'")
    s_a = qotp_encrypt(blind(source.take(ALICE)), ctx.view("K_Aa", "pad", ALICE))
    alice.phase("S3'")
    s = qotp_encrypt(concat([p_prime, r_ab, s_a]), ctx.view("K_AB", "pad", ALICE))
    ctx.transcript.qsend(ALICE, BOB, len(s), "S3'")
    return s


def _assert_bob_withheld(ctx: RunContext) -> None:
    """Step-boundary invariant: before the nonce post, Bob holds neither the
    nonce nor any K_Aa capability."""
    if "K_Aa" in ctx.parties[BOB].keys:
        raise ProtocolError("withholding violated: Bob holds K_Aa")
    if ctx.nonce is not None and not ctx.nonce.published:
        try:
            ctx.nonce.value(BOB)
        except CapabilityError:
            pass
        else:
            raise ProtocolError("withholding violated: Bob read the nonce early")


def read_public_values(board: PublicBoard) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Bob's view of the board: the arbitrator's verdict and the posted nonce.
    Without an accept verdict the nonce must not be touched."""
    verdict_post = board.latest("verdict")
    if verdict_post is None or verdict_post.payload != BOARD_ACCEPT:
        raise ProtocolError("no accept verdict on the board; nothing to decrypt")
    nonce_post = board.latest("nonce")
    if nonce_post is None:
        raise ProtocolError("nonce not yet posted")
    return verdict_post.payload, nonce_post.payload


def scheme_b_verify(ctx: RunContext, s: QuantumRegister,
                    hooks: Hooks) -> tuple[Verdict, dict]:
    """Verifying phase V1'..V6'. Event order on an accepting run is exactly:
    relay send, board verdict, nonce post."""
    alice, bob, arb = (ctx.parties[ALICE], ctx.parties[BOB], ctx.parties[ARBITRATOR])
    t, board = ctx.transcript, ctx.board
    n = ctx.n
    info: dict = {"bob_message": None, "reject_stage": None,
                  "bob_message_event": None, "bob_decision_event": None,
                  "denials": {}}

    s.holder = BOB
    _assert_bob_withheld(ctx)
    bob.phase("V1'")
    blocks = qotp_decrypt(s, ctx.view("K_AB", "pad", BOB))
    p_prime_block, r_ab_b, s_a_b = split(blocks, [n, n, n])
    if hooks.plain_variant:
        info["bob_message_event"] = len(t.events)

    _assert_bob_withheld(ctx)
    bob.phase("V2'")
    p_prime_check = rk_invert(r_ab_b, ctx.view("K_AB", "weave", BOB))
    equal = compare_registers(p_prime_check, p_prime_block, ctx.rng,
                              reps=ctx.copies) == "equal"
    info["bob_decision_event"] = len(t.events)
    t.verdict(BOB, "V2'", "pass" if equal else "reject")
    if not equal:
        info["reject_stage"] = "V2'"
        return Verdict(gamma=0, bob_accepts=False), info
    if hooks.plain_variant:
        # counterfactual: the blocks already carry the bare message, so
        # verification is complete with no arbitrator contact
        info["bob_message"] = p_prime_check
        return Verdict(gamma=1, bob_accepts=True), info
    if hooks.forge_sa is not None:
        s_a_b.mark_consumed()
        s_a_b = hooks.forge_sa(ctx.rng)
        s_a_b.holder = BOB
    y_b = qotp_encrypt(concat([p_prime_block, s_a_b]), ctx.view("K_Ba", "pad", BOB))
    t.qsend(BOB, ARBITRATOR, len(y_b), "V2'", note="key=K_Ba")
    y_b.holder = ARBITRATOR

    _assert_bob_withheld(ctx)
    arb.phase("V3'")
    opened = qotp_decrypt(y_b, ctx.view("K_Ba", "pad", ARBITRATOR))
    p_prime_arb, s_a_arb = split(opened, [n, n])

    arb.phase("V4'")
    p_prime_a = qotp_decrypt(s_a_arb, ctx.view("K_Aa", "pad", ARBITRATOR))
    gamma = 1 if compare_registers(p_prime_a, p_prime_arb, ctx.rng,
                                   reps=ctx.copies) == "equal" else 0
    code = BOARD_ACCEPT if gamma else BOARD_REJECT
    board.post(ARBITRATOR, code, "verdict")
    t.board_post(ARBITRATOR, len(code), "V4'", note=f"gamma={gamma}")
    if gamma == 0:
        info["reject_stage"] = "V4'"
        return Verdict(gamma=0, bob_accepts=False), info

    _assert_bob_withheld(ctx)
    if hooks.probe_early:
        # adversarial Bob probes for the nonce and the signer's key before
        # the nonce post; both must be denied
        try:
            ctx.nonce.value(BOB)
            info["denials"]["nonce"] = False
        except CapabilityError:
            info["denials"]["nonce"] = True
        try:
            ctx.keyring["K_Aa"].view(BOB, E_PAD, 1, 2 * n)
            info["denials"]["K_Aa"] = False
        except CapabilityError:
            info["denials"]["K_Aa"] = True

    alice.phase("V5'")
    if ctx.secrecy:
        posted = mask_r(ctx.nonce.bits, ctx.view("K_AB", "mask", ALICE))
        ctx.nonce.masked = True
    else:
        posted = ctx.nonce.bits
    ctx.nonce.published = True
    board.post(ALICE, posted, "nonce")
    t.board_post(ALICE, len(posted), "V5'", note="masked" if ctx.secrecy else "plain")

    bob.phase("V6'")
    _, posted_bits = read_public_values(board)
    if ctx.secrecy:
        r_bits = mask_r(posted_bits, ctx.view("K_AB", "mask", BOB))
    else:
        r_bits = posted_bits
    p = qotp_decrypt(p_prime_check, PadKeyView(r_bits, ("r", 1), E_PAD))
    info["bob_message"] = p
    info["bob_message_event"] = len(t.events)
    t.verdict(BOB, "V6'", "accept")
    return Verdict(gamma=1, bob_accepts=True), info


# --- run drivers ------------------------------------------------------------

def run_scheme(scheme: str, n: int, rng: np.random.Generator, copies: int = 3,
               key_mode: str = PAPER_LITERAL, secrecy: bool = False,
               message: Message | None = None,
               hooks: Hooks | None = None) -> RunResult:
    """Execute one full run: initialize, sign (or accept a substituted
    signature), verify, audit. Any reject ends the run; there is no retry."""
    hooks = hooks or Hooks()
    ctx = setup_run(scheme, n, rng, copies, key_mode, secrecy)
    message = message or random_message(n, rng)
    if message.n != n:
        raise ProtocolError(f"message has {message.n} qubits, run expects {n}")

    if hooks.replace_s is not None:
        if scheme == "B" and not hooks.plain_variant:
            ctx.nonce = fresh_nonce(n, ctx.rng)  # honest Alice's nonce, unused
        s = hooks.replace_s(ctx.rng)
        ctx.transcript.qsend("eve", BOB, len(s), "S2" if scheme == "A" else "S3'")
    else:
        if scheme == "A":
            s = scheme_a_sign(ctx, message)
        else:
            s = scheme_b_sign(ctx, message, hooks)
        for pos, x, z in hooks.tamper_s:
            s.apply_inplace(pos, x, z)

    if scheme == "A":
        verdict, info = scheme_a_verify(ctx, s, hooks)
    else:
        verdict, info = scheme_b_verify(ctx, s, hooks)

    ctx.transcript.complete = True
    ctx.keyring.assert_capabilities()
    return RunResult(
        scheme=scheme, n=n, copies=copies, secrecy=secrecy, key_mode=key_mode,
        verdict=verdict, transcript=ctx.transcript, board=ctx.board,
        keyring=ctx.keyring, nonce=ctx.nonce, message=message,
        parties=ctx.parties, bob_message=info.get("bob_message"),
        reject_stage=info.get("reject_stage"),
        bob_message_event=info.get("bob_message_event"),
        bob_decision_event=info.get("bob_decision_event"),
        denials=info.get("denials", {}))


def verification_without_arbitrator(result: RunResult) -> bool:
    """True when the run accepted without any verifier-side arbitrator
    involvement (no relay send, no board traffic)."""
    t = result.transcript
    contacted = (any(e.recipient == ARBITRATOR for e in t.find(kind="qsend"))
                 or bool(t.find(kind="board")))
    return result.verdict.bob_accepts and not contacted


def scheme_b_ordering_ok(transcript: Transcript) -> bool:
    """Accepting scheme B transcripts must order: relay send, board verdict,
    nonce post (strict event-index comparison)."""
    relay = transcript.find(kind="qsend", step="V2'")
    verdict = transcript.find(kind="board", step="V4'")
    nonce = transcript.find(kind="board", step="V5'")
    if not (relay and verdict and nonce):
        return False
    return relay[0].seq < verdict[0].seq < nonce[0].seq


def resolve_dispute(claim: str, transcript: Transcript) -> str:
    """Arbitrate a disavowal from transcript evidence.

    A signing disavowal is settled by the arbitrator's recorded consistency
    check of the inner signature block (a verdict event in scheme A, a board
    post in scheme B); a receipt disavowal by the presence of the relay
    message keyed to the receiver's shared key."""
    if claim == "alice_disavows_signing":
        checks = [e for e in transcript.events
                  if e.step in ("V4", "V4'") and e.note.startswith("gamma=")]
        if not checks:
            return "insufficient evidence"
        gamma = int(checks[0].note.split("=")[1])
        return "signed" if gamma == 1 else "not signed"
    if claim == "bob_disavows_receipt":
        relays = [e for e in transcript.find(kind="qsend")
                  if e.step in ("V2", "V2'") and "key=K_Ba" in e.note]
        return "received" if relays else "insufficient evidence"
    raise ValueError(f"unknown dispute claim {claim!r}")
