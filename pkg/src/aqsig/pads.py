"""Keyed Pauli pads over qubit registers.

Two transforms are provided. The standard pad spends two key bits per
qubit: qubit i is conjugated by X^K(2i-1) Z^K(2i). The weave transform
spends an overlapping window of one bit per qubit plus one: qubit i is
conjugated by X^K(i) Z^K(i+1), so adjacent qubits share a key bit. Key
indices are 1-based to match the external key-dump format.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import KeySizeError, ShapeError
from .quantum import QuantumRegister, apply_pauli, apply_pauli_inverse

E_PAD = "E-pad"
R_PAD = "R-pad"
SUBKEY_E = "subkey-E"
R_MASK = "r-mask"


@dataclass(frozen=True)
class PadKeyView:
    """A window into key material: the bits, where they came from
    (key id, 1-based start offset), and what they are for."""
    bits: tuple[int, ...]
    origin: tuple[str, int]
    purpose: str

    def bit(self, j: int) -> int:
        """1-based bit access, mirroring the K_j notation."""
        return self.bits[j - 1]


def _transformed(msg: QuantumRegister, qubits) -> QuantumRegister:
    out = QuantumRegister(qubits, msg.holder, msg.status)
    msg.mark_consumed()
    return out


def qotp_encrypt(msg: QuantumRegister, key: PadKeyView) -> QuantumRegister:
    """Pad each qubit with X^K(2i-1) Z^K(2i). Consumes the input register."""
    msg.require_operable()
    if len(key.bits) != 2 * len(msg):
        raise KeySizeError(
            f"pad needs {2 * len(msg)} bits for {len(msg)} qubits, got {len(key.bits)}")
    b = key.bits
    return _transformed(
        msg, [apply_pauli(q, b[2 * j], b[2 * j + 1]) for j, q in enumerate(msg.qubits)])


def qotp_decrypt(msg: QuantumRegister, key: PadKeyView) -> QuantumRegister:
    """Exact inverse of qotp_encrypt (conjugation by the adjoint pad)."""
    msg.require_operable()
    if len(key.bits) != 2 * len(msg):
        raise KeySizeError(
            f"pad needs {2 * len(msg)} bits for {len(msg)} qubits, got {len(key.bits)}")
    b = key.bits
    return _transformed(
        msg,
        [apply_pauli_inverse(q, b[2 * j], b[2 * j + 1]) for j, q in enumerate(msg.qubits)])


def rk_apply(msg: QuantumRegister, key: PadKeyView) -> QuantumRegister:
    """Overlapping-window transform: qubit i gets X^K(i) Z^K(i+1)."""
    msg.require_operable()
    if len(key.bits) != len(msg) + 1:
        raise KeySizeError(
            f"weave needs {len(msg) + 1} bits for {len(msg)} qubits, got {len(key.bits)}")
    b = key.bits
    return _transformed(
        msg, [apply_pauli(q, b[j], b[j + 1]) for j, q in enumerate(msg.qubits)])


def rk_invert(msg: QuantumRegister, key: PadKeyView) -> QuantumRegister:
    """Exact inverse of rk_apply."""
    msg.require_operable()
    if len(key.bits) != len(msg) + 1:
        raise KeySizeError(
            f"weave needs {len(msg) + 1} bits for {len(msg)} qubits, got {len(key.bits)}")
    b = key.bits
    return _transformed(
        msg, [apply_pauli_inverse(q, b[j], b[j + 1]) for j, q in enumerate(msg.qubits)])


def subkey(key, rule: str, n: int, reader: str) -> PadKeyView:
    """Derive a named sub-range of a shared key.

    arb_to_bob: bits 4n+1 .. 4n+2(n+1), pads the n+1 qubits the arbitrator
    relays to Bob. secrecy_mask: bits 6n+1 .. 8n, masks the 2n-bit nonce
    before publication.
    """
    if rule == "arb_to_bob":
        return key.view(reader, SUBKEY_E, 4 * n + 1, 2 * (n + 1))
    if rule == "secrecy_mask":
        return key.view(reader, R_MASK, 6 * n + 1, 2 * n)
    raise ValueError(f"unknown subkey rule {rule!r}")


def mask_r(r: tuple[int, ...], mask: PadKeyView) -> tuple[int, ...]:
    """Bitwise XOR of the nonce with a mask view; self-inverse."""
    if len(r) != len(mask.bits):
        raise ShapeError(f"mask length {len(mask.bits)} != nonce length {len(r)}")
    return tuple(a ^ b for a, b in zip(r, mask.bits))
