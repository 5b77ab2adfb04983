"""Single-qubit density matrices, Pauli actions, Z measurement, and the
swap-test comparator with exact post-measurement states.

All payloads in the simulator are products of single qubits, so register
operations reduce to 2x2 algebra. The only larger object is the transient
4x4 joint state inside a swap test, kept so that the comparator's
post-measurement reduced states are exact even for unequal inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NormalizationError, ShapeError, UsageError

ATOL = 1e-12        # tolerance for algebraic identities
NORM_ATOL = 1e-9    # tolerance for user-supplied amplitudes

LIVE = "live"
CONSUMED = "consumed"
DISTURBED = "disturbed"

_SWAP_PERM = np.array([0, 2, 1, 3])


class QubitState:
    """One qubit as a 2x2 density operator. Immutable once constructed."""

    __slots__ = ("rho",)

    def __init__(self, rho, validate: bool = True):
        m = np.array(rho, dtype=complex)
        if m.shape != (2, 2):
            raise ShapeError(f"density matrix must be 2x2, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "rho", m)
        if validate:
            self.validate()

    def __setattr__(self, name, value):
        raise AttributeError("QubitState is immutable")

    def validate(self) -> None:
        """Check Hermiticity, unit trace, and positivity to 1e-12."""
        r = self.rho
        if (abs(r[0, 1] - np.conj(r[1, 0])) > ATOL
                or abs(r[0, 0].imag) > ATOL or abs(r[1, 1].imag) > ATOL):
            raise NormalizationError("density matrix is not Hermitian")
        tr = r[0, 0].real + r[1, 1].real
        if abs(tr - 1.0) > ATOL:
            raise NormalizationError(f"trace {tr} is not 1")
        det = (r[0, 0] * r[1, 1] - r[0, 1] * r[1, 0]).real
        eig_min = (tr - np.sqrt(max(tr * tr - 4.0 * det, 0.0))) / 2.0
        if eig_min < -ATOL:
            raise NormalizationError(f"negative eigenvalue {eig_min}")

    def p0(self) -> float:
        return float(self.rho[0, 0].real)

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def close_to(self, other: "QubitState", atol: float = ATOL) -> bool:
        return bool(np.abs(self.rho - other.rho).max() <= atol)

    def __repr__(self):
        return f"QubitState({np.round(self.rho, 6).tolist()})"


@dataclass(frozen=True)
class SwapOutcome:
    """Result of one swap test: the ancilla bit and the exact reduced
    post-measurement states of the two compared qubits.

    For identical pure inputs the bit is 0 with certainty and the post
    states equal the inputs (one-sided error)."""
    bit: int
    post_left: QubitState
    post_right: QubitState


def pure(alpha: complex, beta: complex) -> QubitState:
    """Rank-1 density matrix for alpha|0> + beta|1>."""
    norm2 = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm2 - 1.0) > NORM_ATOL:
        raise NormalizationError(f"|alpha|^2+|beta|^2 = {norm2}, expected 1")
    psi = np.array([alpha, beta], dtype=complex) / np.sqrt(norm2)
    return QubitState(np.outer(psi, psi.conj()), validate=False)


KET0 = pure(1, 0)
KET1 = pure(0, 1)


def basis_state(bit: int) -> QubitState:
    return KET1 if bit else KET0


def random_pure(rng: np.random.Generator) -> QubitState:
    """Haar-random pure qubit state."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return pure(v[0], v[1])


def apply_pauli(q: QubitState, x_bit: int, z_bit: int) -> QubitState:
    """Conjugate by U = X^x Z^z (Z acts first, then X).

    Implemented with closed-form sign flips and index swaps, which keeps
    round trips exact in floating point.
    """
    if not (x_bit or z_bit):
        return q
    r = q.rho
    if z_bit:
        r = np.array([[r[0, 0], -r[0, 1]], [-r[1, 0], r[1, 1]]])
    if x_bit:
        r = np.array([[r[1, 1], r[1, 0]], [r[0, 1], r[0, 0]]])
    return QubitState(r, validate=False)


def apply_pauli_inverse(q: QubitState, x_bit: int, z_bit: int) -> QubitState:
    """Conjugate by U-dagger = Z^z X^x.

    X^x Z^z and Z^z X^x differ only by a global phase, so the density-level
    action coincides with apply_pauli; the separate name marks intent.
    """
    return apply_pauli(q, x_bit, z_bit)


def measure_z(q: QubitState, rng: np.random.Generator) -> int:
    """Computational-basis measurement outcome, Born rule."""
    p0 = min(max(q.p0(), 0.0), 1.0)
    return 0 if rng.random() < p0 else 1


def fidelity_oracle(a: QubitState, b: QubitState) -> float:
    """Two-state fidelity, closed form for qubits:
    F = Tr(ab) + 2*sqrt(det(a) det(b)). Equals 1 iff the states coincide.

    Test-only amplitude access; protocol code never calls this.
    """
    overlap = float(np.trace(a.rho @ b.rho).real)
    det_a = max(float(np.linalg.det(a.rho).real), 0.0)
    det_b = max(float(np.linalg.det(b.rho).real), 0.0)
    f = overlap + 2.0 * np.sqrt(det_a * det_b)
    return min(max(f, 0.0), 1.0)


def swap_test(a: QubitState, b: QubitState, rng: np.random.Generator) -> SwapOutcome:
    """One swap test between two qubits.

    The ancilla reads 1 with probability (1 - Tr(ab))/2, computed from the
    4-dimensional joint state; the returned post states are the exact
    reduced density matrices after the ancilla measurement. Identical pure
    inputs take a fast path: bit 0, inputs returned untouched (this matches
    the analytic post state exactly).
    """
    ra, rb = a.rho, b.rho
    if np.abs(ra - rb).max() <= ATOL and abs(a.purity() - 1.0) <= ATOL:
        return SwapOutcome(0, a, b)
    overlap = float((ra * rb.T).sum().real)  # Tr(ab)
    p1 = min(max((1.0 - overlap) / 2.0, 0.0), 1.0)
    bit = 1 if rng.random() < p1 else 0
    rho = (ra.reshape(2, 1, 2, 1) * rb.reshape(1, 2, 1, 2)).reshape(4, 4)
    # P rho P for P = (I +/- SWAP)/2, using that SWAP permutes basis 1 <-> 2
    sign = -1.0 if bit else 1.0
    sr = rho[_SWAP_PERM, :]
    joint = (rho + sign * sr + sign * rho[:, _SWAP_PERM] + sr[:, _SWAP_PERM]) * 0.25
    joint /= joint.trace().real
    jr = joint.reshape(2, 2, 2, 2)
    return SwapOutcome(bit, _clean(jr.trace(axis1=1, axis2=3)),
                       _clean(jr.trace(axis1=0, axis2=2)))


def _clean(m: np.ndarray) -> QubitState:
    m = (m + m.conj().T) * 0.5
    m /= m.trace().real
    return QubitState(m, validate=False)


class QuantumRegister:
    """Ordered product of single-qubit states with a holder tag and a
    liveness flag.

    Registers move by value through the protocol: transforms, splits,
    concatenations and measurements consume their inputs, so stale handles
    cannot alias live qubits. A consumed register rejects every further
    operation; a disturbed register stays operable but records that a
    comparison already failed on it.
    """

    __slots__ = ("_qubits", "holder", "status")

    def __init__(self, qubits, holder: str, status: str = LIVE):
        self._qubits = list(qubits)
        self.holder = holder
        self.status = status

    def __len__(self):
        return len(self._qubits)

    @property
    def qubits(self) -> tuple:
        return tuple(self._qubits)

    def qubit(self, i: int) -> QubitState:
        self.require_operable()
        return self._qubits[i]

    def require_operable(self) -> None:
        if self.status == CONSUMED:
            raise UsageError("register already consumed")

    def mark_consumed(self) -> None:
        self.status = CONSUMED

    def mark_disturbed(self) -> None:
        self.status = DISTURBED

    def replace_qubits(self, qubits) -> None:
        if len(qubits) != len(self._qubits):
            raise ShapeError("replacement length mismatch")
        self._qubits = list(qubits)

    def apply_inplace(self, index: int, x_bit: int, z_bit: int) -> None:
        """Channel-level Pauli on one position (in-transit tampering)."""
        self.require_operable()
        self._qubits[index] = apply_pauli(self._qubits[index], x_bit, z_bit)

    def __repr__(self):
        return f"QuantumRegister(n={len(self)}, holder={self.holder!r}, {self.status})"


def basis_register(bits, holder: str) -> QuantumRegister:
    return QuantumRegister([basis_state(b) for b in bits], holder)


def concat(registers, holder: str | None = None) -> QuantumRegister:
    """Join registers into one; the sources are consumed."""
    regs = list(registers)
    if not regs:
        raise ShapeError("nothing to concatenate")
    holder = holder or regs[0].holder
    qubits = []
    for r in regs:
        r.require_operable()
        qubits.extend(r._qubits)
        r.mark_consumed()
    return QuantumRegister(qubits, holder)


def split(register: QuantumRegister, sizes) -> list[QuantumRegister]:
    """Break a register into consecutive pieces; the source is consumed."""
    register.require_operable()
    if sum(sizes) != len(register):
        raise ShapeError(f"split sizes {sizes} do not cover length {len(register)}")
    out, pos = [], 0
    for s in sizes:
        out.append(QuantumRegister(register._qubits[pos:pos + s], register.holder,
                                   register.status))
        pos += s
    register.mark_consumed()
    return out


def measure_all(register: QuantumRegister, rng: np.random.Generator) -> list[int]:
    """Measure every qubit in the Z basis; the register is consumed."""
    register.require_operable()
    bits = [measure_z(q, rng) for q in register._qubits]
    register.mark_consumed()
    return bits


def compare_registers(a: QuantumRegister, b: QuantumRegister,
                      rng: np.random.Generator, reps: int = 1) -> str:
    """Position-wise swap-test comparison of two registers.

    Returns "unequal" iff any test reads 1. Each position may be tested
    ``reps`` times; every repetition consumes one fresh copy pair of the
    position's states, and the final repetition's post states replace the
    register contents. On an equal verdict both registers stay live with
    the exact post states (untouched on the identical-pure fast path); on
    an unequal verdict both are marked disturbed.
    """
    a.require_operable()
    b.require_operable()
    if len(a) != len(b):
        raise ShapeError(f"register lengths differ: {len(a)} vs {len(b)}")
    if reps < 1:
        raise ShapeError("reps must be >= 1")
    new_a, new_b = [], []
    unequal = False
    for qa, qb in zip(a._qubits, b._qubits):
        out = None
        for _ in range(reps):
            out = swap_test(qa, qb, rng)
            if out.bit == 1:
                unequal = True
                break
        new_a.append(out.post_left)
        new_b.append(out.post_right)
    a.replace_qubits(new_a)
    b.replace_qubits(new_b)
    if unequal:
        a.mark_disturbed()
        b.mark_disturbed()
        return "unequal"
    return "equal"
