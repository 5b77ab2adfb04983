"""Deterministic simulator and attack harness for two arbitrated quantum
signature schemes: a direct three-party exchange and a public-board variant
that closes the receiver's integrality-repudiation window."""

from .adversary import SCENARIOS, Scenario, ScenarioReport, run_scenario
from .errors import (AqsigError, CapabilityError, KeyReuseError, KeySizeError,
                     NormalizationError, ProtocolError, ShapeError, UsageError)
from .keyring import (Keyring, Nonce, SharedKey, establish_key, fresh_nonce,
                      pad_schedule, required_key_lengths)
from .pads import (PadKeyView, mask_r, qotp_decrypt, qotp_encrypt, rk_apply,
                   rk_invert, subkey)
from .protocol import (Hooks, Message, PublicBoard, RunResult, Transcript,
                       Verdict, basis_message, random_message, resolve_dispute,
                       run_scheme, scheme_b_ordering_ok,
                       verification_without_arbitrator)
from .quantum import (QuantumRegister, QubitState, SwapOutcome, apply_pauli,
                      compare_registers, fidelity_oracle, measure_z, pure,
                      swap_test)
from .reporting import TransmissionReport, bell_reference, count_transmissions, emit_report

__version__ = "0.1.0"
