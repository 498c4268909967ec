"""Blockchain-backed accountability log for cloud storage interactions."""

from .arbitrator import (
    OutOfBandCopyFound,
    adjudicate,
    adjudicate_altered,
    adjudicate_missing,
    adjudicate_retention,
    compensation_for,
    record_verdict,
)
from .ledger import Block, Ledger, Reason, Transaction, VerifyResult
from .payloads import PayloadKind, Role, Verdict, Violation
from .scenario import fault_matrix, parse_scenario, run
from .sla_oracle import SlaSpec, evaluate_window, post_measurement

__version__ = "0.1.0"
