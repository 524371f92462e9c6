"""Certificateless tripartite key agreement lab.

Two certificateless three-party key agreement protocols, the five attacks
that break them, and the repaired variants that stop those attacks, all
runnable over a discrete-log-exposed transparent backend (for exact
algebraic oracles) or a supersingular-curve pairing backend.
"""

from .errors import (
    BackendMismatchError,
    ClakaError,
    DegenerateDenominatorError,
    DegenerateScalarError,
    EncodingError,
    MissingTranscriptFieldError,
    ScenarioError,
    SignatureInvalidError,
)
from .harness import (
    ScenarioConfig,
    build_run_report,
    count_operations,
    replay_report,
    run_attack_scenario,
    run_honest_session,
)
from .keyinfra import MasterKey, SystemParams, setup
from .pairing import default_profile, get_backend
from .session import PROTOCOL_VARIANTS, SessionKey

__version__ = "0.1.0"

__all__ = [
    "BackendMismatchError",
    "ClakaError",
    "DegenerateDenominatorError",
    "DegenerateScalarError",
    "EncodingError",
    "MasterKey",
    "MissingTranscriptFieldError",
    "PROTOCOL_VARIANTS",
    "ScenarioConfig",
    "ScenarioError",
    "SessionKey",
    "SignatureInvalidError",
    "SystemParams",
    "build_run_report",
    "count_operations",
    "default_profile",
    "get_backend",
    "replay_report",
    "run_attack_scenario",
    "run_honest_session",
    "setup",
    "__version__",
]
