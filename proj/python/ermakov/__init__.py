"""Claim auditor for three classes of Ermakov dynamical systems.

The heavy lifting lives in the compiled extension; this package adds a
thin convenience layer for dict-based configuration.
"""

import json as _json

from ._core import (  # noqa: F401
    ErmakovError,
    Expression,
    System,
    __version__,
    claim_registry,
    parse_expression,
    simulate,
)
from ._core import run_audit as _run_audit_json


def run_audit(config):
    """Run the registered claims.

    `config` may be a dict or a JSON string; the report comes back as a dict.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_audit_json(config)


__all__ = [
    "ErmakovError",
    "Expression",
    "System",
    "claim_registry",
    "parse_expression",
    "run_audit",
    "simulate",
    "__version__",
]
