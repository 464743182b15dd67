"""The user-controlled service boundary: HTTP API, grants, audit."""

from .audit import AuditEntry, AuditLog, flag_anomalies
from .auth import RESERVED_SCOPES, AccessToken, Grant, GrantRegistry, GrantState
from .config import ServerConfig, load_config
from .http import PdsHttpServer, SweepScheduler, start_server
from .pds import Pds

__all__ = [
    "RESERVED_SCOPES",
    "AccessToken",
    "AuditEntry",
    "AuditLog",
    "Grant",
    "GrantRegistry",
    "GrantState",
    "Pds",
    "PdsHttpServer",
    "ServerConfig",
    "SweepScheduler",
    "flag_anomalies",
    "load_config",
    "start_server",
]
