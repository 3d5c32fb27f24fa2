"""Shared error types.

Every toolkit error carries a stable ``code`` so the service layer and the
CLI can map failures to HTTP payloads and distinct process exit codes
without string matching.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all expected failures."""

    code = "error"
    exit_code = 1


class InputFileError(ToolkitError):
    """A required input file or directory is missing or unreadable."""

    code = "missing-input"
    exit_code = 3


class SchemaError(ToolkitError):
    """A record, config value, or argument violates its contract."""

    code = "schema"
    exit_code = 4


class ProtocolError(ToolkitError):
    """A model endpoint broke the wire protocol (timeout, bad payload)."""

    code = "protocol"
    exit_code = 5
