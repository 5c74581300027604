"""Exception hierarchy shared by all workbench modules.

Every error raised by gatelab derives from :class:`WorkbenchError`, so callers
(CLI, HTTP service, command channel) can map failures to a stable error code,
which is simply the class name.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all gatelab errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- netlist model ---------------------------------------------------------

class MalformedInit(WorkbenchError):
    """INIT string has the wrong length, bad characters, or excess bits."""


class UnknownPin(WorkbenchError):
    """Pin name is not a role of the gate type, or a required pin is missing."""


class DuplicateDriver(WorkbenchError):
    """An output pin would drive a net that already has a driver."""


class UnknownGate(WorkbenchError):
    pass


class UnknownNet(WorkbenchError):
    pass


class UnknownSubmodule(WorkbenchError):
    pass


class HierarchyCycle(WorkbenchError):
    """Submodule parent links must form a forest."""


# --- serialization / parsing ----------------------------------------------

class SchemaError(WorkbenchError):
    """Structurally invalid netlist/project document."""


class LinkError(SchemaError):
    """A reference inside a document does not resolve."""


class VersionError(SchemaError):
    """Unsupported format_version."""


class ParseError(WorkbenchError):
    """Source text rejected; carries 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, col {col})" if line else message)
        self.line = line
        self.col = col


class UnknownPrimitive(ParseError):
    pass


class UnknownPort(ParseError):
    pass


# --- boolean engine --------------------------------------------------------

class ArityMismatch(WorkbenchError):
    pass


class MissingAssignment(WorkbenchError):
    pass


class SupportOverflow(WorkbenchError):
    """A function would exceed the 20-variable truth-table cap."""


class UnknownVariable(WorkbenchError):
    pass


class MappingMismatch(WorkbenchError):
    """Variable mapping is not a bijection between the true supports."""


class CombinationalCycle(WorkbenchError):
    """A loop of combinational gates not cut by any flip-flop or boundary net."""

    def __init__(self, message: str, members: tuple[int, ...] = ()):
        super().__init__(message)
        self.members = members


# --- FSM toolkit -----------------------------------------------------------

class InputWidthExceeded(WorkbenchError):
    pass


class ConeEscape(WorkbenchError):
    """A next-state cone depends on nets outside the declared boundary."""

    def __init__(self, message: str, nets: tuple[int, ...] = ()):
        super().__init__(message)
        self.nets = nets


class EncodingOverflow(WorkbenchError):
    pass


class ConfigInvalid(WorkbenchError):
    pass


class NoSinkComponent(WorkbenchError):
    """Transition graph has no multi-state sink component; not lock-shaped."""


class Unreachable(WorkbenchError):
    pass


class WidthMismatch(WorkbenchError):
    pass


# --- simulation ------------------------------------------------------------

class UnknownProbe(WorkbenchError):
    pass


# --- AES extraction --------------------------------------------------------

class InstanceStale(WorkbenchError):
    """Located instance no longer matches the netlist (already patched?)."""


class VerificationFailed(WorkbenchError):
    pass


class NotEnoughInstances(WorkbenchError):
    pass


# --- session trace ---------------------------------------------------------

class SequenceGap(WorkbenchError):
    pass


class DigestMismatch(WorkbenchError):
    """Replay diverged from the recorded state digest at `seq`."""

    def __init__(self, message: str, seq: int = -1):
        super().__init__(message)
        self.seq = seq


class UnknownOp(WorkbenchError):
    pass


# --- workbench surface -----------------------------------------------------

class UnknownCommand(WorkbenchError):
    pass


class ArgumentError(WorkbenchError):
    pass


class SpecInvalid(WorkbenchError):
    """Project generator knobs out of range."""


class BindError(WorkbenchError):
    pass
