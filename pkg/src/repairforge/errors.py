"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
to stable process exit statuses.
"""

from __future__ import annotations


class RepairForgeError(Exception):
    exit_code = 1


class ShapeMismatch(RepairForgeError, ValueError):
    """Operands have incompatible lengths or shapes."""

    exit_code = 2


class LengthMismatch(ShapeMismatch):
    pass


class OddLength(ShapeMismatch):
    """A segment length that must be even is odd."""


class UnknownKind(RepairForgeError, ValueError):
    exit_code = 2


class NoSolution(RepairForgeError):
    """A GF(2) linear system is inconsistent."""

    exit_code = 3


class SingularSystem(RepairForgeError):
    """A system that should be uniquely solvable is rank deficient."""

    exit_code = 3


class PairedBlockMismatch(RepairForgeError):
    """A matrix is not of the paired block-diagonal form.

    ``row`` and ``col`` locate the first entry that violates the form.
    """

    exit_code = 4

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class StrategyIncomplete(RepairForgeError):
    """The data downloaded by a repair strategy does not determine the lost node."""

    exit_code = 5


class ConfigError(RepairForgeError, ValueError):
    exit_code = 6


class NotPrime(ConfigError):
    pass


class FieldTooSmall(ConfigError):
    pass


class BadTargets(ConfigError):
    pass


class OddSubpacketization(ConfigError):
    pass


class BadHelperCount(ConfigError):
    pass


class NotATarget(ConfigError):
    pass


class RequirementViolation(RepairForgeError):
    exit_code = 7


class R1Violation(RequirementViolation):
    pass


class R2Violation(RequirementViolation):
    pass


class PropagationFailure(RepairForgeError):
    """A pipeline round produced repair matrices of the wrong structure."""

    exit_code = 8

    def __init__(self, message: str, round_index: int | None = None):
        super().__init__(message)
        self.round_index = round_index


class RepairMismatch(RepairForgeError):
    """A simulated repair returned a payload different from the lost one."""

    exit_code = 9


class FormatError(RepairForgeError, ValueError):
    exit_code = 10
