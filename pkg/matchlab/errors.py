"""
Exception hierarchy for matchlab
Every exception carries the CLI exit code it maps to.
"""


class MatchlabError(Exception):
    """Base class for all matchlab errors"""

    exit_code = 1


class GroupMismatchError(MatchlabError):
    """Operands live in different groups or fields"""

    exit_code = 3


class PreconditionError(MatchlabError):
    """An operation was called outside its preconditions"""

    exit_code = 3


class QualificationError(PreconditionError):
    """A subgroup or subfield does not qualify for a local matching"""


class BudgetExceededError(MatchlabError):
    """An exhaustive enumeration would exceed its configured budget"""

    exit_code = 3


class SchemaError(MatchlabError):
    """JSON payload violates a schema or is not in canonical form"""

    exit_code = 3

    def __init__(self, message: str, hint=None):
        super().__init__(message)
        self.hint = hint


class ConfigError(MatchlabError):
    """Bad configuration file, flag combination or theorem id"""

    exit_code = 3


class TheoremViolation(MatchlabError):
    """
    A proven statement failed on a concrete instance.

    This means either a bug in matchlab or a falsified theorem; both must stop
    the run. `context` holds whatever the caller needs to build a certificate.
    """

    exit_code = 2

    def __init__(self, message: str, context: dict = None):
        super().__init__(message)
        self.context = context or {}


class VerificationFailure(MatchlabError):
    """A certificate did not survive re-verification"""

    exit_code = 1
