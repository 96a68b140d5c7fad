"""Exception hierarchy shared by all modules."""


class SpecbandError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(SpecbandError):
    pass


class InvalidMatrix(SpecbandError):
    """A matrix violates the structural invariants of its class.

    ``field`` names the offending entry (e.g. ``"b[1]"``) when known.
    """

    def __init__(self, reason, field=None):
        self.reason = reason
        self.field = field
        super().__init__(f"{field}: {reason}" if field else reason)


class InvalidData(SpecbandError):
    def __init__(self, reason, field=None):
        self.reason = reason
        self.field = field
        super().__init__(f"{field}: {reason}" if field else reason)


class InvalidMeasure(SpecbandError):
    pass


class OracleOverflow(SpecbandError):
    pass


class InfeasibleBranch(SpecbandError):
    pass


class Breakdown(SpecbandError):
    pass


class VerificationFailed(SpecbandError):
    def __init__(self, message, worst, report=None):
        self.worst = worst
        self.report = report
        super().__init__(message)


class ParseError(SpecbandError):
    pass
