"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures without a
lookup table: 1 for validation problems, 2 for chains that did not converge
or stalled.
"""


class RedistError(Exception):
    exit_code = 1


# graph / plan substrate
class InvalidPlan(RedistError):
    pass


class UnknownDistrict(RedistError):
    pass


class DegenerateGraph(RedistError):
    pass


class DisconnectedGraph(RedistError):
    pass


# scoring
class DegenerateWeight(RedistError):
    pass


# chains
class NoBoundary(RedistError):
    pass


class StallDetected(RedistError):
    exit_code = 2


class StepOutOfRange(RedistError):
    pass


# diagnostics
class InsufficientData(RedistError):
    pass


class ZeroWithinVariance(RedistError):
    pass


class NotConverged(RedistError):
    exit_code = 2

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile or {}


# analysis
class InsufficientPlans(RedistError):
    pass


class DegenerateSpread(RedistError):
    pass


# io
class ParseError(RedistError):
    pass


class AsymmetricAdjacency(RedistError):
    pass


class DanglingReference(RedistError):
    pass


class DegenerateGeometry(RedistError):
    pass


class SeedFailure(RedistError):
    pass


class CoherenceError(RedistError):
    pass
