"""Exception types shared across the package."""


class RefmonError(Exception):
    pass


class ResourceLimit(RefmonError):
    """Search node budget exhausted.

    Deliberately distinct from an infeasibility answer: callers must never
    treat a budget abort as NONE.
    """


class UnknownElement(RefmonError):
    pass


class NotMaximal(RefmonError):
    pass


class NotLowerSet(RefmonError):
    pass


class NotChainUp(RefmonError):
    pass


class BadProjection(RefmonError):
    pass


class InvalidPair(RefmonError):
    pass


class BadCoordinate(RefmonError):
    pass


class PreconditionViolated(RefmonError):
    pass


class NoValidStep(RefmonError):
    """The surgery step search found no usable compatible pair.

    A diagnostic, not a proof of impossibility; see surgery module notes.
    """


class InternalInvariantViolation(RefmonError):
    """Something the validated structure guarantees failed to hold."""


class InvalidSystem(RefmonError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class ParseError(RefmonError):
    pass
