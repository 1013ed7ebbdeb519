class SupercohomError(Exception):
    """Base class for library errors."""


class InvalidParams(SupercohomError, ValueError):
    pass


class DimensionMismatch(SupercohomError, ValueError):
    pass


class NoForm(SupercohomError):
    """The algebra carries no even invariant form on its weight space."""


class UnknownFamily(SupercohomError, KeyError):
    pass


class NotPolar(SupercohomError):
    pass


class DegenerateCoefficients(SupercohomError, ValueError):
    pass


class ClosureFailure(SupercohomError):
    pass


class NonSemisimpleH(SupercohomError):
    """[x,x] does not act semisimply on the module."""


class AlgebraMismatch(SupercohomError, ValueError):
    pass
