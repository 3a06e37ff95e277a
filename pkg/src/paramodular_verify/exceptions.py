class ParamodularError(Exception):
    """Base class for all errors raised by paramodular_verify."""


class PreconditionError(ParamodularError, ValueError):
    """A divisibility, congruence, primitivity or Bezout condition does not hold."""


class RadicandMismatchError(ParamodularError, ArithmeticError):
    pass


class DivergentSeriesError(ParamodularError, ValueError):
    """A direct series was requested outside its half plane of convergence."""


class PoleError(ParamodularError, ZeroDivisionError):
    pass


class TailBoundError(ParamodularError):
    pass


class ConvergenceError(ParamodularError, ArithmeticError):
    pass


class MembershipError(ParamodularError, ValueError):
    """A matrix lies outside the group it was handed to, or its last row fits no row type."""


class NotFoundError(ParamodularError, LookupError):
    pass
