"""Exception hierarchy shared by all modules."""


class MCFError(Exception):
    """Base class for errors raised by lagmcf."""


class ParameterViolation(MCFError, ValueError):
    """Parameters outside their admissible range (a > 0, E >= 1, ...)."""


class DomainViolation(MCFError, ValueError):
    """Profile evaluated outside its parameter interval."""


class NonFiniteIntegrand(MCFError, ArithmeticError):
    pass


class SingularPoint(MCFError, ArithmeticError):
    """The profile derivative vanishes, so the flow coefficient is undefined."""


class NotOnSphere(MCFError, ValueError):
    pass


class RankDeficient(MCFError, ArithmeticError):
    """Gram-Schmidt met a (numerically) dependent vector."""


class NonOrthonormalBasis(MCFError, ValueError):
    pass


class StepSizeUnderflow(MCFError, RuntimeError):
    """The step controller shrank below the floor away from an extinction."""


class InsufficientTail(MCFError, ValueError):
    pass
