"""Exception types shared across the package."""


class ContractError(ValueError):
    """A call violated a documented precondition (bad argument, wrong jet convention)."""


class NumericalFailure(RuntimeError):
    """A numerical routine could not reach its accuracy target (quadrature, solver)."""
