"""Exception types raised across the package."""


class DisscalcError(Exception):
    pass


class NotAnalytic(DisscalcError, ValueError):
    """A frequency lies outside the closed positive quadrant."""


class ConstantTermPresent(DisscalcError, ValueError):
    pass


class NyquistViolation(DisscalcError, ValueError):
    pass


class SolveFailure(DisscalcError, ArithmeticError):
    pass


class DimensionMismatch(DisscalcError, ValueError):
    pass


class ZeroPerturbation(DisscalcError, ValueError):
    """Both perturbations vanish, so a Lipschitz ratio is undefined."""


class ConfigInvalid(DisscalcError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class VersionMismatch(DisscalcError):
    pass
