"""Exception hierarchy. The CLI maps each base class to an exit code."""


class ConfigError(ValueError):
    """Invalid parameters or configuration (exit code 2)."""


class ResourceCapError(RuntimeError):
    """A requested computation exceeds a hard resource cap (exit code 3)."""


class NumericFailure(RuntimeError):
    """A numerical procedure failed its own post-conditions (exit code 4)."""


class GraphError(ConfigError):
    pass


class NotRegularError(GraphError):
    def __init__(self, degrees):
        self.degrees = dict(degrees)
        top = max(self.degrees.values())
        self.offending = sorted(k for k, d in self.degrees.items() if d != top)
        super().__init__(
            f"graph is not regular: nodes {self.offending} have degree below {top}"
        )


class DisconnectedError(GraphError):
    pass


class SymmetricPRequired(ConfigError):
    """Stein-analysis quantities are only defined here for p = 1/2."""

    def __init__(self, p):
        self.p = p
        super().__init__(f"requires p = 1/2 (got p = {p})")


class StateSpaceTooLarge(ResourceCapError):
    pass


class MultipleClosedClasses(NumericFailure):
    pass


class ConvergenceFailure(NumericFailure):
    pass


class InsufficientSamples(ConfigError):
    pass
