"""Exception hierarchy shared by all modules."""


class GermSolverError(Exception):
    """Base class; ``exit_code`` drives the CLI status."""

    exit_code = 1


class OutOfDomain(GermSolverError, ValueError):
    exit_code = 2


class FluxShapeMismatch(GermSolverError, ValueError):
    exit_code = 2


class FluxMismatch(GermSolverError, ValueError):
    exit_code = 2


class EmptyRange(GermSolverError, ValueError):
    exit_code = 2


class RHViolation(GermSolverError, ValueError):
    exit_code = 2


class CFLRatioViolated(GermSolverError, ValueError):
    exit_code = 2


class DegenerateSlope(GermSolverError, ValueError):
    exit_code = 2


class StabilityViolation(GermSolverError, ValueError):
    exit_code = 2


class MeshMismatch(GermSolverError, ValueError):
    exit_code = 2


class ParseError(GermSolverError, ValueError):
    exit_code = 2


class ValidationError(GermSolverError, ValueError):
    exit_code = 2

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class Incomplete(GermSolverError):
    """No germ pair resolves the Riemann datum."""

    exit_code = 3

    def __init__(self, u_minus, u_plus, resolution=None):
        self.u_minus = u_minus
        self.u_plus = u_plus
        self.resolution = resolution
        msg = f"germ does not resolve datum ({u_minus!r}, {u_plus!r})"
        if resolution is not None:
            msg += f" at resolution {resolution}"
        super().__init__(msg)


class AmbiguousFlux(GermSolverError):
    """Matching pairs disagree on the interface flux."""

    exit_code = 4

    def __init__(self, u_minus, u_plus, values, pairs=()):
        self.u_minus = u_minus
        self.u_plus = u_plus
        self.values = sorted(set(float(v) for v in values))
        self.pairs = list(pairs)
        super().__init__(
            f"datum ({u_minus!r}, {u_plus!r}) admits interface fluxes {self.values}"
        )


class EnvelopeViolation(GermSolverError):
    exit_code = 5
