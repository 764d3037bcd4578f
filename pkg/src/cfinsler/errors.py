"""Exception hierarchy.  Every error is a ``ValueError`` so callers that only
care about bad input can catch one thing."""


class FinslerError(ValueError):
    pass


class NotHermitianError(FinslerError):
    def __init__(self, defect: float):
        super().__init__(f"not Hermitian (asymmetry {defect:.3e})")
        self.defect = defect


class DegenerateBasisError(FinslerError):
    def __init__(self, detail: str = ""):
        super().__init__("degenerate basis" + (f": {detail}" if detail else ""))


class FormNotPositiveError(FinslerError):
    def __init__(self, value: float):
        super().__init__(f"form not positive on span (norm^2 = {value:.3e})")
        self.value = value


class OutsideDomainError(FinslerError):
    def __init__(self, where: str = ""):
        super().__init__("outside smooth domain" + (f" at {where}" if where else ""))


class NotPseudoconvexError(FinslerError):
    def __init__(self, z, v, min_eig: float | None = None):
        msg = f"not strictly pseudoconvex at (z,[v]) = ({list(z)}, [{list(v)}])"
        if min_eig is not None:
            msg += f"; min Levi eigenvalue {min_eig:.3e}"
        super().__init__(msg)


class SingularMetricError(FinslerError):
    def __init__(self, cond: float):
        super().__init__(f"singular fiber metric g (condition number {cond:.3e})")
        self.cond = cond


class DegenerateIndicatrixError(FinslerError):
    def __init__(self):
        super().__init__("degenerate indicatrix: dG/dv vanishes at f0")


class DSLError(FinslerError):
    """Metric expression error carrying a 1-based ``line:column``."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ConvergenceError(FinslerError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class ConfigError(FinslerError):
    pass
