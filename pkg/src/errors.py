"""
Error taxonomy
Argument errors map to CLI exit code 3, numerical errors to exit code 4
"""
from typing import List, Optional


class ToolkitError(Exception):
    """Base class for all toolkit errors"""


class ArgumentError(ToolkitError, ValueError):
    """A precondition on the inputs was violated"""


class SizeError(ArgumentError):
    """Operator dimension beyond the configured cap"""

    def __init__(self, dim: int, max_dim: int):
        self.dim = dim
        self.max_dim = max_dim
        super().__init__(f"Dimension {dim} exceeds the configured maximum {max_dim}")


class ValidationError(ArgumentError):
    """A B-operator failed one or more of its axioms"""

    def __init__(self, failed: List[str], residuals: Optional[dict] = None):
        self.failed = list(failed)
        self.residuals = dict(residuals or {})
        detail = ", ".join(
            f"{name} (residual {self.residuals[name]:.3e})" if name in self.residuals else name
            for name in self.failed
        )
        super().__init__(f"B operator fails axioms: {detail}")


class ConfigError(ArgumentError):
    """Malformed experiment configuration"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class NumericalError(ToolkitError, ArithmeticError):
    """A numerical routine failed"""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class SingularMatrixError(NumericalError):
    """Pivot below the singularity threshold"""

    def __init__(self, pivot_ratio: float, threshold: float):
        self.pivot_ratio = pivot_ratio
        self.threshold = threshold
        super().__init__(
            f"Matrix is singular: smallest pivot ratio {pivot_ratio:.3e} <= threshold {threshold:.1e}",
            {'pivot_ratio': pivot_ratio, 'threshold': threshold},
        )


class PoleError(NumericalError):
    """A closed-form prefactor has a vanishing denominator"""

    def __init__(self, factor: str, value: complex):
        self.factor = factor
        self.value = value
        super().__init__(f"Pole: factor '{factor}' vanishes (value {value})", {'factor': factor})


class InconsistencyError(NumericalError):
    """Samples disagree with the fitted polynomial"""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Interpolation inconsistent: residual {residual:.3e} > tolerance {tolerance:.1e}",
            {'residual': residual, 'tolerance': tolerance},
        )
