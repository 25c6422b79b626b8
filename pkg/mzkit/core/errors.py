from typing import Any, Optional


class MZKitError(Exception):
    """Base error carrying a message and structured context."""

    exit_code = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: dict[str, Any] = context

    def __str__(self) -> str:
        return self.message


class InputError(MZKitError):
    """Bad input: malformed files, inconsistent arguments, points off the domain."""

    exit_code = 1


class DomainError(InputError):
    pass


class RegionOutsideDomainError(DomainError):
    def __init__(self, message: str = "region outside domain", **context: Any):
        super().__init__(message, **context)


class MassMismatchError(InputError):
    def __init__(self, mass_a: float, mass_b: float):
        super().__init__(f"mass mismatch: {mass_a!r} vs {mass_b!r}", mass_a=mass_a, mass_b=mass_b)


class EmptyMeasureError(InputError):
    pass


class SchemaError(InputError):
    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message, field=field, line=line)


class NumericalError(MZKitError):
    """A numerical cap or solver failure."""

    exit_code = 2


class GramSingularError(NumericalError):
    def __init__(self, k: int, pivot: float, largest: float):
        super().__init__(
            f"Gram numerically singular at degree {k}",
            k=k,
            pivot=pivot,
            largest_pivot=largest,
        )


class DegreeTooLargeError(NumericalError):
    def __init__(self, k: int, cap: int, what: str = "degree"):
        super().__init__(f"{what} too large: {k} exceeds cap {cap}", k=k, cap=cap)


class OrderTooLargeError(NumericalError):
    def __init__(self, nodes: int, cap: int):
        super().__init__(f"order too large: {nodes} nodes exceed cap {cap}", nodes=nodes, cap=cap)


class NodeComputationError(NumericalError):
    def __init__(self, message: str = "node computation failed", **context: Any):
        super().__init__(message, **context)


class EigenSolverError(NumericalError):
    pass


class NetTooLargeError(NumericalError):
    def __init__(self, size: int, cap: int):
        super().__init__(f"net too large: {size} centers exceed budget {cap}", size=size, cap=cap)


class LPSizeCapError(NumericalError):
    def __init__(self, atoms: int, cap: int):
        super().__init__(f"LP size cap exceeded: {atoms} atoms exceed cap {cap}", atoms=atoms, cap=cap)


class DualBasisUndefinedError(NumericalError):
    def __init__(self, eigmin: float):
        super().__init__("Gram singular: dual basis undefined", eigmin=eigmin)


class QuadratureRefinementError(NumericalError):
    def __init__(self, coarse: float, fine: float, order: int):
        super().__init__(
            f"quadrature order {order} insufficient: refinements disagree ({coarse!r} vs {fine!r})",
            coarse=coarse,
            fine=fine,
            order=order,
        )


class OrthonormalityError(NumericalError):
    def __init__(self, k: int, deviation: float, tolerance: float):
        super().__init__(
            f"basis fails the orthonormality check at degree {k}: deviation {deviation:.3g} > {tolerance:.3g}",
            k=k,
            deviation=deviation,
            tolerance=tolerance,
        )


class SearchNotConvergedError(NumericalError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"did not converge after {iterations} iterations (best residual {residual:.3g})",
            residual=residual,
            iterations=iterations,
        )
