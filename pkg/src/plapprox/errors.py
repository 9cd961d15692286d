"""Exception hierarchy shared by every module.

Exit-code mapping used by the CLI and HTTP status mapping used by the service
live next to the classes so the two frontends cannot drift apart.
"""


class PlapproxError(Exception):
    """Base class; carries a short machine-readable code."""

    code = "error"
    exit_code = 3


class DimensionMismatch(PlapproxError):
    code = "dimension_mismatch"


class DegenerateSimplex(PlapproxError):
    code = "degenerate_simplex"


class NotFaceClosed(PlapproxError):
    code = "not_face_closed"

    def __init__(self, simplex, missing):
        self.simplex = simplex
        self.missing = missing
        super().__init__(f"face {missing} of {simplex} is not in the complex")


class BadIntersection(PlapproxError):
    code = "bad_intersection"

    def __init__(self, first, second):
        self.first = first
        self.second = second
        super().__init__(
            f"simplices {first} and {second} intersect outside their common face"
        )


class UnknownVertex(PlapproxError):
    code = "unknown_vertex"


class BudgetExceeded(PlapproxError):
    code = "budget_exceeded"
    exit_code = 2

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class CarrierNotFound(PlapproxError):
    code = "carrier_not_found"


class NotARefinement(PlapproxError):
    code = "not_a_refinement"


class OutsideDomain(PlapproxError):
    code = "outside_domain"


class OutsideSimplex(PlapproxError):
    code = "outside_simplex"


class OutsideU(PlapproxError):
    code = "outside_u"


class NotSimplicial(PlapproxError):
    code = "not_simplicial"

    def __init__(self, simplex, images):
        self.simplex = simplex
        self.images = images
        super().__init__(
            f"simplex {simplex} has vertex images {sorted(images)} which span "
            f"no codomain simplex"
        )


class LipschitzViolation(PlapproxError):
    code = "lipschitz_violation"


class OracleDomainError(PlapproxError):
    code = "oracle_domain_error"


class WitnessNotFound(PlapproxError):
    code = "witness_not_found"

    def __init__(self, target, message):
        self.target = target
        super().__init__(message)


class CenterOnBoundary(PlapproxError):
    code = "center_on_boundary"


class RayDoesNotExit(PlapproxError):
    code = "ray_does_not_exit"


class EpsilonTooLarge(PlapproxError):
    code = "epsilon_too_large"


class ZeroDimensionalL(PlapproxError):
    code = "zero_dimensional_codomain"


class HypothesisNotCertified(PlapproxError):
    code = "hypothesis_not_certified"

    def __init__(self, check, message):
        self.check = check
        super().__init__(message)


class SupBoundNotMet(PlapproxError):
    code = "sup_bound_not_met"


class InternalCheckFailed(PlapproxError):
    code = "internal_check_failed"


class UnsupportedDimension(PlapproxError):
    code = "unsupported_dimension"
