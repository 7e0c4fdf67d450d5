"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the command line
front end can report failures as structured JSON.
"""


class QesError(Exception):
    code = "QES_ERROR"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(v):
    if isinstance(v, (int, float, str, bool)) or v is None:
        return v
    return str(v)


# exact algebra
class ZeroPolynomialError(QesError):
    code = "ZERO_POLYNOMIAL"


# ode / series
class NotPolynomialError(QesError):
    code = "NOT_POLYNOMIAL"


class LeadingCoeffVanishesError(QesError):
    code = "LEADING_COEFF_VANISHES"


class WrongShapeError(QesError):
    code = "WRONG_SHAPE"


class UnboundParameterError(QesError):
    code = "UNBOUND_PARAMETER"


# recurrence lab
class LeadingZeroError(QesError):
    """Generation stopped because the leading coefficient vanished.

    ``partial`` holds the sequence generated up to (not including) ``n``.
    """

    code = "LEADING_ZERO_AT"

    def __init__(self, n, partial=None):
        super().__init__(f"leading coefficient vanishes at n={n}", n=n)
        self.n = n
        self.partial = partial


class DegreeDefectError(QesError):
    code = "DEGREE_DEFECT"

    def __init__(self, n, degree):
        super().__init__(f"deg P_{n} = {degree} != {n}", n=n, degree=degree)
        self.n = n
        self.degree = degree


class InsufficientMomentsError(QesError):
    code = "INSUFFICIENT_MOMENTS"


class SImaginaryError(QesError):
    code = "S_IMAGINARY"


# models
class InvalidG1Error(QesError):
    code = "INVALID_G1"


class ResidualNonzeroError(QesError):
    code = "RESIDUAL_NONZERO"


class BetaOutOfRangeError(QesError):
    code = "BETA_OUT_OF_RANGE"


# numerics
class NonfinitePotentialError(QesError):
    code = "NONFINITE_POTENTIAL"


class NoConvergenceError(QesError):
    code = "NO_CONVERGENCE"


class DegeneratePsiError(QesError):
    code = "DEGENERATE_PSI"


class MismatchedProblemsError(QesError):
    code = "MISMATCHED_PROBLEMS"
