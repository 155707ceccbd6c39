class ConicValidationError(Exception):
    """
    Exception raised for invalid input: configuration, preconditions or unsupported arguments.
    """

    def __init__(self, *args):
        super().__init__(*args)


class NumericalFailure(Exception):
    """
    Exception raised when a numerical stage of the pipeline cannot produce a trustworthy result.
    """

    def __init__(self, *args):
        super().__init__(*args)


class ConfigValidationError(ConicValidationError):
    """
    Exception about an invalid experiment configuration. Carries the offending section, key and line if known.
    """

    def __init__(self, *args, section=None, key=None, line=None):
        super().__init__(*args)
        self.section = section
        self.key = key
        self.line = line

    def __str__(self):
        where = ".".join([p for p in (self.section, self.key) if p])
        if self.line is not None:
            where += " (line {})".format(self.line)
        message = super().__str__()
        return "{}: {}".format(where, message) if where else message


class CrossingMismatch(ConicValidationError):
    """
    Exception about two ingoing packets which do not meet at the same crossing point.
    """

    def __init__(self, *args):
        super().__init__(*args)


class PoleOfGamma(ConicValidationError):
    """
    Exception about evaluating the gamma function at a non positive integer.
    """

    def __init__(self, *args):
        super().__init__(*args)


class NotAnEigenvector(ConicValidationError):
    """
    Exception about a vector which is not an eigenvector of the requested mode.
    """

    def __init__(self, *args):
        super().__init__(*args)


class AtCrossingTime(ConicValidationError):
    """
    Exception about evaluating a quantity exactly at the crossing time where it is singular.
    """

    def __init__(self, *args):
        super().__init__(*args)


class OnCrossingSet(NumericalFailure):
    """
    Exception about a point where the gap vanishes and the eigenprojectors are undefined.
    """

    def __init__(self, *args):
        super().__init__(*args)


class DegenerateCrossing(NumericalFailure):
    """
    Exception about a crossing point which is not conical: rank(dw) < 2 or dw p = 0.
    """

    def __init__(self, *args):
        super().__init__(*args)


class StiffnessFailure(NumericalFailure):
    """
    Exception about an adaptive integrator whose step size collapsed away from the crossing set.
    """

    def __init__(self, *args):
        super().__init__(*args)


class NoCrossing(NumericalFailure):
    """
    Exception about a trajectory which was expected to reach the crossing set but didn't.
    """

    def __init__(self, *args):
        super().__init__(*args)


class GrazingCrossing(NumericalFailure):
    """
    Exception about a trajectory passing close to the crossing set without hitting it.
    """

    def __init__(self, *args):
        super().__init__(*args)


class GridOverflow(NumericalFailure):
    """
    Exception about a grid function carrying too much mass in the boundary shell of its box.
    """

    def __init__(self, *args):
        super().__init__(*args)


class OutOfBox(NumericalFailure):
    """
    Exception about a wave packet whose centre or support doesn't fit the physical box.
    """

    def __init__(self, *args):
        super().__init__(*args)
