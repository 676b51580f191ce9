from jumpsets.two_circles.signal import TwoCirclesSignal
from jumpsets.utils import InvalidParameterError


class LipschitzCirclesSignal(TwoCirclesSignal):
    """
    Like TwoCirclesSignal, but the inside value is l + slope * x_1, so the pieces are
    Lipschitz rather than constant and the jump still exceeds l.
    """

    def __init__(self, centers, radii, l, slope=1.0, dim=2):
        if slope < 0:
            raise InvalidParameterError("slope must be nonnegative, got {}".format(slope))
        self.slope = float(slope)
        super().__init__(centers, radii, l, dim=dim)

    def modulus_kwargs(self):
        return {"modulus": self.slope}

    def inside_value(self, points):
        return self.l + self.slope * points[:, 0]

    def params(self):
        params = super().params()
        params["slope"] = self.slope
        return params
