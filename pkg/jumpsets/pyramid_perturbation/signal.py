import math

import numpy as np

from jumpsets.synthgen import Region, ShapeSpec, constant
from jumpsets.utils import InvalidGeometryError, InvalidParameterError


class PyramidPerturbationSignal(ShapeSpec):
    """
    The half-space step with a cone of revolution pushed into the upper side: the
    region below the jump is {x_1 < 1/2} together with the open cone of half-angle
    `theta` whose base is a disk on the hyperplane and whose apex sits at
    x_1 = 1/2 + vertex_offset on the axis through the cube's center. In d=2 the cone
    is a triangle.

    D_f has a corner at the apex. The half-angle bounds the mu for which the signal
    has positive mu-reach: theta > arccos(mu) / 2, that is mu > cos(2 theta), which
    is recorded as `mu_bound`. Its jump set lies at Hausdorff distance vertex_offset
    from the hyperplane of the unperturbed step.
    """

    def __init__(self, dim, h, theta, l, vertex_offset=None, mu=None):
        if dim < 2:
            raise InvalidParameterError("The pyramid needs d >= 2, got d={}".format(dim))
        if h <= 0:
            raise InvalidParameterError("h must be positive, got {}".format(h))
        if not 0 < theta < math.pi / 2:
            raise InvalidGeometryError("theta must lie in (0, pi/2), got {}".format(theta))
        apex_height = 2 * h if vertex_offset is None else float(vertex_offset)
        base_radius = apex_height * math.tan(theta)
        if apex_height <= 0 or 0.5 + apex_height >= 1 or base_radius >= 0.5:
            raise InvalidGeometryError(
                "Pyramid of height {:.6g} and base radius {:.6g} leaves the cube".format(apex_height, base_radius)
            )
        mu_bound = math.cos(2 * theta)
        if mu is None:
            mu = (1 + max(mu_bound, 0.0)) / 2
        elif mu <= mu_bound:
            raise InvalidGeometryError(
                "theta={:.6g} gives mu-reach only for mu > cos(2 theta) = {:.6g}, got mu={}".format(theta, mu_bound, mu)
            )
        # Lower estimate; it vanishes as mu approaches the bound. Near the apex the
        # distance function's gradient has norm sin(theta).
        reach_mu = apex_height * (mu - mu_bound)
        super().__init__(dim, l, mu=mu, reach_mu=reach_mu, feature_size=h)
        self.h = float(h)
        self.theta = float(theta)
        self.mu_bound = mu_bound
        self.apex_height = apex_height
        self.base_radius = base_radius
        self.regions = [
            Region("below", self._below_distance, constant(0)),
            Region("above", lambda points: -self._below_distance(points), constant(l)),
        ]

    def _meridian(self, points):
        # (height above the hyperplane, distance to the cone's axis)
        height = points[:, 0] - 0.5
        rho = np.linalg.norm(points[:, 1:] - 0.5, axis=1)
        return height, rho

    def _below_distance(self, points):
        height, rho = self._meridian(points)
        cone = rho - (self.apex_height - height) * math.tan(self.theta)
        return np.minimum(height, cone)

    def distance_to_jumps(self, points):
        height, rho = self._meridian(points)
        # Hyperplane with the open base disk removed.
        plane = np.hypot(height, np.maximum(0.0, self.base_radius - rho))
        # Lateral surface: the segment from (0, base_radius) to (apex_height, 0).
        start = np.array([0.0, self.base_radius])
        direction = np.array([self.apex_height, -self.base_radius])
        offsets = np.stack([height, rho], axis=-1) - start
        t = np.clip(offsets @ direction / direction.dot(direction), 0.0, 1.0)
        lateral = np.linalg.norm(offsets - t[:, None] * direction, axis=1)
        return np.minimum(plane, lateral)

    def betti_numbers(self):
        return (1,) + (0,) * (self.dim - 1)

    def params(self):
        return {"h": self.h, "theta": self.theta, "vertex_offset": self.apex_height, "mu": self.mu}

    def metadata(self):
        metadata = super().metadata()
        metadata["mu_bound"] = self.mu_bound
        return metadata
