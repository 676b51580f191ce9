import itertools
import math

import numpy as np

from jumpsets.synthgen import Region, ShapeSpec, constant
from jumpsets.utils import InvalidGeometryError, InvalidParameterError, PersistenceDiagram


class TwoCirclesSignal(ShapeSpec):
    """
    The value `inside` on a union of disjoint open disks, 0 elsewhere. D_f is the
    union of the circles.
    """

    def __init__(self, centers, radii, l, dim=2):
        if dim != 2:
            raise InvalidParameterError("Circles live in d=2, got d={}".format(dim))
        centers = np.array(centers, dtype=float).reshape(-1, 2)
        radii = np.array(radii, dtype=float).ravel()
        if len(centers) != len(radii) or not len(radii):
            raise InvalidParameterError("Need one radius per center, got {} and {}".format(len(centers), len(radii)))
        if (radii <= 0).any():
            raise InvalidGeometryError("Radii must be positive, got {}".format(radii.tolist()))
        for center, radius in zip(centers, radii):
            if (center - radius <= 0).any() or (center + radius >= 1).any():
                raise InvalidGeometryError("Circle at {} of radius {} leaves the cube".format(center.tolist(), radius))
        gaps = []
        for i, j in itertools.combinations(range(len(radii)), 2):
            gap = np.linalg.norm(centers[i] - centers[j]) - radii[i] - radii[j]
            if gap <= 0:
                raise InvalidGeometryError(
                    "Circles {} and {} overlap (center distance {:.6g})".format(i, j, gap + radii[i] + radii[j])
                )
            gaps.append(gap)

        # Circles are smooth: mu = 1 and the mu-reach is the ordinary reach.
        reach = min([radii.min()] + [gap / 2 for gap in gaps])
        super().__init__(dim, l, mu=1.0, reach_mu=reach, **self.modulus_kwargs())
        self.centers = centers
        self.radii = radii
        self.gaps = gaps
        self.regions = [
            Region("outside", self._outside_distance, constant(0)),
            Region("inside", lambda points: -self._outside_distance(points), self.inside_value),
        ]

    def modulus_kwargs(self):
        return {}

    def inside_value(self, points):
        return np.full(len(points), self.l)

    def _outside_distance(self, points):
        # Positive inside some disk, negative outside all of them.
        distances = np.linalg.norm(points[:, None, :] - self.centers[None, :, :], axis=-1) - self.radii[None, :]
        return -distances.min(axis=1)

    def distance_to_jumps(self, points):
        distances = np.linalg.norm(points[:, None, :] - self.centers[None, :, :], axis=-1) - self.radii[None, :]
        return np.abs(distances).min(axis=1)

    def betti_numbers(self):
        return (len(self.radii), len(self.radii))

    def reference_diagrams(self):
        # With three or more circles the offsets can enclose holes between circles.
        if len(self.radii) > 2:
            return None
        degree0 = [(0.0, math.inf)] + [(0.0, gap / 2) for gap in self.gaps]
        degree1 = [(0.0, radius) for radius in self.radii]
        return [PersistenceDiagram(0, degree0), PersistenceDiagram(1, degree1)]

    def params(self):
        return {"centers": self.centers.tolist(), "radii": self.radii.tolist()}
