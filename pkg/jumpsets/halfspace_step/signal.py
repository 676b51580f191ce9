import math

import numpy as np

from jumpsets.synthgen import Region, ShapeSpec, constant
from jumpsets.utils import PersistenceDiagram


class HalfspaceStepSignal(ShapeSpec):
    """
    f = l * 1{x_1 > 1/2}. D_f is the hyperplane x_1 = 1/2.
    """

    def __init__(self, dim, l):
        super().__init__(dim, l, mu=1.0, reach_mu=math.inf)
        self.regions = [
            Region("below", lambda points: points[:, 0] - 0.5, constant(0)),
            Region("above", lambda points: 0.5 - points[:, 0], constant(l)),
        ]

    def distance_to_jumps(self, points):
        return np.abs(points[:, 0] - 0.5)

    def betti_numbers(self):
        return (1,) + (0,) * (self.dim - 1)

    def reference_diagrams(self):
        return [PersistenceDiagram(0, [(0.0, math.inf)])] + [PersistenceDiagram(s) for s in range(1, self.dim)]
