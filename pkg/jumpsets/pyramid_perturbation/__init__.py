import math

from jumpsets.synthgen import CatalogEntry


class PyramidPerturbation(CatalogEntry):
    name = "Half-space step with a pyramid bump"
    defaults = {
        "dim": 2,
        "h": 0.1,
        "theta": math.pi / 3,
        "l": 4.0,
    }
