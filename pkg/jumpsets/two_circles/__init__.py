from jumpsets.synthgen import CatalogEntry


class TwoCircles(CatalogEntry):
    name = "Two circles"
    dim = 2
    defaults = {
        "centers": ((0.25, 0.5), (0.75, 0.5)),
        "radii": (0.15, 0.15),
        "l": 4.0,
    }
