from jumpsets.synthgen import CatalogEntry


class LipschitzCircles(CatalogEntry):
    name = "Two circles with a sloped inside"
    dim = 2
    defaults = {
        "centers": ((0.25, 0.5), (0.75, 0.5)),
        "radii": (0.15, 0.15),
        "l": 4.0,
        "slope": 1.0,
    }
