from jumpsets.synthgen import CatalogEntry


class HalfspaceStep(CatalogEntry):
    name = "Half-space step"
    defaults = {
        "dim": 2,
        "l": 4.0,
    }
