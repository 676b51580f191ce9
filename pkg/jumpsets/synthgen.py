# coding: utf-8
import importlib
import logging
import math
import os

import numpy as np

from jumpsets.utils import (
    CubicalMask,
    InvalidGeometryError,
    InvalidParameterError,
    ObservationGrid,
    cell_centers,
)

logger = logging.getLogger(__name__)


class Region:
    """
    One open piece of [0,1]^d on which the signal is continuous.

    `signed_distance` is negative inside the region and zero on its boundary; only
    its sign is used for membership. `value` evaluates the piece on an array of
    points of shape (k, d).
    """

    def __init__(self, name, signed_distance, value):
        self.name = name
        self.signed_distance = signed_distance
        self.value = value


def constant(c):
    return lambda points: np.full(len(points), float(c))


class ShapeSpec:
    """
    A piecewise-continuous signal f on [0,1]^d with an analytically known jump set D_f.

    Subclasses set `self.regions` and implement `distance_to_jumps`,
    `betti_numbers` and, when the offset topology is known in closed form,
    `reference_diagrams`.
    """

    def __init__(self, dim, l, mu=1.0, reach_mu=math.inf, modulus=0.0, feature_size=None):
        if dim < 1:
            raise InvalidParameterError("Dimension must be positive, got {}".format(dim))
        if l <= 0:
            raise InvalidParameterError("Jump floor l must be positive, got {}".format(l))
        if not 0 < mu <= 1:
            raise InvalidGeometryError("mu must lie in (0, 1], got {}".format(mu))
        if reach_mu <= 0:
            raise InvalidGeometryError("mu-reach must be positive, got {}".format(reach_mu))
        self.dim = dim
        self.l = float(l)
        self.mu = float(mu)
        self.reach_mu = float(reach_mu)
        # Lipschitz constant of the pieces: omega(t) = modulus * t.
        self.modulus = float(modulus)
        # Smallest geometric feature a rasterization must resolve.
        self.feature_size = feature_size
        self.regions = []

    def omega(self, t):
        return self.modulus * t

    def _points(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        if points.shape[1] != self.dim:
            raise InvalidParameterError("Expected points in dimension {}, got {}".format(self.dim, points.shape[1]))
        return points

    def value(self, points):
        """
        Evaluates f. On a boundary the smallest adjacent piece value is taken, which
        makes f lower semicontinuous.
        """
        points = self._points(points)
        out = np.full(len(points), np.inf)
        for region in self.regions:
            inside = region.signed_distance(points) <= 0
            if inside.any():
                out[inside] = np.minimum(out[inside], region.value(points[inside]))
        if np.isinf(out).any():
            raise InvalidGeometryError("Regions of {} do not cover the cube".format(self.__class__.__name__))
        return out

    def region_index(self, points):
        """
        Returns, for each point, the index of the region whose value `value` picked.
        """
        points = self._points(points)
        best = np.full(len(points), np.inf)
        index = np.full(len(points), -1)
        for i, region in enumerate(self.regions):
            inside = region.signed_distance(points) <= 0
            values = np.full(len(points), np.inf)
            if inside.any():
                values[inside] = region.value(points[inside])
            better = values < best
            best[better] = values[better]
            index[better] = i
        return index

    def exact_jump_distance(self, points):
        """
        Exact Euclidean distance from each point to D_f. Returns a float for a single
        point and an array for an array of points.
        """
        single = np.ndim(points) == 1
        distances = self.distance_to_jumps(self._points(points))
        return float(distances[0]) if single else distances

    def distance_to_jumps(self, points):
        raise NotImplementedError

    def betti_numbers(self):
        raise NotImplementedError

    def reference_diagrams(self):
        """
        Closed-form offset-filtration diagrams of D_f per degree 0..d-1, or None when
        they are only available from a fine rasterization.
        """
        return None

    def params(self):
        return {}

    def metadata(self):
        return {
            "shape": self.__class__.__name__,
            "d": self.dim,
            "params": self.params(),
            "l": self.l,
            "mu": self.mu,
            "R_mu": self.reach_mu,
            "modulus": self.modulus,
            "betti": list(self.betti_numbers()),
            "diagram": "closed-form" if self.reference_diagrams() is not None else "oracle-rasterized",
        }


class CatalogEntry:
    """
    A named shape family. Each sub-package of `jumpsets` that declares a subclass in
    its `__init__.py` is a catalog entry; its `signal.py` declares the ShapeSpec
    subclass named after the entry with a "Signal" suffix.
    """

    """
    Human-readable name of the shape family.
    """
    name = None
    """
    The ambient dimension, or None if the family exists in any dimension.
    """
    dim = None
    """
    Keyword arguments passed to the signal class when not overridden.
    """
    defaults = {}

    def __init__(self):
        class_name = self.__class__.__name__ + "Signal"
        self.signal_class = getattr(__import__(self.__module__ + ".signal", fromlist=[class_name]), class_name)

    @property
    def module_name(self):
        return self.__module__.rsplit(".", 1)[-1]

    def build(self, **params):
        kwargs = dict(self.defaults)
        kwargs.update(params)
        return self.signal_class(**kwargs)


def module_names():
    """
    Returns the names of the shape catalog sub-packages.
    """
    dirname = os.path.dirname(os.path.abspath(__file__))
    for module_name in sorted(os.listdir(dirname)):
        if os.path.isfile(os.path.join(dirname, module_name, "__init__.py")):
            yield module_name


def catalog():
    """
    Returns catalog entries keyed by sub-package name.
    """
    entries = {}
    for module_name in module_names():
        module = importlib.import_module("jumpsets.{}".format(module_name))
        # Instantiating an entry imports its signal module into this namespace.
        for obj in list(module.__dict__.values()):
            if (
                isinstance(obj, type)
                and issubclass(obj, CatalogEntry)
                and obj is not CatalogEntry
                and obj.__module__ == module.__name__
            ):
                entries[module_name] = obj()
    return entries


def get_entry(name):
    entries = catalog()
    try:
        return entries[name]
    except KeyError:
        raise InvalidParameterError("Unknown shape {!r}, expected one of {}".format(name, ", ".join(sorted(entries))))


def make_two_circles(centers, radii, l, d=2):
    return get_entry("two_circles").build(centers=centers, radii=radii, l=l, dim=d)


def make_halfspace_step(d, l):
    return get_entry("halfspace_step").build(dim=d, l=l)


def make_pyramid_perturbation(d, h, theta, l, vertex_offset=None, mu=None):
    return get_entry("pyramid_perturbation").build(dim=d, h=h, theta=theta, l=l, vertex_offset=vertex_offset, mu=mu)


def sample_to_grid(spec, N, sigma, seed):
    """
    Samples f on the N^d lattice and adds i.i.d. Gaussian noise of standard deviation
    sigma drawn from numpy's default generator seeded with `seed`.
    """
    if N < 2:
        raise InvalidParameterError("N must be at least 2, got {}".format(N))
    if sigma < 0:
        raise InvalidParameterError("sigma must be nonnegative, got {}".format(sigma))
    values = spec.value(cell_centers(spec.dim, N))
    if sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + sigma * rng.standard_normal(len(values))
    return ObservationGrid(spec.dim, N, values, noise_sigma=sigma, seed=seed)


def rasterize_jumpset(spec, m):
    """
    Sets every cell of the m-grid whose center is within half a cell diagonal of D_f,
    so every cell that D_f meets is set.
    """
    if m < 8:
        raise InvalidParameterError("Rasterization needs m >= 8, got {}".format(m))
    if spec.feature_size is not None and spec.feature_size <= 2.0 / m:
        raise InvalidGeometryError(
            "Feature size {} is not resolved by a grid of {} cells (needs > {})".format(spec.feature_size, m, 2.0 / m)
        )
    return jump_cells(spec, m)


def jump_cells(spec, m):
    """
    Like rasterize_jumpset, without the resolution guards.
    """
    distances = spec.exact_jump_distance(cell_centers(spec.dim, m))
    bits = distances <= math.sqrt(spec.dim) / (2 * m)
    return CubicalMask(spec.dim, m, bits)


def self_test(spec, m=128):
    """
    Checks that the regions cover the cube, that the declared jump floor holds
    across region boundaries, and that the declared Betti numbers match those of a
    fine rasterization. Returns a dictionary of check names to booleans.
    """
    from jumpsets.topology import betti_estimate, diagrams_of

    results = {}
    lattice = cell_centers(spec.dim, m)
    try:
        values = spec.value(lattice)
        results["covers"] = True
    except InvalidGeometryError:
        results["covers"] = False
        return results

    shape = (m,) * spec.dim
    labels = spec.region_index(lattice).reshape(shape)
    values = values.reshape(shape)
    # Adjacent lattice points in different regions straddle D_f.
    slack = 2 * spec.omega(1.0 / m)
    jump_ok = True
    for axis in range(spec.dim):
        a = [slice(None)] * spec.dim
        b = [slice(None)] * spec.dim
        a[axis] = slice(None, -1)
        b[axis] = slice(1, None)
        across = labels[tuple(a)] != labels[tuple(b)]
        gaps = np.abs(values[tuple(a)] - values[tuple(b)])[across]
        if len(gaps) and gaps.min() < spec.l - slack - 1e-12:
            jump_ok = False
    results["jump_floor"] = jump_ok

    mask = rasterize_jumpset(spec, m)
    estimates = betti_estimate(diagrams_of(mask), mask.cell_diagonal)
    observed = tuple(estimate.count for estimate in estimates)
    results["betti"] = observed == tuple(spec.betti_numbers())
    if not results["betti"]:
        logger.warning("{}: rasterized Betti numbers {} != declared {}".format(spec, observed, spec.betti_numbers()))
    return results
