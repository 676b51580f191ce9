# coding: utf-8
import logging
import math

import numpy as np
from scipy.cluster.hierarchy import DisjointSet
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from jumpsets.geometry import common_resolution, distance_transform, hausdorff
from jumpsets.utils import EmptyMaskError, InvalidParameterError, PersistenceDiagram

logger = logging.getLogger(__name__)


class CubicalFiltration:
    """
    The offset filtration of a mask on the cubical complex of its grid.

    Cells are addressed in a grid of 2m + 1 points per axis: a coordinate is odd
    along the axes the cell extends in, so a cell's dimension is its number of odd
    coordinates. A top cell's value is the distance from its center to the mask; a
    lower-dimensional cell takes the minimum over the top cells containing it, which
    makes every sublevel set the union of closed cells of an offset.

    Cells are totally ordered by (value, dimension, flat index); `order` lists flat
    indices in that order and `rank` inverts it.
    """

    def __init__(self, dim, resolution, values):
        self.dim = dim
        self.resolution = resolution
        self.shape = (2 * resolution + 1,) * dim
        self.values = np.asarray(values, dtype=float).reshape(self.shape)
        parity = np.indices(self.shape) % 2
        self.dims = parity.sum(axis=0)
        flat_values = self.values.ravel()
        flat_dims = self.dims.ravel()
        self.order = np.lexsort((np.arange(flat_values.size), flat_dims, flat_values))
        self.rank = np.empty_like(self.order)
        self.rank[self.order] = np.arange(self.order.size)
        self.sorted_values = flat_values[self.order]
        self.sorted_dims = flat_dims[self.order]
        self.strides = [int(np.prod(self.shape[axis + 1 :])) for axis in range(dim)]

    def __len__(self):
        return self.order.size

    def cells(self, dimension):
        """
        Returns the ranks of the cells of a dimension, ascending.
        """
        return np.flatnonzero(self.sorted_dims == dimension)

    def boundary(self, ranks):
        """
        Returns the ranks of the facets of each cell given by rank.
        """
        flat = self.order[ranks]
        coords = np.array(np.unravel_index(flat, self.shape)).T
        faces = []
        for index, coord in zip(flat, coords):
            facets = []
            for axis in np.flatnonzero(coord % 2):
                facets.append(index - self.strides[axis])
                facets.append(index + self.strides[axis])
            faces.append(self.rank[facets].tolist())
        return faces


class BettiEstimate:
    def __init__(self, degree, count, kappa, ties=0):
        self.degree = degree
        self.count = int(count)
        self.kappa = float(kappa)
        # Counted classes that die exactly at kappa.
        self.ties = int(ties)

    def as_dict(self):
        return {"degree": self.degree, "count": self.count, "kappa": self.kappa, "ties": self.ties}

    def __repr__(self):
        return "BettiEstimate(degree={}, count={}, kappa={:.5g})".format(self.degree, self.count, self.kappa)


class StabilityReport:
    def __init__(self, epsilon, cell_diagonal, bottlenecks):
        self.epsilon = float(epsilon)
        self.cell_diagonal = float(cell_diagonal)
        self.bound = self.epsilon + self.cell_diagonal
        self.bottlenecks = [float(b) for b in bottlenecks]
        self.margins = [self.bound - b for b in self.bottlenecks]
        self.holds = all(margin >= -1e-9 for margin in self.margins)

    def as_dict(self):
        return {
            "epsilon": self.epsilon,
            "cell_diagonal": self.cell_diagonal,
            "bound": self.bound,
            "bottleneck": self.bottlenecks,
            "margins": self.margins,
            "holds": self.holds,
        }


def build_filtration(mask):
    if mask.is_empty():
        raise EmptyMaskError("Cannot filter an empty mask")
    m = mask.resolution
    values = np.full((2 * m + 1,) * mask.dim, np.inf)
    values[(slice(1, None, 2),) * mask.dim] = distance_transform(mask).values
    # Sweep each axis: cells with an even coordinate along it take the smaller value
    # of their two neighbors along it, which are final by then.
    for axis in range(mask.dim):
        view = np.moveaxis(values, axis, 0)
        odd = view[1::2]
        view[2:-1:2] = np.minimum(odd[:-1], odd[1:])
        view[0] = odd[0]
        view[-1] = odd[-1]
    return CubicalFiltration(mask.dim, m, values)


def _reduce(filt, dimension, cleared):
    """
    Reduces the boundary matrix of the cells of `dimension` over Z/2, skipping the
    columns in `cleared`, which are known to reduce to zero.

    Returns the (low, column) pairs and the ranks of the columns that reduced to zero.
    """
    columns = filt.cells(dimension)
    pivots = {}
    pairs = []
    zero = set()
    skipped = [j for j in columns if j in cleared]
    zero.update(skipped)
    todo = [j for j in columns if j not in cleared]
    for j, faces in zip(todo, filt.boundary(np.array(todo, dtype=int))):
        column = set(faces)
        low = None
        while column:
            low = max(column)
            reduced = pivots.get(low)
            if reduced is None:
                break
            column.symmetric_difference_update(reduced)
        if column:
            pivots[low] = column
            pairs.append((low, j))
        else:
            zero.add(j)
    return pairs, zero


def _connect(filt):
    """
    Degree-0 persistence by union-find over vertices and edges in filtration order.
    The younger of two merging components dies.

    Returns the (birth, death) rank pairs and the ranks of the edges closing cycles.
    """
    vertices = filt.cells(0)
    edges = filt.cells(1)
    components = DisjointSet()
    oldest = {}
    pairs = []
    cycles = set()
    for j in vertices:
        components.add(j)
        oldest[j] = j
    for j, (u, v) in zip(edges, filt.boundary(edges)):
        root_u, root_v = components[u], components[v]
        if root_u == root_v:
            cycles.add(j)
            continue
        elder, younger = sorted((oldest[root_u], oldest[root_v]))
        pairs.append((younger, j))
        components.merge(root_u, root_v)
        oldest[components[root_u]] = elder
    return pairs, cycles


def persistence(filt, max_degree=None):
    """
    Returns the persistence diagrams of degrees 0..max_degree (default d - 1).

    Degree 0 comes from union-find. Higher degrees come from a Z/2 reduction of the
    boundary matrices, from the top dimension down, where a cell already paired as a
    pivot is cleared from the next reduction. Zero-length pairs are dropped.
    """
    d = filt.dim
    if max_degree is None:
        max_degree = d - 1
    if not 0 <= max_degree <= d:
        raise InvalidParameterError("max_degree must lie in [0, {}], got {}".format(d, max_degree))
    top = min(max_degree + 1, d)
    pairs = {}
    positive = {}
    killed = {}
    cleared = set()
    for dimension in range(top, 1, -1):
        found, zero = _reduce(filt, dimension, cleared)
        pairs[dimension - 1] = found
        positive[dimension] = zero
        killed[dimension - 1] = cleared = {low for low, _ in found}
    found, cycles = _connect(filt)
    pairs[0] = found
    killed[0] = {birth for birth, _ in found}
    positive[0] = set(filt.cells(0).tolist())
    positive[1] = cycles

    values = filt.sorted_values
    diagrams = []
    for degree in range(max_degree + 1):
        points = [
            (values[birth], values[death]) for birth, death in pairs.get(degree, []) if values[death] > values[birth]
        ]
        essential = positive.get(degree, set()) - killed.get(degree, set())
        points.extend((values[birth], math.inf) for birth in sorted(essential))
        diagrams.append(PersistenceDiagram(degree, points))
    return diagrams


def diagrams_of(mask, max_degree=None):
    return persistence(build_filtration(mask), max_degree)


def betti_estimate(diagrams, kappa):
    """
    Counts, per degree, the classes born at 0 that are still alive at kappa: the rank
    of the map induced in homology by the inclusion of the mask into its kappa-offset.
    A class dying exactly at kappa counts.
    """
    if kappa < 0:
        raise InvalidParameterError("kappa must be nonnegative, got {}".format(kappa))
    estimates = []
    for diagram in diagrams:
        points = diagram.points
        born = points[:, 0] <= 0
        count = (born & (points[:, 1] >= kappa)).sum()
        ties = (born & (points[:, 1] == kappa)).sum()
        if ties:
            logger.debug("{} degree-{} classes die exactly at kappa={:.5g}".format(ties, diagram.degree, kappa))
        estimates.append(BettiEstimate(diagram.degree, count, kappa, ties))
    return estimates


def _feasible(cost, to_diagonal_1, to_diagonal_2, epsilon):
    """
    Whether a perfect matching of cost at most epsilon exists between the points of
    two diagrams, each point also allowed to go to its own copy on the diagonal.
    """
    k1, k2 = cost.shape
    n = k1 + k2
    if not n:
        return True
    rows, cols = np.nonzero(cost <= epsilon)
    rows, cols = [rows], [cols]
    i = np.flatnonzero(to_diagonal_1 <= epsilon)
    rows.append(i)
    cols.append(k2 + i)
    j = np.flatnonzero(to_diagonal_2 <= epsilon)
    rows.append(k1 + j)
    cols.append(j)
    # Diagonal copies match each other at no cost.
    jj, ii = np.meshgrid(np.arange(k2), np.arange(k1), indexing="ij")
    rows.append(k1 + jj.ravel())
    cols.append(k2 + ii.ravel())
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    matching = maximum_bipartite_matching(graph, perm_type="column")
    return bool((matching >= 0).sum() == n)


def bottleneck(d1, d2):
    """
    Exact bottleneck distance. The answer is one of finitely many candidate costs, so
    it is found by binary search over them with a bipartite matching test.

    Essential classes are matched to each other by sorted birth; diagrams with
    different numbers of them are infinitely far apart.
    """
    if d1.degree != d2.degree:
        raise InvalidParameterError("Diagrams of degrees {} and {}".format(d1.degree, d2.degree))
    e1, e2 = np.sort(d1.essential()[:, 0]), np.sort(d2.essential()[:, 0])
    if len(e1) != len(e2):
        logger.warning(
            "Degree {}: {} vs {} essential classes, bottleneck distance is infinite".format(d1.degree, len(e1), len(e2))
        )
        return math.inf
    essential_cost = float(np.abs(e1 - e2).max()) if len(e1) else 0.0

    f1, f2 = d1.finite(), d2.finite()
    cost = np.maximum(
        np.abs(f1[:, None, 0] - f2[None, :, 0]),
        np.abs(f1[:, None, 1] - f2[None, :, 1]),
    )
    to_diagonal_1 = (f1[:, 1] - f1[:, 0]) / 2
    to_diagonal_2 = (f2[:, 1] - f2[:, 0]) / 2
    candidates = np.unique(np.concatenate([cost.ravel(), to_diagonal_1, to_diagonal_2, [0.0]]))
    low, high = 0, len(candidates) - 1
    while low < high:
        middle = (low + high) // 2
        if _feasible(cost, to_diagonal_1, to_diagonal_2, candidates[middle]):
            high = middle
        else:
            low = middle + 1
    return max(essential_cost, float(candidates[low]))


def stability_check(a, b, max_degree=None):
    """
    Compares the bottleneck distance between the diagrams of two masks with their
    Hausdorff distance plus one cell diagonal, degree by degree.
    """
    epsilon = hausdorff(a, b)
    a, b = common_resolution(a, b)
    if max_degree is None:
        max_degree = a.dim - 1
    bottlenecks = [bottleneck(p, q) for p, q in zip(diagrams_of(a, max_degree), diagrams_of(b, max_degree))]
    report = StabilityReport(epsilon, a.cell_diagonal, bottlenecks)
    if not report.holds:
        logger.warning("Stability bound violated: {}".format(report.as_dict()))
    return report
