# coding: utf-8
"""
Slow, independent reference implementations that the fast paths are checked against.
"""
import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import ndimage
from scipy.spatial.distance import cdist

from jumpsets.geometry import common_resolution
from jumpsets.utils import PersistenceDiagram, cell_centers, distance_sentinel


def brute_distance_transform(mask):
    """
    Scans every pair of cells: O(m^(2d)).
    """
    if mask.is_empty():
        return np.full(mask.bits.shape, distance_sentinel(mask.dim))
    distances = cdist(cell_centers(mask.dim, mask.resolution), mask.centers())
    return distances.min(axis=1).reshape(mask.bits.shape)


def brute_hausdorff(a, b):
    a, b = common_resolution(a, b)
    distances = cdist(a.centers(), b.centers())
    return max(distances.min(axis=1).max(), distances.min(axis=0).max())


def brute_components(mask):
    """
    Counts connected components of the closed cells, where cells sharing a corner
    touch.
    """
    return ndimage.label(mask.bits, structure=np.ones((3,) * mask.dim))[1]


def block_average(obs, h):
    """
    Averages the observations of each closed cell one lattice point at a time, with
    exact rational coordinates.
    """
    cells = max(1, int(round(1 / h)))
    sums = {}
    counts = {}
    for flat, value in enumerate(obs.values):
        multi = np.unravel_index(flat, (obs.side,) * obs.dim)
        key = []
        for k in multi:
            x = Fraction(2 * int(k) + 1, 2 * obs.side)
            key.append(next(c for c in range(cells) if x <= Fraction(c + 1, cells)))
        key = tuple(key)
        sums[key] = sums.get(key, 0.0) + value
        counts[key] = counts.get(key, 0) + 1
    out = np.full((cells,) * obs.dim, np.nan)
    for key, total in sums.items():
        out[key] = total / counts[key]
    return out


def brute_local_range(field, index, r):
    """
    Enumerates every cell and keeps those whose closed box is within r of the box of
    `index`.
    """
    index = np.array(index)
    kept = []
    for other in itertools.product(range(field.cells), repeat=field.dim):
        gaps = np.maximum(np.abs(np.array(other) - index) - 1, 0) * field.cell_size
        if math.sqrt((gaps**2).sum()) <= r * (1 + 1e-9):
            kept.append(field.values[other])
    return max(kept) - min(kept)


def naive_persistence(filt, max_degree=None):
    """
    Standard left-to-right reduction of the full boundary matrix, all dimensions, no
    clearing and no union-find.
    """
    if max_degree is None:
        max_degree = filt.dim - 1
    ranks = np.arange(len(filt))
    boundaries = filt.boundary(ranks)
    pivots = {}
    pairs = []
    zero = []
    for j in ranks:
        column = set(boundaries[j])
        while column and max(column) in pivots:
            column ^= pivots[max(column)]
        if column:
            pivots[max(column)] = column
            pairs.append((max(column), j))
        else:
            zero.append(j)

    values = filt.sorted_values
    dims = filt.sorted_dims
    diagrams = []
    for degree in range(max_degree + 1):
        points = [
            (values[b], values[e]) for b, e in pairs if dims[b] == degree and values[e] > values[b]
        ]
        points.extend((values[j], math.inf) for j in zero if dims[j] == degree and j not in pivots)
        diagrams.append(PersistenceDiagram(degree, points))
    return diagrams


def brute_bottleneck(d1, d2):
    """
    Tries every partial injection of finite points; meant for a handful of points.
    """
    e1, e2 = np.sort(d1.essential()[:, 0]), np.sort(d2.essential()[:, 0])
    if len(e1) != len(e2):
        return math.inf
    essential_cost = float(np.abs(e1 - e2).max()) if len(e1) else 0.0
    a = [tuple(p) for p in d1.finite()]
    b = [tuple(q) for q in d2.finite()]

    def diagonal(p):
        return (p[1] - p[0]) / 2

    def search(i, used):
        if i == len(a):
            return max([diagonal(q) for k, q in enumerate(b) if k not in used] + [0.0])
        p = a[i]
        best = max(diagonal(p), search(i + 1, used))
        for k, q in enumerate(b):
            if k not in used:
                cost = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
                best = min(best, max(cost, search(i + 1, used | {k})))
        return best

    return max(essential_cost, search(0, frozenset()))
