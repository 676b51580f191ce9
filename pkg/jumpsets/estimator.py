# coding: utf-8
import itertools
import logging
import math

import numpy as np

from jumpsets.utils import (
    CalibrationParams,
    CubicalMask,
    EmptyCellError,
    InvalidParameterError,
    calibrate_h,
    calibrate_kappa,
    calibrate_r,
    cell_centers,
)

logger = logging.getLogger(__name__)


class HistogramField:
    """
    Piecewise-constant estimate of f: the mean of the observations in each closed
    cell of the regular grid of `cells` cells per axis.
    """

    def __init__(self, dim, cells, values, counts):
        self.dim = dim
        self.cells = cells
        self.cell_size = 1.0 / cells
        self.values = np.asarray(values, dtype=float).reshape((cells,) * dim)
        self.counts = np.asarray(counts).reshape((cells,) * dim)

    def value_at(self, points):
        points = np.atleast_2d(points)
        index = np.clip(np.ceil(points * self.cells).astype(int) - 1, 0, self.cells - 1)
        return self.values[tuple(index.T)]


def lattice_to_cells(side, cells):
    """
    Maps each lattice coordinate (k + 1/2) / side to the index of the closed cell of
    width 1 / cells containing it. A coordinate on a shared face goes to the lower
    cell. Integer arithmetic keeps ties exact.
    """
    k = np.arange(side)
    index = -((-(2 * k + 1) * cells) // (2 * side)) - 1
    return np.clip(index, 0, cells - 1)


def build_histogram(obs, h):
    if not 0 < h <= 1:
        raise InvalidParameterError("h must lie in (0, 1], got {}".format(h))
    cells = max(1, int(round(1.0 / h)))
    axis = lattice_to_cells(obs.side, cells)
    grids = np.meshgrid(*([axis] * obs.dim), indexing="ij")
    flat = np.ravel_multi_index(tuple(g.ravel() for g in grids), (cells,) * obs.dim)
    total = cells**obs.dim
    counts = np.bincount(flat, minlength=total)
    if (counts == 0).any():
        raise EmptyCellError(
            "{} of {} cells hold no lattice point (h={:.6g}, N={})".format(int((counts == 0).sum()), total, h, obs.side)
        )
    sums = np.bincount(flat, weights=obs.values, minlength=total)
    return HistogramField(obs.dim, cells, sums / counts, counts)


def neighbor_offsets(dim, cell_size, r, cells):
    """
    Returns the index offsets of the cells whose closed box lies within Euclidean
    distance r of a cell's closed box.
    """
    reach = min(int(math.floor(r / cell_size)) + 1, cells - 1)
    limit = r * r * (1 + 1e-9)
    offsets = []
    for delta in itertools.product(range(-reach, reach + 1), repeat=dim):
        gap = sum(max(abs(k) - 1, 0) ** 2 for k in delta) * cell_size * cell_size
        if gap <= limit:
            offsets.append(delta)
    return offsets, reach


def local_range_field(field, r):
    """
    Returns, for every cell H, the max minus the min of the field over the cells that
    meet the closed r-offset of H.
    """
    if r < 0:
        raise InvalidParameterError("r must be nonnegative, got {}".format(r))
    cells = field.cells
    offsets, reach = neighbor_offsets(field.dim, field.cell_size, r, cells)
    padded = np.pad(field.values, reach, mode="constant", constant_values=np.nan)
    high = np.full(field.values.shape, -np.inf)
    low = np.full(field.values.shape, np.inf)
    for delta in offsets:
        window = padded[tuple(slice(reach + k, reach + k + cells) for k in delta)]
        # fmax/fmin skip the NaN padding outside the cube.
        np.fmax(high, window, out=high)
        np.fmin(low, window, out=low)
    return high - low


def local_range(field, index, r):
    if np.ndim(index) == 0:
        index = np.unravel_index(index, field.values.shape)
    return float(local_range_field(field, r)[tuple(index)])


def estimate_jumpset(field, r, l):
    """
    Keeps the cells whose local range reaches l/2.
    """
    if l <= 0:
        raise InvalidParameterError("Jump floor l must be positive, got {}".format(l))
    bits = local_range_field(field, r) >= l / 2.0
    return CubicalMask(field.dim, field.cells, bits)


def uniform_error_event(field, spec):
    """
    Returns the sup-norm of the histogram error over the cells that do not meet D_f,
    and whether l exceeds eight times it, in which case the thresholding step cannot
    misfire away from D_f.
    """
    centers = cell_centers(field.dim, field.cells)
    half_diagonal = math.sqrt(field.dim) / (2 * field.cells)
    clean = spec.exact_jump_distance(centers) > half_diagonal
    if not clean.any():
        return 0.0, True
    errors = np.abs(field.values.ravel()[clean] - spec.value(centers[clean])) + spec.omega(half_diagonal)
    sup = float(errors.max())
    return sup, bool(spec.l > 8 * sup)


def estimate_pipeline(
    obs, l=None, mu=None, sigma=None, sigma_known=True, h=None, r=None, kappa=None, s_n_rule="log", spec=None, params=None
):
    """
    Calibrates (h, r, kappa) unless given, builds the histogram and thresholds it.

    `sigma` defaults to the grid's recorded noise level; with `sigma_known=False`
    the unknown-sigma rule is used. `mu=None` selects the unknown-mu rules. If `spec`
    is given, `l` defaults to its jump floor and the uniform error event is logged.

    Returns the estimated mask and the parameters used.
    """
    if params is None:
        if l is None:
            if spec is None:
                raise InvalidParameterError("Need a jump floor l or a shape")
            l = spec.l
        if sigma is None:
            sigma = obs.noise_sigma
        if sigma is None:
            sigma_known = False
        n = obs.n
        if h is None:
            h = calibrate_h(n, obs.dim, sigma if sigma_known else None, l, s_n_rule)
        if r is None:
            r = calibrate_r(h, obs.dim, mu, s_n_rule, n)
        if kappa is None:
            kappa = calibrate_kappa(r, mu, s_n_rule, n) if r > 0 else 0.0
        params = CalibrationParams(
            h, r, kappa, l / 2.0, sigma_known=sigma_known, mu_known=mu is not None, s_n_rule=s_n_rule
        )

    field = build_histogram(obs, params.h)
    mask = estimate_jumpset(field, params.r, 2 * params.threshold)
    logger.info(
        "N={} h={:.5g} ({} cells) r={:.5g} kappa={:.5g}: {} of {} cells flagged".format(
            obs.side, params.h, field.cells, params.r, params.kappa, mask.count, field.cells**obs.dim
        )
    )
    if spec is not None:
        sup, holds = uniform_error_event(field, spec)
        logger.debug("Histogram error away from D_f: {:.5g} (l > 8x: {})".format(sup, holds))
    return mask, params
