# coding: utf-8
import logging
import math

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from jumpsets.synthgen import jump_cells
from jumpsets.utils import (
    CubicalMask,
    EmptyMaskError,
    InvalidParameterError,
    ResolutionMismatchError,
    distance_sentinel,
)

logger = logging.getLogger(__name__)


class DistanceField:
    """
    Distance from each cell center to the nearest set cell center. Cells of an empty
    mask hold the sentinel sqrt(d) + 1.
    """

    def __init__(self, dim, resolution, values):
        self.dim = dim
        self.resolution = resolution
        self.cell_size = 1.0 / resolution
        self.values = np.asarray(values, dtype=float).reshape((resolution,) * dim)

    def sample(self, points):
        """
        Returns the field at the cells containing `points`.
        """
        points = np.atleast_2d(points)
        index = np.clip(np.floor(points * self.resolution).astype(int), 0, self.resolution - 1)
        return self.values[tuple(index.T)]


class HausdorffReport:
    def __init__(self, value, directed, slack=0.0):
        self.value = float(value)
        self.directed = tuple(float(v) for v in directed)
        self.slack = float(slack)

    def __float__(self):
        return self.value

    def as_dict(self):
        return {"hausdorff": self.value, "directed": list(self.directed), "slack": self.slack}


def distance_transform(mask):
    if mask.is_empty():
        values = np.full(mask.bits.shape, distance_sentinel(mask.dim))
    else:
        values = ndimage.distance_transform_edt(~mask.bits, sampling=mask.cell_size)
    return DistanceField(mask.dim, mask.resolution, values)


def offset(mask, beta):
    """
    Returns the cells whose center lies within beta of a set cell center.
    """
    if beta < 0:
        raise InvalidParameterError("beta must be nonnegative, got {}".format(beta))
    if mask.is_empty():
        return mask
    field = distance_transform(mask)
    # The tolerance absorbs rounding when beta is a multiple of the cell size.
    return CubicalMask(mask.dim, mask.resolution, field.values <= beta + 1e-12)


def common_resolution(a, b):
    """
    Brings two masks to the finer of their resolutions by subdividing the coarser.
    """
    if a.dim != b.dim:
        raise ResolutionMismatchError("Masks live in d={} and d={}".format(a.dim, b.dim))
    if a.resolution == b.resolution:
        return a, b
    fine, coarse = max(a.resolution, b.resolution), min(a.resolution, b.resolution)
    if fine % coarse:
        raise ResolutionMismatchError("Resolutions {} and {} do not divide evenly".format(a.resolution, b.resolution))
    factor = fine // coarse
    if a.resolution == coarse:
        return a.subdivide(factor), b
    return a, b.subdivide(factor)


def hausdorff_report(a, b):
    if a.is_empty() or b.is_empty():
        raise EmptyMaskError("Hausdorff distance is undefined for an empty mask")
    a, b = common_resolution(a, b)
    a_to_b = distance_transform(b).values[a.bits].max()
    b_to_a = distance_transform(a).values[b.bits].max()
    return HausdorffReport(max(a_to_b, b_to_a), (a_to_b, b_to_a))


def hausdorff(a, b):
    """
    Hausdorff distance between the sets of set-cell centers of two masks.
    """
    return hausdorff_report(a, b).value


def hausdorff_to_truth(mask, spec):
    """
    Hausdorff distance between a mask's set-cell centers and the exact jump set.

    The mask-to-D_f term is exact. The D_f-to-mask term is taken over a dense sample
    of D_f (cell centers of a rasterization at four times the mask's resolution),
    which is within `slack` of D_f.
    """
    if mask.is_empty():
        raise EmptyMaskError("Hausdorff distance is undefined for an empty mask")
    centers = mask.centers()
    mask_to_truth = spec.exact_jump_distance(centers).max()
    fine = 4 * mask.resolution
    sample = jump_cells(spec, fine)
    if sample.is_empty():
        raise EmptyMaskError("{} has no jumps to compare against".format(spec.__class__.__name__))
    truth_to_mask = cKDTree(centers).query(sample.centers())[0].max()
    slack = math.sqrt(mask.dim) / (4 * mask.resolution)
    report = HausdorffReport(max(mask_to_truth, truth_to_mask), (mask_to_truth, truth_to_mask), slack)
    logger.debug("d_H(mask, D_f) = {:.5g} +/- {:.2g}".format(report.value, slack))
    return report
