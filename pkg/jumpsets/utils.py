# coding: utf-8
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

# Divergent sequences s_n for the unknown-parameter branches of the calibration rules.
S_N_RULES = {
    "log": lambda n: math.log(n),
    "loglog": lambda n: math.log(math.log(n)),
    "sqrtlog": lambda n: math.sqrt(math.log(n)),
}


class JumpsetsError(Exception):
    pass


class InvalidParameterError(JumpsetsError, ValueError):
    pass


class InvalidGeometryError(JumpsetsError, ValueError):
    pass


class EmptyCellError(JumpsetsError):
    pass


class EmptyMaskError(JumpsetsError):
    pass


class ResolutionMismatchError(JumpsetsError, ValueError):
    pass


def ambient_diameter(dim):
    return math.sqrt(dim)


def distance_sentinel(dim):
    """
    Stands in for an infinite distance: larger than any distance within [0,1]^d.
    """
    return math.sqrt(dim) + 1


def cell_centers(dim, resolution):
    """
    Returns the centers of all cells of the regular grid of `resolution` cells per
    axis, row-major, as an array of shape (resolution ** dim, dim).
    """
    axis = (np.arange(resolution) + 0.5) / resolution
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


class ObservationGrid:
    """
    Noisy observations X_i = f(x_i) + sigma * eps_i on the N^d lattice of [0,1]^d.

    Lattice point i sits at the center of the i-th cell of the regular N-grid, i.e.
    at (k + 1/2) / N along each axis, row-major. `noise_sigma` is None when the
    noise level is unknown.
    """

    def __init__(self, dim, side, values, noise_sigma=None, seed=None):
        if dim < 1 or side < 1:
            raise InvalidParameterError("Invalid lattice dim={} side={}".format(dim, side))
        values = np.array(values, dtype=float).ravel()
        if len(values) != side**dim:
            raise InvalidParameterError("Expected {} values, got {}".format(side**dim, len(values)))
        if noise_sigma is not None and noise_sigma < 0:
            raise InvalidParameterError("Negative noise level {}".format(noise_sigma))
        values.setflags(write=False)
        self.dim = dim
        self.side = side
        self.values = values
        self.noise_sigma = noise_sigma
        self.seed = seed

    @property
    def n(self):
        return self.side**self.dim

    @property
    def sigma_known(self):
        return self.noise_sigma is not None

    def coordinates(self, index):
        """
        Returns the lattice point x_i of flat index i.
        """
        multi = np.unravel_index(index, (self.side,) * self.dim)
        return (np.array(multi, dtype=float) + 0.5) / self.side

    def lattice(self):
        return cell_centers(self.dim, self.side)

    def as_array(self):
        return self.values.reshape((self.side,) * self.dim)

    def header(self):
        return {"d": self.dim, "N": self.side, "sigma": self.noise_sigma, "seed": self.seed}


class CubicalMask:
    """
    The closed union of the cells of the regular m-grid of [0,1]^d whose bit is set.
    """

    def __init__(self, dim, resolution, bits):
        bits = np.array(bits, dtype=bool).reshape((resolution,) * dim)
        bits.setflags(write=False)
        self.dim = dim
        self.resolution = resolution
        self.cell_size = 1.0 / resolution
        self.bits = bits
        assert abs(self.cell_size * resolution - 1) <= 1e-12

    @classmethod
    def empty(cls, dim, resolution):
        return cls(dim, resolution, np.zeros((resolution,) * dim, dtype=bool))

    @classmethod
    def full(cls, dim, resolution):
        return cls(dim, resolution, np.ones((resolution,) * dim, dtype=bool))

    @property
    def cell_diagonal(self):
        return math.sqrt(self.dim) * self.cell_size

    @property
    def count(self):
        return int(self.bits.sum())

    def is_empty(self):
        return not self.bits.any()

    def centers(self):
        """
        Returns the centers of the set cells, shape (count, dim).
        """
        # Same arithmetic as cell_centers, so shared centers compare equal.
        return (np.argwhere(self.bits) + 0.5) / self.resolution

    def subdivide(self, factor):
        """
        Returns the same set on the grid with `factor` times more cells per axis.
        """
        bits = self.bits
        for axis in range(self.dim):
            bits = np.repeat(bits, factor, axis=axis)
        return CubicalMask(self.dim, self.resolution * factor, bits)

    def issubset(self, other):
        self._check_compatible(other)
        return not (self.bits & ~other.bits).any()

    def union(self, other):
        self._check_compatible(other)
        return CubicalMask(self.dim, self.resolution, self.bits | other.bits)

    def _check_compatible(self, other):
        if self.dim != other.dim or self.resolution != other.resolution:
            raise ResolutionMismatchError(
                "Masks differ: d={} m={} vs d={} m={}".format(self.dim, self.resolution, other.dim, other.resolution)
            )

    def __eq__(self, other):
        if not isinstance(other, CubicalMask):
            return NotImplemented
        return (
            self.dim == other.dim and self.resolution == other.resolution and np.array_equal(self.bits, other.bits)
        )

    def __repr__(self):
        return "CubicalMask(d={}, m={}, count={})".format(self.dim, self.resolution, self.count)


class CalibrationParams:
    """
    Bandwidth h, neighborhood radius r, regularization offset kappa and detection
    threshold used by one estimation run.
    """

    def __init__(self, h, r, kappa, threshold, sigma_known=True, mu_known=True, s_n_rule="log"):
        if not 0 < h <= 0.5:
            raise InvalidParameterError("h must lie in (0, 1/2], got {}".format(h))
        if r < 0:
            raise InvalidParameterError("r must be nonnegative, got {}".format(r))
        if kappa < 0:
            raise InvalidParameterError("kappa must be nonnegative, got {}".format(kappa))
        if threshold <= 0:
            raise InvalidParameterError("threshold must be positive, got {}".format(threshold))
        if s_n_rule not in S_N_RULES:
            raise InvalidParameterError("Unknown s_n rule {}".format(s_n_rule))
        self.h = float(h)
        self.r = float(r)
        self.kappa = float(kappa)
        self.threshold = float(threshold)
        self.sigma_known = sigma_known
        self.mu_known = mu_known
        self.s_n_rule = s_n_rule

    def as_dict(self):
        return {
            "h": self.h,
            "r": self.r,
            "kappa": self.kappa,
            "threshold": self.threshold,
            "sigma_known": self.sigma_known,
            "mu_known": self.mu_known,
            "s_n_rule": self.s_n_rule,
        }

    def __repr__(self):
        return "CalibrationParams(h={:.6g}, r={:.6g}, kappa={:.6g}, threshold={:.6g})".format(
            self.h, self.r, self.kappa, self.threshold
        )


class PersistenceDiagram:
    """
    Multiset of (birth, death) pairs in homology degree `degree`. Essential classes
    have death = inf.
    """

    def __init__(self, degree, points=()):
        points = np.array(points, dtype=float).reshape(-1, 2)
        if len(points):
            if (points[:, 0] > points[:, 1]).any():
                raise InvalidParameterError("Diagram point with birth > death")
            if (points[:, 0] < 0).any():
                raise InvalidParameterError("Diagram point with negative birth")
        # Canonical order makes multiset comparison and CSV output stable.
        points = points[np.lexsort((points[:, 1], points[:, 0]))] if len(points) else points
        points.setflags(write=False)
        self.degree = degree
        self.points = points

    def __len__(self):
        return len(self.points)

    def finite(self):
        return self.points[np.isfinite(self.points[:, 1])]

    def essential(self):
        return self.points[~np.isfinite(self.points[:, 1])]

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.points, other.points)

    def __repr__(self):
        return "PersistenceDiagram(degree={}, points={})".format(self.degree, len(self))


def s_n(rule, n):
    try:
        return S_N_RULES[rule](n)
    except KeyError:
        raise InvalidParameterError("Unknown s_n rule {}".format(rule))


def calibrate_h(n, d, sigma, l, s_n_rule="log"):
    """
    Histogram bandwidth: 2 (512 sigma^2 / l^2)^(1/d) (log(n^2) / n)^(1/d) when sigma
    is known, s_n (log(n^2) / n)^(1/d) when sigma is None. Clamped to 1/2.
    """
    if n < 2:
        raise InvalidParameterError("Need at least 2 samples, got n={}".format(n))
    if l <= 0:
        raise InvalidParameterError("Jump floor l must be positive, got {}".format(l))
    if d < 1:
        raise InvalidParameterError("Dimension must be positive, got {}".format(d))
    rate = (2 * math.log(n) / n) ** (1.0 / d)
    if sigma is None:
        h = s_n(s_n_rule, n) * rate
    elif sigma <= 0:
        raise InvalidParameterError("sigma={} collapses the bandwidth; pass a floor value or an explicit h".format(sigma))
    else:
        h = 2 * (512 * sigma**2 / l**2) ** (1.0 / d) * rate
    if h > 0.5:
        logger.warning("Clamping h={:.6g} to 1/2 (n={} is small for these constants)".format(h, n))
        h = 0.5
    side = round(n ** (1.0 / d))
    if h < 1.0 / side:
        logger.warning("h={:.6g} is below the lattice spacing 1/{}: some cells will be empty".format(h, side))
    return h


def calibrate_r(h, d, mu, s_n_rule="log", n=None):
    """
    Neighborhood radius: (1 + sqrt(d)) h / mu when mu is known, s_n h when mu is None.
    """
    if h <= 0:
        raise InvalidParameterError("h must be positive, got {}".format(h))
    if mu is None:
        if n is None:
            raise InvalidParameterError("Unknown mu needs the sample count n for s_n")
        return s_n(s_n_rule, n) * h
    if not 0 < mu <= 1:
        raise InvalidParameterError("mu must lie in (0, 1], got {}".format(mu))
    return (1 + math.sqrt(d)) * h / mu


def calibrate_kappa(r, mu, s_n_rule="log", n=None):
    """
    Offset of the image-homology regularization: 2 r / mu^2 when mu is known, s_n r
    when mu is None.
    """
    if r <= 0:
        raise InvalidParameterError("r must be positive, got {}".format(r))
    if mu is None:
        if n is None:
            raise InvalidParameterError("Unknown mu needs the sample count n for s_n")
        return s_n(s_n_rule, n) * r
    if not 0 < mu <= 1:
        raise InvalidParameterError("mu must lie in (0, 1], got {}".format(mu))
    return 2 * r / mu**2


def regime_conditions(params, spec):
    """
    Reports (does not enforce) the large-sample conditions under which the
    calibrated estimator is guaranteed to work for `spec`.
    """
    r = params.r
    return {
        "jump_dominates_modulus": bool(spec.l > 16 * spec.omega(3 * r)),
        "radius_below_reach": bool(3 * r < spec.reach_mu),
        "radius_covers_cells": bool(r >= (1 + math.sqrt(spec.dim)) * params.h / spec.mu - 1e-12),
    }
