# coding: utf-8
import logging
import math
import os
import time

import agate
import numpy as np
from joblib import Parallel, delayed

from jumpsets import oracles, settings
from jumpsets.estimator import build_histogram, estimate_pipeline, local_range
from jumpsets.formats import finite_or_none, read_json, write_json
from jumpsets.geometry import distance_transform, hausdorff, hausdorff_to_truth, offset
from jumpsets.synthgen import (
    get_entry,
    jump_cells,
    make_halfspace_step,
    make_pyramid_perturbation,
    rasterize_jumpset,
    sample_to_grid,
)
from jumpsets.topology import betti_estimate, bottleneck, build_filtration, diagrams_of, persistence, stability_check
from jumpsets.utils import (
    S_N_RULES,
    CubicalMask,
    EmptyCellError,
    EmptyMaskError,
    InvalidGeometryError,
    InvalidParameterError,
    ObservationGrid,
    PersistenceDiagram,
)

logger = logging.getLogger(__name__)

CHECKS = ("hausdorff", "sandwich", "betti", "bottleneck")
CONFIG_KEYS = (
    "shape",
    "shape_params",
    "l",
    "n_values",
    "sigma",
    "calibration_sigma",
    "trials",
    "seed",
    "mu_mode",
    "sigma_mode",
    "s_n_rule",
    "output_dir",
    "checks",
    "jobs",
    "record_timing",
    "frequency_target",
    "slope_tolerance",
)


class ExperimentConfig:
    # Signal flags
    """
    The catalog name of the shape, like "two_circles".
    """
    shape = "two_circles"
    """
    Overrides of the shape's default parameters.
    """
    shape_params = {}
    """
    The jump floor used for calibration and thresholding. Defaults to the shape's.
    """
    l = None

    # Sampling flags
    """
    Lattice sides N, strictly increasing.
    """
    n_values = (64, 128, 256, 512)
    """
    The noise level of the observations.
    """
    sigma = 0.25
    """
    The noise level given to the bandwidth rule, if not `sigma`. Required when
    sigma is 0, since the rule degenerates.
    """
    calibration_sigma = None
    """
    Trials per N.
    """
    trials = 10
    """
    Base seed. Trial t uses the seed `seed ^ t`.
    """
    seed = 0

    # Calibration flags
    """
    Whether mu is given to the calibration rules ("known") or not ("unknown").
    """
    mu_mode = "known"
    """
    Whether sigma is given to the calibration rules ("known") or not ("unknown").
    """
    sigma_mode = "known"
    """
    The divergent sequence s_n used by the unknown-parameter rules.
    """
    s_n_rule = "log"

    # Output flags
    """
    Where tables and reports are written. Defaults to `settings.OUTPUT_DIR`.
    """
    output_dir = None
    """
    Which checks to run, among hausdorff, sandwich, betti and bottleneck.
    """
    checks = {check: True for check in CHECKS}
    """
    Worker processes for trials.
    """
    jobs = 1
    """
    Whether to add wall times to the trial table, which makes it differ between runs.
    """
    record_timing = False
    """
    The frequency that consistency checks must reach.
    """
    frequency_target = 0.9
    """
    The accepted distance between the fitted rate and 1/d.
    """
    slope_tolerance = 0.15

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            if key not in CONFIG_KEYS:
                raise InvalidParameterError("Unknown configuration key {!r}".format(key))
            setattr(self, key, value)
        checks = {check: True for check in CHECKS}
        checks.update(self.checks)
        self.checks = checks
        self.n_values = [int(n) for n in self.n_values]
        self.shape_params = dict(self.shape_params)
        self.validate()

    @classmethod
    def from_file(cls, path, **overrides):
        document = read_json(path)
        document.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**document)

    def validate(self):
        if self.trials < 1:
            raise InvalidParameterError("trials must be at least 1, got {}".format(self.trials))
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise InvalidParameterError("n_values must be positive, got {}".format(self.n_values))
        if any(a >= b for a, b in zip(self.n_values, self.n_values[1:])):
            raise InvalidParameterError("n_values must be strictly increasing, got {}".format(self.n_values))
        if self.sigma < 0:
            raise InvalidParameterError("sigma must be nonnegative, got {}".format(self.sigma))
        if self.l is not None and self.l <= 0:
            raise InvalidParameterError("l must be positive, got {}".format(self.l))
        if self.mu_mode not in ("known", "unknown"):
            raise InvalidParameterError("mu_mode must be known or unknown, got {!r}".format(self.mu_mode))
        if self.sigma_mode not in ("known", "unknown"):
            raise InvalidParameterError("sigma_mode must be known or unknown, got {!r}".format(self.sigma_mode))
        if self.s_n_rule not in S_N_RULES:
            raise InvalidParameterError("Unknown s_n rule {!r}".format(self.s_n_rule))
        if self.sigma_mode == "known" and not (self.calibration_sigma or self.sigma):
            raise InvalidParameterError("sigma is 0: set calibration_sigma to a floor value")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise InvalidParameterError("Unknown checks {}".format(", ".join(sorted(unknown))))

    def as_dict(self):
        return {key: getattr(self, key) for key in CONFIG_KEYS}

    def build_spec(self):
        return get_entry(self.shape).build(**self.shape_params)

    def jump_floor(self, spec):
        return spec.l if self.l is None else self.l

    @property
    def out(self):
        return self.output_dir or settings.OUTPUT_DIR


class TrialRecord:
    def __init__(self, N, trial, seed):
        self.N = N
        self.trial = trial
        self.seed = seed
        self.h = None
        self.r = None
        self.kappa = None
        self.hausdorff = None
        self.sandwich = None
        self.betti = None
        # Per degree; None when no closed-form diagram exists.
        self.bottleneck = None
        self.bottleneck_bound = None
        self.wall_time = None
        # Name of the error that made the trial fail, if any.
        self.failure = None

    @property
    def bottleneck_ok(self):
        if self.bottleneck is None:
            return None
        return all(b <= self.bottleneck_bound + 1e-9 for b in self.bottleneck)

    def as_dict(self):
        return dict(self.__dict__)


def run_trial(config, N, trial):
    """
    Runs one seeded trial: sample, estimate and check the estimate against the truth.
    """
    start = time.perf_counter()
    spec = config.build_spec()
    record = TrialRecord(N, trial, config.seed ^ trial)
    obs = sample_to_grid(spec, N, config.sigma, record.seed)
    sigma = config.calibration_sigma or config.sigma
    try:
        mask, params = estimate_pipeline(
            obs,
            l=config.jump_floor(spec),
            mu=spec.mu if config.mu_mode == "known" else None,
            sigma=sigma,
            sigma_known=config.sigma_mode == "known",
            s_n_rule=config.s_n_rule,
            spec=spec,
        )
        record.h, record.r, record.kappa = params.h, params.r, params.kappa
        if mask.is_empty():
            raise EmptyMaskError("The estimated jump set is empty")

        if config.checks["hausdorff"]:
            record.hausdorff = hausdorff_to_truth(mask, spec).value

        truth = jump_cells(spec, mask.resolution)
        if config.checks["sandwich"]:
            far = spec.exact_jump_distance(mask.centers()).max()
            record.sandwich = bool(truth.issubset(mask) and far <= 2 * params.r + mask.cell_diagonal)

        if config.checks["betti"] or config.checks["bottleneck"]:
            diagrams = diagrams_of(mask)
            if config.checks["betti"]:
                record.betti = tuple(estimate.count for estimate in betti_estimate(diagrams, params.kappa))
            if config.checks["bottleneck"] and spec.reference_diagrams() is not None and not truth.is_empty():
                reference = diagrams_of(truth)
                record.bottleneck = [bottleneck(p, q) for p, q in zip(reference, diagrams)]
                record.bottleneck_bound = 2 * params.r + 2 * mask.cell_diagonal
    except (EmptyMaskError, EmptyCellError, InvalidGeometryError) as e:
        record.failure = e.__class__.__name__
        logger.info("N={} trial={} failed: {}".format(N, trial, e))
    record.wall_time = time.perf_counter() - start
    return record


def run_trials(config):
    """
    Runs every (N, trial) pair in a pool. Records come back ordered by N, then trial.
    """
    jobs = [(N, trial) for N in config.n_values for trial in range(config.trials)]
    logger.info("Running {} trials of {} on {} workers".format(len(jobs), config.shape, config.jobs))
    return Parallel(n_jobs=config.jobs)(delayed(run_trial)(config, N, trial) for N, trial in jobs)


def records_table(records, config, dim):
    columns = [
        ("schema_version", agate.Number()),
        ("shape", agate.Text()),
        ("N", agate.Number()),
        ("trial", agate.Number()),
        ("seed", agate.Number()),
        ("h", agate.Number()),
        ("r", agate.Number()),
        ("kappa", agate.Number()),
        ("hausdorff", agate.Number()),
        ("sandwich", agate.Boolean()),
        ("betti", agate.Text()),
    ]
    columns.extend(("bottleneck_{}".format(s), agate.Number()) for s in range(dim))
    columns.append(("failure", agate.Text()))
    if config.record_timing:
        columns.append(("wall_time", agate.Number()))

    rows = []
    for record in records:
        bottlenecks = record.bottleneck or [None] * dim
        row = [
            settings.SCHEMA_VERSION,
            config.shape,
            record.N,
            record.trial,
            record.seed,
            record.h,
            record.r,
            record.kappa,
            record.hausdorff,
            record.sandwich,
            ";".join(str(b) for b in record.betti) if record.betti is not None else None,
        ]
        row.extend(None if b is None else finite_or_none(float(b)) for b in bottlenecks)
        row.append(record.failure)
        if config.record_timing:
            row.append(record.wall_time)
        rows.append(row)
    names, types = zip(*columns)
    return agate.Table(rows, names, types)


def fit_slope(n_values, errors, dim):
    """
    Least-squares slope of log(error) against log(log(n^2) / n), n = N^d. Returns
    None with fewer than two points.
    """
    pairs = [(N, e) for N, e in zip(n_values, errors) if e is not None and e > 0 and math.isfinite(e)]
    if len(pairs) < 2:
        return None
    n = np.array([float(N) ** dim for N, _ in pairs])
    x = np.log(2 * np.log(n) / n)
    y = np.log([e for _, e in pairs])
    return float(np.polyfit(x, y, 1)[0])


class SweepResult:
    def __init__(self, records, summary, slope=None, passed=True, notices=(), tail_slope=None):
        self.records = records
        self.summary = summary
        self.slope = slope
        # The fit without the smallest N, which is often pre-asymptotic.
        self.tail_slope = tail_slope
        self.passed = passed
        self.notices = list(notices)

    def as_dict(self):
        return {
            "summary": self.summary,
            "slope": self.slope,
            "tail_slope": self.tail_slope,
            "passed": self.passed,
            "notices": self.notices,
        }


def _by_n(records, config):
    for N in config.n_values:
        yield N, [record for record in records if record.N == N]


def run_rate_sweep(config):
    """
    Sweeps N and fits the rate at which the mean Hausdorff error decreases. Failed
    trials are counted and left out of the fit.
    """
    spec = config.build_spec()
    records = run_trials(config)
    summary = []
    for N, group in _by_n(records, config):
        errors = [record.hausdorff for record in group if record.failure is None and record.hausdorff is not None]
        radii = [record.r for record in group if record.r is not None]
        mean_error = float(np.mean(errors)) if errors else None
        mean_r = float(np.mean(radii)) if radii else None
        summary.append(
            {
                "N": N,
                "trials": len(group),
                "failures": sum(1 for record in group if record.failure),
                "mean_hausdorff": mean_error,
                "mean_r": mean_r,
                # The constant hidden in the expected-error rate.
                "constant": mean_error / mean_r if mean_error is not None and mean_r else None,
            }
        )

    notices = []
    n_values = [row["N"] for row in summary]
    errors = [row["mean_hausdorff"] for row in summary]
    slope = fit_slope(n_values, errors, spec.dim)
    tail_slope = fit_slope(n_values[1:], errors[1:], spec.dim) if len(n_values) > 2 else None
    passed = True
    if slope is None:
        notices.append("Fewer than two N values with successful trials: slope undefined")
    elif config.checks["hausdorff"]:
        passed = abs(slope - 1.0 / spec.dim) <= config.slope_tolerance
        if not passed:
            notices.append(
                "Fitted rate {:.3f} outside {:.3f} +/- {} (without N={}: {})".format(
                    slope, 1.0 / spec.dim, config.slope_tolerance, n_values[0], tail_slope
                )
            )
    for notice in notices:
        logger.warning(notice)
    logger.info("Fitted rate {} (expected {:.3f})".format(slope, 1.0 / spec.dim))

    result = SweepResult(records, summary, slope, passed, notices, tail_slope)
    os.makedirs(config.out, exist_ok=True)
    records_table(records, config, spec.dim).to_csv(os.path.join(config.out, "rate_sweep.csv"))
    write_json(dict(result.as_dict(), config=config.as_dict()), os.path.join(config.out, "rate_sweep.json"))
    return result


def run_topology_consistency(config):
    """
    Reports, per N, how often the Betti estimate matches the shape's, how often the
    sandwich holds, and how often the bottleneck bound holds.
    """
    spec = config.build_spec()
    expected = tuple(spec.betti_numbers())
    records = run_trials(config)
    notices = []
    if spec.reference_diagrams() is None and config.checks["bottleneck"]:
        notices.append("{} has no closed-form diagram: bottleneck check skipped".format(config.shape))

    summary = []
    passed = True
    for N, group in _by_n(records, config):
        row = {"N": N, "trials": len(group), "failures": sum(1 for record in group if record.failure)}
        if config.checks["betti"]:
            row["betti_match"] = sum(1 for record in group if record.betti == expected) / len(group)
            passed = passed and row["betti_match"] >= config.frequency_target
        if config.checks["sandwich"]:
            row["sandwich"] = sum(1 for record in group if record.sandwich) / len(group)
            passed = passed and row["sandwich"] >= config.frequency_target
        checked = [record for record in group if record.bottleneck_ok is not None]
        if checked:
            row["bottleneck_ok"] = sum(1 for record in checked if record.bottleneck_ok) / len(checked)
            # Within a sandwich the bound must hold every time.
            row["bottleneck_violations"] = sum(1 for record in checked if record.sandwich and not record.bottleneck_ok)
            passed = passed and row["bottleneck_violations"] == 0
        summary.append(row)
    for notice in notices:
        logger.warning(notice)

    result = SweepResult(records, summary, passed=passed, notices=notices)
    os.makedirs(config.out, exist_ok=True)
    records_table(records, config, spec.dim).to_csv(os.path.join(config.out, "consistency.csv"))
    write_json(
        dict(result.as_dict(), config=config.as_dict(), expected_betti=list(expected)),
        os.path.join(config.out, "consistency.json"),
    )
    return result


def lower_bound_separation(d, h, theta, l, m=None):
    """
    Hausdorff distance between the jump sets of the half-space step and of its
    pyramid perturbation, two signals whose observations get closer as h shrinks.
    """
    if m is None:
        m = max(64, int(math.ceil(8 / h)))
    flat = rasterize_jumpset(make_halfspace_step(d, l), m)
    bumped = rasterize_jumpset(make_pyramid_perturbation(d, h, theta, l), m)
    return {
        "hausdorff": hausdorff(flat, bumped),
        "vertex_offset": 2 * h,
        "cell_diagonal": flat.cell_diagonal,
    }


class OracleResult:
    def __init__(self, name, cases, failures, detail=""):
        self.name = name
        self.cases = cases
        self.failures = failures
        self.detail = detail

    @property
    def passed(self):
        return not self.failures

    def as_dict(self):
        return {"name": self.name, "cases": self.cases, "failures": self.failures, "detail": self.detail}


class OracleReport:
    def __init__(self, results):
        self.results = results

    @property
    def passed(self):
        return all(result.passed for result in self.results)

    def as_dict(self):
        return {"passed": self.passed, "results": [result.as_dict() for result in self.results]}


def random_mask(rng, dim, m):
    bits = rng.random((m,) * dim) < rng.uniform(0.05, 0.5)
    bits[tuple(rng.integers(0, m, size=dim))] = True
    return CubicalMask(dim, m, bits)


def random_diagram(rng, size, essential=0):
    births = np.round(rng.uniform(0, 1, size), 2)
    deaths = births + np.round(rng.uniform(0, 1, size), 2)
    points = list(zip(births, deaths)) + [(float(b), math.inf) for b in np.round(rng.uniform(0, 1, essential), 2)]
    return PersistenceDiagram(0, points)


def _check_distance_transform(rng, cases):
    failures = 0
    for case in range(cases):
        dim = 2 if case % 2 else 3
        mask = random_mask(rng, dim, int(rng.integers(2, 17 if dim == 2 else 9)))
        if np.abs(distance_transform(mask).values - oracles.brute_distance_transform(mask)).max() > 1e-9:
            failures += 1
    return OracleResult("distance_transform", cases, failures)


def _check_persistence(rng, cases):
    failures = 0
    for case in range(cases):
        mask = random_mask(rng, 2, 8) if case % 2 else random_mask(rng, 3, 5)
        filt = build_filtration(mask)
        fast = persistence(filt, mask.dim)
        if fast != oracles.naive_persistence(filt, mask.dim):
            failures += 1
        elif (fast[0].points[:, 0] == 0).sum() != oracles.brute_components(mask):
            failures += 1
    return OracleResult("persistence", cases, failures)


def _check_bottleneck(rng, cases):
    failures = 0
    for _ in range(cases):
        k1 = int(rng.integers(0, 4))
        k2 = int(rng.integers(0, 7 - k1))
        essential = int(rng.integers(0, 2))
        d1, d2 = random_diagram(rng, k1, essential), random_diagram(rng, k2, essential)
        if abs(bottleneck(d1, d2) - oracles.brute_bottleneck(d1, d2)) > 1e-12:
            failures += 1
    return OracleResult("bottleneck", cases, failures)


def _check_hausdorff(rng, cases):
    failures = 0
    for case in range(cases):
        dim = 2 if case % 2 else 3
        m = int(rng.integers(2, 13 if dim == 2 else 7))
        a, b = random_mask(rng, dim, m), random_mask(rng, dim, m)
        if abs(hausdorff(a, b) - oracles.brute_hausdorff(a, b)) > 1e-9:
            failures += 1
    return OracleResult("hausdorff", cases, failures)


def _check_histogram(rng, cases):
    failures = 0
    for _ in range(cases):
        dim = int(rng.integers(1, 4))
        cells = int(rng.integers(1, 5))
        side = int(rng.integers(cells, 9))
        obs = ObservationGrid(dim, side, rng.normal(size=side**dim))
        field = build_histogram(obs, 1.0 / cells)
        if np.abs(field.values - oracles.block_average(obs, 1.0 / cells)).max() > 1e-9:
            failures += 1
        else:
            index = tuple(rng.integers(0, cells, size=dim))
            r = float(rng.uniform(0, 0.5))
            if abs(local_range(field, index, r) - oracles.brute_local_range(field, index, r)) > 1e-12:
                failures += 1
    return OracleResult("histogram", cases, failures)


def _check_stability(rng, cases):
    failures = 0
    for case in range(cases):
        a = random_mask(rng, 2, 12)
        b = offset(a, float(rng.uniform(0, 0.3))) if case % 2 else random_mask(rng, 2, 12)
        if not stability_check(a, b).holds:
            failures += 1
    return OracleResult("stability", cases, failures)


def run_oracle_suite(quick=False, seed=0):
    """
    Checks every fast path against its brute-force oracle on seeded random inputs.
    """
    rng = np.random.default_rng(seed)
    scale = 10 if quick else 1
    results = [
        _check_distance_transform(rng, 200 // scale),
        _check_persistence(rng, 100 // scale),
        _check_bottleneck(rng, 100 // scale),
        _check_hausdorff(rng, 50 // scale),
        _check_histogram(rng, 50 // scale),
        _check_stability(rng, 100 // scale),
    ]
    for result in results:
        logger.info("{:<20} {:>4} cases {:>3} failures".format(result.name, result.cases, result.failures))
    return OracleReport(results)
