# coding: utf-8
import json
import logging
import os
import sys
from contextlib import contextmanager

from invoke import Collection, Program, task
from invoke.exceptions import Exit

from jumpsets import __version__, settings
from jumpsets.estimator import estimate_pipeline
from jumpsets.formats import (
    diagrams_document,
    dumps,
    read_grid,
    read_json,
    read_mask,
    write_diagrams_csv,
    write_grid,
    write_json,
    write_mask,
)
from jumpsets.geometry import hausdorff_report, hausdorff_to_truth
from jumpsets.harness import ExperimentConfig, run_oracle_suite, run_rate_sweep, run_topology_consistency
from jumpsets.synthgen import get_entry, sample_to_grid
from jumpsets.topology import betti_estimate, diagrams_of
from jumpsets.utils import InvalidParameterError, JumpsetsError, calibrate_kappa, regime_conditions

logger = logging.getLogger(__name__)


@contextmanager
def running():
    """
    Configures logging and turns library errors into exit code 2.
    """
    settings.configure_logging()
    try:
        yield
    except JumpsetsError as e:
        logger.error("{}: {}".format(e.__class__.__name__, e))
        raise Exit(code=2)


def sidecar_path(path):
    return "{}.json".format(path)


def spec_from_sidecar(path):
    """
    Rebuilds the shape recorded in a grid file's sidecar.
    """
    metadata = read_json(path)
    params = dict(metadata["params"], dim=metadata["d"], l=metadata["l"])
    return get_entry(metadata["catalog"]).build(**params), metadata


def _float(value):
    return None if value is None else float(value)


@task(
    help={
        "shape": "catalog name, like two_circles",
        "params": "JSON object of shape parameters",
        "n": "lattice side N",
        "sigma": "noise level",
        "seed": "noise seed",
        "csv": "write the grid as CSV (N <= 64)",
        "output": "grid file path",
    }
)
def generate(c, shape, n=64, sigma=0.25, seed=0, params=None, csv=False, output=None):
    """
    Samples a catalog shape with noise, and writes the grid and a JSON sidecar with the ground truth.
    """
    with running():
        shape_params = json.loads(params) if params else {}
        spec = get_entry(shape).build(**shape_params)
        obs = sample_to_grid(spec, int(n), float(sigma), int(seed))
        if output is None:
            output = os.path.join(settings.OUTPUT_DIR, "{}_N{}_seed{}.{}".format(shape, n, seed, "csv" if csv else "grid"))
        write_grid(obs, output, csv=csv)
        metadata = spec.metadata()
        metadata.update({"catalog": shape, "N": int(n), "sigma": float(sigma), "seed": int(seed)})
        write_json(metadata, sidecar_path(output))
        print("{:<60} {}".format(output, sidecar_path(output)))


@task(
    help={
        "input": "grid file path",
        "l": "jump floor (default: from the sidecar)",
        "sigma": "noise level for calibration (default: from the grid)",
        "sigma_unknown": "calibrate without sigma",
        "mu": "mu for calibration (default: from the sidecar, else 1)",
        "mu_unknown": "calibrate without mu",
        "h": "bandwidth, overriding calibration",
        "r": "neighborhood radius, overriding calibration",
        "s_n_rule": "log, loglog or sqrtlog",
        "output": "mask file path",
    }
)
def estimate(
    c,
    input,
    l=None,
    sigma=None,
    sigma_unknown=False,
    mu=None,
    mu_unknown=False,
    h=None,
    r=None,
    s_n_rule="log",
    output=None,
):
    """
    Estimates the jump set of a grid file and writes the mask and a JSON summary.
    """
    with running():
        obs = read_grid(input)
        spec = None
        if os.path.exists(sidecar_path(input)):
            spec, _ = spec_from_sidecar(sidecar_path(input))
        if l is None and spec is None:
            raise InvalidParameterError("Pass --l or generate the grid with a sidecar")
        if mu_unknown:
            mu = None
        elif mu is None:
            mu = spec.mu if spec is not None else 1.0
        mask, params = estimate_pipeline(
            obs,
            l=_float(l) if l is not None else spec.l,
            mu=_float(mu),
            sigma=_float(sigma),
            sigma_known=not sigma_unknown,
            h=_float(h),
            r=_float(r),
            s_n_rule=s_n_rule,
            spec=spec,
        )
        if output is None:
            output = "{}.mask".format(os.path.splitext(input)[0])
        write_mask(mask, output)
        summary = {"params": params.as_dict(), "cells": mask.count, "m": mask.resolution}
        if spec is not None:
            summary["regime"] = regime_conditions(params, spec)
        write_json(summary, sidecar_path(output))
        print("{:<60} {} cells".format(output, mask.count))


@task(
    help={
        "mask": "mask file path",
        "other": "second mask file path",
        "truth": "sidecar of the grid the mask was estimated from",
    }
)
def metrics(c, mask, other=None, truth=None):
    """
    Prints the Hausdorff distance between a mask and another mask or the true jump set.
    """
    with running():
        a = read_mask(mask)
        if other:
            report = hausdorff_report(a, read_mask(other))
        elif truth:
            spec, _ = spec_from_sidecar(truth)
            report = hausdorff_to_truth(a, spec)
        else:
            raise InvalidParameterError("Pass --other or --truth")
        print(dumps(report.as_dict()))


@task(
    help={
        "mask": "mask file path",
        "kappa": "regularization offset",
        "auto_kappa": "calibrate kappa from --r and --mu",
        "r": "neighborhood radius used for the mask",
        "mu": "mu for calibration",
        "max_degree": "highest homology degree (default d - 1)",
        "csv": "also write the diagrams as CSV to this path",
        "output": "JSON output path (default: print)",
    }
)
def topology(c, mask, kappa=None, auto_kappa=False, r=None, mu=None, max_degree=None, csv=None, output=None):
    """
    Computes the persistence diagrams and Betti estimates of a mask.
    """
    with running():
        a = read_mask(mask)
        if auto_kappa:
            if r is None or mu is None:
                raise InvalidParameterError("--auto-kappa needs --r and --mu")
            kappa = calibrate_kappa(float(r), float(mu))
        elif kappa is None:
            raise InvalidParameterError("Pass --kappa or --auto-kappa")
        diagrams = diagrams_of(a, None if max_degree is None else int(max_degree))
        document = {
            "diagrams": diagrams_document(diagrams),
            "betti": [betti.as_dict() for betti in betti_estimate(diagrams, float(kappa))],
        }
        if csv:
            write_diagrams_csv(diagrams, csv)
        if output:
            write_json(document, output)
        else:
            print(dumps(document))


def _config(config, trials, seed, jobs, output_dir):
    return ExperimentConfig.from_file(
        config,
        trials=None if trials is None else int(trials),
        seed=None if seed is None else int(seed),
        jobs=None if jobs is None else int(jobs),
        output_dir=output_dir,
    )


def _print_summary(result):
    for row in result.summary:
        print("{:<10} {}".format("N={}".format(row["N"]), json.dumps(row, sort_keys=True)))
    for notice in result.notices:
        print(notice)


SWEEP_HELP = {
    "config": "JSON experiment configuration",
    "trials": "override trials per N",
    "seed": "override the base seed",
    "jobs": "override the number of workers",
    "output_dir": "override the output directory",
}


@task(help=SWEEP_HELP)
def rate_sweep(c, config, trials=None, seed=None, jobs=None, output_dir=None):
    """
    Runs the convergence-rate sweep and fails if the fitted rate is off.
    """
    with running():
        result = run_rate_sweep(_config(config, trials, seed, jobs, output_dir))
        _print_summary(result)
        print("{:<10} {}".format("slope", result.slope))
        print("{:<10} {}".format("tail_slope", result.tail_slope))
        if not result.passed:
            raise Exit("Fitted rate outside the tolerance", code=1)


@task(help=SWEEP_HELP)
def consistency(c, config, trials=None, seed=None, jobs=None, output_dir=None):
    """
    Runs the topology-consistency experiment and fails if a frequency is too low.
    """
    with running():
        result = run_topology_consistency(_config(config, trials, seed, jobs, output_dir))
        _print_summary(result)
        if not result.passed:
            raise Exit("Consistency frequencies below target", code=1)


@task(help={"quick": "run a tenth of the cases", "seed": "random seed"})
def oracle_check(c, quick=False, seed=0):
    """
    Checks the fast algorithms against brute-force oracles.
    """
    with running():
        report = run_oracle_suite(quick=quick, seed=int(seed))
        for result in report.results:
            print("{:<60} {}".format(result.name, "ok" if result.passed else "{} failures".format(result.failures)))
        if not report.passed:
            raise Exit("Oracle mismatch", code=1)


program = Program(namespace=Collection.from_module(sys.modules[__name__]), name="jumpsets", version=__version__)
