"""High-level runs: single update, noise sweep, strategy comparison.

Every run writes plain CSV and key=value text files. Floats are
formatted with repr() so rerunning a deterministic configuration
reproduces the output byte for byte (wall-clock columns are written as
0.0 unless real times were requested).
"""

from __future__ import annotations

import csv
import os
import time

import numpy as np

from .baselines import solve_baseline
from .objective import EvalCounter, UpdatingProblem, evaluate_full
from .trustregion import solve


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_convergence_csv(path, history, s, record_wall_time=False):
    """One row per outer iteration of a trust-region run."""
    header = (
        ["k", "phi"]
        + ["f%d" % (i + 1) for i in range(s)]
        + ["chi", "delta", "rho", "accepted", "factorizations", "wall_s"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in history:
            row = [str(rec.k), _fmt(rec.value)]
            row += [_fmt(f) for f in rec.frequencies]
            row += [
                _fmt(rec.chi),
                _fmt(rec.delta),
                _fmt(rec.rho) if rec.rho is not None else "",
                _fmt(rec.accepted),
                str(rec.factorizations),
                _fmt(rec.wall_s if record_wall_time else 0.0),
            ]
            writer.writerow(row)


def write_summary(path, lines):
    with open(path, "w", newline="") as fh:
        for key, value in lines:
            fh.write("%s = %s\n" % (key, value))


def run_update(setup, out_dir=None):
    """Run one model update and write convergence.csv plus summary.txt.

    Returns the SolveResult (RM strategy) or BaselineResult (A, AD).
    """
    out_dir = setup.output_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    counter = EvalCounter()
    t0 = time.perf_counter()
    if setup.strategy == "RM":
        result = solve(setup.problem, x0=setup.start, config=setup.tr_config,
                       counter=counter)
        write_convergence_csv(
            os.path.join(out_dir, "convergence.csv"),
            result.history,
            setup.problem.s,
            record_wall_time=setup.record_wall_time,
        )
        iterations = result.n_outer
    else:
        result = solve_baseline(
            setup.problem, setup.start, setup.strategy, counter=counter,
            max_iter=setup.tr_config.max_outer * 10,
        )
        iterations = result.iterations
    wall = time.perf_counter() - t0

    lines = [
        ("benchmark", setup.benchmark),
        ("strategy", setup.strategy),
        ("converged", "true" if result.converged else "false"),
        ("iterations", str(iterations)),
        ("objective", _fmt(result.value)),
        ("criticality", _fmt(result.chi)),
        ("factorizations", str(counter.factorizations)),
        ("wall_s", _fmt(wall) if setup.record_wall_time else _fmt(0.0)),
    ]
    for name, value in zip(setup.parameter_names, result.x):
        lines.append(("parameter:%s" % name, _fmt(value)))
    for i, f in enumerate(result.frequencies):
        lines.append(("frequency:%d" % (i + 1), _fmt(f)))
    for i, f in enumerate(setup.problem.measured):
        lines.append(("target:%d" % (i + 1), _fmt(f)))
    if setup.true_values is not None:
        err = np.abs(result.x - setup.true_values) / np.abs(setup.true_values)
        for name, e in zip(setup.parameter_names, err):
            lines.append(("rel_error:%s" % name, _fmt(e)))
        lines.append(("rel_error:max", _fmt(float(err.max()))))
        lines.append(("rel_error:mean", _fmt(float(err.mean()))))
    write_summary(os.path.join(out_dir, "summary.txt"), lines)
    return result


def perturbed_targets(clean, delta, rng):
    """Multiplicative uniform noise on each target, re-sorted ascending."""
    factors = 1.0 + delta * rng.uniform(-1.0, 1.0, clean.size)
    return np.sort(clean * factors)


def run_noise_study(setup, out_dir=None):
    """Parameter error versus target noise level.

    For each noise level delta and each trial, the clean targets are
    perturbed multiplicatively, the model is updated from the
    configured start, and the largest relative parameter error against
    the known true values is recorded. Writes noise_study.csv (one row
    per trial) and noise_summary.txt with per-level medians and the
    log-log slope fitted through them.

    Returns (deltas, medians, slope).
    """
    if setup.true_values is None:
        raise ValueError("noise study needs generated targets (known true values)")
    out_dir = setup.output_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)

    clean = setup.problem.measured
    rows = []
    errors = np.zeros((setup.noise_deltas.size, setup.noise_trials))
    for a, delta in enumerate(setup.noise_deltas):
        for b in range(setup.noise_trials):
            rng = np.random.default_rng([setup.noise_seed, a, b])
            noisy = perturbed_targets(clean, float(delta), rng)
            problem = UpdatingProblem(
                setup.problem.pencil,
                setup.problem.box,
                measured=noisy,
                weights="relative",
                lanczos_tol=setup.problem.lanczos_tol,
                criticality_tol=setup.problem.criticality_tol,
                seed=setup.problem.seed,
            )
            result = solve(problem, x0=setup.start, config=setup.tr_config)
            err = float(
                np.max(np.abs(result.x - setup.true_values) / np.abs(setup.true_values))
            )
            errors[a, b] = err
            rows.append((float(delta), b, err, result.converged, result.n_outer))

    with open(os.path.join(out_dir, "noise_study.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delta", "trial", "max_rel_error", "converged", "iterations"])
        for delta, b, err, conv, n in rows:
            writer.writerow([_fmt(delta), str(b), _fmt(err), _fmt(conv), str(n)])

    medians = np.median(errors, axis=1)
    slope = float(
        np.polyfit(np.log10(setup.noise_deltas), np.log10(medians), 1)[0]
    )
    lines = [("trials", str(setup.noise_trials)), ("slope", _fmt(slope))]
    for delta, med in zip(setup.noise_deltas, medians):
        lines.append(("median:%s" % _fmt(float(delta)), _fmt(float(med))))
    write_summary(os.path.join(out_dir, "noise_summary.txt"), lines)
    return setup.noise_deltas, medians, slope


COMPARE_STRATEGIES = ("RM", "AD", "A")


def run_strategy_comparison(setup, out_dir=None):
    """Run the same update with each strategy and tabulate the cost.

    Writes comparison.csv with one row per strategy: factorization and
    Lanczos counts, iterations, final objective and criticality, and
    real wall/assembly seconds (these columns are honest timings, so
    the file is not byte-reproducible across runs). The BB row is
    emitted with status=unsupported and no numbers.

    Returns {strategy: result} for the supported strategies.
    """
    out_dir = setup.output_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    results = {}
    rows = []
    for strategy in COMPARE_STRATEGIES:
        counter = EvalCounter()
        t0 = time.perf_counter()
        if strategy == "RM":
            result = solve(setup.problem, x0=setup.start, config=setup.tr_config,
                           counter=counter)
            iterations = result.n_outer
            status = "converged" if result.converged else "maxiter"
        else:
            result = solve_baseline(
                setup.problem, setup.start, strategy, counter=counter,
                max_iter=setup.tr_config.max_outer * 10,
            )
            iterations = result.iterations
            status = result.status
        wall = time.perf_counter() - t0
        results[strategy] = result
        rows.append(
            [
                strategy,
                status,
                _fmt(result.converged),
                str(iterations),
                str(counter.factorizations),
                str(counter.lanczos_runs),
                _fmt(result.value),
                _fmt(result.chi),
                _fmt(wall),
                _fmt(setup.assembly_seconds),
            ]
        )
    rows.append(["BB", "unsupported", "", "", "", "", "", "", "", ""])

    with open(os.path.join(out_dir, "comparison.csv"), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "strategy", "status", "converged", "iterations", "factorizations",
                "lanczos_runs", "objective", "criticality", "wall_s", "assembly_s",
            ]
        )
        writer.writerows(rows)
    return results


def eigenreport(problem, x):
    """Frequencies and eigenvalues of the pencil at x, as (f, lam)."""
    ev = evaluate_full(problem, x)
    return ev.frequencies, ev.lanczos.eigenvalues
