"""Command-line front end: simulate, fit, cv, predict and benchmark.

Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.
The worker count defaults to the number of CPUs and can be overridden with
the ``RKHSEL_WORKERS`` environment variable or ``--workers``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import RkhselError
from .io import load_model, read_dataset, read_matrix, save_model, write_dataset
from .loss import Task
from .metrics import SelectionReport, prediction_metrics, selection_metrics, summarize
from .simdata import DEFAULT_N_VALID, generate
from .solver import FitConfig, fit, predict
from .tuning import TuningGrid, cross_validate, default_workers

SIM_FILES = ("train_features.csv", "train_labels.csv",
             "valid_features.csv", "valid_labels.csv", "truth.txt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def replicate_rng(seed: int, r: int) -> np.random.Generator:
    """Generator for replicate ``r`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _config(args) -> FitConfig:
    return FitConfig(bound=args.bound, max_outer=args.max_outer, bandwidth=args.bandwidth)


def _add_fit_options(p) -> None:
    p.add_argument("--bound", type=_positive_float, default=1e5, help="box bound M on the kernel weights")
    p.add_argument("--max-outer", type=_positive_int, default=100, help="cap on outer iterations")
    p.add_argument("--bandwidth", choices=["full", "per-feature"], default="full",
                   help="median-distance rule for the default kernel bandwidth")


def _add_data_options(p) -> None:
    p.add_argument("--features", required=True, help="features CSV with a header row")
    p.add_argument("--labels", required=True, help="one-column labels CSV")
    p.add_argument("--task", required=True, choices=[t.value for t in Task])
    p.add_argument("--no-standardize", action="store_true",
                   help="use features as given instead of centering and scaling them")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rkhsel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.subcommands = sub.choices

    p = sub.add_parser("simulate", help="write one simulated train/validation pair")
    p.add_argument("--study", type=int, choices=[1, 2], required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--p", type=_positive_int, required=True)
    p.add_argument("--n-valid", type=_positive_int, default=DEFAULT_N_VALID)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("fit", help="fit one model at given penalty parameters")
    _add_data_options(p)
    p.add_argument("--gamma1", type=_positive_float, required=True)
    p.add_argument("--gamma2", type=float, required=True)
    p.add_argument("--sigma", type=_positive_float, default=None,
                   help="kernel bandwidth (default: median pairwise distance)")
    p.add_argument("--model-out", required=True)
    _add_fit_options(p)

    p = sub.add_parser("cv", help="choose penalty parameters by cross-validation")
    _add_data_options(p)
    p.add_argument("--folds", type=_positive_int, default=3)
    p.add_argument("--grid", choices=["full", "coarse"], default="full")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--workers", type=_positive_int, default=None)
    _add_fit_options(p)

    p = sub.add_parser("predict", help="predict from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True, help="raw features CSV with a header row")
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("benchmark", help="repeat simulate, cv and score over replicates")
    p.add_argument("--study", type=int, choices=[1, 2], required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--p", type=_positive_int, required=True)
    p.add_argument("--n-valid", type=_positive_int, default=DEFAULT_N_VALID)
    p.add_argument("--replicates", type=_positive_int, default=25)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grid", choices=["full", "coarse"], default="coarse")
    p.add_argument("--folds", type=_positive_int, default=3)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=_positive_int, default=None)
    _add_fit_options(p)
    return parser


def _cmd_simulate(args) -> int:
    inst = generate(args.study, args.n, args.p, args.n_valid, np.random.default_rng(args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(out / SIM_FILES[0], out / SIM_FILES[1], inst.train)
    write_dataset(out / SIM_FILES[2], out / SIM_FILES[3], inst.validation)
    (out / SIM_FILES[4]).write_text("".join(f"{m + 1}\n" for m in inst.true_support))
    print(f"wrote {', '.join(SIM_FILES)} to {out}")
    return 0


def _report_fit(model, seconds: float) -> None:
    sel = model.selected
    names = [model.feature_names[m] for m in sel]
    print(f"selected {len(sel)} of {model.spec.p} features: "
          + (", ".join(f"{nm} (#{m + 1})" for nm, m in zip(names, sel)) or "none"))
    tr = model.trace
    print(f"objective {tr[0]:.6g} -> {tr[-1]:.6g} over {model.n_iter} iterations"
          f" ({'converged' if model.converged else 'iteration cap reached'})")
    if model.exp_clamped:
        print("note: exponential-loss exponent was clamped during fitting")
    print(f"time {seconds:.2f}s")


def _cmd_fit(args) -> int:
    data = read_dataset(args.features, args.labels, args.task, not args.no_standardize)
    cfg = _config(args).with_gammas(args.gamma1, args.gamma2)
    t0 = time.perf_counter()
    model = fit(data, cfg, args.sigma)
    _report_fit(model, time.perf_counter() - t0)
    save_model(model, args.model_out)
    return 0


def _workers(args) -> int:
    return args.workers if args.workers is not None else default_workers()


def _cv_extra(res) -> dict:
    return {
        "gamma1_values": list(res.grid.gamma1_values),
        "gamma2_values": list(res.grid.gamma2_values),
        "cv_table": res.cv_table.tolist(),
        "fold_scores": res.fold_scores.tolist(),
        "best_gamma1": res.best_gamma1,
        "best_gamma2": res.best_gamma2,
    }


def _cmd_cv(args) -> int:
    data = read_dataset(args.features, args.labels, args.task, not args.no_standardize)
    grid = TuningGrid.dyadic(args.grid, args.folds)
    t0 = time.perf_counter()
    res = cross_validate(data, grid, _config(args), np.random.default_rng(args.seed),
                         workers=_workers(args))
    print(f"best gamma1 = 2^{np.log2(res.best_gamma1):g}, gamma2 = 2^{np.log2(res.best_gamma2):g},"
          f" cv score {res.cv_table.min():.6g}")
    _report_fit(res.model, time.perf_counter() - t0)
    save_model(res.model, args.model_out, extra=_cv_extra(res))
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    names, raw = read_matrix(args.features)
    if raw.shape[1] != model.spec.p:
        raise RkhselError(f"model expects {model.spec.p} features, file has {raw.shape[1]}")
    X = raw
    if model.mean is not None:
        X = (raw - model.mean) / model.scale
    scores = predict(model, X)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if model.task is Task.CLASSIFICATION:
            w.writerow(["score", "label"])
            for s in scores:
                w.writerow([repr(float(s)), 1 if s >= 0 else -1])
        else:
            w.writerow(["prediction"])
            for s in scores:
                w.writerow([repr(float(s))])
    print(f"wrote {len(scores)} predictions to {args.out}")
    return 0


def run_replicate(study: int, n: int, p: int, n_valid: int, seed: int, r: int,
                  grid: TuningGrid, config: FitConfig) -> dict:
    """One benchmark replicate: simulate, tune by CV, score on validation."""
    rng = replicate_rng(seed, r)
    inst = generate(study, n, p, n_valid, rng)
    t0 = time.perf_counter()
    res = cross_validate(inst.train, grid, config, rng, workers=1)
    model = res.model
    tpr, tnr, k = selection_metrics(model.lam, config.select_threshold, inst.true_support, p)
    err = prediction_metrics(inst.train.task, predict(model, inst.validation.X), inst.validation.y)
    return {
        "replicate": r, "tpr": tpr, "tnr": tnr, "n_selected": k, "error": err,
        "gamma1": res.best_gamma1, "gamma2": res.best_gamma2,
        "selected": " ".join(str(m + 1) for m in model.selected),
        "seconds": time.perf_counter() - t0,
    }


def _replicate_job(job):
    return run_replicate(*job)


def run_benchmark(study, n, p, n_valid, replicates, seed, grid, config, workers=1) -> List[dict]:
    jobs = [(study, n, p, n_valid, seed, r, grid, config) for r in range(replicates)]
    if workers > 1 and replicates > 1:
        with ProcessPoolExecutor(min(workers, replicates)) as pool:
            return list(pool.map(_replicate_job, jobs))
    return [_replicate_job(j) for j in jobs]


def _cmd_benchmark(args) -> int:
    grid = TuningGrid.dyadic(args.grid, args.folds)
    rows = run_benchmark(args.study, args.n, args.p, args.n_valid, args.replicates, args.seed,
                         grid, _config(args), _workers(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = ["replicate", "tpr", "tnr", "n_selected", "error", "gamma1", "gamma2", "selected"]
    with open(out / "replicates.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    summary = summarize([SelectionReport(r["tpr"], r["tnr"], r["n_selected"], r["error"])
                         for r in rows])
    err_name = "MSE" if args.study == 1 else "misclassification"
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["study", "n", "p", "replicates", "TPR", "TNR", "avg#", err_name, "MAD"])
        w.writerow([args.study, args.n, args.p, summary["replicates"], summary["tpr"],
                    summary["tnr"], summary["avg_selected"], summary["error"], summary["mad"]])
    (out / "summary.json").write_text(json.dumps(
        {"study": args.study, "n": args.n, "p": args.p, "seed": args.seed,
         "grid": args.grid, **summary}, indent=2) + "\n")
    truth = range(1, 6) if args.study == 1 else range(2, 5)
    (out / "truth.txt").write_text("".join(f"{m}\n" for m in truth))
    print(f"TPR {summary['tpr']:.3f}  TNR {summary['tnr']:.3f}  avg# {summary['avg_selected']:.2f}"
          f"  {err_name} {summary['error']:.4g} (MAD {summary['mad']:.3g})")
    return 0


COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "cv": _cmd_cv,
    "predict": _cmd_predict,
    "benchmark": _cmd_benchmark,
}


def _check_flags(parser, argv: List[str]) -> None:
    """Reject unknown flags before argparse complains about missing ones."""
    if not argv or argv[0] not in parser.subcommands:
        return
    known = set(parser.subcommands[argv[0]]._option_string_actions)
    unknown = [a for a in argv[1:] if a.startswith("--") and a.split("=", 1)[0] not in known]
    if unknown:
        raise UsageError(f"rkhsel {argv[0]}: unrecognized arguments: {' '.join(unknown)}")


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` and execute the subcommand; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _check_flags(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except (RkhselError, OSError, ValueError, OverflowError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
