"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numeric or degeneracy error.
"""

import argparse
import csv
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import ica
from .io import InputFormatError, read_generic, read_matrix, read_semeion, write_model
from .linalg import SingularMatrixError
from .metrics import UndefinedIndexError, mdi, transformed_mdi
from .simlab.asv import asv_profile, asv_table
from .simlab.experiment import (
    ConfigError,
    ExperimentConfig,
    run_experiment,
    write_results_csv,
    write_summary_csv,
)
from .simlab.settings import SETTINGS, get_setting
from .tensor import ShapeError, vectorize_sample

EXIT_INPUT = 2
EXIT_NUMERIC = 3

FITTERS = {
    "tjade": lambda X, c: ica.tjade_fit(X, c=c),
    "tfobi": lambda X, c: ica.tfobi_fit(X),
    "jade": lambda X, c: ica.vjade_fit(X, c=c),
    "fobi": lambda X, c: ica.vfobi_fit(X),
}


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def bundled_config(name):
    """Path of a configuration file shipped with the package."""
    return resources.files("tjade") / "configs" / name


def _resolve_config(path):
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_config(p.name)
    if bundled.is_file():
        return bundled
    raise CLIError(f"config file not found: {path}", EXIT_INPUT)


# -- commands --------------------------------------------------------------------


def cmd_simulate(args):
    try:
        config = ExperimentConfig.load(_resolve_config(args.config))
    except ConfigError as exc:
        raise CLIError(f"{args.config}: {exc}", EXIT_INPUT)
    overrides = {"seed": args.seed}
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.ns is not None:
        overrides["ns"] = tuple(args.ns)
    config = replace(config, **overrides)

    def progress(done, total):
        print(f"\r{done}/{total} replications", end="", file=sys.stderr, flush=True)

    result = run_experiment(
        config,
        workers=args.workers,
        timing=not args.no_timing,
        progress=progress if args.verbose else None,
    )
    if args.verbose:
        print(file=sys.stderr)
    out = Path(args.out)
    write_results_csv(result.rows, out)
    summary_path = Path(args.summary) if args.summary else out.with_name(out.stem + "_summary.csv")
    write_summary_csv(result.summary, summary_path)
    failures = sum(rec["nonconverged"] for rec in result.summary)
    print(f"wrote {len(result.rows)} rows to {out} and summary to {summary_path}")
    if failures:
        print(f"{failures} fits did not converge (see the summary's nonconverged column)")
    return 0


def _component_names(dims):
    names = []
    for flat in range(int(np.prod(dims))):
        idx = np.unravel_index(flat, dims, order="F")
        names.append("y_" + "_".join(str(i + 1) for i in idx))
    return names


def cmd_apply(args):
    labels = None
    try:
        if args.format == "semeion":
            X, labels = read_semeion(args.data, digits=args.digits)
        else:
            if not args.dims:
                raise CLIError("--dims is required for the generic format", EXIT_INPUT)
            X = read_generic(args.data, args.dims)
    except InputFormatError as exc:
        raise CLIError(f"{args.data}: {exc}", EXIT_INPUT)
    except OSError as exc:
        raise CLIError(str(exc), EXIT_INPUT)

    try:
        model = FITTERS[args.method](X, args.c)
    except SingularMatrixError as exc:
        raise CLIError(f"singular covariance in mode {exc.mode}: {exc}", EXIT_NUMERIC)
    except (ValueError, ShapeError) as exc:
        raise CLIError(str(exc), EXIT_INPUT)

    dims = X.shape[1:]
    if args.method in ("jade", "fobi"):
        scores = ica.transform(model, vectorize_sample(X))
    else:
        scores = vectorize_sample(ica.transform(model, X))
    names = _component_names(model.dims)
    kurt = ica.element_kurtosis(scores)

    prefix = args.out
    with open(f"{prefix}_scores.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow((["label"] if labels is not None else []) + names)
        for k, row in enumerate(scores):
            lead = [int(labels[k])] if labels is not None else []
            writer.writerow(lead + [repr(float(v)) for v in row])
    with open(f"{prefix}_kurtosis.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["component", "kurtosis", "rank_ascending"])
        ranks = np.empty(len(kurt), dtype=int)
        ranks[np.argsort(kurt, kind="stable")] = np.arange(1, len(kurt) + 1)
        for name, value, rank in zip(names, kurt, ranks):
            writer.writerow([name, repr(float(value)), int(rank)])
    write_model(model, f"{prefix}_model.json")

    print(f"fitted {model.method} on {X.shape[0]} observations of shape {tuple(dims)}")
    if labels is not None:
        groups = {int(d): int(np.sum(labels == d)) for d in np.unique(labels)}
        print("group sizes: " + ", ".join(f"{d}: {c}" for d, c in groups.items()))
    if not model.converged:
        print("warning: rotation did not converge", file=sys.stderr)
    if model.degenerate:
        print("warning: near-equal eigenvalues, rotation is poorly identified", file=sys.stderr)
    return 0


def cmd_mdi(args):
    try:
        phi = read_matrix(args.estimate)
        omega = read_matrix(args.mixing)
    except (InputFormatError, OSError) as exc:
        raise CLIError(str(exc), EXIT_INPUT)
    if phi.shape[1] != omega.shape[0] or phi.shape[0] != phi.shape[1] or omega.shape[0] != omega.shape[1]:
        raise CLIError(f"shapes {phi.shape} and {omega.shape} do not conform", EXIT_INPUT)
    try:
        d = mdi(phi @ omega)
    except (UndefinedIndexError, ShapeError) as exc:
        raise CLIError(str(exc), EXIT_INPUT)
    print(f"mdi {d:.12g}")
    print(f"tmdi {transformed_mdi(d, args.n, phi.shape[0]):.12g}")
    return 0


def _load_setting(spec):
    if spec in SETTINGS:
        return get_setting(spec)
    try:
        config = ExperimentConfig.load(_resolve_config(spec))
    except ConfigError as exc:
        raise CLIError(f"{spec}: {exc}", EXIT_INPUT)
    return get_setting(config.settings[0])


def cmd_asv(args):
    setting = _load_setting(args.setting)
    profile = asv_profile(setting)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["mode", "k", "l", "kind", "asv"])
        for m in range(1, len(setting.dims) + 1):
            table = asv_table(profile, m)
            p = table.shape[0]
            for k in range(p):
                for l in range(p):
                    value = table[k, l]
                    writer.writerow(
                        [m, k + 1, l + 1, "diag" if k == l else "offdiag",
                         "undefined" if np.isnan(value) else f"{value:.12g}"]
                    )  # fmt: skip
    finally:
        if args.out:
            out.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="tjade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte-Carlo separation study")
    p.add_argument("config", help="JSON config path or bundled name (grid3x4.json, settings123.json)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--ns", type=_int_list, help="override sample sizes, e.g. 1000,4000")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--summary", help="summary CSV (default: <out>_summary.csv)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-timing", action="store_true", help="write ms=0 for byte-reproducible output")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("apply", help="fit an estimator to a data file")
    p.add_argument("data")
    p.add_argument("--format", choices=("semeion", "generic"), default="generic")
    p.add_argument("--dims", type=_int_list, help="tensor dims for the generic format, e.g. 3,4")
    p.add_argument("--digits", type=_int_list, help="semeion: keep only these digits")
    p.add_argument("--method", choices=sorted(FITTERS), default="tjade")
    p.add_argument("--c", type=int, choices=(1, 2), default=1)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("mdi", help="minimum distance index of an estimate against a mixing matrix")
    p.add_argument("estimate")
    p.add_argument("mixing")
    p.add_argument("--n", type=int, default=1, help="sample size for the transformed index")
    p.set_defaults(func=cmd_mdi)

    p = sub.add_parser("asv", help="limiting variances of the TJADE estimate")
    p.add_argument("setting", help=f"one of {sorted(SETTINGS)} or a JSON config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_asv)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
