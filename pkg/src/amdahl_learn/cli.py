"""Command-line interface: synth | fit | cv | predict | explore | report."""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import formats
from .dataset import SCORE_COLUMN, atomic_write, csv_text, load_configs, load_dataset, write_dataset
from .errors import AmdahlError, InputError, NumericalError, PredictionError
from .explorer import CostModel, explore, frontier
from .regression import extract_fractions, fit_dataset, predict_score
from .synthetic import NoiseSpec, default_truth, e1_ranges, generate, sample_configs
from .validation import SWEEP_HEADER, CvReport, cross_validate, sweep_rows

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _pairs(items, flag) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InputError(f"expected NAME=VALUE, got {item!r}", flag)
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"non-numeric value in {item!r}", flag) from None
    return out


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def _load_spec_for(args, data):
    spec = formats.load_model_spec(args.spec)
    try:
        data = data.project(spec.schema)
    except AmdahlError as exc:
        raise InputError(f"{exc} (model spec {args.spec})", args.data) from None
    return spec, data


def cmd_synth(args):
    ranges = formats.load_ranges(args.ranges) if args.ranges else e1_ranges()
    if args.truth:
        truth = formats.load_truth(args.truth, default_baseline=ranges.minimum())
    else:
        truth = default_truth(ranges)
    missing = [n for n in truth.spec.schema.names if n not in ranges.schema]
    if missing:
        raise InputError(f"ranges lack resource(s) used by the truth: {', '.join(missing)}", args.ranges)
    ranges = type(ranges)(tuple((n, ranges.levels[n]) for n in truth.spec.schema.names))
    configs = sample_configs(ranges, args.n, args.seed, args.mode)
    noise_seed = args.seed if args.noise_seed is None else args.noise_seed
    data = generate(truth, configs, NoiseSpec(args.sigma, noise_seed), source=str(args.out))
    write_dataset(args.out, data)
    truth_out = args.truth_out or Path(args.out).with_suffix(".truth.json")
    formats.write_json(truth_out, formats.truth_to_dict(truth))
    print(f"wrote {data.m} rows to {args.out}; ground truth to {truth_out}")


def _print_fit(model, fractions):
    print(f"model: {model.spec.label or 'model'}")
    print(f"rows: {model.scaler.n}  terms: {model.spec.n_terms}  rank: {model.rank}/{model.spec.n_terms + 1}")
    print(f"condition estimate: {model.condition:.6g}")
    print(f"training MAPE%: {model.training_mape:.6f}  accuracy%: {100.0 - model.training_mape:.6f}")
    print(f"{'term':<28} {'coefficient':>16} {'fraction':>12}")
    print(f"{'intercept (serial)':<28} {model.coefficients_raw[0]:>16.9g} {fractions.serial_hat:>12.6f}")
    for term, coef in zip(model.spec.terms, model.coefficients_raw[1:]):
        print(f"{term.label:<28} {coef:>16.9g} {fractions.per_term[term]:>12.6f}")
    print(f"fractions physically valid: {'yes' if fractions.valid else 'no'}")
    for msg in model.diagnostics:
        print(f"warning: {msg}")


def cmd_fit(args):
    spec, data = _load_spec_for(args, load_dataset(args.data))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = fit_dataset(spec, data, normalize=not args.no_normalize)
    try:
        fractions = extract_fractions(model)
    except NumericalError:
        fractions = None
    formats.save_model(args.out, model)
    if fractions is None:
        print("warning: coefficients sum to zero; fractions undefined")
    else:
        _print_fit(model, fractions)
    print(f"model written to {args.out}")


def cmd_cv(args):
    spec, data = _load_spec_for(args, load_dataset(args.data))
    label = args.label or spec.label or Path(args.data).stem
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = cross_validate(spec, data, seed=args.seed, label=label, normalize=not args.no_normalize)
    sys.stdout.write(report.table())
    for msg in report.warnings:
        print(f"warning: {msg}")
    if args.out_dir:
        out = Path(args.out_dir)
        formats.write_json(out / f"{label}.cv.json", report.to_dict())
        atomic_write(out / f"{label}.cv.csv", csv_text(SWEEP_HEADER, sweep_rows([report])))


def cmd_predict(args):
    model = formats.load_model(args.model)
    schema = model.spec.schema
    if args.configs:
        _, values = load_configs(args.configs, schema)
    elif args.config:
        given = _pairs(args.config, "--config")
        missing = [n for n in schema.names if n not in given]
        unknown = [n for n in given if n not in schema]
        if missing or unknown:
            raise InputError(f"missing {missing} / unknown {unknown} resources", "--config")
        values = np.array([[given[n] for n in schema.names]])
    else:
        raise InputError("give --config NAME=VALUE ... or --configs FILE", "predict")
    rows = []
    for row in values:
        rows.append([*map(float, row), predict_score(model, row)])
    _emit(csv_text([*schema.names, f"predicted_{SCORE_COLUMN}"], rows), args.out)


def cmd_explore(args):
    model = formats.load_model(args.model)
    ranges = formats.load_ranges(args.ranges)
    cost = CostModel(_pairs(args.cost, "--cost"), args.cost_offset)
    result = explore(model, ranges, args.target, cost, args.limit)
    names = list(model.spec.schema.names)
    out = Path(args.out_dir)
    atomic_write(out / "explore.csv", csv_text(
        [*names, f"predicted_{SCORE_COLUMN}", "cost"],
        [[*c.config.values, c.score, c.cost] for c in result.feasible]))
    formats.write_json(out / "explore.json", {
        "format": "amdahl-explore/1",
        "target": result.target,
        "evaluated": result.evaluated,
        "feasible_total": result.total_feasible,
        "infeasible": result.infeasible,
        "errors": result.errors,
        "feasible": [{"config": c.config.as_dict(), "predicted_score": c.score, "cost": c.cost}
                     for c in result.feasible],
    })
    atomic_write(out / "frontier.csv", csv_text(["cost", f"best_{SCORE_COLUMN}"], frontier(result)))
    print(f"evaluated {result.evaluated} configurations: {result.total_feasible} feasible, "
          f"{result.infeasible} below target, {result.errors} prediction errors")
    if result.feasible:
        best = result.feasible[0]
        shown = ", ".join(f"{n}={v:g}" for n, v in best.config.as_dict().items())
        print(f"cheapest feasible: [{shown}] score {best.score:.6g} cost {best.cost:.6g}")
    print(f"results written to {out}")


def cmd_report(args):
    reports = [CvReport.from_dict(formats.read_json(p), p) for p in args.reports]
    _emit(csv_text(SWEEP_HEADER, sweep_rows(reports)), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amdahl-learn",
        description="Learn multicore performance models with a multi-resource Amdahl's law.",
        epilog="Bundled inputs: " + ", ".join(formats.BUILTIN_PREFIX + n for n in formats.BUILTINS),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a dataset from a known ground-truth model")
    p.add_argument("--ranges", help="range table JSON (default: E1-like ranges)")
    p.add_argument("--truth", help="ground-truth spec JSON (default: built-in fixture)")
    p.add_argument("--n", type=int, default=58, help="rows to sample (default 58)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.0, help="multiplicative noise level")
    p.add_argument("--noise-seed", type=int, default=None, help="noise seed (default: --seed)")
    p.add_argument("--mode", choices=["random-uniform", "full-grid"], default="random-uniform")
    p.add_argument("--out", required=True, help="dataset CSV to write")
    p.add_argument("--truth-out", help="ground-truth JSON to write (default: <out>.truth.json)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit a model and write it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="five-fold cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--label")
    p.add_argument("--out-dir")
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("predict", help="predict scores for configurations")
    p.add_argument("--model", required=True)
    p.add_argument("--config", action="append", metavar="NAME=VALUE")
    p.add_argument("--configs", help="CSV of configurations")
    p.add_argument("--out", help="CSV to write (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("explore", help="find configurations meeting a target score")
    p.add_argument("--model", required=True)
    p.add_argument("--ranges", required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--cost", action="append", metavar="NAME=WEIGHT")
    p.add_argument("--cost-offset", type=float, default=0.0)
    p.add_argument("--limit", type=int, default=100)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("report", help="combine CV report JSONs into one CSV")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", help="CSV to write (default: stdout)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (NumericalError, PredictionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (AmdahlError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
