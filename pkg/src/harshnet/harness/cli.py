"""Command line entry point.

Exit codes: 0 success, 2 invalid input, 3 too many non-converged samples.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from ..envgen import generate_dataset, load_csv, save_csv, split
from ..game import CapUnsatisfiable, UnboundedGame
from ..predictor import evaluate, load_model, predict_batch, save_model, train
from . import outputs
from .experiment import compare_on, prepare_model
from .scenario import ScenarioError, load_scenario

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3

log = logging.getLogger("harshnet")


def _dataset(args, sc):
    if getattr(args, "data", None):
        return load_csv(args.data)
    return generate_dataset(sc.dataset_size, sc.dataset_seed)


def _split(args, sc):
    return split(_dataset(args, sc), sc.train_fraction, sc.split_seed)


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_gen_data(args, sc):
    ds = generate_dataset(args.n or sc.dataset_size, sc.dataset_seed)
    save_csv(ds, args.out)
    print(f"wrote {len(ds)} samples to {args.out}")
    return EXIT_OK


def cmd_train(args, sc):
    tr, te = _split(args, sc)
    model, history = train(tr, sc.hyper, sc.train_seed)
    save_model(model, args.out)
    m = evaluate(model, te)
    _emit({"model": str(args.out), "epochs": len(history), "first_loss": history[0],
           "last_loss": history[-1], "test": m.to_dict()})
    return EXIT_OK


def cmd_eval(args, sc):
    _, te = _split(args, sc)
    _emit(evaluate(load_model(args.model), te).to_dict())
    return EXIT_OK


def cmd_predict(args, sc):
    model = load_model(args.model)
    ds = load_csv(args.input)
    pred = predict_batch(model, ds.features)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["sample_id", "r_hat"])
    for i, p in zip(ds.ids, pred):
        w.writerow([int(i), repr(float(p))])
    return EXIT_OK


def cmd_allocate(args, sc):
    from .experiment import allocate
    if args.r_hat <= 0:
        raise ValueError("--r-hat must be positive")
    tuning = allocate(sc.game_config(), args.r_hat, sc)
    res = tuning.result
    _emit({"r_hat": args.r_hat, "lambda": tuning.lam, "binding": tuning.binding,
           "converged": res.converged, "iterations": res.iterations,
           "powers": res.powers.tolist(), "rates": res.rates.tolist(), "total_rate": res.total_rate})
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_compare(args, sc):
    if args.model:
        model, history = load_model(args.model), []
        _, te = _split(args, sc)
    elif getattr(args, "data", None):
        tr, te = _split(args, sc)
        model, history = train(tr, sc.hyper, sc.train_seed)
    else:
        model, _, te, history = prepare_model(sc)
    report = compare_on(sc, model, te, history)
    out = Path(args.out_dir or sc.output_dir)
    outputs.emit_outputs(report, out, sc)
    s = report.summary()
    _emit({k: s[k] for k in ("samples", "included", "excluded_nonconverged",
                             "power_reduction_pct", "sinr_gain_pct", "sinr_gain_db")} | {"output_dir": str(out)})
    if report.excluded_fraction > sc.nonconvergence_tolerance:
        log.error("%d of %d samples did not converge", report.excluded_count, len(report.samples))
        return EXIT_NONCONVERGED
    return EXIT_OK


def _read_rows(path: Path) -> list[dict]:
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def cmd_plot(args, sc):
    """Redraw the SVG panels from an existing output directory."""
    out = Path(args.out_dir or sc.output_dir)
    try:
        summary = json.loads((out / "report.json").read_text(encoding="utf-8"))["summary"]
        pred_rows = _read_rows(out / "prediction.csv")
        conv_rows = _read_rows(out / "convergence.csv")
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise ValueError(f"{out} does not hold comparison results: {exc}") from exc
    truth = [float(r["r_true"]) for r in pred_rows]
    pred = [float(r["r_hat"]) for r in pred_rows]
    by_sample: dict[int, list[dict]] = {}
    for r in conv_rows:
        by_sample.setdefault(int(r["sample_id"]), []).append(r)
    result, sid = None, None
    if by_sample:
        sid = min(by_sample, key=lambda k: (-len(by_sample[k]), k))
        rows = by_sample[sid]
        trace = {}
        for prefix in ("p_", "u_"):
            cols = sorted((c for c in conv_rows[0] if c.startswith(prefix)), key=lambda c: int(c[2:]))
            trace[prefix] = np.array([[float(r[c]) for c in cols] for r in rows])
        result = SimpleNamespace(power_trace=trace["p_"], utility_trace=trace["u_"])
    for k in ("proposed", "baseline"):
        for f in ("avg_power_w", "avg_sinr"):
            summary[k][f] = float("nan") if summary[k][f] is None else summary[k][f]
    files = {"fig_a_prediction.svg": outputs.prediction_svg(truth, pred, args.order),
             "fig_b_convergence.svg": outputs.convergence_svg(result, sid, args.trace),
             "fig_c_power.svg": outputs.power_svg(summary),
             "fig_d_sinr.svg": outputs.sinr_svg(summary)}
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    print(f"wrote {len(files)} plots to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file (default: built-in scenario)")
    common.add_argument("--seed", type=int, help="override every seed in the scenario")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="harshnet", description="Throughput prediction and priced power control.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-data", parents=[common], help="write a synthetic dataset CSV")
    s.add_argument("--out", required=True)
    s.add_argument("--n", type=int, help="number of samples (default from scenario)")
    s.set_defaults(func=cmd_gen_data)

    s = sub.add_parser("train", parents=[common], help="train the predictor and save it")
    s.add_argument("--data", help="dataset CSV (default: generate from scenario)")
    s.add_argument("--out", required=True, help="model JSON path")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", parents=[common], help="test-split metrics of a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--data")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("predict", parents=[common], help="predict throughput for a dataset CSV")
    s.add_argument("--model", required=True)
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("allocate", parents=[common], help="equilibrium powers for one throughput cap")
    s.add_argument("--r-hat", type=float, required=True, help="predicted throughput cap (Mbps)")
    s.set_defaults(func=cmd_allocate)

    s = sub.add_parser("compare", parents=[common], help="full comparison against the static baseline")
    s.add_argument("--model", help="saved model (default: train one)")
    s.add_argument("--data")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("plot", parents=[common], help="redraw SVG panels from a results directory")
    s.add_argument("--out-dir")
    s.add_argument("--order", choices=["ascending", "chronological"], default="ascending",
                   help="sample order of the prediction panel")
    s.add_argument("--trace", choices=["power", "utility"], default="power",
                   help="quantity drawn in the convergence panel")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = load_scenario(args.config)
        if args.seed is not None:
            sc = sc.with_seed(args.seed)
        return args.func(args, sc)
    except (ScenarioError, ValueError, UnboundedGame, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CapUnsatisfiable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
