"""Result files: per-sample CSVs, the JSON report and four SVG panels.

Everything here is deterministic. Floats go through ``repr`` in CSVs and a
fixed ``%.3f`` in SVG coordinates, and no timestamps are written.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..servicemgmt import events_csv
from .experiment import ComparisonReport, SampleOutcome, db

METRIC_COLUMNS = [
    "sample_id", "r_true", "r_hat", "lambda", "binding", "converged", "iterations",
    "proposed_avg_power_w", "proposed_avg_sinr", "proposed_avg_sinr_db", "proposed_total_rate_mbps",
    "baseline_avg_power_w", "baseline_avg_sinr", "baseline_avg_sinr_db", "baseline_total_rate_mbps",
    "baseline_admitted",
]


def _f(x) -> str:
    return repr(float(x))


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def metrics_csv(samples: list[SampleOutcome]) -> str:
    rows = [[s.sample_id, _f(s.r_true), _f(s.r_hat), _f(s.lam), int(s.binding), int(s.converged),
             s.iterations, _f(s.proposed_avg_power), _f(s.proposed_avg_sinr), _f(db(s.proposed_avg_sinr)),
             _f(s.proposed_total_rate), _f(s.baseline_avg_power), _f(s.baseline_avg_sinr),
             _f(db(s.baseline_avg_sinr)), _f(s.baseline_total_rate), s.baseline_admitted]
            for s in samples]
    return _csv(rows, METRIC_COLUMNS)


def convergence_csv(traces: list[tuple[int, object]], n_services: int) -> str:
    """Wide iteration traces; ``traces`` holds (sample_id, EquilibriumResult) pairs.

    Iteration 0 is the initial profile and has an empty difference cell.
    """
    header = (["sample_id", "iteration", "frobenius_diff"]
              + [f"p_{l}" for l in range(n_services)] + [f"u_{l}" for l in range(n_services)])
    rows = []
    for sid, res in traces:
        for it in range(res.power_trace.shape[0]):
            diff = "" if it == 0 else _f(res.trace[it - 1])
            rows.append([sid, it, diff] + [_f(v) for v in res.power_trace[it]]
                        + [_f(v) for v in res.utility_trace[it]])
    return _csv(rows, header)


def prediction_csv(ids, truth, pred) -> str:
    """Chronological rows with the ascending-by-truth rank alongside."""
    truth = np.asarray(truth, dtype=float)
    rank = np.empty(len(truth), dtype=int)
    rank[np.argsort(truth, kind="stable")] = np.arange(len(truth))
    rows = [[int(i), _f(t), _f(p), int(k)] for i, t, p, k in zip(ids, truth, pred, rank)]
    return _csv(rows, ["sample_id", "r_true", "r_hat", "ascending_rank"])


# --- SVG -------------------------------------------------------------------

W, H = 480, 320
MARGIN = dict(left=60, right=20, top=36, bottom=48)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"]


def _num(x: float) -> str:
    return "%.3f" % x


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


class _Plot:
    def __init__(self, title: str, xlabel: str, ylabel: str, xlim, ylim):
        self.parts: list[str] = []
        self.xlim, self.ylim = xlim, ylim
        self.x0, self.x1 = MARGIN["left"], W - MARGIN["right"]
        self.y0, self.y1 = H - MARGIN["bottom"], MARGIN["top"]
        self.parts.append(f'<text x="{W // 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
        self.parts.append(f'<text x="{W // 2}" y="{H - 8}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
        self.parts.append(f'<text x="14" y="{H // 2}" text-anchor="middle" font-size="12" '
                          f'transform="rotate(-90 14 {H // 2})">{escape(ylabel)}</text>')
        self.parts.append(f'<rect x="{self.x0}" y="{self.y1}" width="{self.x1 - self.x0}" '
                          f'height="{self.y0 - self.y1}" fill="none" stroke="#000"/>')
        for v in _ticks(*ylim):
            y = self.sy(v)
            self.parts.append(f'<line x1="{self.x0 - 4}" y1="{_num(y)}" x2="{self.x0}" y2="{_num(y)}" stroke="#000"/>')
            self.parts.append(f'<text x="{self.x0 - 6}" y="{_num(y + 4)}" text-anchor="end" font-size="10">{v:.3g}</text>')

    def sx(self, v: float) -> float:
        lo, hi = self.xlim
        return self.x0 + (v - lo) / ((hi - lo) or 1.0) * (self.x1 - self.x0)

    def sy(self, v: float) -> float:
        lo, hi = self.ylim
        return self.y0 - (v - lo) / ((hi - lo) or 1.0) * (self.y0 - self.y1)

    def xticks(self, values, labels=None):
        for i, v in enumerate(values):
            x = self.sx(v)
            text = labels[i] if labels else f"{v:.3g}"
            self.parts.append(f'<line x1="{_num(x)}" y1="{self.y0}" x2="{_num(x)}" y2="{self.y0 + 4}" stroke="#000"/>')
            self.parts.append(f'<text x="{_num(x)}" y="{self.y0 + 16}" text-anchor="middle" font-size="10">'
                              f'{escape(text)}</text>')

    def line(self, xs, ys, color: str, label: str, slot: int):
        pts = " ".join(f"{_num(self.sx(x))},{_num(self.sy(y))}" for x, y in zip(xs, ys))
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        self._legend(color, label, slot)

    def bar(self, x: float, width: float, value: float, color: str, note: str):
        top, base = self.sy(value), self.sy(max(self.ylim[0], 0.0))
        y, h = min(top, base), abs(base - top)
        self.parts.append(f'<rect x="{_num(self.sx(x) - width / 2)}" y="{_num(y)}" width="{_num(width)}" '
                          f'height="{_num(h)}" fill="{color}"/>')
        self.parts.append(f'<text x="{_num(self.sx(x))}" y="{_num(y - 4)}" text-anchor="middle" '
                          f'font-size="10">{escape(note)}</text>')

    def _legend(self, color: str, label: str, slot: int):
        y = self.y1 + 12 + 14 * slot
        self.parts.append(f'<line x1="{self.x1 - 110}" y1="{y}" x2="{self.x1 - 92}" y2="{y}" stroke="{color}" '
                          f'stroke-width="2"/>')
        self.parts.append(f'<text x="{self.x1 - 88}" y="{y + 4}" font-size="10">{escape(label)}</text>')

    def svg(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
                f'viewBox="0 0 {W} {H}">\n<rect width="{W}" height="{H}" fill="#fff"/>\n{body}\n</svg>\n')


def _span(values) -> tuple[float, float]:
    v = [x for x in values if math.isfinite(x)]
    if not v:
        return 0.0, 1.0
    lo, hi = min(v), max(v)
    pad = 0.05 * (hi - lo or 1.0)
    return lo - pad, hi + pad


def prediction_svg(truth, pred, order: str = "ascending") -> str:
    """Panel (a): prediction against ground truth.

    ``order`` is ``ascending`` (sorted by true throughput) or
    ``chronological`` (test-set order).
    """
    t, p = np.asarray(truth, dtype=float), np.asarray(pred, dtype=float)
    if order == "ascending":
        idx = np.argsort(t, kind="stable")
        t, p = t[idx], p[idx]
        xlabel = "sample (ascending true throughput)"
    elif order == "chronological":
        xlabel = "sample (chronological)"
    else:
        raise ValueError(f"unknown order {order!r}")
    xs = list(range(len(t)))
    plot = _Plot("Throughput prediction (test set)", xlabel,
                 "throughput (Mbps)", (0, max(len(t) - 1, 1)), _span(list(t) + list(p)))
    plot.xticks(_ticks(0, max(len(t) - 1, 1)))
    plot.line(xs, t, COLORS[0], "true", 0)
    plot.line(xs, p, COLORS[1], "predicted", 1)
    return plot.svg()


def convergence_svg(result, sample_id: int | None, quantity: str = "power") -> str:
    """Panel (b): per-service power or utility over best-response iterations."""
    if quantity not in ("power", "utility"):
        raise ValueError(f"unknown quantity {quantity!r}")
    ylabel = "power (W)" if quantity == "power" else "utility"
    if result is None:
        plot = _Plot("Best-response convergence (no sample)", "iteration", ylabel, (0, 1), (0, 1))
        return plot.svg()
    pt = result.power_trace if quantity == "power" else result.utility_trace
    its = list(range(pt.shape[0]))
    plot = _Plot(f"Best-response convergence (sample {sample_id})", "iteration", ylabel,
                 (0, max(len(its) - 1, 1)), _span(pt.ravel().tolist()))
    plot.xticks(its if len(its) <= 12 else _ticks(0, len(its) - 1))
    for l in range(pt.shape[1]):
        plot.line(its, pt[:, l], COLORS[l % len(COLORS)], f"service {l}", l)
    return plot.svg()


def _bars(title: str, ylabel: str, proposed: float, baseline: float, fmt: str) -> str:
    top = max(proposed, baseline, 0.0)
    plot = _Plot(title, "scheme", ylabel, (0, 3), (0.0, 1.15 * top if top > 0 else 1.0))
    plot.xticks([1, 2], ["proposed", "static baseline"])
    plot.bar(1, 80, proposed, COLORS[0], fmt % proposed)
    plot.bar(2, 80, baseline, COLORS[1], fmt % baseline)
    return plot.svg()


def power_svg(summary: dict) -> str:
    """Panel (c): average transmit power."""
    return _bars("Average power", "power (W)", summary["proposed"]["avg_power_w"],
                 summary["baseline"]["avg_power_w"], "%.3f W")


def sinr_svg(summary: dict) -> str:
    """Panel (d): average SINR, bar heights linear, labels in dB."""
    ps, bs = summary["proposed"]["avg_sinr"], summary["baseline"]["avg_sinr"]
    plot_text = _bars("Average SINR", "SINR (linear)", ps, bs, "%.3f")
    notes = (f'<text x="{W // 2}" y="{MARGIN["top"] + 14}" text-anchor="middle" font-size="10">'
             f'{db(ps):.2f} dB vs {db(bs):.2f} dB</text>\n</svg>\n')
    return plot_text.replace("</svg>\n", notes)


def representative(report: ComparisonReport) -> SampleOutcome | None:
    """Converged sample with the longest run; lowest id on ties."""
    rows = [s for s in report.included if s.result is not None]
    if not rows:
        return None
    return min(rows, key=lambda s: (-s.iterations, s.sample_id))


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    return obj


def report_json(report: ComparisonReport, scenario=None) -> str:
    doc = {"summary": report.summary(),
           "events": [{"time_step": e.step, "event_type": e.kind, "service_id": e.service_id,
                       "group_id": e.group_id} for e in report.events],
           "training_loss": list(report.training_loss)}
    if scenario is not None:
        doc["scenario"] = scenario.to_dict()
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def emit_outputs(report: ComparisonReport, out_dir: str | Path, scenario=None,
                 order: str = "ascending") -> list[Path]:
    """Write every result file under ``out_dir`` and return their paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    n_services = next((s.result.powers.size for s in report.samples if s.result is not None), 0)
    traces = [(s.sample_id, s.result) for s in report.samples if s.result is not None]
    rep = representative(report)
    summary = report.summary()
    files = {
        "metrics.csv": metrics_csv(report.samples),
        "convergence.csv": convergence_csv(traces, n_services),
        "prediction.csv": prediction_csv(report.test_ids, report.test_truth, report.test_pred),
        "events.csv": events_csv(report.events),
        "report.json": report_json(report, scenario),
        "fig_a_prediction.svg": prediction_svg(report.test_truth, report.test_pred, order),
        "fig_b_convergence.svg": convergence_svg(rep.result if rep else None, rep.sample_id if rep else None),
        "fig_c_power.svg": power_svg(summary),
        "fig_d_sinr.svg": sinr_svg(summary),
    }
    paths = []
    for name, text in files.items():
        p = out / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths
