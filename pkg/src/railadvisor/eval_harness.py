"""Run answering systems over evaluation sets and aggregate per-category metrics.

A "system" here is any question -> answer callable.  Reports carry the
arithmetic mean of ROUGE-1/2/L and BLEU per category; comparisons add a
delta row in percentage points.  The chunk sweep rebuilds the index at
several fixed chunk sizes and evaluates the same system at each.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .corpus import Category, Document
from .dataset_forge import QAPair
from .errors import UnknownSystemName
from .eval_metrics import ScoreSet, score_pair

_CATEGORY_ORDER = {cat: i for i, cat in enumerate(Category)}
_METRIC_KEYS = ("r1", "r2", "rl", "bleu")
_METRIC_LABELS = ("R1", "R2", "RL", "B")


@dataclass
class MetricReport:
    system_name: str
    per_category: dict[Category, ScoreSet] = field(default_factory=dict)
    example_count: dict[Category, int] = field(default_factory=dict)
    failure_count: dict[Category, int] = field(default_factory=dict)

    def categories(self) -> list[Category]:
        return sorted(self.per_category, key=_CATEGORY_ORDER.get)

    def to_dict(self) -> dict:
        return {
            "system_name": self.system_name,
            "per_category": {
                cat.value: self.per_category[cat].to_dict() for cat in self.categories()
            },
            "example_count": {
                cat.value: self.example_count.get(cat, 0) for cat in self.categories()
            },
            "failure_count": {
                cat.value: self.failure_count.get(cat, 0) for cat in self.categories()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        report = cls(system_name=d["system_name"])
        for cat_name, scores in d["per_category"].items():
            cat = Category.parse(cat_name)
            report.per_category[cat] = ScoreSet(**scores)
            report.example_count[cat] = int(d.get("example_count", {}).get(cat_name, 0))
            report.failure_count[cat] = int(d.get("failure_count", {}).get(cat_name, 0))
        return report


def save_report(report: MetricReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def load_report(path: str | Path) -> MetricReport:
    return MetricReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def evaluate(
    system: Callable[[str], str],
    eval_set: list[QAPair],
    system_name: str = "system",
    dump_path: str | Path | None = None,
) -> MetricReport:
    """Score ``system`` against the reference answers in ``eval_set``.

    Examples run in deterministic (category, id) order.  A system failure
    on an example scores all-zero and is counted, never aborting the run.
    With ``dump_path`` the per-example scores are written as JSONL for
    audit.
    """
    if not eval_set:
        raise ValueError("eval_set must be nonempty")
    ordered = sorted(eval_set, key=lambda p: (_CATEGORY_ORDER[p.category], p.id))
    sums: dict[Category, list[float]] = {}
    counts: dict[Category, int] = {}
    failures: dict[Category, int] = {}
    dump_rows: list[dict] = []
    for pair in ordered:
        try:
            answer = system(pair.question)
        except Exception as exc:  # noqa: BLE001 - flagged, not fatal
            answer = ""
            failures[pair.category] = failures.get(pair.category, 0) + 1
            scores = ScoreSet(0.0, 0.0, 0.0, 0.0)
            dump_rows.append(
                {"id": pair.id, "error": str(exc), **scores.to_dict()}
            )
        else:
            scores = score_pair(answer, pair.answer)
            dump_rows.append({"id": pair.id, **scores.to_dict()})
        acc = sums.setdefault(pair.category, [0.0, 0.0, 0.0, 0.0])
        for i, value in enumerate(scores.as_tuple()):
            acc[i] += value
        counts[pair.category] = counts.get(pair.category, 0) + 1
    report = MetricReport(system_name=system_name)
    for cat, acc in sums.items():
        n = counts[cat]
        report.per_category[cat] = ScoreSet(*(v / n for v in acc))
        report.example_count[cat] = n
        report.failure_count[cat] = failures.get(cat, 0)
    if dump_path is not None:
        with open(dump_path, "w", encoding="utf-8") as fh:
            for row in dump_rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return report


@dataclass
class ComparisonTable:
    rows: list[MetricReport]
    baseline_name: str
    treatment_name: str
    # category -> metric key -> treatment minus baseline, in score units
    deltas: dict[Category, dict[str, float]] = field(default_factory=dict)


def compare(
    reports: list[MetricReport], baseline_name: str, treatment_name: str
) -> ComparisonTable:
    """Delta row = treatment - baseline, reported in percentage points."""
    by_name = {r.system_name: r for r in reports}
    for name in (baseline_name, treatment_name):
        if name not in by_name:
            raise UnknownSystemName(f"no report named {name!r}")
    baseline = by_name[baseline_name]
    treatment = by_name[treatment_name]
    deltas: dict[Category, dict[str, float]] = {}
    for cat in treatment.categories():
        if cat not in baseline.per_category:
            continue
        t = treatment.per_category[cat].to_dict()
        b = baseline.per_category[cat].to_dict()
        deltas[cat] = {key: t[key] - b[key] for key in _METRIC_KEYS}
    return ComparisonTable(
        rows=list(reports),
        baseline_name=baseline_name,
        treatment_name=treatment_name,
        deltas=deltas,
    )


def _all_categories(reports: list[MetricReport]) -> list[Category]:
    cats = {cat for r in reports for cat in r.per_category}
    return sorted(cats, key=_CATEGORY_ORDER.get)


def render_comparison_table(table: ComparisonTable) -> str:
    """Aligned text table: one row per system, metric columns per category,
    then a delta row in percentage points."""
    categories = _all_categories(table.rows)
    header_1 = ["Models"]
    header_2 = [""]
    for cat in categories:
        header_1 += [cat.display_name] + [""] * (len(_METRIC_LABELS) - 1)
        header_2 += list(_METRIC_LABELS)
    body: list[list[str]] = []
    for report in table.rows:
        row = [report.system_name]
        for cat in categories:
            scores = report.per_category.get(cat)
            if scores is None:
                row += ["-"] * len(_METRIC_KEYS)
            else:
                row += [f"{scores.to_dict()[key]:.2f}" for key in _METRIC_KEYS]
        body.append(row)
    if table.deltas:
        delta_row = [f"Δ% ({table.baseline_name})"]
        for cat in categories:
            cat_deltas = table.deltas.get(cat)
            if cat_deltas is None:
                delta_row += ["-"] * len(_METRIC_KEYS)
            else:
                delta_row += [f"{cat_deltas[key] * 100:+.2f}%" for key in _METRIC_KEYS]
        body.append(delta_row)
    rows = [header_1, header_2] + body
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = [
        "  ".join(f"{cell:<{widths[i]}}" for i, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    return "\n".join(lines)


def comparison_csv(table: ComparisonTable) -> str:
    categories = _all_categories(table.rows)
    header = ["system"]
    for cat in categories:
        header += [f"{cat.value}_{key}" for key in _METRIC_KEYS]
    lines = [",".join(header)]
    for report in table.rows:
        row = [report.system_name]
        for cat in categories:
            scores = report.per_category.get(cat)
            row += (
                [f"{scores.to_dict()[key]:.6f}" for key in _METRIC_KEYS]
                if scores
                else [""] * len(_METRIC_KEYS)
            )
        lines.append(",".join(row))
    delta = [f"delta_pp({table.treatment_name}-{table.baseline_name})"]
    for cat in categories:
        cat_deltas = table.deltas.get(cat)
        delta += (
            [f"{cat_deltas[key] * 100:+.2f}" for key in _METRIC_KEYS]
            if cat_deltas
            else [""] * len(_METRIC_KEYS)
        )
    lines.append(",".join(delta))
    return "\n".join(lines) + "\n"


def render_report_table(report: MetricReport) -> str:
    return render_comparison_table(
        ComparisonTable(rows=[report], baseline_name=report.system_name,
                        treatment_name=report.system_name, deltas={})
    )


@dataclass
class SweepResult:
    reports: dict[int, MetricReport] = field(default_factory=dict)
    errors: dict[int, str] = field(default_factory=dict)


def chunk_sweep(
    documents: list[Document],
    sizes: list[int],
    eval_set: list[QAPair],
    engine_factory: Callable[[list[Document], int], Callable[[str], str]],
    out_dir: str | Path | None = None,
) -> SweepResult:
    """Evaluate the same system over indexes rebuilt at each chunk size.

    ``engine_factory(documents, size)`` must return the question->answer
    callable for that size.  Per-size failures are recorded and the sweep
    continues.  With ``out_dir`` set, per-size reports, per-example score
    dumps, and a combined CSV land there.
    """
    if not sizes:
        raise ValueError("sizes must be nonempty")
    if len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be distinct")
    result = SweepResult()
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for size in sizes:
        try:
            system = engine_factory(documents, size)
            dump = out / f"sweep_{size}.examples.jsonl" if out else None
            report = evaluate(
                system, eval_set, system_name=f"chunk{size}", dump_path=dump
            )
        except Exception as exc:  # noqa: BLE001 - sweep must continue
            result.errors[size] = str(exc)
            continue
        result.reports[size] = report
        if out is not None:
            (out / f"sweep_{size}.report.txt").write_text(
                render_report_table(report) + "\n", encoding="utf-8"
            )
            save_report(report, out / f"sweep_{size}.report.json")
    if out is not None:
        (out / "sweep.csv").write_text(sweep_csv(result), encoding="utf-8")
    return result


def sweep_csv(result: SweepResult) -> str:
    lines = ["chunk_size,category,r1,r2,rl,bleu,examples"]
    for size in sorted(result.reports):
        report = result.reports[size]
        for cat in report.categories():
            s = report.per_category[cat]
            lines.append(
                f"{size},{cat.value},{s.r1:.6f},{s.r2:.6f},{s.rl:.6f},{s.bleu:.6f},"
                f"{report.example_count.get(cat, 0)}"
            )
    return "\n".join(lines) + "\n"
