"""Automatic correctness metrics for model-generated completions.

Each example is an (input script, generated completion, ground-truth
completion) triple.  The generated text is parsed in the context of the
input (concatenated), its cells are combined with the input cells, and the
geometry checks run over that combined set: connectivity means one face-
contact component, overlap means some pair of interiors intersects.
Comparison against the ground truth uses the canonical-form machinery.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from . import script as scripting
from .errors import BadInputError, EmptyDatasetError, ScriptError
from .geometry import merge_coincident
from .kernel import DEFAULT_KERNEL_CONFIG, KernelConfig, all_connected, cells_overlap, is_bounded

BOOL_METRICS = (
    "correct_syntax",
    "all_cells_connected",
    "no_overlapping_cells",
    "correct_syntax_and_logic",
    "all_surfaces_used",
    "same_number_of_cells",
    "structural_match",
    "exact_match",
)

MAX_BUCKET = 9  # cell-count matrices cover 1..9 plus a "10+" column


@dataclass(frozen=True)
class MetricsRow:
    example_id: str
    correct_syntax: bool
    all_cells_connected: bool
    no_overlapping_cells: bool
    correct_syntax_and_logic: bool
    all_surfaces_used: bool
    same_number_of_cells: bool
    structural_match: bool
    exact_match: bool
    n_input_cells: int
    n_truth_cells: int
    n_generated_cells: int
    note: str = ""


@dataclass(frozen=True)
class MetricsReport:
    n_rows: int
    means: dict
    # cell-count matrix: rows = truth cell count 1..9, columns = generated
    # count 1..9 and "10+"; each row normalized to sum 1 when populated
    cell_count_matrix: list
    cell_count_rows: list
    # equality matrix: rows = input cell count 1..9, columns = truth cell
    # count 1..9; entries = share of structural matches
    equality_matrix: list
    equality_counts: list


def _failure_row(example_id: str, n_input: int, n_truth: int, note: str) -> MetricsRow:
    return MetricsRow(
        example_id=example_id,
        correct_syntax=False,
        all_cells_connected=False,
        no_overlapping_cells=False,
        correct_syntax_and_logic=False,
        all_surfaces_used=False,
        same_number_of_cells=False,
        structural_match=False,
        exact_match=False,
        n_input_cells=n_input,
        n_truth_cells=n_truth,
        n_generated_cells=0,
        note=note,
    )


def evaluate_example(input_text: str, generated_text: str, truth_text: str,
                     cfg: KernelConfig = DEFAULT_KERNEL_CONFIG,
                     example_id: str = "") -> MetricsRow:
    """Score one generated completion.  The input and truth sides are
    trusted; if they do not parse the example itself is broken."""
    try:
        input_ast = scripting.parse(input_text)
        truth_full = scripting.parse(input_text + truth_text)
    except ScriptError as err:
        raise BadInputError(f"example {example_id}: trusted side invalid: {err}") from err
    n_input = len(input_ast.cells)
    truth_view = scripting.completion_view(truth_full, n_input)
    n_truth = len(truth_view.cells)

    try:
        full = scripting.parse(input_text + generated_text)
    except ScriptError as err:
        return _failure_row(example_id, n_input, n_truth, f"parse: {err}")

    gen_view = scripting.completion_view(full, n_input)
    n_generated = len(gen_view.cells)

    header = full.reuse_header or ()
    gen_referenced = {sid for c in gen_view.cells for _, sid in c.region}
    all_surfaces_used = all(sid in gen_referenced for sid in header)

    combined = merge_coincident(scripting.resolve_cells(full))
    gen_cells = combined[n_input:]
    unbounded = [c.id for c in gen_cells if not is_bounded(c)]
    note = ""
    if unbounded:
        note = f"unbounded generated cells: {', '.join(unbounded)}"
        connected = False
        no_overlap = False
    else:
        connected = all_connected(combined, cfg)
        no_overlap = True
        for i in range(len(combined)):
            for j in range(i + 1, len(combined)):
                if cells_overlap(combined[i], combined[j], cfg):
                    no_overlap = False
                    break
            if not no_overlap:
                break

    verdict = scripting.compare(gen_view, truth_view)
    return MetricsRow(
        example_id=example_id,
        correct_syntax=True,
        all_cells_connected=connected,
        no_overlapping_cells=no_overlap,
        correct_syntax_and_logic=connected and no_overlap,
        all_surfaces_used=all_surfaces_used,
        same_number_of_cells=verdict.same_cell_count,
        structural_match=verdict.structural,
        exact_match=verdict.exact,
        n_input_cells=n_input,
        n_truth_cells=n_truth,
        n_generated_cells=n_generated,
        note=note,
    )


def aggregate(rows) -> MetricsReport:
    rows = list(rows)
    if not rows:
        raise EmptyDatasetError("no rows to aggregate")
    means = {
        name: sum(1 for r in rows if getattr(r, name)) / len(rows)
        for name in BOOL_METRICS
    }

    counts = [[0] * (MAX_BUCKET + 1) for _ in range(MAX_BUCKET)]
    for r in rows:
        # generated-count distribution per truth count; rows without any
        # generated cell have no bucket and are left out
        if 1 <= r.n_truth_cells <= MAX_BUCKET and r.n_generated_cells >= 1:
            col = min(r.n_generated_cells, MAX_BUCKET + 1) - 1
            counts[r.n_truth_cells - 1][col] += 1
    matrix = []
    row_totals = []
    for row in counts:
        total = sum(row)
        row_totals.append(total)
        matrix.append([c / total if total else 0.0 for c in row])

    eq_hits = [[0] * MAX_BUCKET for _ in range(MAX_BUCKET)]
    eq_counts = [[0] * MAX_BUCKET for _ in range(MAX_BUCKET)]
    for r in rows:
        if 1 <= r.n_input_cells <= MAX_BUCKET and 1 <= r.n_truth_cells <= MAX_BUCKET:
            eq_counts[r.n_input_cells - 1][r.n_truth_cells - 1] += 1
            if r.structural_match:
                eq_hits[r.n_input_cells - 1][r.n_truth_cells - 1] += 1
    equality = [
        [h / c if c else 0.0 for h, c in zip(hrow, crow)]
        for hrow, crow in zip(eq_hits, eq_counts)
    ]
    return MetricsReport(
        n_rows=len(rows),
        means=means,
        cell_count_matrix=matrix,
        cell_count_rows=row_totals,
        equality_matrix=equality,
        equality_counts=eq_counts,
    )


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(asdict(report), indent=2) + "\n"


def write_matrices(report: MetricsReport, out_dir) -> list[Path]:
    """One CSV per figure-style matrix; empty buckets stay blank."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    p1 = out_dir / "cell_count_matrix.csv"
    with p1.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["truth_cells"] + [str(i) for i in range(1, MAX_BUCKET + 1)] + ["10+"])
        for i, row in enumerate(report.cell_count_matrix):
            filled = [f"{v:.6f}" if report.cell_count_rows[i] else "" for v in row]
            w.writerow([str(i + 1)] + filled)
    paths.append(p1)

    p2 = out_dir / "ground_truth_equality.csv"
    with p2.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["input_cells"] + [str(i) for i in range(1, MAX_BUCKET + 1)])
        for i, row in enumerate(report.equality_matrix):
            filled = [
                f"{v:.6f}" if report.equality_counts[i][j] else ""
                for j, v in enumerate(row)
            ]
            w.writerow([str(i + 1)] + filled)
    paths.append(p2)
    return paths
