"""Dataset curation: filters, augmentation variants, rows, split, stats.

Row counts per part are exact closed forms of the augmentation mode:
none -> 1, cut -> n-1, order -> at most cap, cut_and_order -> at most
cap * (n-1).  The train/test split works at part granularity so augmented
rows of one part never leak across the boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyDatasetError
from .geometry import ALL_KINDS, Part
from .kernel import DEFAULT_KERNEL_CONFIG, KernelConfig
from .rng import Stream, derive
from .script import emit
from .sequence import (
    AdjacencyGraph,
    BuildSequence,
    build_graph,
    canonical_order,
    enumerate_orders,
    middle_cut,
    split_all,
    split_at,
)

AUGMENT_MODES = ("none", "cut", "order", "cut_and_order")

ACCEPT = "accept"
TOO_MANY_CELLS = "TooManyCells"
TOO_FEW_CELLS = "TooFewCells"
UNSUPPORTED_SURFACE = "UnsupportedSurface"


@dataclass(frozen=True)
class FilterVerdict:
    accepted: bool
    reason: str = ACCEPT


@dataclass(frozen=True)
class DatasetRow:
    part_id: str
    order: tuple[str, ...]
    cut: int
    input_script: str
    output_script: str
    reused: tuple[str, ...]
    annotation: str | None = None


def filter_part(part: Part, min_cells: int = 2, max_cells: int = 10) -> FilterVerdict:
    """Curation gate: cell count within bounds, only supported surface kinds."""
    if any(s.kind not in ALL_KINDS for s in part.surfaces):
        return FilterVerdict(False, UNSUPPORTED_SURFACE)
    if len(part.cells) > max_cells:
        return FilterVerdict(False, TOO_MANY_CELLS)
    if len(part.cells) < min_cells:
        return FilterVerdict(False, TOO_FEW_CELLS)
    return FilterVerdict(True)


def _sequences_for(part: Part, graph: AdjacencyGraph, augment: str, cap: int,
                   seed: int) -> list[BuildSequence]:
    if augment in ("none", "cut"):
        return [canonical_order(graph)]
    return enumerate_orders(graph, cap, derive(seed, "aug", part.id))


def rows_for_part(part: Part, augment: str, cap: int, seed: int,
                  cfg: KernelConfig = DEFAULT_KERNEL_CONFIG,
                  graph: AdjacencyGraph | None = None) -> list[DatasetRow]:
    if augment not in AUGMENT_MODES:
        raise ValueError(f"unknown augment mode {augment!r}")
    if graph is None:
        graph = build_graph(part, cfg)
    n = len(part.cells)
    rows = []
    for seq in _sequences_for(part, graph, augment, cap, seed):
        if augment in ("none", "order"):
            examples = [split_at(seq, part, middle_cut(n))]
        else:
            examples = split_all(seq, part)
        for ex in examples:
            input_script, output_script = emit(ex, part)
            rows.append(DatasetRow(
                part_id=part.id,
                order=ex.order,
                cut=ex.cut,
                input_script=input_script,
                output_script=output_script,
                reused=ex.reused_surfaces,
            ))
    rows.sort(key=lambda r: (r.part_id, r.order, r.cut))
    return rows


def build_dataset(parts: Sequence[Part], augment: str = "none", cap: int = 24,
                  seed: int = 0, cfg: KernelConfig = DEFAULT_KERNEL_CONFIG,
                  ) -> tuple[list[DatasetRow], dict]:
    """Rows for already filtered and deduplicated parts, plus counters."""
    rows: list[DatasetRow] = []
    for part in sorted(parts, key=lambda p: p.id):
        rows.extend(rows_for_part(part, augment, cap, seed, cfg))
    stats = {
        "parts": len(parts),
        "rows": len(rows),
        "augment": augment,
        "histogram": cell_histogram(parts),
    }
    return rows, stats


def split_dataset(rows: Sequence[DatasetRow], ratio: float, seed: int,
                  ) -> tuple[list[DatasetRow], list[DatasetRow]]:
    """Seeded part-level split; no part contributes to both sides."""
    if not rows:
        raise EmptyDatasetError("no rows to split")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    part_ids = sorted({r.part_id for r in rows})
    stream = Stream(derive(seed, "split"))
    stream.shuffle(part_ids)
    n_train = round(ratio * len(part_ids))
    train_ids = set(part_ids[:n_train])
    train = [r for r in rows if r.part_id in train_ids]
    test = [r for r in rows if r.part_id not in train_ids]
    return train, test


# ---------------------------------------------------------------------------
# Statistics (distribution of parts by cell count)

HIST_BUCKETS = [str(i) for i in range(1, 11)] + [">10"]


def cell_histogram(parts: Iterable[Part]) -> dict[str, int]:
    hist = {b: 0 for b in HIST_BUCKETS}
    for part in parts:
        n = len(part.cells)
        hist[str(n) if n <= 10 else ">10"] += 1
    return hist


def histogram_csv(hist: dict[str, int]) -> str:
    lines = ["cells,parts"]
    lines += [f"{b},{hist[b]}" for b in HIST_BUCKETS]
    return "\n".join(lines) + "\n"


def histogram_text(hist: dict[str, int], width: int = 40) -> str:
    peak = max(hist.values()) or 1
    lines = []
    for b in HIST_BUCKETS:
        bar = "#" * round(width * hist[b] / peak)
        lines.append(f"{b:>3} | {bar} {hist[b]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSONL persistence (fixed key order for reproducible diffs)

def row_to_json(row: DatasetRow) -> str:
    return json.dumps(
        {
            "part_id": row.part_id,
            "order": list(row.order),
            "cut": row.cut,
            "input_script": row.input_script,
            "output_script": row.output_script,
            "reused": list(row.reused),
            "annotation": row.annotation,
        },
        ensure_ascii=False,
    )


def row_from_json(line: str) -> DatasetRow:
    obj = json.loads(line)
    return DatasetRow(
        part_id=obj["part_id"],
        order=tuple(obj["order"]),
        cut=int(obj["cut"]),
        input_script=obj["input_script"],
        output_script=obj["output_script"],
        reused=tuple(obj["reused"]),
        annotation=obj.get("annotation"),
    )


def write_rows(rows: Iterable[DatasetRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(row_to_json(row) + "\n")


def read_rows(path) -> list[DatasetRow]:
    with open(path, "r", encoding="utf-8") as fh:
        return [row_from_json(line) for line in fh if line.strip()]
