"""cellforge command line: decompose, dedup, sequences, emit, render,
annotate, build, split, validate, stats.

Exit codes: 0 ok, 1 usage/config, 2 data error, 3 transport error.
Everything except the annotation stage is deterministic for a fixed seed,
including --jobs > 1: workers compute, the main thread assembles results in
sorted order before writing a byte.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__, annotate as annotate_mod, csg, dataset as ds, dedup as dedup_mod
from . import decompose as dec_mod, geometry, metrics as metrics_mod, render as render_mod
from . import script as script_mod, sequence as seq_mod
from .config import ConfigError, PipelineConfig, load_config
from .errors import CellforgeError, TransportError

log = logging.getLogger("cellforge")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="cellforge", description=__doc__)
    p.add_argument("--version", action="version", version=f"cellforge {__version__}")
    p.add_argument("--config", metavar="FILE", help="flat key=value config file")
    p.add_argument("--seed", type=int, help="global seed override")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for part-parallel stages")
    p.add_argument("--quiet", action="store_true", help="suppress progress logging")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("decompose", help="CSG expression JSON -> part JSON")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out", dest="outfile", required=True)
    c.add_argument("--no-merge", action="store_true")
    c.add_argument("--id", dest="part_id", help="part id (default: input file stem)")

    c = sub.add_parser("sequences", help="connected build orders of a part")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--cap", type=int, default=24, help="max orders; <= 0 means unlimited")
    c.add_argument("--out", dest="outfile", required=True)

    c = sub.add_parser("emit", help="script rows for one part")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--augment", choices=ds.AUGMENT_MODES)
    c.add_argument("--cap", type=int)
    c.add_argument("--out", dest="outfile", required=True)

    c = sub.add_parser("dedup", help="drop similarity duplicates from a part directory")
    c.add_argument("--in", dest="indir", required=True)
    c.add_argument("--out", dest="outfile", required=True, help="kept parts, JSONL")
    c.add_argument("--report", required=True, help="dropped part CSV")

    c = sub.add_parser("render", help="4-view PGM renderings of a part")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--size", type=int)
    c.add_argument("--out-dir", dest="outdir", required=True)
    c.add_argument("--top", action="store_true", help="also write the straight-down debug view")

    c = sub.add_parser("annotate", help="fill dataset row annotations via the HTTP endpoint")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out", dest="outfile", required=True)
    c.add_argument("--url", help="endpoint override")
    c.add_argument("--model", help="model name override")

    c = sub.add_parser("build", help="full pipeline: exprs -> curated parts -> dataset rows")
    c.add_argument("--in", dest="indir", required=True, help="directory of CSG expression JSON")
    c.add_argument("--out-dir", dest="outdir", required=True)
    c.add_argument("--augment", choices=ds.AUGMENT_MODES)
    c.add_argument("--cap", type=int)

    c = sub.add_parser("split", help="part-level train/test split of a dataset")
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--train", required=True)
    c.add_argument("--test", required=True)
    c.add_argument("--ratio", type=float)

    c = sub.add_parser("validate", help="score generated completions against ground truth")
    c.add_argument("--inputs", required=True)
    c.add_argument("--generated", required=True)
    c.add_argument("--truth", required=True)
    c.add_argument("--out", dest="outfile", required=True)
    c.add_argument("--matrices", help="directory for figure-style CSV matrices")

    c = sub.add_parser("stats", help="histogram of parts by cell count")
    c.add_argument("--in", dest="indir", required=True)
    c.add_argument("--out", dest="outfile", help="CSV output path")
    return p


# ---------------------------------------------------------------------------
# helpers

def _load_parts_dir(indir: str) -> list[geometry.Part]:
    paths = sorted(Path(indir).glob("*.json"))
    if not paths:
        raise CellforgeError(f"no part JSON files in {indir}")
    return [geometry.load_part(p.read_text()) for p in paths]


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _cap_arg(value, default):
    if value is None:
        return default
    return None if value <= 0 else value


# ---------------------------------------------------------------------------
# subcommands

def _cmd_decompose(args, cfg: PipelineConfig) -> int:
    expr = csg.load_expr(Path(args.infile).read_text())
    dcfg = replace(cfg.decompose, merge=not args.no_merge and cfg.decompose.merge)
    part_id = args.part_id or Path(args.infile).stem
    part = dec_mod.decompose(expr, dcfg, part_id=part_id)
    Path(args.outfile).write_text(geometry.dump_part(part))
    log.info("decomposed %s: %d cells, %d surfaces", part_id, len(part.cells), len(part.surfaces))
    return 0


def _cmd_sequences(args, cfg: PipelineConfig) -> int:
    part = geometry.load_part(Path(args.infile).read_text())
    graph = seq_mod.build_graph(part, cfg.kernel)
    orders = seq_mod.enumerate_orders(graph, _cap_arg(args.cap, cfg.cap), cfg.seed)
    payload = {"part_id": part.id, "orders": [list(o.order) for o in orders]}
    Path(args.outfile).write_text(json.dumps(payload, indent=2) + "\n")
    log.info("%s: %d build orders", part.id, len(orders))
    return 0


def _cmd_emit(args, cfg: PipelineConfig) -> int:
    part = geometry.load_part(Path(args.infile).read_text())
    rows = ds.rows_for_part(part, args.augment or cfg.augment,
                            _cap_arg(args.cap, cfg.cap), cfg.seed, cfg.kernel)
    ds.write_rows(rows, args.outfile)
    log.info("%s: %d rows", part.id, len(rows))
    return 0


def _cmd_dedup(args, cfg: PipelineConfig) -> int:
    parts = _load_parts_dir(args.indir)
    kept, dropped = dedup_mod.dedup_parts(parts)
    with open(args.outfile, "w", encoding="utf-8", newline="\n") as fh:
        for part in kept:
            fh.write(json.dumps(geometry.part_to_json(part)) + "\n")
    with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("part_id,duplicate_of\n")
        for pid, kept_id in dropped:
            fh.write(f"{pid},{kept_id}\n")
    log.info("dedup: kept %d, dropped %d", len(kept), len(dropped))
    return 0


def _cmd_render(args, cfg: PipelineConfig) -> int:
    part = geometry.load_part(Path(args.infile).read_text())
    size = args.size or cfg.render_size
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for img in render_mod.render_views(part.cells, size, cfg.kernel):
        render_mod.write_pgm(img, outdir / f"view{img.view_id}.pgm")
    if args.top:
        render_mod.write_pgm(render_mod.render_top_view(part.cells, size, cfg.kernel),
                             outdir / "top.pgm")
    log.info("rendered %s at %dpx", part.id, size)
    return 0


def _row_output_cells(row: ds.DatasetRow) -> list:
    full = script_mod.parse(row.input_script + row.output_script)
    n_input = len(script_mod.parse(row.input_script).cells)
    view = script_mod.completion_view(full, n_input)
    return script_mod.resolve_cells(view)


def _cmd_annotate(args, cfg: PipelineConfig) -> int:
    acfg = cfg.annotate
    if args.url:
        acfg = replace(acfg, url=args.url)
    if args.model:
        acfg = replace(acfg, model=args.model)
    rows = ds.read_rows(args.infile)

    def work(row: ds.DatasetRow) -> ds.DatasetRow:
        cells = _row_output_cells(row)
        images = render_mod.render_views(cells, cfg.render_size, cfg.kernel)
        text = annotate_mod.annotate(images, acfg)
        return replace(row, annotation=text)

    annotated = _parallel_map(work, rows, acfg.max_concurrent)
    ds.write_rows(annotated, args.outfile)
    log.info("annotated %d rows", len(annotated))
    return 0


def _cmd_build(args, cfg: PipelineConfig) -> int:
    indir = Path(args.indir)
    expr_paths = sorted(indir.glob("*.json"))
    if not expr_paths:
        raise CellforgeError(f"no expression JSON files in {indir}")
    augment = args.augment or cfg.augment
    cap = _cap_arg(args.cap, cfg.cap)
    outdir = Path(args.outdir)
    (outdir / "parts").mkdir(parents=True, exist_ok=True)

    def decompose_one(path: Path) -> geometry.Part:
        expr = csg.load_expr(path.read_text())
        return dec_mod.decompose(expr, cfg.decompose, part_id=path.stem)

    parts = _parallel_map(decompose_one, expr_paths, args.jobs)
    parts.sort(key=lambda p: p.id)

    curated = []
    rejected = []
    for part in parts:
        verdict = ds.filter_part(part, cfg.min_cells, cfg.max_cells)
        if verdict.accepted:
            curated.append(part)
        else:
            rejected.append((part.id, verdict.reason))
            log.info("rejected %s: %s", part.id, verdict.reason)
    kept, dropped = dedup_mod.dedup_parts(curated)
    for pid, dup_of in dropped:
        log.info("duplicate %s of %s", pid, dup_of)

    row_lists = _parallel_map(
        lambda part: ds.rows_for_part(part, augment, cap, cfg.seed, cfg.kernel),
        kept, args.jobs)
    rows = [row for rows_ in row_lists for row in rows_]
    rows.sort(key=lambda r: (r.part_id, r.order, r.cut))

    for part in kept:
        (outdir / "parts" / f"{part.id}.json").write_text(geometry.dump_part(part))
    ds.write_rows(rows, outdir / "dataset.jsonl")
    hist = ds.cell_histogram(kept)
    (outdir / "stats.csv").write_text(ds.histogram_csv(hist))
    (outdir / "stats.txt").write_text(ds.histogram_text(hist))
    with open(outdir / "rejected.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("part_id,reason\n")
        for pid, reason in rejected:
            fh.write(f"{pid},{reason}\n")
        for pid, dup_of in dropped:
            fh.write(f"{pid},duplicate_of:{dup_of}\n")
    log.info("build: %d exprs -> %d curated parts -> %d rows (%s)",
             len(expr_paths), len(kept), len(rows), augment)
    return 0


def _cmd_split(args, cfg: PipelineConfig) -> int:
    rows = ds.read_rows(args.infile)
    ratio = args.ratio if args.ratio is not None else cfg.split_ratio
    train, test = ds.split_dataset(rows, ratio, cfg.seed)
    ds.write_rows(train, args.train)
    ds.write_rows(test, args.test)
    log.info("split: %d train rows, %d test rows", len(train), len(test))
    return 0


def _read_scripts(path: str) -> dict[str, str]:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out[obj["example_id"]] = obj["script"]
    return out


def _cmd_validate(args, cfg: PipelineConfig) -> int:
    inputs = _read_scripts(args.inputs)
    generated = _read_scripts(args.generated)
    truth = _read_scripts(args.truth)
    ids = sorted(inputs)
    missing = [i for i in ids if i not in generated or i not in truth]
    if missing or set(generated) - set(inputs) or set(truth) - set(inputs):
        raise CellforgeError("example ids of --inputs/--generated/--truth do not align")

    def work(example_id: str) -> metrics_mod.MetricsRow:
        return metrics_mod.evaluate_example(
            inputs[example_id], generated[example_id], truth[example_id],
            cfg.kernel, example_id=example_id)

    rows = _parallel_map(work, ids, args.jobs)
    report = metrics_mod.aggregate(rows)
    payload = {"report": asdict(report), "rows": [asdict(r) for r in rows]}
    Path(args.outfile).write_text(json.dumps(payload, indent=2) + "\n")
    if args.matrices:
        metrics_mod.write_matrices(report, args.matrices)
    for name in metrics_mod.BOOL_METRICS:
        log.info("%-26s %.3f", name, report.means[name])
    return 0


def _cmd_stats(args, cfg: PipelineConfig) -> int:
    parts = _load_parts_dir(args.indir)
    hist = ds.cell_histogram(parts)
    if args.outfile:
        Path(args.outfile).write_text(ds.histogram_csv(hist))
    sys.stdout.write(ds.histogram_text(hist))
    return 0


_COMMANDS = {
    "decompose": _cmd_decompose,
    "sequences": _cmd_sequences,
    "emit": _cmd_emit,
    "dedup": _cmd_dedup,
    "render": _cmd_render,
    "annotate": _cmd_annotate,
    "build": _cmd_build,
    "split": _cmd_split,
    "validate": _cmd_validate,
    "stats": _cmd_stats,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s", stream=sys.stderr)
    try:
        cfg = PipelineConfig()
        if args.config:
            cfg = load_config(args.config, cfg)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
    except (ConfigError, OSError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args, cfg)
    except TransportError as err:
        print(f"transport error: {err}", file=sys.stderr)
        return 3
    except (CellforgeError, OSError, ValueError, KeyError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
