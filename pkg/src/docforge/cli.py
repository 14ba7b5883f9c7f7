"""Command-line entry point: parse, eval, reward, mtp-bench, bench.

Reports go to stdout as canonical JSON, diagnostics to stderr.
Exit codes: 0 success, 2 input error, 3 backend failure, 4 property violation.
"""

from __future__ import annotations

import argparse
import logging
import random
import re
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from docforge import strict_json
from docforge.assemble import emit_json, emit_markdown, merge
from docforge.config import ConfigError, RunConfig, load_config
from docforge.layout import (
    IdMismatch,
    ManifestError,
    ReadingOrder,
    infer_reading_order,
    parse_manifest,
    reading_order_edit,
)
from docforge.metrics import (
    GoldParseError,
    field_f1,
    levenshtein,
    normalized_edit_distance,
    teds,
    teds_s,
)
from docforge.model import Category, StatusKind
from docforge.mtp import (
    DraftMode,
    MtpConfig,
    acceptance_stats,
    ar_decode,
    mtp_decode,
    speedup_estimate,
    tokenize_corpus,
    train_ngram,
)
from docforge.recognize import BackendKind, MockBackend, make_backend, recognize_pages
from docforge.reward import (
    GoldInvalid,
    KieSchema,
    SchemaDefinitionError,
    canonical_latex_tokens,
    reward_formula,
    reward_kie,
    reward_table,
    reward_text,
)

logger = logging.getLogger("docforge")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BACKEND = 3
EXIT_PROPERTY = 4

SPEEDUP_RATIOS = (0.0, 0.02, 0.05, 0.1)


class InputError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(strict_json.dumps_canonical(obj) + "\n")


def _fail(message: str) -> None:
    print(f"docforge: {message}", file=sys.stderr)


def _read(path: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"NotFound: {path}")
    try:
        return p.read_bytes()
    except OSError as exc:
        raise InputError(f"unreadable {path}: {exc}") from exc


def _config(args) -> RunConfig:
    overrides = {
        "run.concurrency": getattr(args, "concurrency", None),
        "run.output_dir": getattr(args, "out", None),
        "layout.min_gap": getattr(args, "min_gap", None),
    }
    if getattr(args, "backend", None):
        overrides.update(
            {
                "backend.kind": args.backend,
                "backend.fixture_path": args.fixture,
                "backend.endpoint": args.endpoint,
                "backend.model_name": args.model,
            }
        )
    return load_config(getattr(args, "config", None), overrides)


_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


def _stem(page_id: str) -> str:
    return _UNSAFE.sub("_", page_id) or "page"


# -- parse ------------------------------------------------------------------


def cmd_parse(args) -> int:
    cfg = _config(args)
    ps = parse_manifest(_read(args.manifest))
    if cfg.backend is None:
        raise InputError("no backend configured (use --backend or a [backend] config section)")
    images_dir = Path(args.images or Path(args.manifest).parent)
    if cfg.backend.kind is BackendKind.REMOTE:
        for page in ps.pages:
            for r in page.regions:
                if r.category is Category.FIGURE:
                    continue
                if not r.image_ref or not (images_dir / r.image_ref).is_file():
                    raise InputError(f"NotFound: image for region {page.page_id}/{r.id}")
    try:
        backend = make_backend(cfg.backend, images_dir)
    except (OSError, ValueError) as exc:
        raise InputError(f"backend setup failed: {exc}") from exc

    orders = [infer_reading_order(p, cfg.min_gap) for p in ps.pages]
    try:
        batch = recognize_pages(backend, ps.pages, orders, cfg.concurrency)
    finally:
        backend.close()

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    statuses = []
    for page, order, recognized in zip(ps.pages, orders, batch.results):
        doc = merge(page, order, recognized)
        stem = _stem(page.page_id)
        (out_dir / f"{stem}.md").write_text(emit_markdown(doc), encoding="utf-8")
        (out_dir / f"{stem}.json").write_bytes(emit_json(doc))
        for r in recognized:
            statuses.append(r.status.kind)
            if r.status.kind is StatusKind.BACKEND_ERROR:
                _fail(f"backend error on {page.page_id}/{r.region_id}: {r.status.detail}")
    if statuses and StatusKind.OK not in statuses and StatusKind.BACKEND_ERROR in statuses:
        _fail("every region failed in the backend")
        return EXIT_BACKEND
    return EXIT_OK


# -- eval -------------------------------------------------------------------


def _order_ids(data: bytes) -> list[str]:
    try:
        raw = strict_json.loads(data)
    except strict_json.JsonParseError as exc:
        raise ValueError(str(exc)) from exc
    if isinstance(raw, dict):
        raw = raw.get("ordered_region_ids")
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise ValueError("expected a list of region ids")
    return raw


def cmd_eval(args) -> int:
    gold = _read(args.gold)
    pred = _read(args.pred)
    task = args.task
    if task == "text":
        p, g = pred.decode("utf-8", "replace"), gold.decode("utf-8", "replace")
        score = normalized_edit_distance(p, g)
        components = {"levenshtein": levenshtein(p, g), "pred_length": len(p), "gold_length": len(g)}
    elif task == "formula":
        pt = canonical_latex_tokens(pred.decode("utf-8", "replace"))
        gt = canonical_latex_tokens(gold.decode("utf-8", "replace"))
        ned = normalized_edit_distance(pt, gt)
        score = 1.0 - ned
        components = {"token_edit_distance": ned, "metric": "cdm_proxy_token_edit"}
    elif task == "table":
        p, g = pred.decode("utf-8", "replace"), gold.decode("utf-8", "replace")
        try:
            score = teds(p, g)
            components = {"teds": score, "teds_s": teds_s(p, g)}
        except GoldParseError as exc:
            raise InputError(f"gold table does not parse: {exc}") from exc
    elif task == "order":
        try:
            g = _order_ids(gold)
        except ValueError as exc:
            raise InputError(f"gold order unreadable: {exc}") from exc
        try:
            score = reading_order_edit(_order_ids(pred), g)
            components = {"id_mismatch": False}
        except (ValueError, IdMismatch):
            score, components = 1.0, {"id_mismatch": True}
    else:
        try:
            report = field_f1(pred, gold)
        except GoldParseError as exc:
            raise InputError(f"gold JSON does not parse: {exc}") from exc
        score = report.f1
        components = report.to_dict()
    _emit({"task": task, "score": score, "components": components})
    return EXIT_OK


# -- reward -----------------------------------------------------------------


def cmd_reward(args) -> int:
    cfg = _config(args)
    gold = _read(args.gold)
    pred = _read(args.pred)
    try:
        if args.task == "text":
            report = reward_text(pred, gold, cfg.reward)
        elif args.task == "formula":
            report = reward_formula(pred, gold, cfg.reward)
        elif args.task == "table":
            report = reward_table(pred, gold, cfg.reward)
        else:
            if not args.schema:
                raise InputError("kie rewards need --schema")
            schema = KieSchema.from_json(_read(args.schema))
            report = reward_kie(pred, gold, schema, cfg.reward)
    except (GoldParseError, GoldInvalid, SchemaDefinitionError) as exc:
        raise InputError(str(exc)) from exc
    _emit(report.to_dict())
    return EXIT_OK


# -- mtp-bench --------------------------------------------------------------


def run_mtp_bench(docs: list[list[str]], *, k: int, target_order: int, draft_order: int,
                  draft_mode: DraftMode, accuracy: float, seeds: int, max_len: int,
                  prompt_len: int) -> dict:
    target = train_ngram(docs, target_order)
    draft = train_ngram(docs, draft_order) if draft_mode is DraftMode.LOWER_ORDER else None
    docs = [d for d in docs if d]
    traces, violations = [], []
    cfg = None
    for seed in range(seeds):
        rng = random.Random(seed)
        doc = rng.choice(docs)
        prompt = doc[: rng.randint(1, min(prompt_len, len(doc)))]
        cfg = MtpConfig(k=k, max_len=max_len, draft_mode=draft_mode, draft_order=draft_order,
                        accuracy=accuracy, seed=seed)
        out, trace = mtp_decode(target, draft, cfg, prompt)
        if out != ar_decode(target, prompt, max_len):
            violations.append(seed)
        traces.append(trace)
    stats = acceptance_stats(traces)
    return {
        "k": k,
        "draft_mode": cfg.describe(),
        "target_order": target_order,
        "runs": stats.runs,
        "steps": stats.steps,
        "total_tokens": stats.total_tokens,
        "mean_tokens_per_step": stats.mean_tokens_per_step,
        "histogram": stats.to_dict()["histogram"],
        "speedup_at_r": {str(r): speedup_estimate(stats, r) for r in SPEEDUP_RATIOS},
        "losslessness_violations": violations,
    }


def cmd_mtp_bench(args) -> int:
    if args.seeds < 1:
        raise InputError("--seeds must be >= 1")
    reports = []
    for path in args.corpus:
        docs = tokenize_corpus(_read(path).decode("utf-8"))
        if not docs:
            raise InputError(f"empty corpus: {path}")
        try:
            report = run_mtp_bench(
                docs, k=args.k, target_order=args.target_order, draft_order=args.draft_order,
                draft_mode=DraftMode(args.draft_mode), accuracy=args.accuracy, seeds=args.seeds,
                max_len=args.max_len, prompt_len=args.prompt_len,
            )
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        report["corpus"] = path
        reports.append(report)
    _emit(reports[0] if len(reports) == 1 else {"corpora": reports})
    bad = [r for r in reports if r["losslessness_violations"]]
    for r in bad:
        _fail(f"{r['corpus']}: mtp output diverged from greedy decoding for seeds "
              f"{r['losslessness_violations']}")
    return EXIT_PROPERTY if bad else EXIT_OK


# -- bench ------------------------------------------------------------------


def cmd_bench(args) -> int:
    src = Path(args.manifests)
    if src.is_dir():
        files = sorted(src.glob("*.json"))
    elif src.is_file():
        files = [src]
    else:
        raise InputError(f"NotFound: {src}")
    pages = []
    for f in files:
        pages.extend(parse_manifest(f.read_bytes()).pages)
    if not pages:
        raise InputError("no pages to benchmark")
    if args.concurrency < 1:
        raise InputError("--concurrency must be >= 1")
    backend = MockBackend({}, latency_ms=args.latency_ms, default="lorem ipsum")

    start = time.perf_counter()
    orders = [infer_reading_order(p) for p in pages]
    batch = recognize_pages(backend, pages, orders, args.concurrency)
    for page, order, rec in zip(pages, orders, batch.results):
        emit_markdown(merge(page, order, rec))
    wall = time.perf_counter() - start

    _emit(
        {
            "input_kind": "manifest",
            "pages_processed": len(pages),
            "regions_processed": sum(len(p.regions) for p in pages),
            "wall_seconds": wall,
            "pages_per_second": len(pages) / wall,
            "per_page_latencies": [
                {"page_id": t.page_id, "seconds": t.seconds} for t in batch.timings
            ],
            "concurrency": args.concurrency,
            "mock_latency_ms": args.latency_ms,
        }
    )
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docforge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="layout manifest -> per-page Markdown and JSON")
    p.add_argument("manifest")
    p.add_argument("--images", help="directory region image paths are relative to")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config")
    p.add_argument("--backend", choices=[k.value for k in BackendKind])
    p.add_argument("--fixture", help="mock fixture JSON")
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--concurrency", type=int)
    p.add_argument("--min-gap", type=int)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="score a prediction against gold")
    p.add_argument("task", choices=["text", "table", "formula", "order", "kie"])
    p.add_argument("pred")
    p.add_argument("gold")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("reward", help="full reward report for one prediction")
    p.add_argument("task", choices=["text", "table", "formula", "kie"])
    p.add_argument("pred")
    p.add_argument("gold")
    p.add_argument("--schema")
    p.add_argument("--config")
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("mtp-bench", help="draft-and-verify decoding statistics")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--target-order", type=int, default=4)
    p.add_argument("--draft-order", type=int, default=2)
    p.add_argument("--draft-mode", choices=[m.value for m in DraftMode], default="lower_order")
    p.add_argument("--accuracy", type=float, default=1.0, help="noisy draft accuracy p")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--max-len", type=int, default=200)
    p.add_argument("--prompt-len", type=int, default=3)
    p.set_defaults(func=cmd_mtp_bench)

    p = sub.add_parser("bench", help="pipeline throughput with a mock backend")
    p.add_argument("manifests", help="manifest file or directory of manifests")
    p.add_argument("--latency-ms", type=float, default=100.0)
    p.add_argument("--concurrency", type=int, default=4)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (InputError, ConfigError, ManifestError) as exc:
        _fail(f"{type(exc).__name__}: {exc}" if not isinstance(exc, InputError) else str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
