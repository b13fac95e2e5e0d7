"""Command-line surface binding the engine together.

Exit codes: 0 success, 1 validation error, 2 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import dataprep, kb as kb_module, losses, numgrad, rouge, service
from .config import resolve_config
from .encoder import init_params, load_static_embeddings, save_params
from .errors import DataFileError, FaqMatchError, ValidationError
from .textnorm import load_abbreviations, tokenize

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="faqmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist a knowledge-base index")
    p.add_argument("--kb", required=True, help="knowledge-base JSONL (id/question/answer records)")
    p.add_argument("--ref-faqs", help="optional JSONL of reference FAQs folded into the TF-IDF fit")
    p.add_argument("--out", required=True, help="output index path")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--ngram-max", type=int, choices=(1, 2))
    p.add_argument("--abbreviations", help="abbreviation list file for the sentence splitter")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="answer one query or a JSONL batch")
    p.add_argument("--index", help="knowledge-base index (or index_path in --config)")
    p.add_argument("--params", help="encoder parameters file (or params_path in --config)")
    p.add_argument("query_text", nargs="?", help="query text (omit when using --query-file)")
    p.add_argument("--query-file", help="JSONL batch: objects with 'question' or 'summary'")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--json", action="store_true", help="emit JSON instead of readable text")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--index", help="knowledge-base index (or index_path in --config)")
    p.add_argument("--params", help="encoder parameters file (or params_path in --config)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("train", help="train the encoder on (chq, ref_faq) pairs")
    p.add_argument("--pairs", required=True, help="JSONL with chq/ref_faq fields")
    p.add_argument("--index", required=True)
    p.add_argument("--params-in", help="starting encoder parameters; omit to initialize")
    p.add_argument("--params-out", required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--match-weight", type=float)
    p.add_argument("--answer-weight", type=float)
    p.add_argument("--dim", type=int, default=32, help="embedding size when initializing")
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.0, help="context mixing weight when initializing")
    p.add_argument("--loss-log", help="write per-epoch loss CSV here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("filter", help="score pairs against the KB, filter, and split")
    p.add_argument("--pairs", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--cutoff", type=float, required=True, help="minimum matching score to keep")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--histogram", help="write a 20-bucket score histogram CSV here")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval-rouge", help="score line-aligned prediction/reference files")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=cmd_eval_rouge)

    p = sub.add_parser("gradcheck", help="verify analytic gradients against finite differences")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=numgrad.DEFAULT_TOL)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def cmd_index(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config, ngram_max=args.ngram_max, abbreviations_path=args.abbreviations)
    abbreviations = load_abbreviations(cfg.abbreviations_path) if cfg.abbreviations_path else None
    ref_faqs = None
    if args.ref_faqs:
        ref_faqs = [
            str(rec.get("ref_faq") or rec.get("question") or "")
            for rec in kb_module.read_jsonl(args.ref_faqs)
        ]
    kb = kb_module.ingest(
        kb_module.read_jsonl(args.kb),
        abbreviations=abbreviations,
        ref_faqs=ref_faqs,
        ngram_max=cfg.ngram_max,
    )
    kb_module.save(kb, args.out)
    total_sentences = sum(len(e.answer_sentences) for e in kb.entries)
    print(
        f"entries={len(kb)} sentences={total_sentences} "
        f"mean_sentences_per_entry={total_sentences / len(kb):.2f} vocab={len(kb.tfidf)}"
    )
    return EXIT_OK


def _answer_record(engine: service.Engine, question: str, k: int, n: int, record_id=None) -> dict:
    payload = engine.answer_payload(question, k, n, timing=True)
    if record_id is not None:
        payload = {"id": record_id, **payload}
    return payload


def _print_human(payload: dict) -> None:
    faq = payload["matched_faq"]
    print(f"matched: {faq['id']}  score={faq['score']:.4f}")
    print(f"  Q: {faq['question']}")
    for ans in payload["answers"]:
        print(f"  [{ans['index']}] ({ans['score']:.4f}) {ans['text']}")
    timing = payload["timing_ms"]
    print(f"  timing_ms: match={timing['match']:.2f} select={timing['select']:.2f} total={timing['total']:.2f}")


def _engine_paths(cfg) -> tuple[str, str]:
    if not cfg.index_path:
        raise ValidationError("no index given (use --index or index_path in the config file)")
    if not cfg.params_path:
        raise ValidationError("no encoder parameters given (use --params or params_path in the config file)")
    return cfg.index_path, cfg.params_path


def cmd_query(args: argparse.Namespace) -> int:
    if bool(args.query_text) == bool(args.query_file):
        raise ValidationError("provide exactly one of query_text or --query-file")
    cfg = resolve_config(args.config, k=args.k, n_select=args.n, index_path=args.index, params_path=args.params)
    index_path, params_path = _engine_paths(cfg)
    engine = service.Engine.load(index_path, params_path, k=cfg.k, n=cfg.n_select)
    if args.query_text:
        payload = _answer_record(engine, args.query_text, cfg.k, cfg.n_select)
        if args.json:
            print(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))
        else:
            _print_human(payload)
        return EXIT_OK
    for line_no, record in enumerate(kb_module.read_jsonl(args.query_file), start=1):
        question = record.get("question") or record.get("summary")
        if not isinstance(question, str) or not question.strip():
            raise ValidationError(
                f"{args.query_file}:{line_no}: expected a non-empty 'question' or 'summary' field"
            )
        payload = _answer_record(engine, question, cfg.k, cfg.n_select, record_id=record.get("id"))
        print(json.dumps(payload, ensure_ascii=False, separators=(",", ":")))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config, k=args.k, n_select=args.n, index_path=args.index, params_path=args.params)
    index_path, params_path = _engine_paths(cfg)
    service.serve(index_path, params_path, args.port, k=cfg.k, n=cfg.n_select)
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = resolve_config(
        args.config, k=args.k, n_select=args.n,
        match_weight=args.match_weight, answer_weight=args.answer_weight,
    )
    kb = kb_module.load(args.index)
    raw_pairs = dataprep.read_pairs(args.pairs)
    if not raw_pairs:
        raise ValidationError(f"{args.pairs}: no training pairs")
    pairs = [(tokenize(p.chq), tokenize(p.ref_faq)) for p in raw_pairs]
    for i, (_, ref) in enumerate(pairs):
        if not ref:
            raise ValidationError(f"{args.pairs}: pair {i} has an empty reference FAQ")

    if args.params_in:
        params = load_static_embeddings(args.params_in)
    else:
        vocab: set[str] = set()
        for entry in kb.entries:
            vocab.update(entry.question.tokens)
            for sentence in entry.answer_sentences:
                vocab.update(sentence.tokens)
        for chq_tokens, ref_tokens in pairs:
            vocab.update(chq_tokens)
            vocab.update(ref_tokens)
        params = init_params(args.init_seed, args.dim, vocab, context_alpha=args.alpha)

    weights = losses.LossWeights(
        match_weight=cfg.match_weight, answer_weight=cfg.answer_weight, n_select=cfg.n_select
    )
    trained, stats = losses.train_encoder(
        pairs, kb, params, weights,
        epochs=args.epochs, learning_rate=args.lr, seed=args.seed, k=cfg.k,
    )
    save_params(trained, args.params_out)
    if args.loss_log:
        losses.write_loss_log(stats, args.loss_log)
    for row in stats:
        print(
            f"epoch={row.epoch} mean_total={row.mean_total:.6f} mean_mat={row.mean_mat:.6f} "
            f"mean_sim={row.mean_sim:.6f} mean_sel={row.mean_sel:.6f}"
        )
    print(f"trained epochs={args.epochs} pairs={len(pairs)} params={args.params_out}")
    return EXIT_OK


def cmd_filter(args: argparse.Namespace) -> int:
    kb = kb_module.load(args.index)
    pairs = dataprep.read_pairs(args.pairs)
    if not pairs:
        raise ValidationError(f"{args.pairs}: no pairs to filter")
    model, matrix = dataprep.build_filter_model(pairs, kb)
    dataprep.score_pairs(pairs, model, matrix)
    if args.histogram:
        with open(args.histogram, "w", encoding="utf-8") as fh:
            fh.write("bucket_low,bucket_high,count\n")
            for low, high, count in dataprep.score_histogram([p.match_score for p in pairs]):
                fh.write(f"{low},{high},{count}\n")
    dataprep.filter_and_split(pairs, args.cutoff, seed=args.seed)
    dataprep.write_pairs(pairs, args.out)
    by_split = {name: sum(1 for p in pairs if p.split == name) for name in dataprep.SPLITS}
    survivors = len(pairs) - by_split["rejected"]
    print(
        f"pairs={len(pairs)} survivors={survivors} rejected={by_split['rejected']} "
        f"train={by_split['train']} dev={by_split['dev']} test={by_split['test']}"
    )
    return EXIT_OK


def cmd_eval_rouge(args: argparse.Namespace) -> int:
    report = rouge.eval_file(args.pred, args.ref)
    print(report.to_json())
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    failed = False
    for name, checker in (
        ("sim", numgrad.check_sim_gradients),
        ("loss", numgrad.check_loss_gradients),
    ):
        report = checker(trials=args.trials, tol=args.tol, seed=args.seed)
        status = "ok" if report.ok else "FAIL"
        print(
            f"gradcheck {name}: {status} checked={report.checked} skipped={report.skipped} "
            f"max_rel_err={report.max_rel_err:.3e} tol={args.tol:.1e}"
        )
        for failure in report.failures:
            print(f"  {failure}", file=sys.stderr)
        failed = failed or not report.ok
    return EXIT_VALIDATION if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FaqMatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
