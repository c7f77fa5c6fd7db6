"""Batch command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data/validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from . import encoder as enc
from . import metrics as met
from . import ngrams, segment, toyenc
from .train import CLS_ONLY, TrainConfig, load_dataset
from .train import train as train_model
from .errors import SpanSegError


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this toolkit reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _open_in(path):
    return sys.stdin if path == "-" else open(path, encoding="utf-8")


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w", encoding="utf-8", newline="\n")


def _add_config_and_seed(p: _Parser):
    p.add_argument("--config", help="JSON file whose keys mirror flag names; explicit flags win")
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> _Parser:
    top = _Parser(prog="spanseg", description=__doc__)
    sub = top.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("build-dict", help="count corpus n-grams and write a SPANDICT file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-n", type=int, default=5)
    p.add_argument("--min-count", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--shard-budget", type=int, default=None, help="tokens per in-memory shard")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--fingerprint", default="")
    _add_config_and_seed(p)

    p = sub.add_parser("prune-dict", help="keep the N highest-count entries")
    p.add_argument("--dict", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_config_and_seed(p)

    p = sub.add_parser("segment", help="segment sentences (one per line) into span JSONL")
    p.add_argument("--dict", required=True)
    p.add_argument("--in", dest="infile", required=True, help="path or - for stdin")
    p.add_argument("--out", required=True, help="path or - for stdout")
    p.add_argument("--mode", choices=["greedy", "random"], default="greedy")
    p.add_argument("--max-len", type=int, default=3, help="random mode span-length cap")
    _add_config_and_seed(p)

    p = sub.add_parser("stats", help="average span counts, optionally swept over dictionary sizes")
    p.add_argument("--dict", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--dict-sizes", default=None, help="comma-separated prune targets")
    p.add_argument("--out", default="-")
    _add_config_and_seed(p)

    p = sub.add_parser("encode", help="toy-encode sentences into a binary embedding file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--context-mix", type=float, default=0.5)
    _add_config_and_seed(p)

    p = sub.add_parser("train", help="fine-tune the span encoder and head on a JSONL dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--dev", default=None)
    p.add_argument("--dict", required=True)
    p.add_argument("--out-history", required=True)
    p.add_argument("--variant", default="cnn_cnn", choices=list(enc.VARIANTS) + [CLS_ONLY])
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--warmup-ratio", type=float, default=0.1)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--r", type=int, default=16)
    p.add_argument("--l", type=int, default=8)
    p.add_argument("--segmentation", choices=["greedy", "random"], default="greedy")
    _add_config_and_seed(p)

    p = sub.add_parser("eval", help="classification metrics from label/prediction files")
    p.add_argument("--labels", required=True, help="one integer per line")
    p.add_argument("--preds", required=True)
    p.add_argument("--out", default="-")
    _add_config_and_seed(p)

    p = sub.add_parser("gradcheck", help="finite-difference check of encoder gradients")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--l", type=int, default=4)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--variant", default="cnn_cnn", choices=enc.VARIANTS)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    _add_config_and_seed(p)

    p = sub.add_parser("mcnemar", help="paired significance test")
    p.add_argument("--labels")
    p.add_argument("--preds-a")
    p.add_argument("--preds-b")
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--out", default="-")
    _add_config_and_seed(p)
    return top


def _apply_config(argv, args):
    """Fill in values from --config for flags the user did not pass explicitly."""
    if not getattr(args, "config", None):
        return args
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    explicit = {a.lstrip("-").replace("-", "_").split("=")[0] for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr not in explicit and hasattr(args, attr):
            setattr(args, attr, value)
    return args


def _read_ints(path):
    with open(path, encoding="utf-8") as fh:
        return [int(line) for line in fh if line.strip()]


def _count_parallel(corpus_path, max_n, shard_budget, threads):
    """Fan counting out over line chunks; Counter-style merge in fixed order."""
    with open(corpus_path, "rb") as fh:
        data = fh.read()
    lines = data.decode("utf-8").splitlines()
    if threads <= 1 or len(lines) < 2 * threads:
        return ngrams.count_ngrams(lines, max_n, shard_budget)
    chunk = -(-len(lines) // threads)
    parts = [lines[i : i + chunk] for i in range(0, len(lines), chunk)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        results = list(ex.map(lambda p: ngrams.count_ngrams(p, max_n, shard_budget), parts))
    merged: dict = {}
    for res in results:
        for k, v in res.items():
            merged[k] = merged.get(k, 0) + v
    return merged


def _cmd_build_dict(args):
    counts = _count_parallel(args.corpus, args.max_n, args.shard_budget, args.threads)
    d = ngrams.build_dictionary(counts, args.min_count, args.max_n, args.fingerprint)
    ngrams.save_dictionary(d, args.out)
    print(f"entries={d.size()}")
    return 0


def _cmd_prune_dict(args):
    d = ngrams.load_dictionary(args.dict)
    pruned = ngrams.prune_to_size(d, args.target)
    ngrams.save_dictionary(pruned, args.out)
    print(f"entries={pruned.size()}")
    return 0


def _cmd_segment(args):
    d = ngrams.load_dictionary(args.dict)
    fin = _open_in(args.infile)
    fout = _open_out(args.out)
    try:
        for line in fin:
            if line == "\n" and args.infile != "-":
                continue  # tolerate blank separator lines in files
            ws = segment.normalize_and_tokenize(line)
            if args.mode == "random":
                part = segment.segment_random(ws, args.seed, args.max_len)
            else:
                part = segment.segment_greedy(d, ws)
            rec = {"tokens": list(ws.words), "spans": [list(s) for s in part.spans]}
            fout.write(json.dumps(rec, ensure_ascii=False) + "\n")
    finally:
        if fout is not sys.stdout:
            fout.close()
        if fin is not sys.stdin:
            fin.close()
    return 0


def _cmd_stats(args):
    d = ngrams.load_dictionary(args.dict)
    with _open_in(args.infile) as fin:
        sentences = [segment.normalize_and_tokenize(line).words for line in fin if line.strip()]
    sizes = (
        [int(s) for s in args.dict_sizes.split(",")] if args.dict_sizes else [d.size()]
    )
    fout = _open_out(args.out)
    try:
        for target in sizes:
            pruned = ngrams.prune_to_size(d, target)
            st = segment.span_stats(sentences, pruned)
            fout.write(f"{pruned.size()}\t{st.avg_spans:.6f}\t{st.sentences}\n")
    finally:
        if fout is not sys.stdout:
            fout.close()
    return 0


def _cmd_encode(args):
    cfg = toyenc.ToyEncoderConfig(d=args.d, seed=args.seed, context_mix=args.context_mix)
    mats = []
    with _open_in(args.infile) as fin:
        for line in fin:
            if not line.strip():
                continue
            ws = segment.normalize_and_tokenize(line)
            mats.append(toyenc.toy_encode(ws.words, cfg))
    toyenc.write_embeddings(mats, args.out, d=args.d)
    print(f"sentences={len(mats)}")
    return 0


def _cmd_train(args):
    d = ngrams.load_dictionary(args.dict)
    train_set = load_dataset(args.data)
    dev_set = load_dataset(args.dev) if args.dev else []
    num_labels = max(ex.label for ex in train_set + dev_set) + 1
    cfg = TrainConfig(
        learning_rate=args.lr,
        warmup_ratio=args.warmup_ratio,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        seed=args.seed,
        variant=args.variant,
        r=args.r,
        l=args.l,
        segmentation=args.segmentation,
    )
    enc_cfg = toyenc.ToyEncoderConfig(d=args.d, seed=args.seed)
    result = train_model(train_set, dev_set, d, enc_cfg, cfg, num_labels=num_labels)
    with open(args.out_history, "w", encoding="utf-8", newline="\n") as fh:
        for rec in result.history:
            fh.write(json.dumps(rec) + "\n")
    last = result.history[-1]
    print(f"final_loss={last['train_loss']:.6f} dev_accuracy={last['dev_accuracy']}")
    return 0


def _cmd_eval(args):
    labels = _read_ints(args.labels)
    preds = _read_ints(args.preds)
    report = met.classification_metrics(preds, labels)
    report["matthews"] = met.matthews_corr(preds, labels)
    fout = _open_out(args.out)
    try:
        fout.write(json.dumps(report, sort_keys=True) + "\n")
    finally:
        if fout is not sys.stdout:
            fout.close()
    return 0


def _cmd_gradcheck(args):
    rep = enc.grad_check(
        args.d, args.r, args.l, args.variant, k=args.k,
        seed=args.seed, epsilon=args.eps, tolerance=args.tol,
    )
    print(f"max_rel_err={rep.max_rel_err:.3e} tolerance={rep.tolerance:.1e} "
          f"{'PASS' if rep.passed else 'FAIL'}")
    return 0 if rep.passed else 2


def _cmd_mcnemar(args):
    if args.b is not None and args.c is not None:
        res = met.mcnemar_test(b=args.b, c=args.c)
    else:
        if not (args.labels and args.preds_a and args.preds_b):
            raise SpanSegError("need --labels/--preds-a/--preds-b or --b/--c")
        res = met.mcnemar_test(_read_ints(args.labels), _read_ints(args.preds_a), _read_ints(args.preds_b))
    fout = _open_out(args.out)
    try:
        fout.write(json.dumps({"b": res.b, "c": res.c, "p_value": res.p_value, "method": res.method}) + "\n")
    finally:
        if fout is not sys.stdout:
            fout.close()
    return 0


_DISPATCH = {
    "build-dict": _cmd_build_dict,
    "prune-dict": _cmd_prune_dict,
    "segment": _cmd_segment,
    "stats": _cmd_stats,
    "encode": _cmd_encode,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "gradcheck": _cmd_gradcheck,
    "mcnemar": _cmd_mcnemar,
}


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(argv, args)
    try:
        return _DISPATCH[args.cmd](args)
    except (SpanSegError, OSError, ValueError) as e:
        sys.stderr.write(f"spanseg {args.cmd}: error: {e}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
