"""Command-line entry point.

Subcommands: synth, linearize, featurize, train, decode, score, analyze.
Configs are flat key=value text files; keys for training runs are
namespaced as model.* / train.* and can be overridden with repeated
--set key=value flags.  Every run's randomness flows from explicit seeds,
so identical invocations rewrite outputs byte for byte.

The corpus directory layout is the one `synth` emits: {split}.trees,
{split}.align.tsv, {split}.frames.tsv, lexicon.tsv, meta.tsv.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import metrics, synth
from .corpus import CorpusError, Example, Utterance, load_treebank
from .decoding import decode_corpus
from .metrics import MetricsError
from .model import ConfigError, ModelConfig, ParserModel, VocabError
from .prosody import ProsodyError, build_prosodic_inputs, load_duration_lexicon
from .trees import Tree, TreeError, linearize
from .training import TrainConfig, TrainingError, train

USER_ERRORS = (ConfigError, CorpusError, MetricsError, ProsodyError,
               TreeError, TrainingError, VocabError, synth.SynthError,
               ValueError, OSError)


def _read_kv(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError("%s line %d: expected key=value" % (path, lineno))
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _apply_overrides(kv: dict[str, str], overrides: list[str]) -> dict[str, str]:
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError("--set expects key=value, got %r" % item)
        key, value = item.split("=", 1)
        kv[key] = value
    return kv


def _split_kv(kv: dict[str, str], prefix: str) -> dict[str, str]:
    plen = len(prefix) + 1
    return {k[plen:]: v for k, v in kv.items() if k.startswith(prefix + ".")}


def _load_split(data_dir: str, split: str) -> list[Example]:
    corpus = synth.load_corpus(data_dir)
    return corpus.split(split)


# ---------------------------------------------------------------------------
# Subcommand bodies

def _cmd_synth(args) -> int:
    kv = _read_kv(args.config) if args.config else {}
    _apply_overrides(kv, args.set)
    config = synth.SynthConfig.from_kv(kv) if kv else synth.SynthConfig()
    corpus = synth.gen_synthetic(config, seed=args.seed)
    synth.save_corpus(corpus, args.out)
    print("wrote %d sentences to %s" % (len(corpus.records), args.out))
    return 0


def _cmd_linearize(args) -> int:
    trees = load_treebank(args.input)
    with open(args.out, "w", encoding="utf-8") as fh:
        for _, tree in trees:
            fh.write(" ".join(linearize(tree)) + "\n")
    print("linearized %d trees to %s" % (len(trees), args.out))
    return 0


def _cmd_featurize(args) -> int:
    examples = _load_split(args.data, args.split)
    lexicon = load_duration_lexicon(os.path.join(args.data, "lexicon.tsv"))
    n_rows = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("id\ttoken_index\ttoken\tpause_pre\tpause_post\tdelta\n")
        for example in examples:
            if not example.has_acoustics:
                continue
            feats = build_prosodic_inputs(example, lexicon)
            for i, (token, f) in enumerate(zip(example.utterance.tokens, feats)):
                fh.write("%s\t%d\t%s\t%s\t%s\t%.6f\n" % (
                    example.id, i, token, f.pause_pre.name, f.pause_post.name,
                    f.delta))
                n_rows += 1
    print("wrote %d feature rows to %s" % (n_rows, args.out))
    return 0


def _cmd_train(args) -> int:
    kv = _read_kv(args.config) if args.config else {}
    _apply_overrides(kv, args.set)
    model_config = ModelConfig.from_kv(_split_kv(kv, "model"))
    train_config = TrainConfig.from_kv(_split_kv(kv, "train"))
    stray = [k for k in kv if not (k.startswith("model.") or k.startswith("train."))]
    if stray:
        raise ConfigError("unknown config keys: %s" % ", ".join(sorted(stray)))

    corpus = synth.load_corpus(args.data)
    train_set = corpus.split("train")
    dev_set = corpus.split("dev") or None
    model, tlog = train(train_set, dev_set, model_config, train_config,
                        lexicon=corpus.lexicon)
    os.makedirs(args.out, exist_ok=True)
    model.save(os.path.join(args.out, "checkpoint"))
    tlog.save(os.path.join(args.out, "trainlog.tsv"))
    print("trained %d sentences; best dev F1 %.2f (epoch %d); stopped: %s"
          % (len(train_set), tlog.best_dev_f1, tlog.best_epoch,
             tlog.stop_reason))
    return 0


def _examples_from_token_file(path) -> list[Example]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            tokens = line.split()
            if not tokens:
                continue
            flat = Tree.phrase("S", [Tree.phrase("XX", [Tree.leaf(t)])
                                     for t in tokens])
            utt = Utterance(id="t%06d" % i, tokens=tokens)
            out.append(Example(utterance=utt, gold=flat, has_acoustics=False))
    return out


def _cmd_decode(args) -> int:
    model = ParserModel.load(args.model)
    if args.data:
        examples = _load_split(args.data, args.split)
        lexicon = load_duration_lexicon(os.path.join(args.data, "lexicon.tsv"))
    elif args.input:
        if model.config.features:
            raise ConfigError(
                "model with features %s needs --data with alignments, "
                "not a bare --input file" % sorted(model.config.features))
        lexicon = None
        head = open(args.input, encoding="utf-8").readline()
        if head.lstrip().startswith("("):
            examples = []
            for uid, tree in load_treebank(args.input):
                utt = Utterance(id=uid, tokens=tree.leaves())
                examples.append(Example(utterance=utt, gold=tree,
                                        has_acoustics=False))
        else:
            examples = _examples_from_token_file(args.input)
    else:
        raise ConfigError("decode needs --data DIR or --input FILE")

    text_model = ParserModel.load(args.text_model) if args.text_model else model
    trees, backoff = decode_corpus(model, text_model, examples, lexicon)
    with open(args.out, "w", encoding="utf-8") as fh:
        for tree in trees:
            fh.write(tree.to_bracketed() + "\n")
    print("decoded %d sentences (%d via text backoff) to %s"
          % (len(trees), backoff, args.out))
    return 0


def _report_rows(name: str, report: metrics.EvalReport) -> list[str]:
    return ["%s\tprecision\t%.2f" % (name, report.precision),
            "%s\trecall\t%.2f" % (name, report.recall),
            "%s\tf1\t%.2f" % (name, report.f1),
            "%s\tmatched\t%d" % (name, report.matched),
            "%s\tgold\t%d" % (name, report.gold_total),
            "%s\tpred\t%d" % (name, report.pred_total)]


def _load_tree_lists(gold_path, pred_path):
    gold = [t for _, t in load_treebank(gold_path)]
    pred = [t for _, t in load_treebank(pred_path)]
    return gold, pred


def _cmd_score(args) -> int:
    gold, pred = _load_tree_lists(args.gold, args.pred)
    scorer = metrics.flat_f1 if args.flat else metrics.parseval
    rows = _report_rows("overall", scorer(gold, pred))
    if args.strata:
        strat = (metrics.length_stratum if args.strata == "length"
                 else metrics.disfluency_stratum)
        for name, rep in metrics.stratified_report(gold, pred, strat).items():
            rows += _report_rows(name, rep)
    if args.compare:
        pred_b = [t for _, t in load_treebank(args.compare)]
        p = metrics.bootstrap_pvalue(gold, pred, pred_b,
                                     draws=args.draws, seed=args.seed)
        rows.append("bootstrap\tp_value\t%g" % p)
        rows.append("bootstrap\tdraws\t%d" % args.draws)
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _cmd_analyze(args) -> int:
    gold, pred = _load_tree_lists(args.gold, args.pred)
    by_len = metrics.stratified_report(gold, pred, metrics.length_stratum)
    with open(args.out_prefix + ".length.tsv", "w") as fh:
        fh.write("bucket\tsentences\tf1\tprecision\trecall\n")
        for name, rep in by_len.items():
            n = sum(1 for g in gold if metrics.length_stratum(g) == name)
            fh.write("%s\t%d\t%.2f\t%.2f\t%.2f\n"
                     % (name, n, rep.f1, rep.precision, rep.recall))
    by_flu = metrics.stratified_report(gold, pred, metrics.disfluency_stratum)
    with open(args.out_prefix + ".fluency.tsv", "w") as fh:
        fh.write("stratum\tsentences\tf1\tflat_f1\n")
        for name, rep in by_flu.items():
            idx = [i for i, g in enumerate(gold)
                   if metrics.disfluency_stratum(g) == name]
            flat = metrics.flat_f1([gold[i] for i in idx], [pred[i] for i in idx])
            fh.write("%s\t%d\t%.2f\t%.2f\n" % (name, len(idx), rep.f1, flat.f1))
    print("wrote %s.length.tsv and %s.fluency.tsv"
          % (args.out_prefix, args.out_prefix))
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prosoparse",
        description="Train and evaluate a speech constituency parser with "
                    "prosodic features.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("linearize", help="trees to parse-symbol strings")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_linearize)

    p = sub.add_parser("featurize", help="dump per-token prosodic features")
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="train", choices=synth.SPLITS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("train", help="train a parser on a corpus directory")
    p.add_argument("--config", default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("decode", help="parse sentences with a checkpoint")
    p.add_argument("--model", required=True)
    p.add_argument("--text-model", default=None,
                   help="text-only backoff checkpoint")
    p.add_argument("--data", default=None)
    p.add_argument("--split", default="test", choices=synth.SPLITS)
    p.add_argument("--input", default=None,
                   help="treebank or whitespace token file (text-only)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("score", help="parseval report, optionally bootstrap")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--flat", action="store_true")
    p.add_argument("--strata", choices=("length", "disfluency"), default=None)
    p.add_argument("--compare", default=None)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("analyze", help="per-length and per-fluency tables")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_analyze)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
