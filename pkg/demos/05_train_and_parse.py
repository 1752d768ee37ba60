"""End-to-end training run on a synthetic corpus, then parsing.

Generates a corpus whose attachment is decidable from the preposition
alone, trains a small text-only parser until dev F1 clears a target, and
inspects what the decoder produces.  Runs in well under a minute.
"""

import numpy as np

from prosoparse import (
    ModelConfig, SynthConfig, TrainConfig,
    decode_corpus, gen_synthetic, parse_sentence, parseval, train,
)

corpus = gen_synthetic(SynthConfig(n_train=150, n_dev=30, n_test=0,
                                   seed=7, attachment_rule="lexical"))
train_set = corpus.split("train")
dev_set = corpus.split("dev")
print("train %d / dev %d sentences" % (len(train_set), len(dev_set)))
print("sample:", " ".join(train_set[0].utterance.tokens))
print("gold:  ", train_set[0].gold.to_bracketed())

model_config = ModelConfig(hidden=48, layers=2, word_embed_dim=48,
                           output_embed_dim=48, dropout=0.0,
                           attention="location")
train_config = TrainConfig(batch_size=16, lr0=0.01, max_epochs=20,
                           seed=1, target_f1=98.0, early_stop_patience=20)

model, tlog = train(train_set, dev_set, model_config, train_config,
                    lexicon=corpus.lexicon)

print("\nstopped at epoch %d (%s)" % (tlog.stopped_epoch, tlog.stop_reason))
print("dev F1 per epoch:", ["%.1f" % f for _, f in tlog.epoch_dev_f1])
print("best dev F1 %.2f at epoch %d" % (tlog.best_dev_f1, tlog.best_epoch))
if tlog.lr_events:
    print("lr decays at updates:", [u for u, _ in tlog.lr_events])
else:
    print("no lr decays fired before stopping")

# Score the restored-best model on dev.
trees, backoffs = decode_corpus(model, model, dev_set, corpus.lexicon)
report = parseval([e.gold for e in dev_set], trees, backoff_count=backoffs)
print("\ndev parseval: P %.2f  R %.2f  F1 %.2f  (%d backoffs)"
      % (report.precision, report.recall, report.f1, backoffs))

# Single-sentence parses come back as trees over the original tokens, with
# flags saying whether the symbol sequence needed repair or backoff.
for e in dev_set[:3]:
    result = parse_sentence(model, model, e, lexicon=corpus.lexicon)
    mark = " (repaired)" if result.repaired else ""
    print("\n  tokens:", " ".join(e.utterance.tokens))
    print("  gold:  ", e.gold.to_bracketed())
    print("  pred%s: %s" % (mark, result.tree.to_bracketed()))
