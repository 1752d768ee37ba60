"""Minibatch training with interval-loss learning-rate decay.

The schedule follows the rule: training loss is averaged over every block
of loss_check_interval updates, and when a block's loss exceeds the worst
of the previous three blocks the learning rate is multiplied by 0.9.  No
decay can happen until three previous blocks exist.  Early stopping
watches dev F1 with a fixed patience and the best-dev parameters are what
the run returns.

Batches group sentences of identical token count, so the encoder needs no
padding or masks; the padded target side is masked in the loss.  All
randomness (parameter init, batch shuffling, dropout) derives from the
single TrainConfig seed, making reruns bit-identical.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .corpus import Example
from .decoding import decode_corpus
from .metrics import parseval
from .model import (ModelConfig, ParserModel, PreparedExample, SymbolVocab,
                    WordVocab, prepare_example)
from .prosody import DurationLexicon, build_prosodic_inputs
from .trees import linearize

log = logging.getLogger(__name__)


class TrainingError(Exception):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    lr0: float = 0.001
    decay_factor: float = 0.9
    loss_window: int = 3
    loss_check_interval: int = 500
    max_epochs: int = 50
    seed: int = 0
    early_stop_patience: int = 5
    target_f1: float | None = None  # stop once dev F1 reaches this

    def __post_init__(self):
        for name in ("batch_size", "loss_window", "loss_check_interval",
                     "max_epochs", "early_stop_patience"):
            if getattr(self, name) <= 0:
                raise TrainingError("%s must be positive" % name)
        if self.lr0 <= 0:
            raise TrainingError("lr0 must be positive")
        if not 0 < self.decay_factor < 1:
            raise TrainingError("decay_factor must be in (0, 1)")

    def to_kv(self) -> dict[str, str]:
        out = {
            "batch_size": str(self.batch_size), "lr0": repr(self.lr0),
            "decay_factor": repr(self.decay_factor),
            "loss_window": str(self.loss_window),
            "loss_check_interval": str(self.loss_check_interval),
            "max_epochs": str(self.max_epochs), "seed": str(self.seed),
            "early_stop_patience": str(self.early_stop_patience),
        }
        if self.target_f1 is not None:
            out["target_f1"] = repr(self.target_f1)
        return out

    @classmethod
    def from_kv(cls, kv: dict[str, str]) -> "TrainConfig":
        conv = {"batch_size": int, "lr0": float, "decay_factor": float,
                "loss_window": int, "loss_check_interval": int,
                "max_epochs": int, "seed": int, "early_stop_patience": int,
                "target_f1": float}
        kwargs = {}
        for key, value in kv.items():
            if key not in conv:
                raise TrainingError("unknown train config key %r" % key)
            kwargs[key] = conv[key](value)
        return cls(**kwargs)


def lr_update(history: list[float], current_lr: float,
              config: TrainConfig) -> float:
    """Decay when the newest interval loss beats the worst of the previous
    loss_window values; insufficient history leaves the rate alone."""
    if len(history) < config.loss_window + 1:
        return current_lr
    newest = history[-1]
    previous = history[-1 - config.loss_window: -1]
    if newest > max(previous):
        return current_lr * config.decay_factor
    return current_lr


@dataclass
class LrSchedule:
    """Decay-count bookkeeping around lr_update.

    Recomputing the rate as lr0 x factor^k (rather than multiplying the
    running value) keeps it bit-identical to the closed form however many
    decays accumulate; sequential products drift by ulps after a few steps.
    """

    lr0: float
    decay_factor: float
    n_decays: int = 0

    @property
    def lr(self) -> float:
        return self.lr0 * self.decay_factor ** self.n_decays

    def observe(self, history: list[float], config: TrainConfig) -> bool:
        """Apply the decay rule to the newest interval loss; True on decay."""
        if lr_update(history, self.lr, config) != self.lr:
            self.n_decays += 1
            return True
        return False


@dataclass
class TrainLog:
    interval_losses: list = field(default_factory=list)  # (update, mean loss)
    epoch_dev_f1: list = field(default_factory=list)     # (epoch, f1)
    lr_events: list = field(default_factory=list)        # (update, new lr)
    best_epoch: int = -1
    best_dev_f1: float = -1.0
    stopped_epoch: int = -1
    stop_reason: str = ""
    wall_clock_s: float = 0.0  # informational; not part of the written log

    def rows(self) -> list[str]:
        """Deterministic tab-separated rows (wall clock deliberately absent
        so identical seeds produce identical files)."""
        out = ["kind\ta\tb"]
        for update, loss in self.interval_losses:
            out.append("interval\t%d\t%r" % (update, loss))
        for epoch, f1 in self.epoch_dev_f1:
            out.append("dev_f1\t%d\t%r" % (epoch, f1))
        for update, lr in self.lr_events:
            out.append("lr\t%d\t%r" % (update, lr))
        out.append("best\t%d\t%r" % (self.best_epoch, self.best_dev_f1))
        out.append("stop\t%d\t%s" % (self.stopped_epoch, self.stop_reason))
        return out

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.rows()) + "\n")


def _spawn_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def prepare_dataset(examples: list[Example], word_vocab: WordVocab,
                    symbol_vocab: SymbolVocab | None, config: ModelConfig,
                    lexicon: DurationLexicon | None) -> list[PreparedExample]:
    """Feature extraction for a model; prosody models silently drop
    examples lacking acoustics (they can only train the text-only path)."""
    out = []
    min_rows = config.max_filter_width if "cnn" in config.features else 1
    for example in examples:
        if config.features:
            if not example.has_acoustics:
                continue
            prosodic = build_prosodic_inputs(example, lexicon, min_rows=min_rows)
        else:
            prosodic = None
        out.append(prepare_example(example, word_vocab, symbol_vocab, config,
                                   prosodic=prosodic))
    return out


def _batches(prepared: list[PreparedExample], batch_size: int,
             rng: np.random.Generator) -> list[list[PreparedExample]]:
    order = rng.permutation(len(prepared))
    by_len: dict[int, list[int]] = {}
    for i in order:
        by_len.setdefault(prepared[i].n_tokens, []).append(int(i))
    batches = []
    for length in sorted(by_len):
        idx = by_len[length]
        for lo in range(0, len(idx), batch_size):
            batches.append([prepared[i] for i in idx[lo: lo + batch_size]])
    batch_order = rng.permutation(len(batches))
    return [batches[i] for i in batch_order]


def train(train_examples: list[Example], dev_examples: list[Example] | None,
          model_config: ModelConfig, train_config: TrainConfig,
          lexicon: DurationLexicon | None = None,
          ) -> tuple[ParserModel, TrainLog]:
    """Full training run; returns the best-dev model and the log.

    Without a dev set there is no early stopping and the final parameters
    are returned.  Prosody feature flags require a duration lexicon.
    """
    if not train_examples:
        raise TrainingError("empty training set")
    if model_config.features and lexicon is None:
        raise TrainingError("feature flags %s need a duration lexicon"
                            % sorted(model_config.features))

    t_start = time.monotonic()
    seq = np.random.SeedSequence(train_config.seed)
    init_seq, shuffle_seq, dropout_seq = seq.spawn(3)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    dropout_rng = np.random.default_rng(dropout_seq)

    word_vocab = WordVocab.from_tokens(
        [e.utterance.tokens for e in train_examples])
    symbol_vocab = SymbolVocab.from_sequences(
        [linearize(e.gold) for e in train_examples])
    model = ParserModel(model_config, word_vocab, symbol_vocab,
                        seed=_spawn_seed(init_seq))

    prepared = prepare_dataset(train_examples, word_vocab, symbol_vocab,
                               model_config, lexicon)
    if not prepared:
        raise TrainingError("no usable training examples after filtering")

    if dev_examples is not None and model_config.features:
        # no text backoff exists inside a prosody-model run
        dev_examples = [e for e in dev_examples if e.has_acoustics] or None

    adam = ad.AdamState(lr=train_config.lr0)
    schedule = LrSchedule(train_config.lr0, train_config.decay_factor)
    log_out = TrainLog()
    history: list[float] = []
    updates = 0
    block_loss_sum = 0.0
    block_sentences = 0
    best_params = None
    since_best = 0

    for epoch in range(1, train_config.max_epochs + 1):
        for batch in _batches(prepared, train_config.batch_size, shuffle_rng):
            ad.zero_grads(model.params)
            loss = model.sequence_loss(batch, training=True, rng=dropout_rng)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingError(
                    "non-finite loss at update %d on batch [%s]"
                    % (updates + 1, ", ".join(ex.id for ex in batch)))
            loss.backward()
            ad.adam_step(model.params, adam)
            updates += 1
            block_loss_sum += value * len(batch)
            block_sentences += len(batch)
            if updates % train_config.loss_check_interval == 0:
                history.append(block_loss_sum / block_sentences)
                log_out.interval_losses.append((updates, history[-1]))
                block_loss_sum = 0.0
                block_sentences = 0
                if schedule.observe(history, train_config):
                    adam.lr = schedule.lr
                    log_out.lr_events.append((updates, adam.lr))

        if dev_examples is None:
            continue
        trees, _ = decode_corpus(model, model, dev_examples, lexicon)
        f1 = parseval([e.gold for e in dev_examples], trees).f1
        log_out.epoch_dev_f1.append((epoch, f1))
        log.info("epoch %d dev F1 %.2f lr %g", epoch, f1, adam.lr)
        if f1 > log_out.best_dev_f1:
            log_out.best_dev_f1 = f1
            log_out.best_epoch = epoch
            best_params = model.copy_parameter_values()
            since_best = 0
        else:
            since_best += 1
        if train_config.target_f1 is not None and f1 >= train_config.target_f1:
            log_out.stopped_epoch = epoch
            log_out.stop_reason = "target_f1"
            break
        if since_best >= train_config.early_stop_patience:
            log_out.stopped_epoch = epoch
            log_out.stop_reason = "patience"
            break
    else:
        log_out.stopped_epoch = train_config.max_epochs
        log_out.stop_reason = "max_epochs"

    if best_params is not None:
        model.load_parameter_values(best_params)
    log_out.wall_clock_s = time.monotonic() - t_start
    return model, log_out
