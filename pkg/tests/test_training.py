"""Learning-rate schedule, batching, and end-to-end training runs."""

import numpy as np
import pytest

from prosoparse.model import ModelConfig
from prosoparse.synth import SynthConfig, gen_synthetic
from prosoparse.training import (TrainConfig, TrainingError, TrainLog,
                                 lr_update, train)

SMALL_MODEL = dict(hidden=12, layers=2, word_embed_dim=10, output_embed_dim=8,
                   pause_embed_dim=3, cnn_filter_widths=(2, 3),
                   cnn_filters_per_width=2, location_filters=2,
                   location_width=5, dropout=0.0)


def small_corpus(n_train=12, n_dev=4, seed=3):
    config = SynthConfig(n_train=n_train, n_dev=n_dev, n_test=4)
    return gen_synthetic(config, seed=seed)


# ---------------------------------------------------------------------------
# Schedule rule

def test_lr_update_needs_window_plus_one_values():
    config = TrainConfig(loss_window=3)
    for history in ([], [5.0], [5.0, 4.0], [5.0, 4.0, 3.0]):
        assert lr_update(history, 0.1, config) == 0.1


def test_lr_update_decays_only_above_window_max():
    config = TrainConfig(loss_window=3, decay_factor=0.9)
    # newest 3.5 <= max(5,4,3) = 5: hold
    assert lr_update([5.0, 4.0, 3.0, 3.5], 0.1, config) == 0.1
    # newest 5.1 > 5: decay
    assert lr_update([5.0, 4.0, 3.0, 5.1], 0.1, config) == pytest.approx(0.09)
    # equality is not an increase
    assert lr_update([5.0, 4.0, 3.0, 5.0], 0.1, config) == 0.1
    # only the last window counts: old spike ignored
    assert lr_update([9.0, 2.0, 2.0, 2.0, 2.1], 0.1, config) == pytest.approx(0.09)


def test_train_config_validation_and_kv():
    with pytest.raises(TrainingError):
        TrainConfig(lr0=0.0)
    with pytest.raises(TrainingError):
        TrainConfig(decay_factor=1.0)
    config = TrainConfig(batch_size=8, lr0=0.01, target_f1=99.0)
    assert TrainConfig.from_kv(config.to_kv()) == config
    with pytest.raises(TrainingError):
        TrainConfig.from_kv({"momentum": "0.9"})


# ---------------------------------------------------------------------------
# Training loop

def test_train_runs_and_logs(tmp_path):
    corpus = small_corpus()
    model_config = ModelConfig(**SMALL_MODEL, attention="content")
    train_config = TrainConfig(batch_size=4, lr0=0.01, max_epochs=2,
                               loss_check_interval=2, seed=0)
    model, tlog = train(corpus.split("train"), corpus.split("dev"),
                        model_config, train_config, lexicon=corpus.lexicon)
    assert tlog.stop_reason == "max_epochs"
    assert len(tlog.epoch_dev_f1) == 2
    assert tlog.interval_losses  # at least one 2-update block completed
    assert all(np.isfinite(loss) for _, loss in tlog.interval_losses)
    path = tmp_path / "log.tsv"
    tlog.save(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "kind\ta\tb"
    assert lines[-1].startswith("stop\t2\tmax_epochs")


def test_train_is_seed_deterministic():
    corpus = small_corpus()
    model_config = ModelConfig(**SMALL_MODEL, attention="content")
    train_config = TrainConfig(batch_size=4, lr0=0.01, max_epochs=2,
                               loss_check_interval=2, seed=11)
    runs = []
    for _ in range(2):
        model, tlog = train(corpus.split("train"), None, model_config,
                            train_config, lexicon=corpus.lexicon)
        runs.append((tlog.rows(),
                     {k: p.data.copy() for k, p in model.params.items()}))
    assert runs[0][0] == runs[1][0]
    for name in runs[0][1]:
        np.testing.assert_array_equal(runs[0][1][name], runs[1][1][name])


def test_train_keeps_best_dev_parameters():
    corpus = small_corpus()
    model_config = ModelConfig(**SMALL_MODEL, attention="content")
    train_config = TrainConfig(batch_size=4, lr0=0.02, max_epochs=3, seed=2,
                               loss_check_interval=100)
    model, tlog = train(corpus.split("train"), corpus.split("dev"),
                        model_config, train_config, lexicon=corpus.lexicon)
    assert tlog.best_epoch >= 1
    assert tlog.best_dev_f1 == pytest.approx(
        max(f1 for _, f1 in tlog.epoch_dev_f1))


def test_train_feature_model_drops_text_only_examples():
    config = SynthConfig(n_train=10, n_dev=4, n_test=2,
                         missing_acoustics_frac=0.4)
    corpus = gen_synthetic(config, seed=8)
    assert any(not e.has_acoustics for e in corpus.split("train"))
    model_config = ModelConfig(**SMALL_MODEL, attention="content",
                               features=frozenset({"pause"}))
    train_config = TrainConfig(batch_size=4, lr0=0.01, max_epochs=1, seed=0)
    model, _ = train(corpus.split("train"), None, model_config, train_config,
                     lexicon=corpus.lexicon)
    assert model.config.features == frozenset({"pause"})


def test_train_rejects_empty_and_missing_lexicon():
    with pytest.raises(TrainingError, match="empty"):
        train([], None, ModelConfig(**SMALL_MODEL, attention="content"),
              TrainConfig())
    corpus = small_corpus()
    with pytest.raises(TrainingError, match="lexicon"):
        train(corpus.split("train"), None,
              ModelConfig(**SMALL_MODEL, attention="content",
                          features=frozenset({"duration"})),
              TrainConfig())


def test_trainlog_rows_have_no_wall_clock():
    tlog = TrainLog(wall_clock_s=123.0)
    assert not any("123" in row for row in tlog.rows())
