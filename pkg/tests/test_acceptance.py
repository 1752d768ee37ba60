"""Acceptance gate: nine end-to-end contracts, one verdict line each.

Each test prints "[PASS]/[FAIL] <contract>: <measurement>" and then asserts,
so the printed line and the pytest outcome always agree.  Configurations
and seeds are frozen; tolerances are part of the contract.
"""

import time

import numpy as np

import prosoparse.autodiff as ad
from prosoparse.corpus import Example, Utterance
from prosoparse.decoding import decode_corpus
from prosoparse.metrics import bootstrap_pvalue, flat_f1, parseval
from prosoparse.model import (ModelConfig, ParserModel, PreparedExample,
                              SymbolVocab, WordVocab)
from prosoparse.prosody import (DurationLexicon, PauseCategory, bucket_pause,
                                build_prosodic_inputs, duration_feature)
from prosoparse.synth import (SynthConfig, attachment_accuracy, gen_synthetic)
from prosoparse.training import (LrSchedule, TrainConfig, _batches,
                                 prepare_dataset, train)
from prosoparse.trees import (Tree, delinearize, is_valid_parse, linearize,
                              repair)


def _verdict(name: str, ok: bool, detail: str) -> None:
    print("[%s] %s: %s" % ("PASS" if ok else "FAIL", name, detail))
    assert ok, "%s: %s" % (name, detail)


# ---------------------------------------------------------------------------
# 1. Gradient fidelity

def test_criterion_1_gradient_fidelity():
    t0 = time.monotonic()
    config = ModelConfig(hidden=8, layers=3, word_embed_dim=8,
                         output_embed_dim=8, pause_embed_dim=4,
                         cnn_filter_widths=(3, 5), cnn_filters_per_width=2,
                         location_filters=3, location_width=7, dropout=0.0,
                         features=frozenset({"pause", "duration", "cnn"}),
                         attention="location")
    words = WordVocab(["<unk>"] + ["w%d" % i for i in range(9)])  # |V| = 10
    symbols = SymbolVocab(["<s>", "</s>", ")", "XX", "(NP", "(S"])
    # a mid-scale init conditions the check point: every parameter's sampled
    # gradient clears the finite-difference noise floor
    model = ParserModel(config, words, symbols, seed=0, init_scale=0.8)

    rng = np.random.default_rng(0)
    lexicon = DurationLexicon(word_means={w: 0.2 for w in words.words[1:]})
    batch = []
    for row in range(2):
        tokens = [words.words[1 + int(i)]
                  for i in rng.integers(0, 9, size=4)]
        ali = [(0.3 * i, 0.3 * i + 0.25) for i in range(4)]
        frames = rng.normal(size=(int(np.ceil(ali[-1][1] / 0.01)), 6))
        gold = Tree.phrase("S", [
            Tree.phrase("NP", [Tree.phrase("XX", [Tree.leaf(tokens[0])]),
                               Tree.phrase("XX", [Tree.leaf(tokens[1])])]),
            Tree.phrase("XX", [Tree.leaf(tokens[2])]),
            Tree.phrase("XX", [Tree.leaf(tokens[3])])])
        ex = Example(utterance=Utterance(id="g%d" % row, tokens=tokens,
                                         alignments=ali, frames=frames),
                     gold=gold, has_acoustics=True)
        prosodic = build_prosodic_inputs(ex, lexicon,
                                         min_rows=config.max_filter_width)
        batch.append(PreparedExample(
            id=ex.id, tokens=tokens, token_ids=words.encode(tokens),
            target_ids=symbols.encode(linearize(gold)),
            pause_pre=np.array([p.pause_pre for p in prosodic], dtype=np.intp),
            pause_post=np.array([p.pause_post for p in prosodic], dtype=np.intp),
            delta=np.array([p.delta for p in prosodic]),
            frames=[p.frames for p in prosodic]))

    def loss_fn():
        return model.sequence_loss(batch)

    err = ad.finite_difference_check(loss_fn, model.params,
                                     rng=np.random.default_rng(1))
    elapsed = time.monotonic() - t0
    _verdict("gradient fidelity",
             err < 1e-4 and elapsed < 60.0,
             "max relative error %.3g (< 1e-4), %.1f s (< 60)"
             % (err, elapsed))


# ---------------------------------------------------------------------------
# 2. Attention contract

def _prepared_random(words, rng, n_tokens):
    tokens = [words.words[1 + int(i)]
              for i in rng.integers(0, len(words) - 1, size=n_tokens)]
    return PreparedExample(id="r", tokens=tokens,
                           token_ids=words.encode(tokens), target_ids=None)


def test_criterion_2_attention_contract():
    base = dict(hidden=10, layers=2, word_embed_dim=8, output_embed_dim=8,
                pause_embed_dim=4, cnn_filter_widths=(2,),
                cnn_filters_per_width=2, location_filters=4,
                location_width=6, dropout=0.0)
    words = WordVocab(["<unk>"] + ["w%d" % i for i in range(11)])
    symbols = SymbolVocab(["<s>", "</s>", ")", "XX", "(NP", "(S", "(VP"])
    loc_model = ParserModel(ModelConfig(attention="location", **base),
                            words, symbols, seed=3)
    loc_model.params["loc_filters"].data[:] = 0.0
    con_model = ParserModel(ModelConfig(attention="content", **base),
                            words, symbols, seed=3)
    for name, p in con_model.params.items():
        p.data[:] = loc_model.params[name].data

    rng = np.random.default_rng(7)
    steps = 0
    worst_sum_err = 0.0
    bit_exact = True
    with ad.no_grad():
        while steps < 1000:
            n_tokens = int(rng.integers(2, 9))
            batch = [_prepared_random(words, rng, n_tokens) for _ in range(4)]
            enc_l = loc_model.encode(batch)
            enc_c = con_model.encode(batch)
            state_l = loc_model.initial_decoder_state(enc_l)
            state_c = con_model.initial_decoder_state(enc_c)
            for _ in range(min(25, 1000 - steps)):
                prev = rng.integers(0, len(symbols), size=4)
                probs_l, state_l = loc_model.decode_step(prev, state_l, enc_l)
                probs_c, state_c = con_model.decode_step(prev, state_c, enc_c)
                for state in (state_l, state_c):
                    err = np.abs(state.alpha.data.sum(axis=1) - 1.0).max()
                    worst_sum_err = max(worst_sum_err, err)
                if not (np.array_equal(probs_l.data, probs_c.data)
                        and np.array_equal(state_l.alpha.data,
                                           state_c.alpha.data)):
                    bit_exact = False
                steps += 1
    _verdict("attention contract",
             worst_sum_err <= 1e-9 and bit_exact,
             "1000 steps, worst |sum(alpha)-1| %.2g (<= 1e-9), zeroed "
             "location filters %s content attention bit-exactly"
             % (worst_sum_err, "match" if bit_exact else "DO NOT match"))


# ---------------------------------------------------------------------------
# 3. Repair totality

def test_criterion_3_repair_totality():
    rng = np.random.default_rng(1234)
    alphabet = ["(S", "(NP", "(VP", "(PP", "(EDITED", "(INTJ", ")", ")", "XX",
                "XX", "XX", "<s>", "</s>", "(("]
    failures = 0
    for _ in range(10_000):
        length = int(rng.integers(0, 40))
        seq = [alphabet[i] for i in rng.integers(0, len(alphabet), size=length)]
        n_tok = int(rng.integers(1, 13))
        tokens = ["t%d" % i for i in range(n_tok)]
        try:
            fixed = repair(seq, n_tok)
            if not is_valid_parse(fixed, n_tok):
                failures += 1
                continue
            if delinearize(fixed, tokens).leaves() != tokens:
                failures += 1
        except Exception:
            failures += 1
    _verdict("repair totality",
             failures == 0,
             "10^4 fuzzed sequences, %d failures (need 0)" % failures)


# ---------------------------------------------------------------------------
# 4. Scorer oracle equivalence

def _random_tree(rng, tokens):
    labels = ["S", "NP", "VP", "PP", "EDITED"]
    nodes = [Tree.phrase("XX", [Tree.leaf(t)]) for t in tokens]
    while len(nodes) > 1:
        i = int(rng.integers(0, len(nodes) - 1))
        width = int(rng.integers(2, min(3, len(nodes) - i) + 1))
        merged = Tree.phrase(labels[rng.integers(0, len(labels))],
                             nodes[i: i + width])
        if rng.random() < 0.3:
            merged = Tree.phrase(labels[rng.integers(0, len(labels))], [merged])
        nodes[i: i + width] = [merged]
    root = nodes[0]
    if root.is_preterminal or rng.random() < 0.5:
        root = Tree.phrase("S", [root])
    root.assign_spans()
    return root


def _brute_force_counts(gold, pred):
    """Independent reference: list every labelled span, then greedily match
    each gold span to one unused identical predicted span (quadratic)."""
    def spans(tree):
        out = []

        def walk(node, start):
            if node.label is None:
                return start + 1
            if len(node.children) == 1 and node.children[0].label is None:
                return start + 1
            pos = start
            for child in node.children:
                pos = walk(child, pos)
            out.append((node.label, start, pos))
            return pos

        walk(tree, 0)
        return out

    gold_spans, pred_spans = spans(gold), spans(pred)
    used = [False] * len(pred_spans)
    matched = 0
    for g in gold_spans:
        for j, p in enumerate(pred_spans):
            if not used[j] and p == g:
                used[j] = True
                matched += 1
                break
    return matched, len(gold_spans), len(pred_spans)


def test_criterion_4_scorer_oracle():
    rng = np.random.default_rng(99)
    mismatches = 0
    flat_mismatches = 0
    unary_pairs = 0
    for _ in range(100):
        n = int(rng.integers(1, 13))
        tokens = ["w%d" % i for i in range(n)]
        gold, pred = _random_tree(rng, tokens), _random_tree(rng, tokens)
        report = parseval([gold], [pred])
        oracle = _brute_force_counts(gold, pred)
        if (report.matched, report.gold_total, report.pred_total) != oracle:
            mismatches += 1
        # duplicate spans from unary chains must be counted with multiplicity
        if any(g.label is not None and len(g.children) == 1
               and g.children[0].label is not None
               and not g.children[0].is_preterminal
               for g in gold.iter_nodes()):
            unary_pairs += 1
        # fluent trees: no EDITED label anywhere, flat scoring changes nothing
        if all(node.label != "EDITED" for t in (gold, pred)
               for node in t.iter_nodes()):
            flat = flat_f1([gold], [pred])
            if (flat.matched, flat.gold_total, flat.pred_total) != (
                    report.matched, report.gold_total, report.pred_total):
                flat_mismatches += 1
    _verdict("scorer oracle equivalence",
             mismatches == 0 and flat_mismatches == 0 and unary_pairs > 0,
             "100 random pairs, %d parseval mismatches, %d flat-score "
             "mismatches on fluent pairs, %d pairs exercised unary chains"
             % (mismatches, flat_mismatches, unary_pairs))


# ---------------------------------------------------------------------------
# 5. Overfit oracle

def test_criterion_5_overfit_oracle():
    t0 = time.monotonic()
    corpus = gen_synthetic(SynthConfig(n_train=200, n_dev=0, n_test=0,
                                       seed=11, attachment_rule="lexical"))
    train_set = corpus.split("train")
    model_config = ModelConfig(hidden=64, layers=3, word_embed_dim=64,
                               output_embed_dim=64, dropout=0.0,
                               attention="location")
    train_config = TrainConfig(batch_size=16, lr0=0.01, max_epochs=50,
                               seed=1, target_f1=99.0, early_stop_patience=50)
    model, tlog = train(train_set, train_set, model_config, train_config,
                        lexicon=corpus.lexicon)
    trees, _ = decode_corpus(model, model, train_set, corpus.lexicon)
    f1 = parseval([e.gold for e in train_set], trees).f1
    elapsed = time.monotonic() - t0
    _verdict("overfit oracle",
             f1 >= 99.0 and tlog.stopped_epoch <= 50 and elapsed < 600.0,
             "train F1 %.2f (>= 99) at epoch %d (<= 50), %.0f s (< 600)"
             % (f1, tlog.stopped_epoch, elapsed))


# ---------------------------------------------------------------------------
# 6. Prosody disambiguation

def _attachment_cell(pause_mode, features, seed):
    corpus = gen_synthetic(SynthConfig(n_train=500, n_dev=0, n_test=200,
                                       seed=100 + seed, pause_mode=pause_mode))
    train_set, test_set = corpus.split("train"), corpus.split("test")
    config = ModelConfig(hidden=48, layers=2, word_embed_dim=48,
                         output_embed_dim=48, pause_embed_dim=16, dropout=0.0,
                         attention="location", features=frozenset(features))
    words = WordVocab.from_tokens([e.utterance.tokens for e in train_set])
    symbols = SymbolVocab.from_sequences([linearize(e.gold)
                                          for e in train_set])
    model = ParserModel(config, words, symbols, seed=seed)
    prepared = prepare_dataset(train_set, words, symbols, config,
                               corpus.lexicon)
    adam = ad.AdamState(lr=0.01)
    rng = np.random.default_rng(seed)
    for _ in range(8):
        for batch in _batches(prepared, 16, rng):
            ad.zero_grads(model.params)
            loss = model.sequence_loss(batch)
            loss.backward()
            ad.adam_step(model.params, adam)
    trees, _ = decode_corpus(model, model, test_set, corpus.lexicon)
    return attachment_accuracy(corpus.records_for("test"), trees)


def test_criterion_6_prosody_disambiguation():
    rows = []
    ok = True
    for seed in (1, 2, 3):
        for pause_mode in ("coupled", "random"):
            for features, name in ((frozenset(), "text-only"),
                                   (frozenset({"pause"}), "text+pause")):
                acc = _attachment_cell(pause_mode, features, seed)
                informative = pause_mode == "coupled" and features
                bound = ">= 0.95" if informative else "<= 0.60"
                cell_ok = acc >= 0.95 if informative else acc <= 0.60
                ok = ok and cell_ok
                rows.append("seed %d %s %s %.3f (%s)"
                            % (seed, pause_mode, name, acc, bound))
    _verdict("prosody disambiguation", ok, "; ".join(rows))


# ---------------------------------------------------------------------------
# 7. LR schedule

def test_criterion_7_lr_schedule():
    lr0 = 0.001
    config = TrainConfig(lr0=lr0, decay_factor=0.9, loss_window=3)
    script = [5.0, 4.0, 3.0, 6.0, 2.0, 7.0, 1.5, 1.4, 1.3, 8.0,
              1.2, 1.1, 1.0, 0.9, 9.0, 0.8, 0.85, 0.7, 0.9, 0.6]
    # hand-derived: decays exactly at intervals 4, 6, 10, 15, 19 (1-based)
    expected_k = [0, 0, 0, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5]
    expected_events = {4, 6, 10, 15, 19}

    schedule = LrSchedule(lr0, config.decay_factor)
    history = []
    events = set()
    exact = True
    for i, loss in enumerate(script, start=1):
        history.append(loss)
        if schedule.observe(history, config):
            events.add(i)
        if schedule.lr != lr0 * 0.9 ** expected_k[i - 1]:
            exact = False
    _verdict("lr schedule",
             exact and events == expected_events and len(script) == 20,
             "20 intervals, decay events at %s (expected %s), every rate "
             "exactly lr0 x 0.9^k: %s"
             % (sorted(events), sorted(expected_events), exact))


# ---------------------------------------------------------------------------
# 8. Bootstrap sanity

def test_criterion_8_bootstrap_sanity():
    corpus = gen_synthetic(SynthConfig(n_train=500, n_dev=0, n_test=0,
                                       seed=0))
    gold = [r.example.gold for r in corpus.records_for("train")]
    corrupted = []
    for i, tree in enumerate(gold):
        if i % 2 == 0:  # flatten half the predictions
            corrupted.append(Tree.phrase("S", [
                Tree.phrase("XX", [Tree.leaf(t)]) for t in tree.leaves()]))
        else:
            corrupted.append(tree)

    t0 = time.monotonic()
    p_same = bootstrap_pvalue(gold, gold, gold, draws=100_000, seed=0)
    t_same = time.monotonic() - t0
    t0 = time.monotonic()
    p_gain = bootstrap_pvalue(gold, corrupted, gold, draws=100_000, seed=0)
    t_gain = time.monotonic() - t0
    p_again = bootstrap_pvalue(gold, corrupted, gold, draws=100_000, seed=0)
    _verdict("bootstrap sanity",
             (p_same >= 0.95 and p_gain < 0.001 and p_gain == p_again
              and t_same < 30.0 and t_gain < 30.0),
             "identical p=%g (>= 0.95), clean-vs-corrupted p=%g (< 0.001), "
             "rerun identical: %s, 10^5 draws in %.1f s / %.1f s (< 30)"
             % (p_same, p_gain, p_gain == p_again, t_same, t_gain))


# ---------------------------------------------------------------------------
# 9. Feature plumbing

def test_criterion_9_feature_plumbing():
    cases = [(0.0, PauseCategory.OFF), (0.05, PauseCategory.P_LE_005),
             (np.nextafter(0.05, 1), PauseCategory.P_LE_02),
             (0.2, PauseCategory.P_LE_02),
             (np.nextafter(0.2, 1), PauseCategory.P_LE_1),
             (1.0, PauseCategory.P_LE_1),
             (np.nextafter(1.0, 2), PauseCategory.P_GT_1),
             (None, PauseCategory.NOT_AVAILABLE)]
    bucket_ok = all(bucket_pause(gap) is want for gap, want in cases)

    lexicon = DurationLexicon(word_means={"cat": 0.2})
    clip_ok = (duration_feature("cat", 2.0, lexicon) == 5.0
               and duration_feature("cat", 0.1, lexicon) == 0.5)

    base = dict(hidden=8, layers=2, word_embed_dim=8, output_embed_dim=8,
                pause_embed_dim=4, cnn_filter_widths=(2, 3),
                cnn_filters_per_width=2, location_filters=2,
                location_width=5, dropout=0.0)
    words = WordVocab(["<unk>", "a", "b"])
    symbols = SymbolVocab(["<s>", "</s>", ")", "XX", "(S"])
    width_ok = True
    flag_sets = [frozenset(s) for s in
                 ((), ("pause",), ("duration",), ("cnn",),
                  ("pause", "duration"), ("pause", "cnn"),
                  ("duration", "cnn"), ("pause", "duration", "cnn"))]
    for flags in flag_sets:
        config = ModelConfig(features=flags, attention="content", **base)
        expected = (base["word_embed_dim"]
                    + (2 * base["pause_embed_dim"] if "pause" in flags else 0)
                    + (1 if "duration" in flags else 0)
                    + (len(base["cnn_filter_widths"])
                       * base["cnn_filters_per_width"]
                       if "cnn" in flags else 0))
        model = ParserModel(config, words, symbols, seed=0)
        manifest = dict(model.manifest())
        if config.input_width() != expected:
            width_ok = False
        # first encoder layer consumes [features ; hidden] rows
        if manifest["enc_l0_weight"] != (expected + base["hidden"],
                                         4 * base["hidden"]):
            width_ok = False
        if ("pause" in flags) != ("pause_embed_pre" in manifest):
            width_ok = False
        if ("cnn" in flags) != ("cnn_filters_w2" in manifest):
            width_ok = False
    _verdict("feature plumbing",
             bucket_ok and clip_ok and width_ok,
             "pause boundaries exact: %s, duration clip at 5 exact: %s, "
             "input width matches manifest for all 8 flag subsets: %s"
             % (bucket_ok, clip_ok, width_ok))
