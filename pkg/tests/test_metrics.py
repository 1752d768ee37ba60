"""Bracket scoring against hand counts and a brute-force oracle."""

import numpy as np
import pytest

from prosoparse.metrics import (EvalReport, MetricsError, bootstrap_pvalue,
                                bracket_set, disfluency_stratum, flat_f1,
                                length_stratum, parseval, stratified_report)
from prosoparse.trees import Tree, parse_bracketed

GOLD = parse_bracketed("(S (NP (DT the) (NN cat)) (VP (VBD saw) (NP (DT a) (NN dog))))")
PRED = parse_bracketed("(S (NP (DT the) (NN cat)) (VP (VBD saw) (DT a) (NN dog)))")


def test_bracket_set_excludes_preterminals_includes_root():
    brackets = bracket_set(GOLD)
    assert brackets == {("S", 0, 5): 1, ("NP", 0, 2): 1,
                        ("VP", 2, 5): 1, ("NP", 3, 5): 1}


def test_bracket_set_keeps_unary_duplicates():
    tree = parse_bracketed("(S (NP (NP (NN dog))))")
    assert bracket_set(tree) == {("S", 0, 1): 1, ("NP", 0, 1): 2}


def test_parseval_hand_counts():
    report = parseval([GOLD], [PRED])
    # matched: S, NP(0,2), VP(2,5); gold 4, pred 3
    assert (report.matched, report.gold_total, report.pred_total) == (3, 4, 3)
    assert report.precision == pytest.approx(100.0)
    assert report.recall == pytest.approx(75.0)
    assert report.f1 == pytest.approx(2 * 100 * 75 / 175)


def test_parseval_identity_is_perfect():
    report = parseval([GOLD], [GOLD])
    assert report.f1 == pytest.approx(100.0)


def test_parseval_rejects_leaf_mismatch():
    short = parse_bracketed("(S (NN cat))")
    with pytest.raises(MetricsError, match="sentence 0"):
        parseval([GOLD], [short])


def _random_tree(rng, tokens):
    """Uniform-ish random binary-ish tree with random labels and unary noise."""
    labels = ["S", "NP", "VP", "PP", "EDITED"]
    nodes = [Tree.phrase("XX", [Tree.leaf(t)]) for t in tokens]
    while len(nodes) > 1:
        i = int(rng.integers(0, len(nodes) - 1))
        width = int(rng.integers(2, min(3, len(nodes) - i) + 1))
        merged = Tree.phrase(labels[rng.integers(0, len(labels))],
                             nodes[i: i + width])
        if rng.random() < 0.25:  # unary chain over the same span
            merged = Tree.phrase(labels[rng.integers(0, len(labels))], [merged])
        nodes[i: i + width] = [merged]
    root = nodes[0]
    if root.is_preterminal or rng.random() < 0.5:
        root = Tree.phrase("S", [root])
    root.assign_spans()
    return root


def _oracle_counts(gold, pred):
    """Quadratic reference: greedy one-to-one matching of labelled spans."""
    def spans(tree):
        out = []

        def walk(node, start):
            if node.label is None:
                return start + 1
            if node.is_preterminal:
                return start + len(node.leaves())
            pos = start
            for child in node.children:
                pos = walk(child, pos)
            out.append((node.label, start, pos))
            return pos

        walk(tree, 0)
        return out

    gold_spans = spans(gold)
    pred_spans = spans(pred)
    used = [False] * len(pred_spans)
    matched = 0
    for g in gold_spans:
        for j, p in enumerate(pred_spans):
            if not used[j] and p == g:
                used[j] = True
                matched += 1
                break
    return matched, len(gold_spans), len(pred_spans)


def test_parseval_agrees_with_oracle_on_random_trees():
    rng = np.random.default_rng(17)
    for _ in range(60):
        n = int(rng.integers(1, 9))
        tokens = ["w%d" % i for i in range(n)]
        gold = _random_tree(rng, tokens)
        pred = _random_tree(rng, tokens)
        report = parseval([gold], [pred])
        assert (report.matched, report.gold_total,
                report.pred_total) == _oracle_counts(gold, pred)


def test_flat_f1_forgives_edit_internal_structure():
    gold = parse_bracketed(
        "(S (EDITED (NP (PRP i) (VBP mean))) (NP (PRP i)) (VP (VBP know)))")
    pred = parse_bracketed(
        "(S (EDITED (PRP i) (VBP mean)) (NP (PRP i)) (VP (VBP know)))")
    strict = parseval([gold], [pred])
    flat = flat_f1([gold], [pred])
    assert strict.f1 < 100.0
    assert flat.f1 == pytest.approx(100.0)


def test_flat_equals_parseval_without_edits():
    strict = parseval([GOLD], [PRED])
    flat = flat_f1([GOLD], [PRED])
    assert (strict.matched, strict.gold_total, strict.pred_total) == (
        flat.matched, flat.gold_total, flat.pred_total)


def test_strata_assignment():
    assert disfluency_stratum(GOLD) == "fluent"
    edited = parse_bracketed("(S (EDITED (UH uh)) (NP (PRP i)))")
    assert disfluency_stratum(edited) == "disfluent"
    assert length_stratum(parse_bracketed("(S (NN a))")) == "1-5"
    five = "(S %s)" % " ".join("(NN w%d)" % i for i in range(5))
    assert length_stratum(parse_bracketed(five)) == "1-5"
    six = "(S %s)" % " ".join("(NN w%d)" % i for i in range(6))
    assert length_stratum(parse_bracketed(six)) == "6-10"
    fifty = "(S %s)" % " ".join("(NN w%d)" % i for i in range(50))
    assert length_stratum(parse_bracketed(fifty)) == "40+"


def test_stratified_report_partitions_sentences():
    edited = parse_bracketed("(S (EDITED (UH uh)) (NP (PRP i)))")
    gold = [GOLD, edited]
    out = stratified_report(gold, gold, disfluency_stratum)
    assert sorted(out) == ["disfluent", "fluent"]
    assert all(rep.f1 == pytest.approx(100.0) for rep in out.values())


def test_bootstrap_identical_predictions_never_differ():
    gold = [GOLD, PRED, GOLD]
    p = bootstrap_pvalue(gold, gold, gold, draws=500, seed=0)
    assert p == 1.0  # F1(b) == F1(a) on every draw; ties count against b


def test_bootstrap_detects_clear_win():
    rng = np.random.default_rng(5)
    gold = [_random_tree(rng, ["w%d" % i for i in range(6)]) for _ in range(80)]
    worse = [_random_tree(rng, ["w%d" % i for i in range(6)]) for _ in range(80)]
    p = bootstrap_pvalue(gold, worse, gold, draws=2000, seed=1)
    assert p < 0.01  # perfect predictions beat random ones


def test_bootstrap_is_deterministic_across_chunking():
    rng = np.random.default_rng(6)
    gold = [_random_tree(rng, ["w%d" % i for i in range(5)]) for _ in range(30)]
    pred = [_random_tree(rng, ["w%d" % i for i in range(5)]) for _ in range(30)]
    p1 = bootstrap_pvalue(gold, pred, gold, draws=3000, seed=9)
    p2 = bootstrap_pvalue(gold, pred, gold, draws=3000, seed=9)
    assert p1 == p2
    with pytest.raises(MetricsError):
        bootstrap_pvalue(gold, pred, gold, draws=0)


def test_report_line_format():
    report = parseval([GOLD], [PRED])
    assert isinstance(report, EvalReport)
    assert report.line().startswith("P 100.00 R 75.00 F1 ")
