"""Tree structure, linearization round trips, and repair behavior."""

import numpy as np
import pytest

from prosoparse.trees import (CLOSE, XX, Tree, TreeError, delinearize,
                              flatten_edits, is_valid_parse, linearize,
                              parse_bracketed, repair)

SAMPLE = "(S (NP (PRP i)) (VP (VBP know) (NP (DT the) (NN answer))))"


def test_parse_bracketed_structure():
    tree = parse_bracketed(SAMPLE)
    assert tree.label == "S"
    assert tree.leaves() == ["i", "know", "the", "answer"]
    assert tree.span == (0, 4)
    assert tree.children[1].children[1].span == (2, 4)


def test_parse_bracketed_anonymous_wrapper():
    tree = parse_bracketed("( (S (NN dog)) )")
    assert tree.label == "S"


@pytest.mark.parametrize("bad", ["", "(S", "(S (NP i)) extra", "()", "(S ())"])
def test_parse_bracketed_rejects_malformed(bad):
    with pytest.raises(TreeError):
        parse_bracketed(bad)


def test_linearize_collapses_preterminals():
    tree = parse_bracketed(SAMPLE)
    assert linearize(tree) == ["(S", "(NP", "XX", ")", "(VP", "XX",
                               "(NP", "XX", "XX", ")", ")", ")"]


def test_round_trip_structure():
    tree = parse_bracketed(SAMPLE)
    back = delinearize(linearize(tree), tree.leaves())
    # POS tags are normalized to XX, bracket structure and leaves survive
    assert back.leaves() == tree.leaves()
    assert linearize(back) == linearize(tree)


def test_delinearize_checks_token_count():
    with pytest.raises(TreeError):
        delinearize(["(S", "XX", ")"], ["two", "words"])


def test_delinearize_rejects_forests():
    with pytest.raises(TreeError):
        delinearize(["(S", "XX", ")", "(S", "XX", ")"], ["a", "b"])


def test_is_valid_parse():
    assert is_valid_parse(["(S", "XX", "XX", ")"], 2)
    assert not is_valid_parse(["(S", "XX", ")"], 2)          # XX count
    assert not is_valid_parse(["XX"], 1)                     # no root
    assert not is_valid_parse(["(S", "(NP", ")", "XX", ")"], 1)  # empty NP
    assert not is_valid_parse(["(S", "XX"], 1)               # unbalanced


def test_repair_passes_valid_through():
    symbols = ["(S", "(NP", "XX", ")", "XX", ")"]
    assert repair(list(symbols), 2) == symbols


def test_repair_fixes_each_defect():
    # unmatched close dropped
    assert repair([")", "(S", "XX", ")"], 1) == ["(S", "XX", ")"]
    # unclosed open closed
    assert repair(["(S", "XX"], 1) == ["(S", "XX", ")"]
    # empty constituent pruned
    assert repair(["(S", "(NP", ")", "XX", ")"], 1) == ["(S", "XX", ")"]
    # forest wrapped in a fresh root
    out = repair(["(A", "XX", ")", "(B", "XX", ")"], 2)
    assert is_valid_parse(out, 2) and out[0] == "(S"
    # XX deficit filled, excess trimmed from the end
    assert repair(["(S", ")"], 2) == ["(S", "XX", "XX", ")"]
    assert repair(["(S", "XX", "XX", "XX", ")"], 1) == ["(S", "XX", ")"]
    # garbage-only input falls back to a flat tree
    assert repair(["<s>", "</s>"], 3) == ["(S", "XX", "XX", "XX", ")"]


def test_repair_fuzz_small():
    rng = np.random.default_rng(11)
    alphabet = ["(S", "(NP", "(VP", "(EDITED", CLOSE, XX, "</s>", "junk"]
    for _ in range(500):
        length = int(rng.integers(0, 25))
        seq = [alphabet[i] for i in rng.integers(0, len(alphabet), size=length)]
        n_tok = int(rng.integers(1, 9))
        fixed = repair(seq, n_tok)
        assert is_valid_parse(fixed, n_tok)
        assert delinearize(fixed, ["w%d" % i for i in range(n_tok)])


def test_repair_rejects_zero_tokens():
    with pytest.raises(ValueError):
        repair(["(S", ")"], 0)


def test_flatten_edits():
    tree = parse_bracketed(
        "(S (EDITED (NP (PRP i) (VBP mean)) (EDITED (UH uh))) (NP (PRP i)))")
    flat = flatten_edits(tree)
    edited = flat.children[0]
    assert edited.label == "EDITED"
    assert all(c.is_preterminal and c.label == XX for c in edited.children)
    assert flat.leaves() == tree.leaves()


def test_flatten_edits_no_edits_is_identity():
    tree = parse_bracketed(SAMPLE)
    assert flatten_edits(tree).to_bracketed() != ""  # rebuilt, same shape
    assert linearize(flatten_edits(tree)) == linearize(tree)
