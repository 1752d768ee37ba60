"""Bracket scoring: parseval P/R/F1, flattened-edit variant, strata, bootstrap.

Plain EVALB-style configuration: labels compared exactly, pre-terminals
excluded, the root counted, no deletable labels and no length cutoff.
Corpus scores are micro-averaged (summed counts, then one P/R/F1).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .trees import Tree, contains_edit, flatten_edits

BOOTSTRAP_CHUNK = 2048  # fixed so results never depend on memory tuning


class MetricsError(Exception):
    pass


@dataclass
class EvalReport:
    matched: int
    gold_total: int
    pred_total: int
    precision: float        # percentages
    recall: float
    f1: float
    strata: dict = field(default_factory=dict)
    backoff_count: int = 0

    def line(self) -> str:
        return ("P %.2f R %.2f F1 %.2f (matched %d / gold %d / pred %d)"
                % (self.precision, self.recall, self.f1,
                   self.matched, self.gold_total, self.pred_total))


def bracket_set(tree: Tree) -> Counter:
    """Multiset of (label, start, end) for internal nodes; pre-terminals and
    leaves carry no bracket, the root does.  Duplicate spans from unary
    chains are kept with their multiplicity."""
    out: Counter = Counter()

    def walk(node: Tree, start: int) -> int:
        if node.label is None:
            return start + 1
        if node.is_preterminal:
            return start + len(node.leaves())
        pos = start
        for child in node.children:
            pos = walk(child, pos)
        out[(node.label, start, pos)] += 1
        return pos

    walk(tree, 0)
    return out


def _pair_counts(gold: Tree, pred: Tree, index: int) -> tuple[int, int, int]:
    n_gold, n_pred = len(gold.leaves()), len(pred.leaves())
    if n_gold != n_pred:
        raise MetricsError(
            "sentence %d: gold has %d tokens but prediction has %d"
            % (index, n_gold, n_pred)
        )
    gset, pset = bracket_set(gold), bracket_set(pred)
    matched = sum((gset & pset).values())
    return matched, sum(gset.values()), sum(pset.values())


def per_sentence_counts(gold: list[Tree], pred: list[Tree]) -> np.ndarray:
    """[n x 3] matched/gold/pred bracket counts, the bootstrap's raw material."""
    if len(gold) != len(pred):
        raise MetricsError("gold has %d trees, predictions %d"
                           % (len(gold), len(pred)))
    return np.array([_pair_counts(g, p, i)
                     for i, (g, p) in enumerate(zip(gold, pred))], dtype=np.int64)


def _prf(matched: float, gold_total: float, pred_total: float
         ) -> tuple[float, float, float]:
    precision = 100.0 * matched / pred_total if pred_total else 0.0
    recall = 100.0 * matched / gold_total if gold_total else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return precision, recall, f1


def report_from_counts(matched: int, gold_total: int, pred_total: int,
                       backoff_count: int = 0) -> EvalReport:
    precision, recall, f1 = _prf(matched, gold_total, pred_total)
    return EvalReport(matched=int(matched), gold_total=int(gold_total),
                      pred_total=int(pred_total), precision=precision,
                      recall=recall, f1=f1, backoff_count=backoff_count)


def parseval(gold: list[Tree], pred: list[Tree],
             backoff_count: int = 0) -> EvalReport:
    counts = per_sentence_counts(gold, pred)
    totals = counts.sum(axis=0) if len(counts) else np.zeros(3, dtype=np.int64)
    return report_from_counts(totals[0], totals[1], totals[2], backoff_count)


def flat_f1(gold: list[Tree], pred: list[Tree],
            backoff_count: int = 0) -> EvalReport:
    """Parseval after collapsing every disfluency-edit subtree to a flat run
    of pre-terminals in both gold and prediction."""
    return parseval([flatten_edits(t) for t in gold],
                    [flatten_edits(t) for t in pred], backoff_count)


# ---------------------------------------------------------------------------
# Strata

def disfluency_stratum(gold: Tree) -> str:
    return "disfluent" if contains_edit(gold) else "fluent"


def length_stratum(gold: Tree) -> str:
    n = len(gold.leaves())
    if n > 40:
        return "40+"
    lo = 5 * ((n - 1) // 5)
    return "%d-%d" % (lo + 1, lo + 5)


def stratified_report(gold: list[Tree], pred: list[Tree],
                      stratifier) -> dict[str, EvalReport]:
    """Micro scores within each stratum of the gold-side partition."""
    if len(gold) != len(pred):
        raise MetricsError("gold has %d trees, predictions %d"
                           % (len(gold), len(pred)))
    buckets: dict[str, list[int]] = {}
    for i, g in enumerate(gold):
        buckets.setdefault(stratifier(g), []).append(i)
    out = {}
    for name in sorted(buckets):
        idx = buckets[name]
        out[name] = parseval([gold[i] for i in idx], [pred[i] for i in idx])
    return out


# ---------------------------------------------------------------------------
# Paired bootstrap

def _f1_from_sums(m: np.ndarray, g: np.ndarray, p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(p > 0, m / np.maximum(p, 1), 0.0)
        rec = np.where(g > 0, m / np.maximum(g, 1), 0.0)
        s = prec + rec
        return np.where(s > 0, 2 * prec * rec / np.where(s > 0, s, 1.0), 0.0)


def bootstrap_pvalue(gold: list[Tree], pred_a: list[Tree], pred_b: list[Tree],
                     draws: int = 100_000, seed: int = 0) -> float:
    """Paired bootstrap over sentences for the claim "b beats a".

    Resamples sentence indices with replacement, recomputes both micro F1s
    on each draw, and returns the fraction of draws with F1(b) <= F1(a);
    ties count against the claim.  Deterministic for a fixed seed (fixed
    internal chunking).
    """
    if draws <= 0:
        raise MetricsError("draws must be positive")
    counts_a = per_sentence_counts(gold, pred_a)
    counts_b = per_sentence_counts(gold, pred_b)
    n = len(counts_a)
    if n == 0:
        raise MetricsError("empty corpus")
    rng = np.random.default_rng(seed)
    not_better = 0
    done = 0
    while done < draws:
        k = min(BOOTSTRAP_CHUNK, draws - done)
        idx = rng.integers(0, n, size=(k, n))
        sa = counts_a[idx].sum(axis=1, dtype=np.int64)
        sb = counts_b[idx].sum(axis=1, dtype=np.int64)
        f1_a = _f1_from_sums(sa[:, 0], sa[:, 1], sa[:, 2])
        f1_b = _f1_from_sums(sb[:, 0], sb[:, 1], sb[:, 2])
        not_better += int(np.count_nonzero(f1_b <= f1_a))
        done += k
    return not_better / draws
