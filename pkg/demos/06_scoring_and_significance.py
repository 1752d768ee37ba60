"""Bracket scoring, disfluency-tolerant scoring, strata, and significance.

No model involved: the gold trees are written by hand or generated
synthetically, and the "systems" under comparison are hand-corrupted
copies of gold, so every number is easy to sanity-check by eye.
"""

from prosoparse import (
    SynthConfig, Tree, XX,
    bootstrap_pvalue, bracket_set, disfluency_stratum, flat_f1,
    gen_synthetic, length_stratum, parse_bracketed, parseval,
    stratified_report,
)


def flattened(tree: Tree) -> Tree:
    """Root over bare preterminals: every internal bracket is lost."""
    kids = [Tree.phrase(XX, [Tree.leaf(tok)]) for tok in tree.leaves()]
    return Tree.phrase("S", kids)


gold_tree = parse_bracketed(
    "(S (NP (XX he)) (VP (XX saw) (NP (DT the) (XX dog))))")
print("brackets counted for scoring (label, start, end):")
for (label, i, j), n in sorted(bracket_set(gold_tree).items()):
    print("  %-4s %d..%d  x%d" % (label, i, j, n))

# Flat scoring collapses EDITED (disfluency repair) subtrees to a run of
# pre-terminals on both sides, so structure inside a restart is forgiven
# while brackets elsewhere still count.
gold_d = parse_bracketed(
    "(S (EDITED (NP (XX i) (XX mean))) (NP (XX i)) (VP (XX went)))")
pred_d = parse_bracketed(
    "(S (EDITED (XX i) (XX mean)) (NP (XX i)) (VP (XX went)))")
print("\ndisfluent gold: %s" % gold_d.to_bracketed())
print("prediction:     %s" % pred_d.to_bracketed())
print("  parseval F1 %.2f" % parseval([gold_d], [pred_d]).f1)
print("  flat F1     %.2f (NP inside the EDITED region forgiven)"
      % flat_f1([gold_d], [pred_d]).f1)

# Strata split one corpus score into per-bucket scores keyed off the gold
# tree: token-count bands, or disfluent vs fluent.
gold_h = [
    parse_bracketed("(S (NP (XX he)) (VP (XX ran)))"),
    gold_d,
    parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VBD saw) "
                    "(NP (DT the) (NN cat) (PP (IN by) (NP (XX me))))))"),
]
pred_h = [gold_h[0].copy(), pred_d, flattened(gold_h[2])]
print("\nF1 by sentence length:")
for name, rep in sorted(stratified_report(gold_h, pred_h,
                                          length_stratum).items()):
    print("  %-6s F1 %6.2f  (%s)" % (name, rep.f1, rep.line()))
print("F1 by disfluency:")
for name, rep in sorted(stratified_report(gold_h, pred_h,
                                          disfluency_stratum).items()):
    print("  %-9s F1 %6.2f" % (name, rep.f1))

# Significance: paired bootstrap over sentences.  System A flattens 6 of
# 120 synthetic parses, system B flattens 30, so A should beat B with
# room to spare.  The claim tested is "the second system beats the
# first"; the returned p is the fraction of resamples where it fails to.
corpus = gen_synthetic(SynthConfig(n_train=0, n_dev=0, n_test=120, seed=21))
gold = [e.gold for e in corpus.split("test")]
pred_a = [flattened(t) if i % 20 == 0 else t.copy()
          for i, t in enumerate(gold)]
pred_b = [flattened(t) if i % 4 == 0 else t.copy()
          for i, t in enumerate(gold)]
print("\nsystem A: F1 %.2f over %d sentences"
      % (parseval(gold, pred_a).f1, len(gold)))
print("system B: F1 %.2f" % parseval(gold, pred_b).f1)

p_gain = bootstrap_pvalue(gold, pred_b, pred_a, draws=20000, seed=0)
print("claim 'A beats B': p = %.4f" % p_gain)
p_self = bootstrap_pvalue(gold, pred_a, pred_a, draws=20000, seed=0)
print("claim 'A beats A': p = %.4f (ties count against the claim)" % p_self)
