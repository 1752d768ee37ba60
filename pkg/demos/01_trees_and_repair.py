"""Trees, linearized parse sequences, and total repair.

The parser never manipulates trees directly: it reads and emits flat
symbol sequences ("(S", "(NP", "XX", ")") and trusts a repair pass to turn
arbitrary decoder output back into a real tree.  This script walks that
loop on one sentence, then breaks the sequence on purpose.
"""

from prosoparse import delinearize, is_valid_parse, linearize, repair
from prosoparse.trees import parse_bracketed

SENTENCE = "(S (NP (PRP i)) (VP (VBP know) (NP (DT the) (NN answer))))"

tree = parse_bracketed(SENTENCE)
tokens = tree.leaves()
print("tree:     ", tree)
print("tokens:   ", tokens)

symbols = linearize(tree)
print("linearized:", " ".join(symbols))
print("valid for %d tokens:" % len(tokens), is_valid_parse(symbols, len(tokens)))

rebuilt = delinearize(symbols, tokens)
print("rebuilt:  ", rebuilt)

# Decoders emit malformed sequences, especially early in training. Repair
# is total: drop stray closes, close open brackets, prune empty
# constituents, re-root forests, and pad or trim word slots.
benign = list(symbols)
broken = benign[:3] + [")", ")"] + benign[3:-2]  # stray closes, lost ending
print("\nbroken:   ", " ".join(broken))
print("valid:    ", is_valid_parse(broken, len(tokens)))

fixed = repair(broken, len(tokens))
print("repaired: ", " ".join(fixed))
print("valid:    ", is_valid_parse(fixed, len(tokens)))
print("as tree:  ", delinearize(fixed, tokens))

# Even pure garbage becomes a flat tree with the right number of leaves.
garbage = ["</s>", ")", ")", "wat"]
print("\ngarbage:  ", " ".join(garbage))
print("repaired: ", " ".join(repair(garbage, 4)))
