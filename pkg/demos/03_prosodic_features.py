"""What the model reads for each word beyond its identity.

Three acoustic-prosodic blocks attach to every token: categorical pause
buckets on either side (shared between neighbors), word duration relative
to its lexicon mean (clipped at 5), and a window of 10 ms frame features
around the word that a small CNN pools into a fixed vector.
"""

import numpy as np

from prosoparse import (DurationLexicon, bucket_pause, build_prosodic_inputs,
                        duration_feature, word_frame_slice)
from prosoparse.corpus import Example, Utterance
from prosoparse.trees import parse_bracketed

print("pause buckets by gap length:")
for gap in (None, 0.0, 0.03, 0.05, 0.12, 0.2, 0.7, 1.0, 2.5):
    print("  %-6s -> %s" % (gap, bucket_pause(gap).name))

lexicon = DurationLexicon(word_means={"the": 0.10, "cat": 0.25, "slept": 0.40},
                          phoneme_means={"d": 0.06, "aw": 0.11, "g": 0.07},
                          pronunciations={"dog": ["d", "aw", "g"]})
print("\nduration ratios (actual / lexicon mean, clipped at 5):")
print("  'cat' at 0.50 s ->", duration_feature("cat", 0.50, lexicon))
print("  'cat' at 2.00 s ->", duration_feature("cat", 2.00, lexicon))
print("  'dog' (phoneme-sum mean %.2f) at 0.24 s -> %.3f"
      % (lexicon.mean_duration("dog"), duration_feature("dog", 0.24, lexicon)))

# A full sentence: alignments give word boundaries; the inter-word gaps
# become the shared pause features.
tree = parse_bracketed("(S (NP (DT the) (NN cat)) (VP (VBD slept)))")
utt = Utterance(id="demo", tokens=["the", "cat", "slept"],
                alignments=[(0.00, 0.12), (0.12, 0.40), (0.55, 1.00)],
                frames=np.random.default_rng(0).normal(size=(100, 6)))
ex = Example(utterance=utt, gold=tree, has_acoustics=True)

print("\nper-token features:")
for token, f in zip(utt.tokens, build_prosodic_inputs(ex, lexicon, min_rows=10)):
    print("  %-6s pre=%-13s post=%-13s delta=%.3f frame window %s"
          % (token, f.pause_pre.name, f.pause_post.name, f.delta,
             f.frames.shape))

# The frame window widens with context and zero-pads up to the widest CNN
# filter so convolution always has at least one valid position.
window = word_frame_slice(utt.frames, (0.12, 0.40), context=0.25, min_rows=50)
print("\n'cat' window with 0.25 s context:", window.shape)
