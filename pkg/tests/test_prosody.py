"""Pause buckets, duration ratios, frame windows, and the duration lexicon."""

import numpy as np
import pytest

from prosoparse.corpus import Example, Utterance
from prosoparse.prosody import (MAX_DURATION_RATIO, DurationLexicon,
                                PauseCategory, ProsodyError, bucket_pause,
                                build_prosodic_inputs, duration_feature,
                                load_duration_lexicon, word_frame_slice,
                                write_duration_lexicon)
from prosoparse.trees import parse_bracketed


def test_bucket_pause_boundaries():
    assert bucket_pause(None) is PauseCategory.NOT_AVAILABLE
    assert bucket_pause(0.0) is PauseCategory.OFF
    assert bucket_pause(0.01) is PauseCategory.P_LE_005
    assert bucket_pause(0.05) is PauseCategory.P_LE_005
    assert bucket_pause(0.0500001) is PauseCategory.P_LE_02
    assert bucket_pause(0.2) is PauseCategory.P_LE_02
    assert bucket_pause(1.0) is PauseCategory.P_LE_1
    assert bucket_pause(1.0000001) is PauseCategory.P_GT_1
    assert bucket_pause(30.0) is PauseCategory.P_GT_1
    with pytest.raises(ProsodyError):
        bucket_pause(-0.1)


def test_duration_feature_ratio_and_clip():
    lex = DurationLexicon(word_means={"cat": 0.25})
    assert duration_feature("cat", 0.5, lex) == pytest.approx(2.0)
    assert duration_feature("cat", 10.0, lex) == MAX_DURATION_RATIO
    with pytest.raises(ProsodyError):
        duration_feature("cat", 0.0, lex)


def test_lexicon_phoneme_fallback_and_global_mean():
    lex = DurationLexicon(word_means={"the": 0.1},
                          phoneme_means={"k": 0.05, "ae": 0.06, "t": 0.04},
                          pronunciations={"cat": ["k", "ae", "t"]})
    assert lex.mean_duration("cat") == pytest.approx(0.15)
    assert lex.mean_duration("zzz") == pytest.approx(0.1)  # global mean
    with pytest.raises(ProsodyError):
        DurationLexicon(word_means={"a": -1.0})


def test_word_frame_slice_window_and_padding():
    frames = np.arange(100 * 6, dtype=np.float64).reshape(100, 6)
    sl = word_frame_slice(frames, (0.10, 0.20), context=0.0, min_rows=1)
    np.testing.assert_array_equal(sl, frames[10:20])
    # context widens symmetrically
    sl = word_frame_slice(frames, (0.10, 0.20), context=0.05, min_rows=1)
    np.testing.assert_array_equal(sl, frames[5:25])
    # clamped at the matrix edges
    sl = word_frame_slice(frames, (0.0, 0.05), context=0.25, min_rows=1)
    np.testing.assert_array_equal(sl, frames[0:30])
    # short slices are zero-padded up to min_rows
    sl = word_frame_slice(frames, (0.10, 0.12), context=0.0, min_rows=10)
    assert sl.shape == (10, 6)
    np.testing.assert_array_equal(sl[4:6], frames[10:12])
    assert not sl[:4].any() and not sl[6:].any()


def _acoustic_example():
    tree = parse_bracketed("(S (DT the) (NN cat) (VBD slept))")
    utt = Utterance(id="u1", tokens=["the", "cat", "slept"],
                    alignments=[(0.0, 0.1), (0.1, 0.3), (0.5, 0.9)],
                    frames=np.ones((90, 6)))
    return Example(utterance=utt, gold=tree, has_acoustics=True)


def test_build_prosodic_inputs_shared_gaps():
    lex = DurationLexicon(word_means={"the": 0.1, "cat": 0.2, "slept": 0.4})
    feats = build_prosodic_inputs(_acoustic_example(), lex, min_rows=1)
    assert [f.pause_pre for f in feats] == [
        PauseCategory.NOT_AVAILABLE, PauseCategory.OFF, PauseCategory.P_LE_02]
    assert [f.pause_post for f in feats] == [
        PauseCategory.OFF, PauseCategory.P_LE_02, PauseCategory.NOT_AVAILABLE]
    assert feats[0].pause_post == feats[1].pause_pre  # one shared gap
    assert [f.delta for f in feats] == pytest.approx([1.0, 1.0, 1.0])


def test_build_prosodic_inputs_requires_acoustics():
    ex = _acoustic_example()
    ex = Example(utterance=Utterance(id="u1", tokens=ex.utterance.tokens),
                 gold=ex.gold, has_acoustics=False)
    with pytest.raises(ProsodyError):
        build_prosodic_inputs(ex, DurationLexicon(word_means={"the": 0.1}))


def test_lexicon_file_round_trip(tmp_path):
    path = tmp_path / "lex.tsv"
    lex = DurationLexicon(word_means={"cat": 0.25, "the": 0.1},
                          phoneme_means={"k": 0.05},
                          pronunciations={"cab": ["k", "ae", "b"]})
    write_duration_lexicon(path, lex, counts={"cat": 100, "the": 500})
    loaded = load_duration_lexicon(path)
    assert loaded.word_means == lex.word_means
    assert loaded.phoneme_means == lex.phoneme_means
    assert loaded.pronunciations == lex.pronunciations


def test_lexicon_load_drops_rare_words(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("common\t0.2\t15\nrare\t0.3\t14\n")
    loaded = load_duration_lexicon(path)
    assert "common" in loaded.word_means and "rare" not in loaded.word_means
