"""Word-level prosodic inputs: pause categories, duration ratios, frame slices.

Pause gaps are read off the word time alignments (start of the next word
minus end of the current one), never from a silence detector.  Duration is
normalized by a lexicon of per-word mean durations, falling back to summed
phoneme means for rare words.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .corpus import FRAME_HOP_S, NUM_FRAME_FEATURES, Example

log = logging.getLogger(__name__)

MAX_DURATION_RATIO = 5.0
MIN_WORD_COUNT_FOR_MEAN = 15
DEFAULT_CONTEXT_S = 0.25
DEFAULT_MIN_FRAME_ROWS = 50  # widest CNN filter
_EPS = 1e-6  # sub-hop slack for float frame indexing


class ProsodyError(Exception):
    pass


class PauseCategory(IntEnum):
    """Inter-word silence classes; values double as embedding ids."""

    OFF = 0
    NOT_AVAILABLE = 1
    P_LE_005 = 2
    P_LE_02 = 3
    P_LE_1 = 4
    P_GT_1 = 5


def bucket_pause(gap: float | None) -> PauseCategory:
    """Map an inter-word gap in seconds (or None) to its pause category."""
    if gap is None:
        return PauseCategory.NOT_AVAILABLE
    if gap < 0:
        raise ProsodyError("negative pause gap %g" % gap)
    if gap == 0.0:
        return PauseCategory.OFF
    if gap <= 0.05:
        return PauseCategory.P_LE_005
    if gap <= 0.2:
        return PauseCategory.P_LE_02
    if gap <= 1.0:
        return PauseCategory.P_LE_1
    return PauseCategory.P_GT_1


@dataclass
class DurationLexicon:
    """Mean word durations plus a phoneme-based fallback for rare words.

    ``word_means`` holds sample means for words with training count >= 15;
    rarer words are estimated as the sum of phoneme means over their
    dictionary pronunciation.  ``fallback_mean`` covers words absent from
    both maps.
    """

    word_means: dict[str, float] = field(default_factory=dict)
    phoneme_means: dict[str, float] = field(default_factory=dict)
    pronunciations: dict[str, list[str]] = field(default_factory=dict)
    fallback_mean: float | None = None

    def __post_init__(self):
        for name, means in (("word", self.word_means), ("phoneme", self.phoneme_means)):
            for key, mean in means.items():
                if mean <= 0:
                    raise ProsodyError("%s mean for %r must be positive" % (name, key))
        if self.fallback_mean is None and self.word_means:
            self.fallback_mean = sum(self.word_means.values()) / len(self.word_means)

    def mean_duration(self, word: str) -> float:
        if word in self.word_means:
            return self.word_means[word]
        pron = self.pronunciations.get(word)
        if pron:
            try:
                return sum(self.phoneme_means[p] for p in pron)
            except KeyError as exc:
                raise ProsodyError(
                    "no mean for phoneme %s in %r" % (exc.args[0], word)
                ) from exc
        if self.fallback_mean is None:
            raise ProsodyError("empty lexicon and no fallback mean")
        log.debug("word %r not in duration lexicon; using global mean", word)
        return self.fallback_mean


def duration_feature(word: str, actual: float, lexicon: DurationLexicon) -> float:
    """Word duration over its lexicon mean, clipped at 5."""
    if actual <= 0:
        raise ProsodyError("word duration must be positive, got %g" % actual)
    return min(actual / lexicon.mean_duration(word), MAX_DURATION_RATIO)


def word_frame_slice(
    frames: np.ndarray,
    alignment: tuple[float, float],
    context: float = 0.0,
    min_rows: int = DEFAULT_MIN_FRAME_ROWS,
) -> np.ndarray:
    """Frame rows covering a word plus optional context, zero-padded if short.

    Rows run from floor((start - context)/hop) to ceil((end + context)/hop),
    clamped to the frame matrix; slices shorter than ``min_rows`` (the widest
    CNN filter) are symmetrically zero-padded so a valid convolution always
    has at least one position.
    """
    start, end = alignment
    total = frames.shape[0]
    lo = int(math.floor((start - context) / FRAME_HOP_S + _EPS))
    hi = int(math.ceil((end + context) / FRAME_HOP_S - _EPS))
    lo = max(lo, 0)
    hi = min(max(hi, lo + 1), total) if total > 0 else lo
    window = frames[lo:hi] if hi > lo else np.zeros((1, NUM_FRAME_FEATURES))
    if window.shape[0] < min_rows:
        deficit = min_rows - window.shape[0]
        before = deficit // 2
        after = deficit - before
        window = np.pad(window, ((before, after), (0, 0)))
    return np.asarray(window, dtype=np.float64)


@dataclass
class ProsodicInput:
    """Everything the model consumes for one word beyond its identity."""

    pause_pre: PauseCategory
    pause_post: PauseCategory
    delta: float
    frames: np.ndarray

    def validate(self) -> None:
        if not 0 < self.delta <= MAX_DURATION_RATIO:
            raise ProsodyError("delta %g outside (0, %g]" % (self.delta, MAX_DURATION_RATIO))
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise ProsodyError("frame slice must have at least one row")


def build_prosodic_inputs(
    example: Example,
    lexicon: DurationLexicon,
    context: float = DEFAULT_CONTEXT_S,
    min_rows: int = DEFAULT_MIN_FRAME_ROWS,
) -> list[ProsodicInput]:
    """One ProsodicInput per token; requires example.has_acoustics.

    Sentence-initial pre-pause and sentence-final post-pause are
    NOT_AVAILABLE; interior gaps are shared, so post(i) == pre(i+1).
    Missing frame matrices yield zero frame slices (pause and duration
    remain available).
    """
    if not example.has_acoustics:
        raise ProsodyError("%s has no acoustics: use the text-only path" % example.id)
    utt = example.utterance
    ali = utt.alignments
    n = len(utt.tokens)
    gaps: list[float | None] = [None]
    for i in range(n - 1):
        gaps.append(ali[i + 1][0] - ali[i][1])
    gaps.append(None)

    out: list[ProsodicInput] = []
    for i, word in enumerate(utt.tokens):
        start, end = ali[i]
        if utt.frames is not None:
            window = word_frame_slice(utt.frames, (start, end), context, min_rows)
        else:
            window = np.zeros((min_rows, NUM_FRAME_FEATURES))
        item = ProsodicInput(
            pause_pre=bucket_pause(gaps[i]),
            pause_post=bucket_pause(gaps[i + 1]),
            delta=duration_feature(word, end - start, lexicon),
            frames=window,
        )
        item.validate()
        out.append(item)
    return out


# ---------------------------------------------------------------------------
# Lexicon file format:
#   word <TAB> mean_s <TAB> count
#   #phone <TAB> phone <TAB> mean_s
#   #pron <TAB> word <TAB> p1 p2 ...

def load_duration_lexicon(path) -> DurationLexicon:
    word_means: dict[str, float] = {}
    phoneme_means: dict[str, float] = {}
    pronunciations: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            try:
                if parts[0] == "#phone":
                    phoneme_means[parts[1]] = float(parts[2])
                elif parts[0] == "#pron":
                    pronunciations[parts[1]] = parts[2].split()
                else:
                    word, mean, count = parts[0], float(parts[1]), int(parts[2])
                    if count >= MIN_WORD_COUNT_FOR_MEAN:
                        word_means[word] = mean
            except (IndexError, ValueError) as exc:
                raise ProsodyError("%s line %d: %s" % (path, lineno, exc)) from exc
    return DurationLexicon(word_means, phoneme_means, pronunciations)


def write_duration_lexicon(path, lexicon: DurationLexicon,
                           counts: dict[str, int] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(lexicon.word_means):
            count = (counts or {}).get(word, MIN_WORD_COUNT_FOR_MEAN)
            fh.write("%s\t%.6f\t%d\n" % (word, lexicon.word_means[word], count))
        for phone in sorted(lexicon.phoneme_means):
            fh.write("#phone\t%s\t%.6f\n" % (phone, lexicon.phoneme_means[phone]))
        for word in sorted(lexicon.pronunciations):
            fh.write("#pron\t%s\t%s\n" % (word, " ".join(lexicon.pronunciations[word])))
