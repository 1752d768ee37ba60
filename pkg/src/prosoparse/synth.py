"""Synthetic speech corpora with controllable prosody-syntax coupling.

The generator draws from a small PCFG whose only ambiguity is PP
attachment: "the man saw the boy with the hat" parses with the PP under
the object noun phrase (low) or under the verb phrase (high), and the
token string is identical either way.  Under coupled pause mode a high
attachment inserts a silent gap in the (0.2, 1] s bucket after the object
noun, the gold phrase boundary; low attachments run the words together.
Decoupled mode places the same gaps by a fair coin, independent of the
tree, as a control.  Unambiguous filler sentences (no PP at all) can be
mixed in for lexical variety.

Everything is deterministic for a fixed seed, including file output.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import (
    NUM_FRAME_FEATURES,
    Example,
    Utterance,
    load_alignments,
    load_frames,
    load_treebank,
    positional_id,
    write_alignments,
    write_frames,
    write_treebank,
)
from .prosody import DurationLexicon, load_duration_lexicon, write_duration_lexicon
from .trees import Tree

FRAME_HOP_S = 0.01
SPLITS = ("train", "dev", "test")

DETERMINERS = ("the", "a")
NOUNS = ("man", "boy", "dog", "girl", "cat", "bird", "horse", "car", "house", "kid")
VERBS = ("saw", "heard", "watched", "followed", "found", "chased", "drew", "filmed")
PREPOSITIONS = ("with", "near", "behind", "beside")
ADJECTIVES = ("old", "small", "big", "young")
PRONOUNS = ("he", "she", "they", "we")
INTRANSITIVES = ("left", "slept", "smiled", "waited")

# Under the lexical attachment rule the preposition decides the tree, which
# makes the mapping string -> parse a function (needed for overfit checks).
HIGH_PREPOSITIONS = ("with", "near")

# Ambiguous template token spans, 0-based: DT NN VBD DT NN IN DT NN.
OBJECT_NOUN_INDEX = 4        # the word the coupled pause follows
LOW_ATTACH_SPAN = (3, 8)     # object NP + PP constituent, present only in low
AMBIGUOUS_LENGTH = 8


class SynthError(Exception):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_train: int = 500
    n_dev: int = 100
    n_test: int = 200
    seed: int = 0
    pause_mode: str = "coupled"        # "coupled" | "random"
    attachment_rule: str = "random"    # "random" | "lexical"
    ambiguous_frac: float = 1.0
    missing_acoustics_frac: float = 0.0
    mean_word_duration: float = 0.30
    duration_jitter: float = 0.10      # uniform half-width around the mean
    coupling_gap: tuple[float, float] = (0.3, 0.8)

    def __post_init__(self):
        if self.pause_mode not in ("coupled", "random"):
            raise SynthError("pause_mode must be 'coupled' or 'random'")
        if self.attachment_rule not in ("random", "lexical"):
            raise SynthError("attachment_rule must be 'random' or 'lexical'")
        if min(self.n_train, self.n_dev, self.n_test) < 0:
            raise SynthError("split sizes must be non-negative")
        if not 0 <= self.ambiguous_frac <= 1:
            raise SynthError("ambiguous_frac must be in [0, 1]")
        if not 0 <= self.missing_acoustics_frac <= 1:
            raise SynthError("missing_acoustics_frac must be in [0, 1]")
        lo, hi = self.coupling_gap
        # lower bound keeps 1e-6 timing rounding from leaking into the
        # neighboring pause bucket
        if not 0.201 <= lo <= hi <= 1.0:
            raise SynthError("coupling_gap must lie inside [0.201, 1]")
        if self.duration_jitter < 0 or self.duration_jitter >= self.mean_word_duration:
            raise SynthError("duration_jitter must be in [0, mean)")

    def to_kv(self) -> dict[str, str]:
        return {
            "n_train": str(self.n_train), "n_dev": str(self.n_dev),
            "n_test": str(self.n_test), "seed": str(self.seed),
            "pause_mode": self.pause_mode,
            "attachment_rule": self.attachment_rule,
            "ambiguous_frac": repr(self.ambiguous_frac),
            "missing_acoustics_frac": repr(self.missing_acoustics_frac),
            "mean_word_duration": repr(self.mean_word_duration),
            "duration_jitter": repr(self.duration_jitter),
            "coupling_gap": "%r,%r" % self.coupling_gap,
        }

    @classmethod
    def from_kv(cls, kv: dict[str, str]) -> "SynthConfig":
        conv = {
            "n_train": int, "n_dev": int, "n_test": int, "seed": int,
            "pause_mode": str, "attachment_rule": str,
            "ambiguous_frac": float, "missing_acoustics_frac": float,
            "mean_word_duration": float, "duration_jitter": float,
            "coupling_gap": lambda v: tuple(float(x) for x in v.split(",")),
        }
        kwargs = {}
        for key, value in kv.items():
            if key not in conv:
                raise SynthError("unknown synth config key %r" % key)
            kwargs[key] = conv[key](value)
        return cls(**kwargs)


@dataclass
class SentenceRecord:
    example: Example
    split: str
    ambiguous: bool
    attachment: str | None      # "high" | "low" | None for fillers
    pause_present: bool


@dataclass
class SyntheticCorpus:
    config: SynthConfig
    records: list[SentenceRecord]
    lexicon: DurationLexicon

    def split(self, name: str) -> list[Example]:
        return [r.example for r in self.records_for(name)]

    def records_for(self, name: str) -> list[SentenceRecord]:
        if name not in SPLITS:
            raise SynthError("unknown split %r" % name)
        return [r for r in self.records if r.split == name]


# ---------------------------------------------------------------------------
# Tree construction

def _pre(tag: str, word: str) -> Tree:
    return Tree.phrase(tag, [Tree.leaf(word)])


def _ambiguous_tree(tokens: list[str], attachment: str) -> Tree:
    d1, n1, v, d2, n2, p, d3, n3 = tokens
    subj = Tree.phrase("NP", [_pre("DT", d1), _pre("NN", n1)])
    obj = Tree.phrase("NP", [_pre("DT", d2), _pre("NN", n2)])
    pp = Tree.phrase("PP", [_pre("IN", p),
                            Tree.phrase("NP", [_pre("DT", d3), _pre("NN", n3)])])
    if attachment == "low":
        vp = Tree.phrase("VP", [_pre("VBD", v), Tree.phrase("NP", [obj, pp])])
    else:
        vp = Tree.phrase("VP", [_pre("VBD", v), obj, pp])
    return Tree.phrase("S", [subj, vp])


def _filler_tree(rng: np.random.Generator) -> Tree:
    """Unambiguous PCFG sample: no PP productions, string determines tree."""
    def noun_phrase():
        shape = rng.integers(3)
        if shape == 0:
            return Tree.phrase("NP", [_pre("PRP", _pick(rng, PRONOUNS))])
        children = [_pre("DT", _pick(rng, DETERMINERS))]
        if shape == 2:
            children.append(_pre("JJ", _pick(rng, ADJECTIVES)))
        children.append(_pre("NN", _pick(rng, NOUNS)))
        return Tree.phrase("NP", children)

    if rng.random() < 0.4:
        vp = Tree.phrase("VP", [_pre("VBD", _pick(rng, INTRANSITIVES))])
    else:
        vp = Tree.phrase("VP", [_pre("VBD", _pick(rng, VERBS)), noun_phrase()])
    return Tree.phrase("S", [noun_phrase(), vp])


def constituent_spans(tree: Tree) -> set[tuple[int, int]]:
    """Token spans of internal nodes, pre-terminals and leaves excluded."""
    spans: set[tuple[int, int]] = set()

    def walk(node: Tree, start: int) -> int:
        if node.label is None:
            return start + 1
        if node.is_preterminal:
            return start + len(node.leaves())
        pos = start
        for child in node.children:
            pos = walk(child, pos)
        spans.add((start, pos))
        return pos

    walk(tree, 0)
    return spans


def classify_attachment(tree: Tree) -> str:
    """Read the attachment decision off a parse of the ambiguous template."""
    return "low" if LOW_ATTACH_SPAN in constituent_spans(tree) else "high"


def attachment_accuracy(records: list[SentenceRecord],
                        predicted: list[Tree]) -> float:
    """Fraction of ambiguous records whose parse picks the gold attachment."""
    if len(records) != len(predicted):
        raise SynthError("records and predictions differ in length")
    hits = total = 0
    for record, tree in zip(records, predicted):
        if not record.ambiguous:
            continue
        total += 1
        hits += classify_attachment(tree) == record.attachment
    if total == 0:
        raise SynthError("no ambiguous records to score")
    return hits / total


# ---------------------------------------------------------------------------
# Generation

def _balanced_flags(n: int, rng: np.random.Generator) -> np.ndarray:
    flags = np.zeros(n, dtype=bool)
    flags[: n // 2] = True
    rng.shuffle(flags)
    return flags


def _pick(rng: np.random.Generator, options: tuple[str, ...]) -> str:
    return options[rng.integers(len(options))]


def _sample_ambiguous_tokens(rng: np.random.Generator) -> list[str]:
    return [_pick(rng, DETERMINERS), _pick(rng, NOUNS), _pick(rng, VERBS),
            _pick(rng, DETERMINERS), _pick(rng, NOUNS), _pick(rng, PREPOSITIONS),
            _pick(rng, DETERMINERS), _pick(rng, NOUNS)]


def _timing(tokens: list[str], pause_after: dict[int, float],
            config: SynthConfig, rng: np.random.Generator
            ) -> list[tuple[float, float]]:
    """Cumulative 6-decimal times; a zero gap is an exact float equality."""
    lo = config.mean_word_duration - config.duration_jitter
    hi = config.mean_word_duration + config.duration_jitter
    alignments = []
    t = 0.0
    for i in range(len(tokens)):
        dur = config.mean_word_duration if lo == hi else rng.uniform(lo, hi)
        start = t
        end = round(start + dur, 6)
        alignments.append((start, end))
        t = end
        gap = pause_after.get(i, 0.0)
        if gap:
            t = round(t + gap, 6)
    return alignments


def _synth_frames(total_s: float, rng: np.random.Generator) -> np.ndarray:
    """Smooth pitch/energy-like tracks at the 10 ms hop, standardized scale."""
    n = max(1, int(np.ceil(total_s / FRAME_HOP_S - 1e-6)))
    t = np.arange(n) * FRAME_HOP_S
    cols = [np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
            for f in (1.3, 2.1, 3.7)]
    cols += [0.5 * np.cos(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
             for f in (0.7, 1.9, 2.9)]
    out = np.stack(cols, axis=1) + rng.normal(0.0, 0.05, (n, NUM_FRAME_FEATURES))
    return out


def gen_synthetic(config: SynthConfig, seed: int | None = None) -> SyntheticCorpus:
    """Generate the three splits; deterministic for a fixed config and seed.

    Token strings are unique across the whole corpus so that a parser can
    in principle reach perfect training fit, and so held-out strings are
    genuinely unseen.  Attachment and (in decoupled mode) pause placement
    are exactly balanced within each split.
    """
    if seed is not None:
        config = replace(config, seed=seed)
    rng = np.random.default_rng(config.seed)
    seen: set[tuple[str, ...]] = set()
    records: list[SentenceRecord] = []

    for split, count in zip(SPLITS, (config.n_train, config.n_dev, config.n_test)):
        n_in_split = 0
        ambiguous_flags = np.zeros(count, dtype=bool)
        ambiguous_flags[: int(round(config.ambiguous_frac * count))] = True
        rng.shuffle(ambiguous_flags)
        high_flags = _balanced_flags(count, rng)
        coin_flags = _balanced_flags(count, rng)
        missing = np.zeros(count, dtype=bool)
        missing[: int(round(config.missing_acoustics_frac * count))] = True
        rng.shuffle(missing)

        for i in range(count):
            for _ in range(1000):
                if ambiguous_flags[i]:
                    tokens = _sample_ambiguous_tokens(rng)
                    if config.attachment_rule == "lexical":
                        attachment = ("high" if tokens[5] in HIGH_PREPOSITIONS
                                      else "low")
                    else:
                        attachment = "high" if high_flags[i] else "low"
                    gold = _ambiguous_tree(tokens, attachment)
                else:
                    gold = _filler_tree(rng)
                    tokens = gold.leaves()
                    attachment = None
                if tuple(tokens) not in seen:
                    break
            else:
                raise SynthError(
                    "could not draw a fresh token string; corpus too large "
                    "for the lexicon"
                )
            seen.add(tuple(tokens))

            if ambiguous_flags[i]:
                want_pause = (attachment == "high"
                              if config.pause_mode == "coupled"
                              else bool(coin_flags[i]))
            else:
                want_pause = False
            pause_after = {}
            if want_pause:
                pause_after[OBJECT_NOUN_INDEX] = rng.uniform(*config.coupling_gap)
            alignments = _timing(tokens, pause_after, config, rng)
            frames = _synth_frames(alignments[-1][1], rng)

            uid = positional_id(n_in_split)
            n_in_split += 1
            if missing[i]:
                utt = Utterance(id=uid, tokens=list(tokens))
                example = Example(utterance=utt, gold=gold, has_acoustics=False)
            else:
                utt = Utterance(id=uid, tokens=list(tokens),
                                alignments=alignments, frames=frames)
                example = Example(utterance=utt, gold=gold, has_acoustics=True)
            example.validate()
            records.append(SentenceRecord(
                example=example, split=split,
                ambiguous=bool(ambiguous_flags[i]), attachment=attachment,
                pause_present=want_pause,
            ))

    vocab = set(DETERMINERS + NOUNS + VERBS + PREPOSITIONS + ADJECTIVES
                + PRONOUNS + INTRANSITIVES)
    lexicon = DurationLexicon(
        word_means={w: config.mean_word_duration for w in sorted(vocab)},
        phoneme_means={}, pronunciations={},
    )
    return SyntheticCorpus(config=config, records=records, lexicon=lexicon)


# ---------------------------------------------------------------------------
# On-disk layout: per-split trees/alignments/frames plus shared metadata.

def save_corpus(corpus: SyntheticCorpus, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "config.txt"), "w") as fh:
        for key, value in corpus.config.to_kv().items():
            fh.write("%s=%s\n" % (key, value))
    write_duration_lexicon(os.path.join(directory, "lexicon.tsv"), corpus.lexicon,
                           counts={w: 100 for w in corpus.lexicon.word_means})
    with open(os.path.join(directory, "meta.tsv"), "w") as fh:
        fh.write("split\tid\tambiguous\tattachment\tpause_present\n")
        for r in corpus.records:
            fh.write("%s\t%s\t%d\t%s\t%d\n" % (
                r.split, r.example.id, int(r.ambiguous),
                r.attachment or "-", int(r.pause_present)))
    for split in SPLITS:
        records = corpus.records_for(split)
        write_treebank(os.path.join(directory, "%s.trees" % split),
                       [r.example.gold for r in records])
        alignments = {r.example.id: r.example.utterance.alignments
                      for r in records if r.example.utterance.alignments is not None}
        write_alignments(os.path.join(directory, "%s.align.tsv" % split), alignments)
        frames = {r.example.id: r.example.utterance.frames
                  for r in records if r.example.utterance.frames is not None}
        write_frames(os.path.join(directory, "%s.frames.tsv" % split), frames)


def load_corpus(directory) -> SyntheticCorpus:
    with open(os.path.join(directory, "config.txt")) as fh:
        kv = dict(line.strip().split("=", 1) for line in fh if line.strip())
    config = SynthConfig.from_kv(kv)
    lexicon = load_duration_lexicon(os.path.join(directory, "lexicon.tsv"))
    meta: dict[tuple[str, str], tuple[bool, str | None, bool]] = {}
    order: list[tuple[str, str]] = []
    with open(os.path.join(directory, "meta.tsv")) as fh:
        header = fh.readline()
        if not header.startswith("split\t"):
            raise SynthError("bad meta.tsv header")
        for line in fh:
            split, uid, amb, att, pause = line.rstrip("\n").split("\t")
            meta[(split, uid)] = (amb == "1", None if att == "-" else att,
                                  pause == "1")
            order.append((split, uid))

    per_split: dict[str, dict[str, SentenceRecord]] = {}
    for split in SPLITS:
        trees = load_treebank(os.path.join(directory, "%s.trees" % split))
        alignments = load_alignments(os.path.join(directory, "%s.align.tsv" % split))
        frames = load_frames(os.path.join(directory, "%s.frames.tsv" % split))
        per_split[split] = {}
        for uid, gold in trees:
            if (split, uid) not in meta:
                raise SynthError("%s/%s missing from meta.tsv" % (split, uid))
            amb, att, pause = meta[(split, uid)]
            ali = alignments.get(uid)
            utt = Utterance(id=uid, tokens=gold.leaves(), alignments=ali,
                            frames=frames.get(uid))
            example = Example(utterance=utt, gold=gold,
                              has_acoustics=ali is not None)
            example.validate()
            per_split[split][uid] = SentenceRecord(
                example=example, split=split, ambiguous=amb,
                attachment=att, pause_present=pause)

    records = []
    for split, uid in order:
        try:
            records.append(per_split[split][uid])
        except KeyError:
            raise SynthError("meta.tsv lists %s/%s but no tree was found"
                             % (split, uid)) from None
    return SyntheticCorpus(config=config, records=records, lexicon=lexicon)
