"""Corpus ingestion: treebanks, word alignments, frame features, assembly.

File formats are deliberately plain so corpora diff cleanly:

* treebank: one bracketed tree per line, UTF-8; utterance ids are assigned
  positionally as ``u000001``, ``u000002``, ...
* alignments: ``id <TAB> token_index <TAB> start_s <TAB> end_s``
* frames: ``id <TAB> frame_index <TAB> f1 .. f6`` (six tab-separated floats)
* filterbank: ``id <TAB> frame_index <TAB> 40 values``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trees import Tree, TreeError, parse_bracketed

FRAME_HOP_S = 0.01
NUM_FRAME_FEATURES = 6
FRAME_COUNT_TOLERANCE = 2

# POS tags dropped during preprocessing; -NONE- covers empty elements.
PUNCT_TAGS = frozenset(
    {",", ".", ":", "``", "''", "-LRB-", "-RRB-", "-NONE-"}
)


class CorpusError(Exception):
    """Malformed or inconsistent corpus data."""


@dataclass
class Utterance:
    id: str
    tokens: list[str]
    alignments: list[tuple[float, float]] | None = None
    frames: np.ndarray | None = None
    speaker_side: str = "A"

    def validate(self) -> None:
        if self.alignments is not None:
            if len(self.alignments) != len(self.tokens):
                raise CorpusError(
                    "%s: %d alignments for %d tokens"
                    % (self.id, len(self.alignments), len(self.tokens))
                )
            prev_start = -math.inf
            for i, (start, end) in enumerate(self.alignments):
                if start < 0 or end < start:
                    raise CorpusError(
                        "%s token %d: bad alignment (%g, %g)"
                        % (self.id, i, start, end)
                    )
                if start < prev_start:
                    raise CorpusError(
                        "%s token %d: start times not non-decreasing" % (self.id, i)
                    )
                prev_start = start
        if self.frames is not None:
            if self.frames.ndim != 2 or self.frames.shape[1] != NUM_FRAME_FEATURES:
                raise CorpusError(
                    "%s: frame matrix must be T x %d" % (self.id, NUM_FRAME_FEATURES)
                )


@dataclass
class Example:
    utterance: Utterance
    gold: Tree
    has_acoustics: bool

    @property
    def id(self) -> str:
        return self.utterance.id

    def validate(self) -> None:
        self.utterance.validate()
        n_leaves = len(self.gold.leaves())
        if n_leaves != len(self.utterance.tokens):
            raise CorpusError(
                "%s: tree has %d leaves for %d tokens"
                % (self.id, n_leaves, len(self.utterance.tokens))
            )
        if self.has_acoustics and self.utterance.alignments is None:
            raise CorpusError("%s: has_acoustics without alignments" % self.id)


# ---------------------------------------------------------------------------
# Preprocessing

def preprocess_tree(tree: Tree) -> Tree:
    """Lower-case tokens and drop punctuation leaves, pruning emptied nodes.

    Returns a fresh tree; raises CorpusError if nothing is left.
    """

    def rebuild(node: Tree) -> Tree | None:
        if node.is_preterminal:
            if node.label in PUNCT_TAGS:
                return None
            return Tree.phrase(node.label, [Tree.leaf(node.children[0].token.lower())])
        if node.is_leaf:
            return Tree.leaf(node.token.lower())
        kids = [k for k in (rebuild(c) for c in node.children) if k is not None]
        if not kids:
            return None
        return Tree.phrase(node.label, kids)

    out = rebuild(tree)
    if out is None or out.is_leaf:
        raise CorpusError("tree is empty after punctuation removal")
    out.assign_spans()
    return out


def positional_id(index: int) -> str:
    return "u%06d" % (index + 1)


# ---------------------------------------------------------------------------
# Loaders

def load_treebank(path) -> list[tuple[str, Tree]]:
    """Read a one-tree-per-line bracketed file, applying preprocessing."""
    out: list[tuple[str, Tree]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                tree = preprocess_tree(parse_bracketed(line))
            except (TreeError, CorpusError) as exc:
                raise CorpusError("%s line %d: %s" % (path, lineno, exc)) from exc
            out.append((positional_id(len(out)), tree))
    return out


def write_treebank(path, trees) -> None:
    """Write ``(id, Tree)`` pairs (or bare trees) one bracketed line each."""
    with open(path, "w", encoding="utf-8") as fh:
        for item in trees:
            tree = item[1] if isinstance(item, tuple) else item
            fh.write(tree.to_bracketed() + "\n")


def load_alignments(path) -> dict[str, list[tuple[float, float]]]:
    """Read per-token (start, end) second pairs keyed by utterance id."""
    rows: dict[str, dict[int, tuple[float, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise CorpusError(
                    "%s line %d: expected 4 fields, got %d" % (path, lineno, len(parts))
                )
            uid, idx_s, start_s, end_s = parts
            try:
                idx, start, end = int(idx_s), float(start_s), float(end_s)
            except ValueError as exc:
                raise CorpusError("%s line %d: %s" % (path, lineno, exc)) from exc
            if start < 0 or end < start:
                raise CorpusError(
                    "%s line %d: bad times (%s, start=%g, end=%g)"
                    % (path, lineno, uid, start, end)
                )
            slot = rows.setdefault(uid, {})
            if idx in slot:
                raise CorpusError("%s line %d: duplicate token %d for %s"
                                  % (path, lineno, idx, uid))
            slot[idx] = (start, end)
    out: dict[str, list[tuple[float, float]]] = {}
    for uid, slot in rows.items():
        indices = sorted(slot)
        if indices != list(range(len(indices))):
            raise CorpusError("%s: token indices for %s are not 0..n-1" % (path, uid))
        out[uid] = [slot[i] for i in indices]
    return out


def write_alignments(path, alignments: dict[str, list[tuple[float, float]]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for uid in alignments:
            for i, (start, end) in enumerate(alignments[uid]):
                fh.write("%s\t%d\t%.6f\t%.6f\n" % (uid, i, start, end))


def _load_indexed_matrix(path, width: int, what: str) -> dict[str, np.ndarray]:
    rows: dict[str, dict[int, list[float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 + width:
                raise CorpusError(
                    "%s line %d: expected %d %s values, got %d"
                    % (path, lineno, width, what, len(parts) - 2)
                )
            uid, idx_s = parts[0], parts[1]
            try:
                idx = int(idx_s)
                values = [float(v) for v in parts[2:]]
            except ValueError as exc:
                raise CorpusError("%s line %d: %s" % (path, lineno, exc)) from exc
            rows.setdefault(uid, {})[idx] = values
    out: dict[str, np.ndarray] = {}
    for uid, slot in rows.items():
        indices = sorted(slot)
        if indices != list(range(len(indices))):
            raise CorpusError("%s: frame indices for %s are not 0..T-1" % (path, uid))
        out[uid] = np.array([slot[i] for i in indices], dtype=np.float64)
    return out


def load_frames(path) -> dict[str, np.ndarray]:
    """Read 6-feature frame matrices (10 ms hop) keyed by utterance id."""
    return _load_indexed_matrix(path, NUM_FRAME_FEATURES, "frame")


def write_frames(path, frames: dict[str, np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for uid in frames:
            for i, row in enumerate(frames[uid]):
                fh.write("%s\t%d\t%s\n" % (uid, i, "\t".join("%.6f" % v for v in row)))


def load_filterbank(path) -> dict[str, np.ndarray]:
    """Read 40-band mel filterbank energies keyed by utterance id."""
    return _load_indexed_matrix(path, 40, "filterbank")


def check_frame_consistency(frames: np.ndarray,
                            alignments: list[tuple[float, float]],
                            uid: str = "?") -> None:
    """Frame count must match the aligned duration at the 10 ms hop (+-2)."""
    if not alignments:
        return
    expected = int(math.ceil(alignments[-1][1] / FRAME_HOP_S - 1e-6))
    if abs(frames.shape[0] - expected) > FRAME_COUNT_TOLERANCE:
        raise CorpusError(
            "%s: %d frames for %.3f s of speech (expected about %d)"
            % (uid, frames.shape[0], alignments[-1][1], expected)
        )


# ---------------------------------------------------------------------------
# Energy features from filterbank energies

def compute_energy_features(fbank: np.ndarray, speaker_max_total: float) -> np.ndarray:
    """Per-frame [E_total, E_low, E_high] from 40 mel-band energies.

    E_total is the log of total energy relative to the speaker side's maximum
    total; E_low / E_high are the log fractions carried by the lower / upper
    20 bands.
    """
    fbank = np.asarray(fbank, dtype=np.float64)
    if fbank.ndim != 2 or fbank.shape[1] != 40:
        raise CorpusError("filterbank matrix must be T x 40")
    if np.any(fbank <= 0):
        raise CorpusError("filterbank energies must be positive")
    if speaker_max_total <= 0:
        raise CorpusError("speaker_max_total must be positive")
    total = fbank.sum(axis=1)
    low = fbank[:, :20].sum(axis=1)
    high = fbank[:, 20:].sum(axis=1)
    out = np.empty((fbank.shape[0], 3), dtype=np.float64)
    out[:, 0] = np.log(total / speaker_max_total)
    out[:, 1] = np.log(low / total)
    out[:, 2] = np.log(high / total)
    return out


def max_total_energy(fbanks) -> float:
    """Max over frames of total band energy, across the given matrices."""
    best = 0.0
    for fbank in fbanks:
        best = max(best, float(np.asarray(fbank).sum(axis=1).max()))
    if best <= 0:
        raise CorpusError("no positive energies found")
    return best


# ---------------------------------------------------------------------------
# Assembly

def assemble_examples(
    trees: list[tuple[str, Tree]],
    alignments: dict[str, list[tuple[float, float]]] | None = None,
    frames: dict[str, np.ndarray] | None = None,
    speaker_sides: dict[str, str] | None = None,
) -> list[Example]:
    """Join trees with whatever acoustics are available.

    Utterances with no (or mismatching) alignments get has_acoustics=False,
    the backoff path.  Frame/alignment duration mismatches beyond tolerance
    are hard errors.
    """
    alignments = alignments or {}
    frames = frames or {}
    out: list[Example] = []
    for uid, tree in trees:
        tokens = tree.leaves()
        ali = alignments.get(uid)
        if ali is not None and len(ali) != len(tokens):
            ali = None  # unusable alignment: backoff
        frm = frames.get(uid) if ali is not None else None
        if frm is not None:
            check_frame_consistency(frm, ali, uid)
        utt = Utterance(
            id=uid,
            tokens=tokens,
            alignments=ali,
            frames=frm,
            speaker_side=(speaker_sides or {}).get(uid, "A"),
        )
        ex = Example(utterance=utt, gold=tree, has_acoustics=ali is not None)
        ex.validate()
        out.append(ex)
    return out
