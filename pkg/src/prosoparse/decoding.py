"""Greedy decoding into parse symbols, repair, and backoff routing.

Decoding is batched over same-length sentences in lockstep: rows that have
already produced the end symbol keep feeding it back and their subsequent
output is ignored.  Raw symbol sequences go through repair before
delinearization, so parsing is total: every sentence gets a tree with the
right number of leaves no matter what the decoder emitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .corpus import Example
from .model import ModelConfig, ParserModel, PreparedExample, prepare_example
from .prosody import DurationLexicon, build_prosodic_inputs
from .trees import Tree, delinearize, is_valid_parse, repair

MAX_LEN_PER_TOKEN = 4
MAX_LEN_SLACK = 8


def default_max_len(n_tokens: int) -> int:
    return MAX_LEN_PER_TOKEN * n_tokens + MAX_LEN_SLACK


def greedy_decode(model: ParserModel, batch: list[PreparedExample],
                  max_len: int | None = None) -> list[list[str]]:
    """Raw symbol sequences (end symbol stripped), one per batch row.

    Argmax at every step, lowest symbol id on ties, emitted symbol fed back
    as the next input.  Stops at the end symbol or after max_len steps.
    """
    if not batch:
        return []
    n_tokens = batch[0].n_tokens
    if max_len is None:
        max_len = default_max_len(n_tokens)
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    vocab = model.symbol_vocab
    n_batch = len(batch)
    with ad.no_grad():
        enc = model.encode(batch)
        state = model.initial_decoder_state(enc)
        prev = np.full(n_batch, vocab.sos_id, dtype=np.intp)
        emitted = np.full((n_batch, max_len), vocab.eos_id, dtype=np.intp)
        done = np.zeros(n_batch, dtype=bool)
        for step in range(max_len):
            probs, state = model.decode_step(prev, state, enc)
            choice = probs.data.argmax(axis=1)
            choice = np.where(done, vocab.eos_id, choice)
            emitted[:, step] = choice
            done |= choice == vocab.eos_id
            if done.all():
                break
            prev = choice
    out = []
    for row in emitted:
        symbols = []
        for sym_id in row:
            if sym_id == vocab.eos_id:
                break
            symbols.append(vocab.symbols[sym_id])
        out.append(symbols)
    return out


def prepare_for_model(model: ParserModel, example: Example,
                      lexicon: DurationLexicon | None = None) -> PreparedExample:
    """Resolve an example against a model's vocabularies for decoding."""
    prosodic = None
    if model.config.features:
        if lexicon is None:
            raise ValueError("prosody-model decoding needs a duration lexicon")
        min_rows = (model.config.max_filter_width
                    if "cnn" in model.config.features else 1)
        prosodic = build_prosodic_inputs(example, lexicon, min_rows=min_rows)
    return prepare_example(example, model.word_vocab, None, model.config,
                           prosodic=prosodic)


@dataclass
class ParseResult:
    tree: Tree
    symbols: list[str]
    repaired: bool
    used_backoff: bool


def _to_tree(symbols: list[str], tokens: list[str]) -> tuple[Tree, bool]:
    if is_valid_parse(symbols, len(tokens)):
        return delinearize(symbols, tokens), False
    return delinearize(repair(symbols, len(tokens)), tokens), True


def parse_sentence(model: ParserModel, text_model: ParserModel,
                   example: Example,
                   lexicon: DurationLexicon | None = None) -> ParseResult:
    """Parse one sentence, falling back to the text model without acoustics."""
    use_backoff = bool(model.config.features) and not example.has_acoustics
    if use_backoff and text_model.config.features:
        raise ValueError("backoff model must be text-only")
    chosen = text_model if use_backoff else model
    prepared = prepare_for_model(chosen, example, lexicon)
    symbols = greedy_decode(chosen, [prepared])[0]
    tree, repaired = _to_tree(symbols, example.utterance.tokens)
    return ParseResult(tree=tree, symbols=symbols, repaired=repaired,
                       used_backoff=use_backoff)


def decode_corpus(model: ParserModel, text_model: ParserModel,
                  examples: list[Example],
                  lexicon: DurationLexicon | None = None,
                  batch_size: int = 64) -> tuple[list[Tree], int]:
    """Parse a corpus with batched decoding; returns trees in input order
    plus the number of sentences routed through the text-only backoff."""
    routed: dict[tuple[bool, int], list[int]] = {}
    for i, example in enumerate(examples):
        backoff = bool(model.config.features) and not example.has_acoustics
        key = (backoff, len(example.utterance.tokens))
        routed.setdefault(key, []).append(i)

    trees: list[Tree | None] = [None] * len(examples)
    backoff_count = 0
    for (backoff, _), indices in sorted(routed.items()):
        chosen = text_model if backoff else model
        if backoff:
            if text_model.config.features:
                raise ValueError("backoff model must be text-only")
            backoff_count += len(indices)
        for lo in range(0, len(indices), batch_size):
            chunk = indices[lo: lo + batch_size]
            prepared = [prepare_for_model(chosen, examples[i],
                                          None if backoff else lexicon)
                        for i in chunk]
            for i, symbols in zip(chunk, greedy_decode(chosen, prepared)):
                trees[i], _ = _to_tree(symbols, examples[i].utterance.tokens)
    return trees, backoff_count
