"""The encoder-attention-decoder parser with acoustic-prosodic inputs.

Per-word input vectors concatenate a word embedding with, depending on the
feature flags, two pause-category embeddings, a duration ratio scalar, and
max-pooled CNN features over the word's pitch/energy frames.  A deep LSTM
encoder consumes the input sequence in reverse; the decoder emits linearized
parse symbols, attending over encoder outputs with either content-only or
content+location attention.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .corpus import NUM_FRAME_FEATURES, Example
from .prosody import ProsodicInput
from .trees import linearize

FEATURE_FLAGS = ("pause", "duration", "cnn")
NUM_PAUSE_CATEGORIES = 6


class VocabError(Exception):
    pass


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters; defaults follow the full-scale setup."""

    hidden: int = 256
    layers: int = 3
    word_embed_dim: int = 512
    output_embed_dim: int = 512
    pause_embed_dim: int = 32
    cnn_filter_widths: tuple[int, ...] = (10, 25, 50)
    cnn_filters_per_width: int = 16
    location_filters: int = 5
    location_width: int = 40
    dropout: float = 0.3
    features: frozenset = frozenset()
    attention: str = "location"
    context_s: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "features", frozenset(self.features))
        object.__setattr__(self, "cnn_filter_widths",
                           tuple(self.cnn_filter_widths))
        bad = self.features - set(FEATURE_FLAGS)
        if bad:
            raise ConfigError("unknown feature flags: %s" % sorted(bad))
        if self.attention not in ("content", "location"):
            raise ConfigError("attention must be 'content' or 'location'")
        for name in ("hidden", "layers", "word_embed_dim", "output_embed_dim",
                     "pause_embed_dim", "cnn_filters_per_width",
                     "location_filters", "location_width"):
            if getattr(self, name) <= 0:
                raise ConfigError("%s must be positive" % name)
        if not 0 <= self.dropout < 1:
            raise ConfigError("dropout must be in [0, 1)")

    @property
    def cnn_output_dim(self) -> int:
        return len(self.cnn_filter_widths) * self.cnn_filters_per_width

    @property
    def max_filter_width(self) -> int:
        return max(self.cnn_filter_widths)

    def input_width(self) -> int:
        width = self.word_embed_dim
        if "pause" in self.features:
            width += 2 * self.pause_embed_dim
        if "duration" in self.features:
            width += 1
        if "cnn" in self.features:
            width += self.cnn_output_dim
        return width

    def to_kv(self) -> dict[str, str]:
        return {
            "hidden": str(self.hidden),
            "layers": str(self.layers),
            "word_embed_dim": str(self.word_embed_dim),
            "output_embed_dim": str(self.output_embed_dim),
            "pause_embed_dim": str(self.pause_embed_dim),
            "cnn_filter_widths": ",".join(map(str, self.cnn_filter_widths)),
            "cnn_filters_per_width": str(self.cnn_filters_per_width),
            "location_filters": str(self.location_filters),
            "location_width": str(self.location_width),
            "dropout": repr(self.dropout),
            "features": ",".join(sorted(self.features)),
            "attention": self.attention,
            "context_s": repr(self.context_s),
        }

    @classmethod
    def from_kv(cls, kv: dict[str, str]) -> "ModelConfig":
        def ints(value):
            return tuple(int(v) for v in value.split(",") if v)

        known = {
            "hidden": int, "layers": int, "word_embed_dim": int,
            "output_embed_dim": int, "pause_embed_dim": int,
            "cnn_filter_widths": ints, "cnn_filters_per_width": int,
            "location_filters": int, "location_width": int,
            "dropout": float, "context_s": float,
            "features": lambda v: frozenset(x for x in v.split(",") if x),
            "attention": str,
        }
        kwargs = {}
        for key, value in kv.items():
            if key not in known:
                raise ConfigError("unknown model config key %r" % key)
            kwargs[key] = known[key](value)
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# Vocabularies

class WordVocab:
    """Input word vocabulary; unknown words map to the <unk> id."""

    UNK = "<unk>"

    def __init__(self, words: list[str]):
        if not words or words[0] != self.UNK:
            raise VocabError("word list must start with %s" % self.UNK)
        self.words = list(words)
        self._index = {w: i for i, w in enumerate(self.words)}

    @classmethod
    def from_tokens(cls, token_lists) -> "WordVocab":
        seen = sorted({tok for toks in token_lists for tok in toks})
        return cls([cls.UNK] + seen)

    def __len__(self):
        return len(self.words)

    def id(self, word: str) -> int:
        return self._index.get(word, 0)

    def encode(self, tokens: list[str]) -> np.ndarray:
        return np.array([self.id(t) for t in tokens], dtype=np.intp)


class SymbolVocab:
    """Closed output vocabulary over linearized parse symbols."""

    SOS = "<s>"
    EOS = "</s>"

    def __init__(self, symbols: list[str]):
        expected_head = [self.SOS, self.EOS, ")", "XX"]
        if symbols[: len(expected_head)] != expected_head:
            raise VocabError("symbol list must start with %s" % expected_head)
        self.symbols = list(symbols)
        self._index = {s: i for i, s in enumerate(self.symbols)}

    @classmethod
    def from_sequences(cls, symbol_seqs) -> "SymbolVocab":
        labels = sorted({s for seq in symbol_seqs for s in seq if s.startswith("(")})
        return cls([cls.SOS, cls.EOS, ")", "XX"] + labels)

    def __len__(self):
        return len(self.symbols)

    @property
    def sos_id(self) -> int:
        return 0

    @property
    def eos_id(self) -> int:
        return 1

    def encode(self, symbols: list[str]) -> np.ndarray:
        try:
            return np.array([self._index[s] for s in symbols], dtype=np.intp)
        except KeyError as exc:
            raise VocabError(
                "parse symbol %r not in the closed output vocabulary" % exc.args[0]
            ) from exc

    def decode(self, ids) -> list[str]:
        return [self.symbols[i] for i in ids]


# ---------------------------------------------------------------------------
# Prepared inputs

@dataclass
class PreparedExample:
    """Everything needed to feed one sentence, resolved against the vocabs."""

    id: str
    tokens: list[str]
    token_ids: np.ndarray
    target_ids: np.ndarray | None  # gold linearized symbols, no SOS/EOS
    pause_pre: np.ndarray | None = None
    pause_post: np.ndarray | None = None
    delta: np.ndarray | None = None
    frames: list[np.ndarray] | None = None

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)


def prepare_example(
    example: Example,
    word_vocab: WordVocab,
    symbol_vocab: SymbolVocab | None,
    config: ModelConfig,
    prosodic: list[ProsodicInput] | None = None,
) -> PreparedExample:
    """Resolve tokens/symbols to ids and unpack prosodic feature blocks."""
    tokens = example.utterance.tokens
    target = None
    if symbol_vocab is not None:
        target = symbol_vocab.encode(linearize(example.gold))
    prepared = PreparedExample(
        id=example.id,
        tokens=tokens,
        token_ids=word_vocab.encode(tokens),
        target_ids=target,
    )
    if config.features:
        if prosodic is None:
            raise ConfigError(
                "%s: prosodic features required for flags %s"
                % (example.id, sorted(config.features))
            )
        prepared.pause_pre = np.array([p.pause_pre for p in prosodic], dtype=np.intp)
        prepared.pause_post = np.array([p.pause_post for p in prosodic], dtype=np.intp)
        prepared.delta = np.array([p.delta for p in prosodic], dtype=np.float64)
        prepared.frames = [p.frames for p in prosodic]
    return prepared


@dataclass
class Encoding:
    """Encoder outputs for one batch, cached for the decoder loop."""

    outputs: Tensor          # [B, T, H], indexed by original position
    score_proj: Tensor       # [B, T, A] encoder half of the attention score
    final_state: list        # per layer (h, c)
    n_tokens: int

    @property
    def batch_size(self) -> int:
        return self.outputs.data.shape[0]


@dataclass
class DecoderState:
    layers: list
    alpha: Tensor            # [B, T] previous attention weights
    context: Tensor          # [B, H] previous context vector

    def check(self) -> None:
        sums = self.alpha.data.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-6):
            raise ad.NumericsError("attention weights do not sum to 1")


# ---------------------------------------------------------------------------

class ParserModel:
    """Holds the parameters and implements the forward computations."""

    def __init__(self, config: ModelConfig, word_vocab: WordVocab,
                 symbol_vocab: SymbolVocab, seed: int = 0,
                 init_scale: float = 0.08):
        self.config = config
        self.word_vocab = word_vocab
        self.symbol_vocab = symbol_vocab
        self.params: dict[str, Tensor] = {}
        rng = np.random.default_rng(seed)

        def param(name, shape):
            t = Tensor(rng.uniform(-init_scale, init_scale, shape),
                       requires_grad=True, name=name)
            self.params[name] = t
            return t

        def zeros_param(name, shape):
            t = Tensor(np.zeros(shape), requires_grad=True, name=name)
            self.params[name] = t
            return t

        cfg = config
        hidden, att = cfg.hidden, cfg.hidden
        param("word_embeddings", (len(word_vocab), cfg.word_embed_dim))
        if "pause" in cfg.features:
            param("pause_embed_pre", (NUM_PAUSE_CATEGORIES, cfg.pause_embed_dim))
            param("pause_embed_post", (NUM_PAUSE_CATEGORIES, cfg.pause_embed_dim))
        if "cnn" in cfg.features:
            for width in cfg.cnn_filter_widths:
                param("cnn_filters_w%d" % width,
                      (cfg.cnn_filters_per_width, width, NUM_FRAME_FEATURES))
                zeros_param("cnn_bias_w%d" % width, (cfg.cnn_filters_per_width,))

        def lstm_stack(prefix, input_dim):
            dim = input_dim
            for layer in range(cfg.layers):
                param("%s_l%d_weight" % (prefix, layer), (dim + hidden, 4 * hidden))
                bias = zeros_param("%s_l%d_bias" % (prefix, layer), (4 * hidden,))
                bias.data[hidden:2 * hidden] = 1.0  # forget gate bias
                dim = hidden

        lstm_stack("enc", cfg.input_width())
        lstm_stack("dec", cfg.output_embed_dim + hidden)

        param("output_embeddings", (len(symbol_vocab), cfg.output_embed_dim))
        param("attn_enc_proj", (hidden, att))
        param("attn_dec_proj", (hidden, att))
        zeros_param("attn_bias", (att,))
        param("attn_score_vec", (att, 1))
        if cfg.attention == "location":
            param("attn_loc_proj", (cfg.location_filters, att))
            param("loc_filters", (cfg.location_filters, cfg.location_width))
        param("out_proj", (2 * hidden, len(symbol_vocab)))
        zeros_param("out_bias", (len(symbol_vocab),))

    # -- bookkeeping --------------------------------------------------------

    def manifest(self) -> list[tuple[str, tuple[int, ...]]]:
        return [(name, tuple(t.data.shape)) for name, t in self.params.items()]

    def num_parameters(self) -> int:
        return sum(t.data.size for t in self.params.values())

    # -- input assembly -----------------------------------------------------

    def acoustic_cnn(self, frames: np.ndarray) -> np.ndarray:
        """CNN features for one word's frame slice: [L x 6] -> [m*N]."""
        cfg = self.config
        if "cnn" not in cfg.features:
            raise ConfigError("cnn feature flag is off")
        with ad.no_grad():
            parts = []
            for width in cfg.cnn_filter_widths:
                parts.append(ad.conv1d_maxpool(
                    Tensor(frames),
                    self.params["cnn_filters_w%d" % width],
                    self.params["cnn_bias_w%d" % width],
                ).data)
        return np.concatenate(parts)

    def assemble_input(self, token_id: int,
                       prosodic: ProsodicInput | None = None) -> np.ndarray:
        """The per-word input vector for one token (inspection/testing)."""
        cfg = self.config
        with ad.no_grad():
            parts = [self.params["word_embeddings"].data[token_id]]
            if cfg.features and prosodic is None:
                raise ConfigError("prosodic input required for flags %s"
                                  % sorted(cfg.features))
            if "pause" in cfg.features:
                parts.append(self.params["pause_embed_pre"].data[int(prosodic.pause_pre)])
                parts.append(self.params["pause_embed_post"].data[int(prosodic.pause_post)])
            if "duration" in cfg.features:
                parts.append(np.array([prosodic.delta]))
            if "cnn" in cfg.features:
                parts.append(self.acoustic_cnn(prosodic.frames))
        return np.concatenate(parts)

    def _batch_inputs(self, batch: list[PreparedExample]) -> Tensor:
        """Stack per-word vectors for a same-length batch into [T, B, D]."""
        cfg = self.config
        n_tokens = batch[0].n_tokens
        n_batch = len(batch)
        if any(ex.n_tokens != n_tokens for ex in batch):
            raise ad.ShapeError("batch mixes sentence lengths")
        ids = np.stack([ex.token_ids for ex in batch], axis=1)  # [T, B]
        blocks = [ad.embedding(self.params["word_embeddings"], ids)]
        if "pause" in cfg.features:
            pre = np.stack([ex.pause_pre for ex in batch], axis=1)
            post = np.stack([ex.pause_post for ex in batch], axis=1)
            blocks.append(ad.embedding(self.params["pause_embed_pre"], pre))
            blocks.append(ad.embedding(self.params["pause_embed_post"], post))
        if "duration" in cfg.features:
            delta = np.stack([ex.delta for ex in batch], axis=1)[:, :, None]
            blocks.append(Tensor(delta))
        if "cnn" in cfg.features:
            slices = [ex.frames[t] for t in range(n_tokens) for ex in batch]
            lengths = np.array([s.shape[0] for s in slices], dtype=np.intp)
            max_len = int(lengths.max())
            stacked = np.zeros((len(slices), max_len, NUM_FRAME_FEATURES))
            for i, s in enumerate(slices):
                stacked[i, : s.shape[0]] = s
            x3d = Tensor(stacked)
            outs = []
            for width in cfg.cnn_filter_widths:
                outs.append(ad.conv1d_maxpool(
                    x3d,
                    self.params["cnn_filters_w%d" % width],
                    self.params["cnn_bias_w%d" % width],
                    lengths=lengths,
                ))
            cnn = ad.concat(outs, axis=1)           # [T*B, m*N]
            blocks.append(ad.reshape(cnn, (n_tokens, n_batch, cfg.cnn_output_dim)))
        return ad.concat(blocks, axis=2) if len(blocks) > 1 else blocks[0]

    # -- encoder ------------------------------------------------------------

    def _lstm_stack(self, prefix: str, x: Tensor, state: list,
                    training: bool, rng) -> tuple[Tensor, list]:
        cfg = self.config
        inp = x
        new_state = []
        for layer in range(cfg.layers):
            h, c = ad.lstm_cell(
                inp, state[layer][0], state[layer][1],
                self.params["%s_l%d_weight" % (prefix, layer)],
                self.params["%s_l%d_bias" % (prefix, layer)],
            )
            new_state.append((h, c))
            inp = ad.dropout(h, cfg.dropout, rng, training)
        return inp, new_state

    def _zero_state(self, n_batch: int) -> list:
        hidden = self.config.hidden
        return [(Tensor(np.zeros((n_batch, hidden))),
                 Tensor(np.zeros((n_batch, hidden))))
                for _ in range(self.config.layers)]

    def encode(self, batch: list[PreparedExample], training: bool = False,
               rng=None) -> Encoding:
        """Run the reversed-input encoder; outputs indexed by original position."""
        inputs = self._batch_inputs(batch)          # [T, B, D]
        n_tokens, n_batch, width = inputs.data.shape
        state = self._zero_state(n_batch)
        outputs: list[Tensor | None] = [None] * n_tokens
        for t in range(n_tokens - 1, -1, -1):
            x_t = ad.reshape(ad.narrow(inputs, 0, t, 1), (n_batch, width))
            top, state = self._lstm_stack("enc", x_t, state, training, rng)
            outputs[t] = ad.reshape(top, (1, n_batch, self.config.hidden))
        stacked = ad.concat(outputs, axis=0)        # [T, B, H]
        h_seq = ad.transpose(stacked, (1, 0, 2))    # [B, T, H]
        proj = ad.reshape(
            ad.matmul(ad.reshape(h_seq, (n_batch * n_tokens, self.config.hidden)),
                      self.params["attn_enc_proj"]),
            (n_batch, n_tokens, self.config.hidden),
        )
        return Encoding(outputs=h_seq, score_proj=proj, final_state=state,
                        n_tokens=n_tokens)

    # -- attention ----------------------------------------------------------

    def _score_and_context(self, enc: Encoding, score_terms: list
                           ) -> tuple[Tensor, Tensor]:
        n_batch, n_tokens = enc.batch_size, enc.n_tokens
        att = self.config.hidden
        total = score_terms[0]
        for term in score_terms[1:]:
            total = ad.add(total, term)
        activated = ad.tanh(ad.add(total, self.params["attn_bias"]))
        scores = ad.reshape(
            ad.matmul(ad.reshape(activated, (n_batch * n_tokens, att)),
                      self.params["attn_score_vec"]),
            (n_batch, n_tokens),
        )
        alpha = ad.softmax(scores, axis=1)
        weighted = ad.mul(ad.reshape(alpha, (n_batch, n_tokens, 1)), enc.outputs)
        context = ad.tsum(weighted, axis=1)         # [B, H]
        return alpha, context

    def _decoder_proj(self, d_top: Tensor, n_batch: int) -> Tensor:
        proj = ad.matmul(d_top, self.params["attn_dec_proj"])
        return ad.reshape(proj, (n_batch, 1, self.config.hidden))

    def attend_content(self, enc: Encoding, d_top: Tensor) -> tuple[Tensor, Tensor]:
        """Content-based attention: score from encoder output and decoder state."""
        terms = [enc.score_proj, self._decoder_proj(d_top, enc.batch_size)]
        return self._score_and_context(enc, terms)

    def attend_location(self, enc: Encoding, d_top: Tensor,
                        alpha_prev: Tensor) -> tuple[Tensor, Tensor]:
        """Content+location attention: adds features convolved from the previous
        attention weights so repeated words stay distinguishable."""
        n_batch, n_tokens = enc.batch_size, enc.n_tokens
        loc = ad.conv1d_same(alpha_prev, self.params["loc_filters"])  # [B, T, k]
        loc_term = ad.reshape(
            ad.matmul(ad.reshape(loc, (n_batch * n_tokens, self.config.location_filters)),
                      self.params["attn_loc_proj"]),
            (n_batch, n_tokens, self.config.hidden),
        )
        terms = [enc.score_proj, self._decoder_proj(d_top, n_batch), loc_term]
        return self._score_and_context(enc, terms)

    # -- decoder ------------------------------------------------------------

    def initial_decoder_state(self, enc: Encoding) -> DecoderState:
        """Uniform initial attention, zero context, encoder-final LSTM state."""
        n_batch, n_tokens = enc.batch_size, enc.n_tokens
        alpha0 = Tensor(np.full((n_batch, n_tokens), 1.0 / n_tokens))
        context0 = Tensor(np.zeros((n_batch, self.config.hidden)))
        return DecoderState(layers=list(enc.final_state), alpha=alpha0,
                            context=context0)

    def _step_logits(self, prev_ids: np.ndarray, state: DecoderState,
                     enc: Encoding, training: bool = False, rng=None
                     ) -> tuple[Tensor, DecoderState]:
        prev_emb = ad.embedding(self.params["output_embeddings"], prev_ids)
        x = ad.concat([prev_emb, state.context], axis=1)
        d_top, layers = self._lstm_stack("dec", x, state.layers, training, rng)
        if self.config.attention == "location":
            alpha, context = self.attend_location(enc, d_top, state.alpha)
        else:
            alpha, context = self.attend_content(enc, d_top)
        logits = ad.add(
            ad.matmul(ad.concat([context, d_top], axis=1), self.params["out_proj"]),
            self.params["out_bias"],
        )
        return logits, DecoderState(layers=layers, alpha=alpha, context=context)

    def decode_step(self, prev_ids, state: DecoderState, enc: Encoding
                    ) -> tuple[Tensor, DecoderState]:
        """One greedy-decoding step: returns (symbol distribution, new state)."""
        prev_ids = np.asarray(prev_ids, dtype=np.intp)
        logits, new_state = self._step_logits(prev_ids, state, enc)
        return ad.softmax(logits, axis=1), new_state

    # -- losses -------------------------------------------------------------

    def sequence_loss(self, batch: list[PreparedExample], training: bool = False,
                      rng=None) -> Tensor:
        """Teacher-forced cross-entropy: mean over the batch of per-sentence
        summed -log P(symbol), including the end-of-sequence symbol."""
        if not batch:
            raise ValueError("empty batch")
        eos = self.symbol_vocab.eos_id
        n_batch = len(batch)
        lengths = [len(ex.target_ids) + 1 for ex in batch]  # + EOS
        max_len = max(lengths)
        prev_ids = np.full((n_batch, max_len), eos, dtype=np.intp)
        gold_ids = np.full((n_batch, max_len), eos, dtype=np.intp)
        mask = np.zeros((n_batch, max_len))
        for i, ex in enumerate(batch):
            seq = ex.target_ids
            prev_ids[i, 0] = self.symbol_vocab.sos_id
            prev_ids[i, 1: len(seq) + 1] = seq
            gold_ids[i, : len(seq)] = seq
            gold_ids[i, len(seq)] = eos
            mask[i, : len(seq) + 1] = 1.0

        enc = self.encode(batch, training=training, rng=rng)
        state = self.initial_decoder_state(enc)
        total = Tensor(np.zeros(n_batch))
        for t in range(max_len):
            logits, state = self._step_logits(prev_ids[:, t], state, enc,
                                              training=training, rng=rng)
            logp = ad.log_softmax(logits, axis=1)
            picked = ad.take_last(logp, gold_ids[:, t])
            total = ad.add(total, ad.mul(picked, Tensor(mask[:, t])))
        return ad.scale(ad.tsum(total), -1.0 / n_batch)

    # -- persistence --------------------------------------------------------

    def save(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        offsets = []
        offset = 0
        with open(os.path.join(directory, "params.bin"), "wb") as fh:
            for name, tensor in self.params.items():
                raw = tensor.data.astype("<f8").tobytes()
                fh.write(raw)
                offsets.append((name, tensor.data.shape, offset))
                offset += len(raw)
        with open(os.path.join(directory, "manifest.txt"), "w") as fh:
            fh.write("ckpt-v1\n")
            for name, shape, off in offsets:
                fh.write("%s\t%s\t%d\n" % (name, ",".join(map(str, shape)), off))
        with open(os.path.join(directory, "config.txt"), "w") as fh:
            for key, value in self.config.to_kv().items():
                fh.write("%s=%s\n" % (key, value))
        with open(os.path.join(directory, "words.txt"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.word_vocab.words) + "\n")
        with open(os.path.join(directory, "symbols.txt"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.symbol_vocab.symbols) + "\n")

    @classmethod
    def load(cls, directory) -> "ParserModel":
        with open(os.path.join(directory, "config.txt")) as fh:
            kv = dict(line.strip().split("=", 1) for line in fh if line.strip())
        config = ModelConfig.from_kv(kv)
        with open(os.path.join(directory, "words.txt"), encoding="utf-8") as fh:
            words = fh.read().splitlines()
        with open(os.path.join(directory, "symbols.txt"), encoding="utf-8") as fh:
            symbols = fh.read().splitlines()
        model = cls(config, WordVocab(words), SymbolVocab(symbols), seed=0)
        with open(os.path.join(directory, "manifest.txt")) as fh:
            header = fh.readline().strip()
            if header != "ckpt-v1":
                raise ConfigError("unsupported checkpoint version %r" % header)
            entries = [line.strip().split("\t") for line in fh if line.strip()]
        raw = np.fromfile(os.path.join(directory, "params.bin"), dtype="<f8")
        for name, shape_s, offset_s in entries:
            shape = tuple(int(v) for v in shape_s.split(",") if v)
            size = int(np.prod(shape)) if shape else 1
            start = int(offset_s) // 8
            if name not in model.params:
                raise ConfigError("checkpoint has unknown parameter %r" % name)
            model.params[name].data = raw[start:start + size].reshape(shape).copy()
        return model

    def copy_parameter_values(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.params.items()}

    def load_parameter_values(self, values: dict[str, np.ndarray]) -> None:
        for name, arr in values.items():
            self.params[name].data = arr.copy()
