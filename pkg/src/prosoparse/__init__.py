"""Attention encoder-decoder constituency parsing for conversational speech.

The package covers the full loop: tree linearization and repair, acoustic
feature extraction (pause buckets, duration ratios, frame CNNs), a
numpy-only LSTM encoder-decoder with content or location attention,
training with interval-loss learning-rate decay, greedy decoding with
output repair, bracket scoring with stratified reports and a paired
bootstrap test, and a synthetic speech corpus generator for controlled
experiments.
"""

from .autodiff import (AdamState, NumericsError, Tensor, adam_step,
                       clip_grad_norm, finite_difference_check, no_grad)
from .corpus import (CorpusError, Example, Utterance, load_treebank,
                     preprocess_tree, write_treebank)
from .decoding import (ParseResult, decode_corpus, greedy_decode,
                       parse_sentence, prepare_for_model)
from .metrics import (EvalReport, MetricsError, bootstrap_pvalue, bracket_set,
                      disfluency_stratum, flat_f1, length_stratum, parseval,
                      stratified_report)
from .model import (ConfigError, ModelConfig, ParserModel, SymbolVocab,
                    VocabError, WordVocab, prepare_example)
from .prosody import (DurationLexicon, PauseCategory, ProsodicInput,
                      ProsodyError, bucket_pause, build_prosodic_inputs,
                      duration_feature, load_duration_lexicon,
                      word_frame_slice, write_duration_lexicon)
from .synth import SynthConfig, SyntheticCorpus, gen_synthetic, load_corpus, save_corpus
from .training import TrainConfig, TrainLog, TrainingError, lr_update, train
from .trees import (XX, Tree, TreeError, delinearize, flatten_edits,
                    is_valid_parse, linearize, parse_bracketed, repair)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "ConfigError", "CorpusError", "DurationLexicon",
    "EvalReport", "Example", "MetricsError", "ModelConfig", "NumericsError",
    "ParseResult", "ParserModel", "PauseCategory", "ProsodicInput",
    "ProsodyError", "SymbolVocab", "SynthConfig", "SyntheticCorpus",
    "Tensor", "TrainConfig", "TrainLog", "TrainingError", "Tree",
    "TreeError", "Utterance", "VocabError", "WordVocab", "XX", "adam_step",
    "bootstrap_pvalue", "bracket_set", "bucket_pause",
    "build_prosodic_inputs", "clip_grad_norm", "decode_corpus",
    "delinearize", "disfluency_stratum", "duration_feature",
    "finite_difference_check", "flat_f1", "flatten_edits", "gen_synthetic",
    "greedy_decode", "is_valid_parse", "length_stratum", "linearize",
    "load_corpus", "load_duration_lexicon", "load_treebank", "lr_update",
    "no_grad", "parse_bracketed", "parse_sentence", "parseval",
    "prepare_example", "prepare_for_model", "preprocess_tree", "repair",
    "save_corpus",
    "stratified_report", "train", "word_frame_slice", "write_duration_lexicon",
    "write_treebank",
]
