"""Corpus-free morpheme lexicon refinement and BPE vocabulary-size evaluation."""

__version__ = "0.1.0"

from .core import (AlphabetConfig, Candidate, ConfigError, Decomposition, EmptyDataError,
                   InputError, MorphemeLexicon, MorphlexError, ScoreTable, Source,
                   load_config, preset_config, read_candidate_file, read_lexicon,
                   read_score_table, write_lexicon, write_score_table)
from .imdp import (OtsuResult, RefinementState, SupportIndex, best_explanation,
                   build_support_index, extract_lexicon, initial_scores, otsu_threshold,
                   prefilter, reduction_stats, refine_step, run_pipeline, run_refinement,
                   support_filter)
from .bpe import BpeModel, count_words, import_vocab, train
from .metrics import (EvalReport, evaluate, integrated_performance_score,
                      lexical_morpheme_coverage, over_split_rate)
from .curve import (CurveAnalysis, GainMode, IpsCurve, appendix_curve, kneedle_elbow,
                    max_gain_point, q90_point, recommend_range)

__all__ = [name for name in dir() if not name.startswith("_")]
