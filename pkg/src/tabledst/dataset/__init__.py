from tabledst.dataset.loaders import VERSIONS, load_corpus, separator_violations
from tabledst.dataset.normalize import DEFAULT_RULES, NormalizationRuleSet, normalize_labels
from tabledst.dataset.records import DatasetError, DialogueRecord
from tabledst.dataset.stats import CorpusStatistics, compare_statistics, compute_statistics, reference_statistics
from tabledst.dataset.targets import emit_training_targets, gold_targets, replay_failures
from tabledst.dataset.corpus import read_corpus, write_corpus

__all__ = [
    "VERSIONS",
    "load_corpus",
    "separator_violations",
    "DEFAULT_RULES",
    "NormalizationRuleSet",
    "normalize_labels",
    "DatasetError",
    "DialogueRecord",
    "CorpusStatistics",
    "compare_statistics",
    "compute_statistics",
    "reference_statistics",
    "emit_training_targets",
    "gold_targets",
    "replay_failures",
    "read_corpus",
    "write_corpus",
]
