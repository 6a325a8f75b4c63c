"""Dialogue state tracking as INSERT/DELETE operations on a state table."""

__version__ = "0.1.0"

from tabledst.state import (  # noqa: E402
    DialogueState,
    GoldStateAnnotation,
    SlotKey,
    StateKind,
    canonical_value,
    state_equals,
)
from tabledst.ops import Delete, Insert, OperationSet, ParseOutcome, parse_ops, serialize_ops  # noqa: E402
from tabledst.interpreter import apply, run_state_sequence  # noqa: E402
from tabledst.diffing import diff_states, select_training_value  # noqa: E402
from tabledst.templating import ContextConfig, Turn, build_context, linearize_state  # noqa: E402
