import pytest
from hypothesis import given, strategies as st

from strategies import any_value, states
from tabledst.diffing import diff_states, gold_trajectory, resolve_gold, select_training_value
from tabledst.interpreter import apply
from tabledst.ops import Delete, Insert, OperationSet, serialize_ops
from tabledst.state import DialogueState, GoldStateAnnotation


def brute_force_choice(candidates, text):
    """Scan candidates in order for an uncased substring; else longest, first on ties."""
    def norm(s):
        return " ".join(s.split()).lower()

    for c in candidates:
        if norm(c) in norm(text):
            return norm(c)
    best = candidates[0]
    for c in candidates[1:]:
        if len(c) > len(best):
            best = c
    return norm(best)


def test_select_first_span_match():
    assert select_training_value(["marriott", "marriott hotel"], "i want the Marriott Hotel please") == "marriott"


def test_select_singleton():
    assert select_training_value(["guesthouse"], "any text") == "guesthouse"


def test_select_longest_without_span():
    assert select_training_value(["a", "abc"], "xyz") == "abc"


def test_select_rejects_empty():
    with pytest.raises(ValueError):
        select_training_value([], "text")


@given(
    st.lists(st.text(alphabet="abc ", min_size=1, max_size=4).filter(str.strip), min_size=1, max_size=4),
    st.text(alphabet="abcABC ", max_size=12),
)
def test_select_matches_brute_force(candidates, text):
    candidates = [c.strip() for c in candidates]
    assert select_training_value(candidates, text) == brute_force_choice(candidates, text)


def test_diff_worked_example_turn0():
    ops = diff_states(DialogueState(), DialogueState({"hotel-type": "guesthouse", "hotel-internet": "yes"}))
    assert ops.ops == (Insert("hotel-internet", "yes"), Insert("hotel-type", "guesthouse"))


def test_diff_same_state_is_none():
    state = DialogueState({"hotel-area": "west"})
    assert serialize_ops(diff_states(state, state)) == "none"


def test_diff_ignores_casing_only_changes():
    assert not diff_states(DialogueState({"hotel-name": "Marriott"}), DialogueState({"hotel-name": "marriott"}))


def test_diff_orders_inserts_then_deletes():
    prev = DialogueState({"taxi-leaveat": "10:00", "hotel-area": "north"})
    nxt = DialogueState({"hotel-stars": "4", "hotel-area": "west"})
    assert diff_states(prev, nxt).ops == (Insert("hotel-area", "west"), Insert("hotel-stars", "4"), Delete("taxi-leaveat"))


@given(states(), states())
def test_reconstruction(prev, nxt):
    state, warnings = apply(prev, diff_states(prev, nxt))
    assert state.same_as(nxt)
    assert warnings == []


@given(states(), states())
def test_minimality(prev, nxt):
    ops = diff_states(prev, nxt)
    for i in range(len(ops)):
        reduced = OperationSet(ops.ops[:i] + ops.ops[i + 1 :])
        assert not apply(prev, reduced)[0].same_as(nxt)


@given(states())
def test_diff_shapes(state):
    assert not diff_states(state, state)
    assert all(isinstance(op, Insert) for op in diff_states(DialogueState(), state))
    assert all(isinstance(op, Delete) for op in diff_states(state, DialogueState()))


def test_resolve_keeps_acceptable_previous_variant():
    prev = DialogueState({"hotel-type": "guesthouse"})
    gold = GoldStateAnnotation({"hotel-type": ["guest house", "guesthouse"]})
    assert resolve_gold(prev, gold, "a guest house")["hotel-type"] == "guesthouse"
    assert resolve_gold(prev, gold, "a guest house", variant_switch_is_change=True)["hotel-type"] == "guest house"


def test_trajectory_variant_switch_is_no_change():
    golds = [GoldStateAnnotation({"hotel-type": ["guesthouse", "guest house"]}), GoldStateAnnotation({"hotel-type": ["guest house", "guesthouse"]})]
    _, targets = gold_trajectory(golds, ["a guesthouse", "the guest house"])
    assert serialize_ops(targets[1]) == "none"
    _, targets = gold_trajectory(golds, ["a guesthouse", "the guest house"], variant_switch_is_change=True)
    assert serialize_ops(targets[1]) == "INSERT hotel-type = guest house"


@given(st.lists(st.dictionaries(st.sampled_from(["hotel-area", "hotel-name", "taxi-leaveat", "train-day"]), st.lists(any_value, min_size=1, max_size=3), max_size=4), min_size=1, max_size=6))
def test_trajectory_replay_reproduces_gold(raw):
    golds = [GoldStateAnnotation(g) for g in raw]
    states_, targets = gold_trajectory(golds, [""] * len(golds))
    state = DialogueState()
    for gold, ops in zip(golds, targets):
        state, _ = apply(state, ops)
        assert state.slots == gold.slots
        assert all(gold.accepts(k, v) for k, v in state.items())
