import pytest
from hypothesis import given, strategies as st

from strategies import ascii_values, states
from tabledst.evaluation import compare_state_sources, evaluate_run, evaluate_turn
from tabledst.schema import SLOTS
from tabledst.state import DialogueState, GoldStateAnnotation
from tabledst.templating import ContextConfig
from tabledst.tracker import OracleGenerator


def test_single_empty_turn():
    assert evaluate_run([[DialogueState()]], [[GoldStateAnnotation()]]).jga == 1.0


def test_jga_arithmetic():
    gold = GoldStateAnnotation({"hotel-area": ["west"]})
    preds = [DialogueState({"hotel-area": "west"})] * 3 + [DialogueState({"hotel-area": "east"})]
    assert evaluate_run([preds], [[gold] * 4]).jga == 0.75


def test_error_taxonomy():
    gold = GoldStateAnnotation({"hotel-area": ["west"], "hotel-stars": ["4"]})
    pred = DialogueState({"hotel-area": "east", "taxi-leaveat": "10:00", "spa-area": "north"})
    ev = evaluate_turn(pred, gold)
    assert not ev.joint_correct
    assert {str(k) for k in ev.missing_slots} == {"hotel-stars"}
    assert {str(k) for k in ev.spurious_slots} == {"taxi-leaveat", "spa-area"}
    assert {str(k) for k in ev.wrong_value_slots} == {"hotel-area"}
    assert {str(k) for k in ev.invalid_slots} == {"spa-area"}


def test_schema_filter_removes_invalid_predictions():
    gold = GoldStateAnnotation({"hotel-area": ["west"]})
    pred = DialogueState({"hotel-area": "west", "spa-area": "north"})
    assert evaluate_run([[pred]], [[gold]]).jga == 0.0
    report = evaluate_run([[pred]], [[gold]], schema_filter=True)
    assert report.jga == 1.0
    assert report.errors["invalid"] == 1


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        evaluate_run([[DialogueState()]], [[GoldStateAnnotation(), GoldStateAnnotation()]])
    with pytest.raises(ValueError):
        evaluate_run([], [[GoldStateAnnotation()]])


def test_slot_scores_and_render():
    gold = GoldStateAnnotation({"hotel-area": ["west"], "hotel-stars": ["4"]})
    pred = DialogueState({"hotel-area": "west"})
    report = evaluate_run([[pred]], [[gold]])
    rows = {r["slot"]: r for r in report.slot_rows()}
    assert rows["hotel-area"]["recall"] == 1.0 and rows["hotel-stars"]["recall"] == 0.0
    assert "JGA            0.0000" in report.render()
    assert report.error_dump()[0]["missing_slots"] == ["hotel-stars"]


gold_states = states(keys=st.sampled_from(SLOTS), value_strategy=ascii_values)


@given(gold_states, st.data())
def test_jga_invariant_to_casing(state, data):
    gold = GoldStateAnnotation.from_state(state)
    recased = DialogueState({k: data.draw(st.sampled_from([str.upper, str.title, str.swapcase]))(v) for k, v in state.items()})
    assert evaluate_run([[recased]], [[gold]]).jga == evaluate_run([[state]], [[gold]]).jga == 1.0


@given(st.dictionaries(st.sampled_from(SLOTS), st.lists(ascii_values, min_size=1, max_size=3), max_size=6), st.data())
def test_jga_invariant_to_acceptable_substitution(raw, data):
    gold = GoldStateAnnotation(raw)
    first = DialogueState({k: v[0] for k, v in gold.items()})
    other = DialogueState({k: data.draw(st.sampled_from(v)) for k, v in gold.items()})
    assert evaluate_turn(first, gold).joint_correct == evaluate_turn(other, gold).joint_correct == True  # noqa: E712


@given(gold_states, st.sampled_from(SLOTS))
def test_spurious_slot_flips_correct_turn(state, extra):
    gold = GoldStateAnnotation.from_state(state)
    if extra in state:
        return
    assert evaluate_turn(state, gold).joint_correct
    assert not evaluate_turn(state.with_entry(extra, "x"), gold).joint_correct


def test_compare_sources_oracle(tmp_path):
    from tabledst.dataset import load_corpus
    from tabledst.synthetic import generate_corpus, write_layout

    records = load_corpus(write_layout(tmp_path, generate_corpus(30, seed=2), "2.2"), "2.2")
    result = compare_state_sources(records, OracleGenerator.from_records(records), ContextConfig())
    assert result.jga_predicted == result.jga_gold_fed == 1.0
    assert result.gap == 0.0
