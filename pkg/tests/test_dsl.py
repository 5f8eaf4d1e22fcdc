from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from fockrail.circuits import MIRROR, BeamSplitterConfig
from fockrail.dsl import (CausalityError, CircuitProgram, DslError, DslSemanticError, DslSyntaxError,
                          DuplicateDirectiveError, IndexRangeError, MissingLayoutError, UnmeasuredError,
                          ValueRangeError, parse, parse_file, to_text)
from fockrail.rail import FeedForwardRule

CORPUS = Path(__file__).parent / "corpus"
VALID = sorted((CORPUS / "valid").glob("*.rail"))
INVALID = sorted((CORPUS / "invalid").glob("*.rail"))


def expected_code(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith("# expect: ")
    return first.split(":", 1)[1].strip()


def test_corpus_sizes():
    assert len(VALID) == 30
    assert len(INVALID) >= 30


@pytest.mark.parametrize("path", VALID, ids=lambda p: p.stem)
def test_round_trip_fixpoint(path):
    prog = parse_file(path)
    text = to_text(prog)
    again = parse(text)
    assert again == prog
    assert to_text(again) == text


@pytest.mark.parametrize("path", INVALID, ids=lambda p: p.stem)
def test_malformed_input_is_classified(path):
    with pytest.raises(DslError) as info:
        parse_file(path)
    assert info.value.code == expected_code(path)
    assert info.value.line is not None and info.value.column is not None


def test_mirror_example():
    text = ("rail loops=1 timebins=1\nbs t=0 loop=0 theta=1.5707963 gamma=1.5707963 rho=1.5707963\n"
            "prepare t=0 n=0\nmeasure t=0")
    prog = parse(text)
    assert prog.bs[(0, 0)] == BeamSplitterConfig(1.5707963, 1.5707963, 1.5707963, 0.0)
    assert prog.prepare == {0: 0} and prog.measure == {0}


def test_missing_layout():
    with pytest.raises(MissingLayoutError):
        parse("measure t=0\n")
    with pytest.raises(MissingLayoutError):
        parse("# nothing\n")


def test_index_range():
    with pytest.raises(IndexRangeError) as info:
        parse("rail loops=1 timebins=6\nbs t=9 loop=0 theta=1.0\n")
    assert (info.value.line, info.value.column) == (2, 4)
    assert isinstance(info.value, DslSemanticError)


def test_error_classes_distinct():
    classes = [DslSyntaxError, MissingLayoutError, DslSemanticError, IndexRangeError,
               DuplicateDirectiveError, CausalityError, ValueRangeError, UnmeasuredError]
    assert len({c.code for c in classes}) == len(classes)
    assert len({c.exit_code for c in classes}) == len(classes)


def test_defaults():
    prog = parse("rail loops=2 timebins=2\nbs t=1 loop=1 theta=0.5\n")
    assert prog.bs[(1, 1)] == BeamSplitterConfig(0.5)
    layout = prog.layout()
    assert layout.config(0, 0) == MIRROR and layout.config(1, 1) == BeamSplitterConfig(0.5)


def test_comments_and_whitespace():
    prog = parse("  rail loops=1   timebins=1 # trailing\n\n# whole line\nmeasure t=0\n")
    assert prog.measure == {0}


def test_coherent_and_encoding():
    prog = parse("rail loops=1 timebins=2\nencode d=3 alpha=0.5,-0.25\nprepare t=0 coherent=1e-1,2\n")
    assert prog.prepare[0] == complex(0.1, 2) and prog.coherent == {0}
    assert prog.encoding().d == 3 and prog.encoding().alpha == complex(0.5, -0.25)
    assert prog.schedule().coherent == frozenset({0})


def test_feedforward_requires_readout():
    with pytest.raises(UnmeasuredError):
        parse("rail loops=1 timebins=2\nfeedforward when t=0 n=1 set t=1 loop=0 theta=0.1\n")
    prog = parse("rail loops=1 timebins=2\nfeedforward when t=0 n=1 set t=1 loop=0 theta=0.1\nmeasure t=0\n")
    assert prog.feedforward == [FeedForwardRule(0, 1, 1, 0, BeamSplitterConfig(0.1))]


def test_keywords_case_sensitive():
    with pytest.raises(DslSyntaxError):
        parse("Rail loops=1 timebins=1\n")


def floats():
    return st.floats(-10, 10, allow_nan=False).map(lambda x: round(x, 6))


@st.composite
def programs(draw):
    loops, timebins = draw(st.integers(1, 3)), draw(st.integers(1, 5))
    prog = CircuitProgram(loops, timebins)
    for t in range(timebins):
        for k in range(loops):
            if draw(st.booleans()):
                theta = draw(floats())
                phases = [draw(st.sampled_from([0.0, 1.25])) for _ in range(2)] + [draw(floats())]
                prog.bs[(t, k)] = BeamSplitterConfig(theta, *phases)
    for t in range(timebins):
        if draw(st.booleans()):
            prog.prepare[t] = draw(st.integers(0, 3))
        choice = draw(st.sampled_from(["none", "measure", "post"]))
        if choice == "measure":
            prog.measure.add(t)
        elif choice == "post":
            prog.postselect[t] = draw(st.integers(0, 2))
    if draw(st.booleans()):
        prog.prepare[0] = complex(draw(floats()), draw(floats()))
        prog.coherent.add(0)
    read = sorted(prog.measure | set(prog.postselect))
    for t in read:
        if t + 1 < timebins and draw(st.booleans()):
            prog.feedforward.append(FeedForwardRule(t, draw(st.integers(0, 2)), draw(st.integers(t + 1, timebins - 1)),
                                                    draw(st.integers(0, loops - 1)), BeamSplitterConfig(draw(floats()))))
    if draw(st.booleans()):
        alpha = complex(draw(floats()), draw(floats()))
        if alpha != 0:
            prog.encode = (draw(st.integers(2, 5)), alpha)
    return prog


@settings(max_examples=150, deadline=None)
@given(programs())
def test_generated_programs_round_trip(prog):
    text = to_text(prog)
    assert parse(text) == prog
    assert to_text(parse(text)) == text


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="rail bstmeqopc=0123456789.-,#\n", max_size=80))
def test_never_crashes(text):
    try:
        parse(text)
    except DslError as exc:
        assert exc.code
