import io
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, fixture_doc
from treesched import trace_io
from treesched.cli import run_cli
from treesched.errors import ParseError, SchemaError
from treesched.executors import DdsOrder, simulate_default_executor, simulate_two_queue
from treesched.gantt import LEFT, render_svg
from treesched.generate import GenParams, generate
from treesched.graph_model import unfold
from treesched.scheduling_core import make_policy
from treesched.taskset import parse_taskset, serialize_taskset

THREE_TIMERS = str(FIXTURES / "three_timers.taskset")


def cli(*argv):
    out = io.StringIO()
    code = run_cli(list(argv), out)
    return code, out.getvalue()


# -- taskset files -----------------------------------------------------------------

@pytest.mark.parametrize("name", ["three_timers", "synthetic_50", "synthetic_50", "synthetic_70", "synthetic_90",
                                  "harmonic_pass", "harmonic_fail", "sample_app"])
def test_fixtures_parse_and_round_trip(name):
    doc = fixture_doc(name)
    assert parse_taskset(serialize_taskset(doc)) == doc


def test_fixture_settings_are_read():
    doc = fixture_doc("harmonic_fail")
    assert (doc.config.policy, doc.config.dds_order, doc.config.horizon) == ("rm", "fifo", 200)
    assert [cb.id for cb in doc.graph.callbacks] == ["B", "A", "C"]


def test_undeclared_topic_names_the_topic_and_line():
    text = ("topics: [a]\n"
            "callbacks:\n"
            "  - {id: T, kind: timer, wcet: 1, period: 10, published_topics: [a]}\n"
            "  - {id: S, kind: subscription, wcet: 1, subscribed_topic: ghost}\n")
    with pytest.raises(SchemaError, match="ghost") as exc:
        parse_taskset(text)
    assert exc.value.line == 4


def test_malformed_yaml_reports_position():
    with pytest.raises(ParseError) as exc:
        parse_taskset("topics: [a\ncallbacks: []\n")
    assert exc.value.line is not None and exc.value.column is not None


@pytest.mark.parametrize("text", [
    "bogus: 1\ncallbacks: []\n",
    "callbacks:\n  - {id: T, kind: timer, wcet: 1, period: 10, colour: red}\n",
    "callbacks:\n  - {id: T, kind: alarm, wcet: 1, period: 10}\n",
    "callbacks:\n  - {id: T, kind: timer, wcet: one, period: 10}\n",
])
def test_unknown_or_mistyped_fields_are_rejected(text):
    with pytest.raises(SchemaError):
        parse_taskset(text)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.booleans(), st.booleans())
def test_generated_tasksets_round_trip(seed, sporadic, actual):
    doc = generate(seed, GenParams(sporadic_prob=0.3 if sporadic else 0.0, actual_times=actual))
    assert parse_taskset(serialize_taskset(doc)) == doc


# -- trace files -------------------------------------------------------------------

def test_trace_round_trips_through_text():
    doc = fixture_doc("harmonic_fail")
    trace = simulate_two_queue(unfold(doc.graph), make_policy("rm"), DdsOrder.FIFO, horizon=200)
    text = trace_io.dumps(trace)
    assert text.startswith("# treesched-trace v1 executor=two-queue")
    again = trace_io.loads(text)
    assert again == trace
    assert trace_io.dumps(again) == text


def test_default_executor_trace_keeps_drops_and_polls(three_timers_forest):
    trace = simulate_default_executor(three_timers_forest, 30)
    assert trace_io.loads(trace_io.dumps(trace)) == trace


def test_bad_trace_header_is_a_parse_error():
    with pytest.raises(ParseError):
        trace_io.loads("segments\n")


# -- gantt -------------------------------------------------------------------------

def bars(svg):
    return re.findall(r'<rect class="segment"[^>]*x="([\d.]+)"[^>]*width="([\d.]+)"', svg)


def test_one_bar_per_segment_at_linear_positions(three_timers_forest):
    trace = simulate_two_queue(three_timers_forest, make_policy("rm"), horizon=30)
    for scale in (4.0, 10.0):
        found = bars(render_svg(trace, scale=scale))
        assert len(found) == len(trace.segments)
        for (x, w), s in zip(found, trace.segments):
            assert float(x) == pytest.approx(LEFT + s.start * scale)
            assert float(w) == pytest.approx((s.end - s.start) * scale)


# -- command line ------------------------------------------------------------------

def test_simulate_default_executor_records_the_drop():
    code, out = cli("simulate", THREE_TIMERS, "--executor", "default")
    assert code == 0
    drops = out.split("[drops]\n", 1)[1].split("\n[", 1)[0].splitlines()
    assert drops[1:] == ["tau1,0,2,20"]


def test_compare_reports_equivalence_and_divergence():
    code, out = cli("compare", THREE_TIMERS)
    assert code == 0 and out.startswith("equivalent")
    code, out = cli("compare", str(FIXTURES / "harmonic_fail.taskset"))
    assert code == 1 and "DIVERGENT" in out


def test_analyze_prints_utilization():
    code, out = cli("analyze", str(FIXTURES / "synthetic_50.taskset"), "--horizon", "2000")
    assert code == 0
    assert "utilization: 0.498" in out
    assert "harmonic condition:" in out


def test_analyze_strict_fails_on_deadline_miss():
    code, out = cli("analyze", THREE_TIMERS, "--executor", "events-fifo", "--strict")
    assert code == 1 and "deadline misses: 1" in out


def test_unfold_lists_duplication():
    code, out = cli("unfold", str(FIXTURES / "synthetic_50.taskset"))
    assert code == 0 and "sub_a: 3" in out


def test_bad_input_exits_with_two(tmp_path):
    bad = tmp_path / "bad.taskset"
    bad.write_text("callbacks:\n  - {id: T, kind: timer}\n")
    assert cli("simulate", str(bad))[0] == 2
    assert cli("simulate", str(tmp_path / "missing.taskset"))[0] == 2
    assert cli("simulate")[0] == 2


def test_render_writes_svg(tmp_path):
    trace_path = tmp_path / "three_timers.trace"
    assert cli("simulate", THREE_TIMERS, "-o", str(trace_path))[0] == 0
    code, svg = cli("render", str(trace_path))
    assert code == 0 and svg.count('class="segment"') == 5


def test_trials_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli("simulate", "--trials", "4", "--seed", "7", "--jobs", "3", "-o", str(a))[0] == 0
    assert cli("simulate", "--trials", "4", "--seed", "7", "--jobs", "1", "-o", str(b))[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == [f"trial_{i:04d}.trace" for i in range(4)]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_gen_output_is_a_valid_taskset():
    code, out = cli("gen", "--seed", "3")
    assert code == 0
    assert parse_taskset(out) == generate(3)
