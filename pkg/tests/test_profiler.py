import pytest

from ckptprof.misc.errors import TraceError
from ckptprof.model.events import EventKind, TraceEvent
from ckptprof.model.tree import CallTree, CheckpointConfig, StaticRef
from ckptprof.services.profiler import (
    DeltaTriple,
    FrameStats,
    PendingOccurrence,
    Profiler,
    categorize,
    combine,
    profile,
    profile_run,
)
from ckptprof.services.simulator import emit_events, simulate
from ckptprof.services.trace_log import format_event_log, parse_event_log
from conftest import C42, K7, assert_profile_exact, call, loop, seg

X = StaticRef("X", 1)


class TestCombine:
    def test_t1_numbers(self):
        c = FrameStats(t=6, tn=30, pk=30)
        suffix = FrameStats(t=8, tn=44, pk=44)
        occ = PendingOccurrence(ref=C42, t1=2.5, t2=0.5, snp=14)
        cd = combine(c, suffix, occ, C42)
        assert (cd.t, cd.tn, cd.pk) == (17, 44, 44)
        assert cd.deltas == {C42: DeltaTriple(dt=-3, dtn=16, dpk=16)}

    def test_other_checkpoint_change_is_hidden_by_the_suffix_peak(self):
        c = FrameStats(t=1, tn=30, pk=30, deltas={X: DeltaTriple(dt=-1, dtn=5, dpk=5)})
        suffix = FrameStats(t=1, tn=44, pk=44, deltas={X: DeltaTriple(dt=-2, dtn=0, dpk=0)})
        occ = PendingOccurrence(ref=C42, t1=0, t2=0, snp=14)
        cd = combine(c, suffix, occ, C42)
        assert cd.deltas[X] == DeltaTriple(dt=-3, dtn=0, dpk=0)

    def test_missing_triples_count_as_zero(self):
        c = FrameStats(t=1, tn=30, pk=50, deltas={X: DeltaTriple(dt=-1, dtn=0, dpk=-10)})
        suffix = FrameStats(t=1, tn=44, pk=44)
        occ = PendingOccurrence(ref=C42, t1=1, t2=1, snp=14)
        cd = combine(c, suffix, occ, C42)
        assert cd.pk == 50
        assert cd.deltas[X] == DeltaTriple(dt=-1, dtn=0, dpk=-6)

    def test_leaf_frame(self):
        profiler = Profiler()
        profiler.feed(TraceEvent(EventKind.TURN, None, 2.0, 12))
        report = profiler.finish(5.0)
        assert report.root == FrameStats(t=5.0, tn=12, pk=12)
        assert report.suggestions == ()


@pytest.mark.parametrize("dpk,category", [(-45, 1), (0, 2), (16, 3)])
def test_categorize(dpk, category):
    assert categorize(DeltaTriple(dt=-1, dtn=0, dpk=dpk)) == category


class TestProfile:
    def test_t1(self, t1):
        _, report = profile_run(t1, CheckpointConfig())
        (s,) = report.suggestions
        assert s.ref == C42
        assert s.occurrences == 1
        assert s.dt == pytest.approx(-3.0)
        assert (s.dtn, s.dpk, s.category) == (16, 16, 3)

    def test_no_checkpoint_events(self, t1):
        cost, report = profile_run(t1, CheckpointConfig.all_inhibited(t1))
        assert report.suggestions == ()
        assert report.root.pk == report.root.tn == 60
        assert report.root.t == pytest.approx(cost.time_s)

    def test_snapshot_dominated(self, snapshot_dominated):
        cost, report = profile_run(snapshot_dominated, CheckpointConfig())
        assert cost.time_s == pytest.approx(7.2)
        assert cost.peak_bytes == 60
        (s,) = report.suggestions
        assert s.dt == pytest.approx(-1.2)
        assert s.dpk == -45
        assert s.category == 1

    def test_recorded_stream_without_end_clock(self, t1):
        events = []
        emit_events(t1, CheckpointConfig(), events.append)
        report = profile(events)
        # The root ends at the last callback, before U's backward sweep.
        assert report.root.t == pytest.approx(19.0)
        assert report.suggestion(C42).dt == pytest.approx(-3.0)

    def test_event_log_round_trip(self, nested_kc):
        events = []
        cost = emit_events(nested_kc, CheckpointConfig(), events.append)
        direct = profile(events, cost.time_s)
        replayed = profile(parse_event_log(format_event_log(events)), cost.time_s)
        assert [(s.ref, s.dtn, s.dpk) for s in replayed.suggestions] == [
            (s.ref, s.dtn, s.dpk) for s in direct.suggestions
        ]

    def test_suggestions_sorted(self, nested_kc):
        _, report = profile_run(nested_kc, CheckpointConfig())
        keys = [(s.category, -abs(s.dt)) for s in report.suggestions]
        assert keys == sorted(keys)

    def test_occurrences_accumulate_over_iterations(self, time_loop_tree):
        _, report = profile_run(time_loop_tree, CheckpointConfig())
        assert report.occurrences == {StaticRef("step", 1): 10}

    def test_multi_site_procs_are_flagged(self, caplog):
        tree = CallTree(
            "two-sites",
            (call(StaticRef("C", 1), [seg("a", tape=3)], snap=1), call(StaticRef("C", 2), [seg("b", tape=4)], snap=1)),
        )
        _, report = profile_run(tree, CheckpointConfig())
        assert report.multi_site_procs == {"C"}
        assert "several sites" in caplog.text

    def test_observer_sees_every_fold(self, nested_kc):
        folds = []
        profile_run(nested_kc, CheckpointConfig(), observer=lambda *args: folds.append(args))
        assert len(folds) == 2
        for child, suffix, combined in folds:
            assert combined.tn == suffix.tn
            assert combined.pk == max(child.pk, suffix.pk)


class TestExactness:
    def test_t1(self, t1):
        assert_profile_exact(t1, CheckpointConfig())

    def test_nested(self, nested_kc):
        assert_profile_exact(nested_kc, CheckpointConfig())
        assert_profile_exact(nested_kc, CheckpointConfig(inhibited=frozenset({K7})))
        assert_profile_exact(nested_kc, CheckpointConfig(inhibited=frozenset({C42})))

    def test_unrolled_loop(self, time_loop_tree):
        assert_profile_exact(time_loop_tree, CheckpointConfig())

    @pytest.mark.parametrize("d", [1, 2, 3, 10])
    def test_binomial_loop(self, time_loop_tree, d):
        _, report = assert_profile_exact(time_loop_tree, CheckpointConfig(binomial={"tsteps": d}))
        assert report.occurrences == {StaticRef("step", 1): 10}

    def test_binomial_deltas_are_not_multiplied_by_steps(self, time_loop_tree):
        _, report = profile_run(time_loop_tree, CheckpointConfig(binomial={"tsteps": 4}))
        (s,) = report.suggestions
        step_call = time_loop_tree.items[1].body[1]
        # Inhibiting the step call adds its tape once per in-flight step, not per step.
        assert s.dpk <= step_call.body[0].tape_bytes

    def test_checkpoint_inside_a_checkpoint_inside_a_loop(self):
        inner = call(C42, [seg("c", t_primal=2, t_fwd=3, t_bwd=3, tape=20)], snap=4, t_w=0.5, t_r=0.5)
        outer = call(K7, [seg("a", tape=6), inner, seg("b", tape=2)], snap=8, t_w=0.25, t_r=0.25)
        tree = CallTree("nest", (seg("u", tape=1), loop("L", 3, [outer, seg("m", tape=5)], step_snap=9), seg("d", tape=3)))
        for config in (CheckpointConfig(), CheckpointConfig(binomial={"L": 2}), CheckpointConfig(inhibited=frozenset({K7}))):
            assert_profile_exact(tree, config)


class TestMalformedStreams:
    def _fail(self, events, end=None):
        profiler = Profiler()
        with pytest.raises(TraceError) as info:
            for event in events:
                profiler.feed(event)
            profiler.finish(end)
        return info.value

    def test_missing_turn(self):
        error = self._fail([TraceEvent(EventKind.SNP_WRITE, C42, 0.0, 4)])
        assert "unmatched" in str(error) or "TURN" in str(error)

    def test_clock_regression(self):
        error = self._fail([TraceEvent(EventKind.TURN, None, 2.0, 0), TraceEvent(EventKind.SNP_READ, C42, 1.0, 0)])
        assert error.index == 1

    def test_read_without_write(self):
        error = self._fail([TraceEvent(EventKind.TURN, None, 1.0, 0), TraceEvent(EventKind.SNP_READ, C42, 1.0, 0)])
        assert error.index == 1

    def test_end_reverse_without_begin(self, t1):
        events = []
        emit_events(t1, CheckpointConfig(), events.append)
        broken = [e for e in events if e.kind is not EventKind.BEGIN_REVERSE]
        self._fail(broken)

    def test_unclosed_round_trip(self, t1):
        events = []
        emit_events(t1, CheckpointConfig(), events.append)
        error = self._fail(events[:-1])
        assert "unclosed" in str(error)

    def test_second_turn(self):
        self._fail([TraceEvent(EventKind.TURN, None, 1.0, 0), TraceEvent(EventKind.TURN, None, 2.0, 0)])

    def test_end_clock_before_last_event(self, t1):
        events = []
        emit_events(t1, CheckpointConfig(), events.append)
        self._fail(events, end=1.0)

    def test_mismatched_ref(self, t1):
        events = []
        emit_events(t1, CheckpointConfig(), events.append)
        swapped = [
            TraceEvent(e.kind, K7, e.clock_s, e.stack_bytes) if e.kind is EventKind.SNP_READ else e for e in events
        ]
        error = self._fail(swapped)
        assert error.index == 4


def test_profiling_is_consistent_with_simulate(nested_kc):
    cost, _ = profile_run(nested_kc, CheckpointConfig())
    assert cost == simulate(nested_kc, CheckpointConfig())
