import json

import pytest

from ckptprof.misc.errors import (
    CapacityError,
    DuplicateCallSiteError,
    DuplicateLoopIdError,
    MalformedSiteError,
    NegativeValueError,
    PreconditionError,
    TreeSchemaError,
    TreeSyntaxError,
    UnknownDirectiveError,
)
from ckptprof.model import (
    CallNode,
    CheckpointConfig,
    CostRanges,
    LoopNode,
    Segment,
    StaticRef,
    format_refs,
    generate_tree,
    parse_config,
    parse_refs,
    parse_tree,
    serialize_config,
    serialize_tree,
)
from ckptprof.model.generator import TIME_LOOP_ID, TIME_STEP_REF
from ckptprof.model.tree import walk

SEGMENT = {"seg": {"label": "s", "t_primal": 1, "t_fwd": 1, "t_bwd": 1, "tape_bytes": 8}}


def _loop(loop_id):
    return {
        "loop": {
            "id": loop_id,
            "iterations": 3,
            "step_snapshot_bytes": 1,
            "t_snp_write": 0,
            "t_snp_read": 0,
            "items": [SEGMENT],
        }
    }


def _call(proc, site, items=None):
    return {
        "call": {
            "proc": proc,
            "site": site,
            "snapshot_bytes": 4,
            "t_snp_write": 0.5,
            "t_snp_read": 0.5,
            "items": items or [SEGMENT],
        }
    }


def _doc(*items):
    return json.dumps({"name": "t", "items": list(items)})


def _depth(items, level=0):
    deepest = level
    for item in items:
        if isinstance(item, CallNode):
            deepest = max(deepest, _depth(item.body, level + 1))
        elif isinstance(item, LoopNode):
            deepest = max(deepest, _depth(item.body, level))
    return deepest


class TestStaticRef:
    def test_parse_forms(self):
        assert StaticRef.parse("C") == StaticRef("C")
        assert StaticRef.parse("C@42") == StaticRef("C", 42)

    @pytest.mark.parametrize("token", ["C@", "C@x", "C@-1", "C@4@2"])
    def test_parse_rejects_malformed_sites(self, token):
        with pytest.raises(ValueError):
            StaticRef.parse(token)

    def test_rejects_whitespace_in_proc(self):
        with pytest.raises(ValueError):
            StaticRef("a b")

    def test_str(self):
        assert str(StaticRef("C", 42)) == "C@42"
        assert str(StaticRef("C")) == "C"

    def test_format_and_parse_refs(self):
        refs = {StaticRef("b", 3), StaticRef("a", 10), StaticRef("a")}
        assert format_refs(refs) == "a;a@10;b@3"
        assert parse_refs("a;a@10;b@3") == frozenset(refs)
        assert parse_refs("") == frozenset()


class TestCheckpointConfig:
    def test_sited_and_proc_wide_inhibition(self):
        c42, c50 = StaticRef("C", 42), StaticRef("C", 50)
        assert CheckpointConfig().is_active(c42)
        assert not CheckpointConfig(inhibited=frozenset({c42})).is_active(c42)
        assert CheckpointConfig(inhibited=frozenset({c42})).is_active(c50)
        proc_wide = CheckpointConfig(inhibited=frozenset({StaticRef("C")}))
        assert not proc_wide.is_active(c42)
        assert not proc_wide.is_active(c50)

    def test_capacity_must_be_positive(self):
        with pytest.raises(ValueError):
            CheckpointConfig(binomial={"tsteps": 0})

    def test_with_helpers_do_not_mutate(self):
        base = CheckpointConfig(binomial={"tsteps": 5})
        changed = base.with_inhibited([StaticRef("C", 42)]).with_binomial("tsteps", 20)
        assert base.inhibited == frozenset()
        assert base.capacity("tsteps") == 5
        assert changed.capacity("tsteps") == 20
        assert changed.inhibited == {StaticRef("C", 42)}

    def test_all_inhibited(self, nested_kc):
        config = CheckpointConfig.all_inhibited(nested_kc)
        assert config.active_refs(nested_kc) == []


class TestParseTree:
    def test_single_segment(self):
        tree = parse_tree(_doc(SEGMENT))
        assert len(tree.items) == 1
        assert isinstance(tree.items[0], Segment)
        assert tree.static_refs() == []

    def test_t1_document(self, t1):
        parsed = parse_tree(serialize_tree(t1))
        assert parsed == t1
        assert [type(item) for item in parsed.items] == [Segment, CallNode, Segment]
        assert parsed.items[1].ref == StaticRef("C", 42)

    def test_round_trip_is_stable(self, time_loop_tree):
        text = serialize_tree(time_loop_tree)
        assert serialize_tree(parse_tree(text)) == text

    def test_syntax_error_has_position(self):
        with pytest.raises(TreeSyntaxError) as info:
            parse_tree('{"name": "t",\n  "items": [}')
        assert info.value.line == 2
        assert info.value.column is not None

    def test_duplicate_loop_id(self):
        with pytest.raises(DuplicateLoopIdError):
            parse_tree(_doc(_loop("tsteps"), _loop("tsteps")))

    def test_duplicate_call_site(self):
        with pytest.raises(DuplicateCallSiteError):
            parse_tree(_doc(_call("C", 42), _call("D", 1, [_call("C", 42)])))

    def test_same_proc_at_two_sites_is_fine(self):
        tree = parse_tree(_doc(_call("C", 42), _call("C", 43)))
        assert tree.procs_with_many_sites() == {"C"}

    def test_negative_value(self):
        bad = {"seg": dict(SEGMENT["seg"], t_bwd=-1)}
        with pytest.raises(NegativeValueError):
            parse_tree(_doc(bad))

    def test_negative_bytes(self):
        bad = {"seg": dict(SEGMENT["seg"], tape_bytes=-8)}
        with pytest.raises(NegativeValueError):
            parse_tree(_doc(bad))

    @pytest.mark.parametrize(
        "item",
        [
            {"seg": dict(SEGMENT["seg"], extra=1)},
            {"seg": SEGMENT["seg"], "call": {}},
            {"block": {}},
            {"loop": dict(_loop("x")["loop"], iterations=0)},
            {"call": dict(_call("C", 42)["call"], site="42")},
            {"call": dict(_call("C", 42)["call"], snapshot_bytes=True)},
            {"call": dict(_call("C", 42)["call"], t_snp_write="0.5")},
            {"seg": dict(SEGMENT["seg"], tape_bytes=8.0)},
            {"loop": dict(_loop("x")["loop"], iterations=2.0)},
        ],
    )
    def test_schema_errors(self, item):
        with pytest.raises(TreeSchemaError):
            parse_tree(_doc(item))


class TestParseConfig:
    def test_proc_wide(self):
        assert parse_config("inhibit C").inhibited == {StaticRef("C")}

    def test_sited_and_binomial(self):
        config = parse_config("inhibit C@42\nbinomial tsteps 20\n")
        assert config.inhibited == {StaticRef("C", 42)}
        assert config.capacity("tsteps") == 20

    def test_empty(self):
        assert parse_config("") == CheckpointConfig()

    def test_comments_and_blank_lines(self):
        config = parse_config("# header\n\ninhibit C@42  # the big one\n")
        assert config.inhibited == {StaticRef("C", 42)}

    def test_unknown_directive(self):
        with pytest.raises(UnknownDirectiveError) as info:
            parse_config("inhibit C\nactivate D\n")
        assert info.value.line == 2

    def test_malformed_site(self):
        with pytest.raises(MalformedSiteError):
            parse_config("inhibit C@forty")

    @pytest.mark.parametrize("capacity", ["0", "-3", "many"])
    def test_bad_capacity(self, capacity):
        with pytest.raises(CapacityError):
            parse_config(f"binomial tsteps {capacity}")

    def test_serialize_is_sorted(self):
        config = CheckpointConfig(
            inhibited=frozenset({StaticRef("b", 2), StaticRef("a")}), binomial={"tsteps": 5}
        )
        assert serialize_config(config) == "inhibit a\ninhibit b@2\nbinomial tsteps 5\n"
        assert parse_config(serialize_config(config)) == config


class TestGenerator:
    def test_deterministic(self):
        assert serialize_tree(generate_tree(7, 5, 3)) == serialize_tree(generate_tree(7, 5, 3))

    def test_seed_matters(self):
        assert serialize_tree(generate_tree(7, 5, 3)) != serialize_tree(generate_tree(8, 5, 3))

    def test_85_static_checkpoints(self):
        tree = generate_tree(1, 85, 4)
        refs = tree.static_refs()
        assert len(refs) == 85
        assert len(set(refs)) == 85

    def test_single_call_depth_one(self):
        tree = generate_tree(3, 1, 1)
        (only,) = tree.calls()
        assert all(isinstance(item, Segment) for item in only.body)

    @pytest.mark.parametrize("seed", range(20))
    def test_shape_invariants(self, seed):
        tree = generate_tree(seed, 12, 3, n_loops=2)
        assert len(tree.calls()) == 12
        assert all(call.body for call in tree.calls())
        assert _depth(tree.items) <= 3
        assert len(tree.loops()) == 2
        assert all(loop.body for loop in tree.loops())

    def test_loops_survive_inside_call_bodies(self):
        # Every loop is kept whichever body it wraps.
        for seed in range(30):
            tree = generate_tree(seed, 6, 3, n_loops=3)
            assert sorted(loop.loop_id for loop in tree.loops()) == ["loop0", "loop1", "loop2"]

    def test_time_steps_wrap_the_program(self):
        tree = generate_tree(5, 10, 3, time_steps=80)
        assert len(tree.items) == 3
        time_loop = tree.items[1]
        assert isinstance(time_loop, LoopNode)
        assert time_loop.loop_id == TIME_LOOP_ID
        assert time_loop.iterations == 80
        (step,) = time_loop.body
        assert step.ref == TIME_STEP_REF
        assert len(tree.calls()) == 10
        assert _depth(tree.items) <= 3

    def test_values_are_rounded(self):
        tree = generate_tree(11, 8, 3)
        for item in walk(tree.items):
            if isinstance(item, Segment):
                assert round(item.t_fwd, 6) == item.t_fwd

    def test_cost_ranges_override(self):
        ranges = CostRanges.parse("tape_bytes=0:0,gap_segments=1:1")
        tree = generate_tree(2, 4, 2, ranges)
        assert all(item.tape_bytes == 0 for item in walk(tree.items) if isinstance(item, Segment))

    @pytest.mark.parametrize("text", ["tape_bytes", "nope=1:2", "tape_bytes=3:1", "t_snp=a:b"])
    def test_bad_cost_ranges(self, text):
        with pytest.raises(PreconditionError):
            CostRanges.parse(text)

    @pytest.mark.parametrize("args", [(-1, 3, 2), (0, 0, 2), (0, 3, 0)])
    def test_preconditions(self, args):
        with pytest.raises(PreconditionError):
            generate_tree(*args)
