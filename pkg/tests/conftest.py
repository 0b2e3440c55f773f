from pathlib import Path

import pytest

from ckptprof.config import default_config
from ckptprof.model.documents import serialize_config, serialize_tree
from ckptprof.model.tree import CallNode, CallTree, CheckpointConfig, LoopNode, Segment, StaticRef

C42 = StaticRef("C", 42)
K7 = StaticRef("K", 7)


def seg(label, t_primal=1.0, t_fwd=1.0, t_bwd=1.0, tape=0):
    return Segment(label=label, t_primal=t_primal, t_fwd=t_fwd, t_bwd=t_bwd, tape_bytes=tape)


def call(ref, body, snap=0, t_w=0.0, t_r=0.0):
    return CallNode(ref=ref, snapshot_bytes=snap, t_snp_write=t_w, t_snp_read=t_r, body=tuple(body))


def loop(loop_id, iterations, body, step_snap=0, t_w=0.0, t_r=0.0):
    return LoopNode(
        loop_id=loop_id,
        iterations=iterations,
        step_snapshot_bytes=step_snap,
        t_snp_write=t_w,
        t_snp_read=t_r,
        body=tuple(body),
    )


@pytest.fixture
def t1() -> CallTree:
    """U, then an active call C@42, then D: 21 s / 44 B active, 18 s / 60 B inhibited."""
    return CallTree(
        name="T1",
        items=(
            seg("U", t_primal=1, t_fwd=2, t_bwd=2, tape=10),
            call(C42, [seg("c", t_primal=2, t_fwd=3, t_bwd=3, tape=20)], snap=4, t_w=0.5, t_r=0.5),
            seg("D", t_primal=3, t_fwd=4, t_bwd=4, tape=30),
        ),
    )


@pytest.fixture
def snapshot_dominated() -> CallTree:
    """A snapshot far larger than the tape it saves."""
    return CallTree(
        name="snapshot-dominated",
        items=(
            seg("U", tape=0),
            call(C42, [seg("c", tape=5)], snap=50, t_w=0.1, t_r=0.1),
            seg("D", tape=10),
        ),
    )


@pytest.fixture
def nested_kc() -> CallTree:
    """C@42 inside K@7, both checkpointed by default."""
    inner = call(C42, [seg("c", t_primal=2, t_fwd=3, t_bwd=3, tape=20)], snap=4, t_w=0.5, t_r=0.5)
    return CallTree(
        name="K-C",
        items=(
            seg("U", t_primal=1, t_fwd=2, t_bwd=2, tape=10),
            call(K7, [seg("a", t_primal=1, t_fwd=2, t_bwd=2, tape=6), inner, seg("b", tape=2)], snap=8, t_w=0.25, t_r=0.25),
            seg("D", t_primal=3, t_fwd=4, t_bwd=4, tape=30),
        ),
    )


@pytest.fixture
def time_loop_tree() -> CallTree:
    """Ten steps of one checkpointed call, between two segments."""
    step = call(StaticRef("step", 1), [seg("s", t_primal=1, t_fwd=2, t_bwd=2, tape=4)], snap=3, t_w=0.1, t_r=0.2)
    return CallTree(
        name="time-loop",
        items=(
            seg("init", tape=1),
            loop("tsteps", 10, [seg("pre", t_primal=0.5, t_fwd=1, t_bwd=1, tape=2), step], step_snap=7, t_w=0.3, t_r=0.4),
            seg("final", tape=1),
        ),
    )


@pytest.fixture
def empty_config() -> CheckpointConfig:
    return CheckpointConfig()


@pytest.fixture
def app_config():
    return default_config()


@pytest.fixture
def write_tree(tmp_path):
    def write(tree: CallTree, name: str = "tree.json") -> Path:
        path = tmp_path / name
        path.write_text(serialize_tree(tree), encoding="utf-8")
        return path

    return write


@pytest.fixture
def write_config(tmp_path):
    def write(config: CheckpointConfig, name: str = "config.txt") -> Path:
        path = tmp_path / name
        path.write_text(serialize_config(config), encoding="utf-8")
        return path

    return write


def assert_profile_exact(tree: CallTree, config: CheckpointConfig):
    """Every predicted delta equals the difference of two simulations."""
    from ckptprof.services.profiler import profile_run
    from ckptprof.services.simulator import simulate

    cost, report = profile_run(tree, config)
    assert report.root.t == pytest.approx(cost.time_s, rel=1e-9, abs=1e-9)
    assert report.root.tn == cost.turn_bytes
    assert report.root.pk == cost.peak_bytes

    active = set(config.active_refs(tree))
    assert {s.ref for s in report.suggestions} == active
    for s in report.suggestions:
        toggled = simulate(tree, config.with_inhibited([s.ref]))
        assert s.dt == pytest.approx(toggled.time_s - cost.time_s, rel=1e-9, abs=1e-9), s.ref
        assert s.dtn == toggled.turn_bytes - cost.turn_bytes, s.ref
        assert s.dpk == toggled.peak_bytes - cost.peak_bytes, s.ref
    return cost, report
