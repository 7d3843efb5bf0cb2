import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harshnet.servicemgmt import (EVENT_HEADER, ServiceDescriptor, ServiceGroup, State, events_csv,
                                  failover, form_groups, load_roster, reorganize, roster_from_json,
                                  roster_to_json)


def svc(i, tag, w=1.0, floor=0.0):
    return ServiceDescriptor(i, tag, w, floor)


def test_partition_by_tag():
    groups = form_groups([svc(i, t) for i, t in enumerate("mmccct")])
    assert [len(g.members) for g in groups] == [2, 3, 1]
    assert [g.function_tag for g in groups] == ["m", "c", "t"]


def test_empty_roster():
    assert form_groups([]) == []


def test_tie_break_lowest_id():
    g = form_groups([svc(7, "a"), svc(3, "a")])[0]
    assert g.active.id == 3


def test_heaviest_member_active():
    g = form_groups([svc(1, "a", 0.5), svc(2, "a", 2.0)])[0]
    assert g.active.id == 2


def test_duplicate_ids_rejected():
    with pytest.raises(ValueError):
        form_groups([svc(1, "a"), svc(1, "b")])


def test_descriptor_validation():
    with pytest.raises(ValueError):
        svc(0, "a", w=0.0)
    with pytest.raises(ValueError):
        svc(0, "a", floor=-1.0)
    with pytest.raises(ValueError):
        ServiceGroup(0, (svc(0, "a"), svc(1, "b")))


def test_failover_single_backup():
    g = failover(form_groups([svc(1, "a"), svc(2, "a")])[0], 1)
    assert g.member(1).state is State.DOWN
    assert g.active.id == 2


def test_failover_exhausts_singleton():
    g = failover(form_groups([svc(1, "a")])[0], 1)
    assert g.unserved


def test_failover_promotes_heaviest_backup():
    g = form_groups([svc(1, "a", 1.0), svc(2, "a", 0.2), svc(3, "a", 0.5)])[0]
    assert failover(g, 1).active.id == 3


def test_failover_requires_active():
    g = form_groups([svc(1, "a"), svc(2, "a")])[0]
    with pytest.raises(ValueError):
        failover(g, 2)


def test_reorganize_noop_when_floors_met():
    groups = form_groups([svc(0, "a", floor=1.0), svc(1, "a", floor=1.0), svc(2, "b", floor=0.5)])
    out = reorganize(groups, 20.0, {0: 3.0, 2: 1.0})
    assert out.groups == groups and out.events == []


def test_reorganize_fails_over_starved_service():
    groups = form_groups([svc(0, "a", floor=1.0), svc(1, "a", floor=0.0)])
    out = reorganize(groups, 20.0, {0: 0.0}, step=4)
    g = out.groups[0]
    assert g.active.id == 1 and g.member(0).state is State.DOWN
    assert [(e.step, e.kind, e.service_id) for e in out.events] == [(4, "failover", 0), (4, "promote", 1)]


def test_reorganize_suspends_and_resumes():
    groups = form_groups([svc(0, "a", floor=1.0), svc(1, "a", floor=1.0)])
    out = reorganize(groups, 0.5, {0: 0.1})
    g = out.groups[0]
    assert g.suspended and g.active is None and out.admitted == []
    assert all(m.state is State.BACKUP for m in g.members)
    assert [(e.kind, e.service_id) for e in out.events] == [("suspend", 0)]
    same = reorganize(out.groups, 0.5, {})
    assert same.groups == out.groups and same.events == []
    back = reorganize(out.groups, 5.0, {}, step=1)
    assert not back.groups[0].suspended and back.groups[0].active.id == 0
    assert [e.kind for e in back.events] == ["resume"]


def _roster(draw_tags, weights, floors):
    return [svc(i, t, w, f) for i, (t, w, f) in enumerate(zip(draw_tags, weights, floors))]


roster_strategy = st.integers(1, 9).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from("abcd"), min_size=n, max_size=n),
    st.lists(st.floats(0.1, 3.0), min_size=n, max_size=n),
    st.lists(st.floats(0.0, 2.0), min_size=n, max_size=n)))


@settings(max_examples=100, deadline=None)
@given(roster_strategy)
def test_groups_form_partition(spec):
    roster = _roster(*spec)
    groups = form_groups(roster)
    ids = [m.id for g in groups for m in g.members]
    assert sorted(ids) == [s.id for s in roster]
    for g in groups:
        assert len({m.function_tag for m in g.members}) == 1
        assert sum(m.state is State.ACTIVE for m in g.members) == 1


@settings(max_examples=100, deadline=None)
@given(roster_strategy, st.lists(st.tuples(st.floats(0.0, 30.0), st.floats(0.0, 3.0)), min_size=1, max_size=8))
def test_reorganize_invariants(spec, rounds):
    groups = form_groups(_roster(*spec))
    down: set[int] = set()
    for step, (r_hat, got) in enumerate(rounds):
        rates = {s.id: got for s in reorganize(groups, r_hat, {}).admitted}
        out = reorganize(groups, r_hat, rates, step)
        for g in out.groups:
            assert sum(m.state is State.ACTIVE for m in g.members) <= 1
            if g.suspended:
                assert g.active is None
            now_down = {m.id for m in g.members if m.state is State.DOWN}
            assert {m.id for m in g.members} & down <= now_down  # never resurrected
            down |= now_down
        again = reorganize(out.groups, r_hat, {}, step)
        assert again.groups == out.groups and again.events == []
        groups = out.groups


def test_roster_json_round_trip(tmp_path):
    data = [{"id": 0, "function_tag": "m", "weight": 2.0, "min_rate": 1.0},
            {"id": 1, "function_tag": "c", "weight": 1.0, "min_rate": 0.0}]
    p = tmp_path / "r.json"
    p.write_text(json.dumps(data))
    assert roster_to_json(load_roster(p)) == data
    assert roster_from_json([{"id": 3, "function_tag": "x"}])[0].weight == 1.0


def test_no_failover_to_backup_that_cannot_fit():
    groups = form_groups([svc(0, "a", floor=1.0), svc(1, "a", floor=2.0)])
    out = reorganize(groups, 20.0, {0: 1.5 - 1.0})
    assert out.groups[0].suspended
    assert [e.kind for e in out.events] == ["suspend"]


def test_singleton_group_suspends_and_resumes():
    groups = form_groups([svc(5, "t", floor=0.2)])
    out = reorganize(groups, 0.1, {5: 0.05})
    assert out.groups[0].suspended
    back = reorganize(out.groups, 3.0, {})
    assert back.groups[0].active.id == 5


def test_events_csv():
    groups = form_groups([svc(0, "a", floor=1.0), svc(1, "a")])
    text = events_csv(reorganize(groups, 9.0, {0: 0.0}, 2).events)
    assert text.splitlines() == [",".join(EVENT_HEADER), "2,failover,0,0", "2,promote,1,0"]
