"""Service groups: formation by function tag, failover and reorganization.

Services that provide the same function form a group. One member is active
and the rest stand by as backups. When the active member cannot get its QoS
rate floor, a backup takes over. A group whose floor cannot be met at all is
suspended, and it comes back once the floor becomes reachable again.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path


class State(str, Enum):
    ACTIVE = "active"
    BACKUP = "backup"
    DOWN = "down"


@dataclass(frozen=True)
class ServiceDescriptor:
    id: int
    function_tag: str
    weight: float = 1.0
    min_rate: float = 0.0  # Mbps
    state: State = State.BACKUP

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"service {self.id}: weight must be positive")
        if self.min_rate < 0:
            raise ValueError(f"service {self.id}: min_rate must be nonnegative")
        object.__setattr__(self, "state", State(self.state))


@dataclass(frozen=True)
class ServiceGroup:
    id: int
    members: tuple[ServiceDescriptor, ...]
    suspended: bool = False
    suspended_cap: float | None = None  # r_hat in force when the group was suspended

    def __post_init__(self):
        if not self.members:
            raise ValueError("a group needs at least one member")
        if len({m.function_tag for m in self.members}) != 1:
            raise ValueError(f"group {self.id} mixes function tags")
        if sum(m.state is State.ACTIVE for m in self.members) > 1:
            raise ValueError(f"group {self.id} has more than one active member")

    @property
    def function_tag(self) -> str:
        return self.members[0].function_tag

    @property
    def active(self) -> ServiceDescriptor | None:
        return next((m for m in self.members if m.state is State.ACTIVE), None)

    @property
    def backups(self) -> list[ServiceDescriptor]:
        return [m for m in self.members if m.state is State.BACKUP]

    @property
    def unserved(self) -> bool:
        return self.active is None

    def member(self, service_id: int) -> ServiceDescriptor:
        for m in self.members:
            if m.id == service_id:
                return m
        raise KeyError(service_id)

    def _with_states(self, states: dict[int, State]) -> "ServiceGroup":
        members = tuple(replace(m, state=states.get(m.id, m.state)) for m in self.members)
        return replace(self, members=members)


def _rank(m: ServiceDescriptor):
    return (-m.weight, m.id)


def form_groups(services: list[ServiceDescriptor]) -> list[ServiceGroup]:
    """Partition by function tag; the heaviest member (lowest id on ties) is active.

    Groups are numbered in order of first appearance of their tag.
    """
    ids = [s.id for s in services]
    if len(ids) != len(set(ids)):
        raise ValueError("service ids must be unique")
    by_tag: dict[str, list[ServiceDescriptor]] = {}
    for s in services:
        by_tag.setdefault(s.function_tag, []).append(s)
    groups = []
    for gid, members in enumerate(by_tag.values()):
        lead = min(members, key=_rank)
        groups.append(ServiceGroup(gid, tuple(
            replace(m, state=State.ACTIVE if m.id == lead.id else State.BACKUP) for m in members)))
    return groups


def failover(group: ServiceGroup, failed_id: int) -> ServiceGroup:
    """Mark the failed active member down and promote the best backup.

    With no backup left the group ends up unserved (no active member).
    """
    active = group.active
    if active is None or active.id != failed_id:
        raise ValueError(f"service {failed_id} is not the active member of group {group.id}")
    states = {failed_id: State.DOWN}
    backups = group.backups
    if backups:
        states[min(backups, key=_rank).id] = State.ACTIVE
    return group._with_states(states)


@dataclass(frozen=True)
class Event:
    step: int
    kind: str
    service_id: int
    group_id: int


@dataclass(frozen=True)
class Reorganization:
    groups: list[ServiceGroup]
    events: list[Event] = field(default_factory=list)

    @property
    def admitted(self) -> list[ServiceDescriptor]:
        """Active members of groups that take part in the next game round."""
        return [g.active for g in self.groups if not g.suspended and g.active is not None]


def reorganize(groups: list[ServiceGroup], r_hat: float, rates: dict[int, float],
               step: int = 0) -> Reorganization:
    """Enforce rate floors after a game round.

    ``rates`` maps active service id to its equilibrium rate; services that
    did not play may be absent and are left alone. An active member below
    its floor is failed over when the best backup's floor fits under the
    rate that was reached. Otherwise the shortage is one of resources, not
    of the member, so the group is suspended with every member kept as a
    backup. A suspended group resumes once ``r_hat`` exceeds the cap it was
    suspended under and the floor of its best remaining member fits under
    ``r_hat``.
    """
    out: list[ServiceGroup] = []
    events: list[Event] = []
    for g in groups:
        if g.suspended:
            candidates = [m for m in g.members if m.state is not State.DOWN]
            if candidates and r_hat > g.suspended_cap:
                lead = min(candidates, key=_rank)
                if lead.min_rate <= r_hat:
                    g = replace(g._with_states({lead.id: State.ACTIVE}), suspended=False, suspended_cap=None)
                    events.append(Event(step, "resume", lead.id, g.id))
            out.append(g)
            continue
        active = g.active
        got = rates.get(active.id) if active is not None else None
        if got is None or got >= active.min_rate:
            out.append(g)
            continue
        backups = g.backups
        if backups and min(backups, key=_rank).min_rate <= got:
            g = failover(g, active.id)
            events.append(Event(step, "failover", active.id, g.id))
            events.append(Event(step, "promote", g.active.id, g.id))
        else:
            g = replace(g._with_states({active.id: State.BACKUP}), suspended=True, suspended_cap=r_hat)
            events.append(Event(step, "suspend", active.id, g.id))
        out.append(g)
    return Reorganization(out, events)


def load_roster(path: str | Path) -> list[ServiceDescriptor]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return roster_from_json(data)


def roster_from_json(data: list[dict]) -> list[ServiceDescriptor]:
    return [ServiceDescriptor(int(d["id"]), str(d["function_tag"]), float(d.get("weight", 1.0)),
                              float(d.get("min_rate", 0.0))) for d in data]


def roster_to_json(services: list[ServiceDescriptor]) -> list[dict]:
    return [{"id": s.id, "function_tag": s.function_tag, "weight": s.weight, "min_rate": s.min_rate}
            for s in services]


EVENT_HEADER = ["time_step", "event_type", "service_id", "group_id"]


def events_csv(events: list[Event]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVENT_HEADER)
    for e in events:
        w.writerow([e.step, e.kind, e.service_id, e.group_id])
    return buf.getvalue()
