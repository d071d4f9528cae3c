"""Scripts: stereotyped event sequences split into numbered scenes.

A script is played along a path through its scene graph.  Scene ``n`` is
followed by ``n + 1`` by default and ``goto`` transitions add extra jumps.
:func:`gap_fill` picks the cheapest path (fewest events) that explains an
observed event sequence and reports every unobserved event on that path as
inferred.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, replace
from typing import Optional

from .errors import (
    AlreadyCompleted,
    EmptyEpisode,
    EntryConditionFailed,
    NoAlignment,
    UnboundRole,
)
from .semnet import INSTANCE_OF, ISA, SemNet, normalize_label

WILDCARD = "?"


@dataclass(frozen=True)
class Event:
    actor: str
    action: str
    object: Optional[str] = None

    def __str__(self):
        parts = [self.actor, self.action] + ([self.object] if self.object is not None else [])
        return "(" + " ".join(parts) + ")"


@dataclass(frozen=True)
class Pattern:
    subject: str
    predicate: str
    object: str = WILDCARD

    def __str__(self):
        return f"({self.subject} {self.predicate} {self.object})"

    def substitute(self, bindings) -> "Pattern":
        return Pattern(bindings.get(self.subject, self.subject), self.predicate,
                       bindings.get(self.object, self.object))


@dataclass(frozen=True)
class Transition:
    target: int
    condition: Pattern


@dataclass(frozen=True)
class Scene:
    number: int
    name: str
    events: tuple = ()
    transitions: tuple = ()


@dataclass(frozen=True)
class Script:
    name: str
    track: str = ""
    props: tuple = ()
    roles: tuple = ()  # ((symbol, description), ...) in declaration order
    entry_conditions: tuple = ()
    results: tuple = ()
    scenes: tuple = ()

    @property
    def role_symbols(self) -> tuple:
        return tuple(sym for sym, _ in self.roles)

    @property
    def last_scene(self) -> int:
        return max(s.number for s in self.scenes)

    def scene(self, number: int) -> Scene:
        for s in self.scenes:
            if s.number == number:
                return s
        raise KeyError(number)

    def successors(self, number: int) -> list:
        """Scenes reachable in one step, ascending, without duplicates."""
        nxt = {t.target for t in self.scene(number).transitions}
        if number < self.last_scene:
            nxt.add(number + 1)
        return sorted(nxt)


class Status(enum.Enum):
    OPEN = "open"
    COMPLETED = "completed"


@dataclass(frozen=True)
class Episode:
    script: str
    bindings: tuple = ()  # sorted ((symbol, node), ...)
    scene_path: tuple = ()
    observed_at: tuple = ()  # positions into path_events
    path_events: tuple = ()  # path events with bindings substituted
    status: Status = Status.OPEN
    id: str = ""

    @property
    def binding_map(self) -> dict:
        return dict(self.bindings)

    @property
    def observed(self) -> tuple:
        return tuple(self.path_events[i] for i in self.observed_at)

    @property
    def inferred(self) -> tuple:
        seen = set(self.observed_at)
        return tuple(e for i, e in enumerate(self.path_events) if i not in seen)


def validate_script(script: Script) -> list:
    """Return every structural problem found in ``script`` (empty when ok)."""
    problems = []
    roles = set(script.role_symbols)
    if len(roles) != len(script.roles):
        problems.append("duplicate role declaration")
    numbers = [s.number for s in script.scenes]
    if not numbers:
        problems.append("script has no scenes")
    if len(set(numbers)) != len(numbers):
        problems.append("duplicate scene number")
    if numbers and sorted(set(numbers)) != list(range(1, len(set(numbers)) + 1)):
        problems.append("scene numbers must be contiguous from 1")
    known = set(numbers)
    undeclared = []
    for scene in script.scenes:
        if not scene.events:
            problems.append(f"scene {scene.number} has no events")
        for ev in scene.events:
            if ev.actor not in roles and ev.actor not in undeclared:
                undeclared.append(ev.actor)
        for tr in scene.transitions:
            if tr.target not in known:
                problems.append(f"unknown scene {tr.target}")
            elif tr.target == scene.number:
                problems.append(f"scene {scene.number} transitions to itself")
    problems.extend(f"undeclared role {sym}" for sym in undeclared)
    return problems


# -- entry conditions ------------------------------------------------------

def pattern_holds(net: SemNet, pattern: Pattern) -> bool:
    """True when the ground pattern is asserted on the subject or inherited."""
    if pattern.subject not in net.nodes:
        return False
    label = normalize_label(pattern.predicate)
    if label in (ISA, INSTANCE_OF):
        if pattern.object == WILDCARD:
            return bool(net.parents(pattern.subject))
        return pattern.object in net.nodes and net.is_a(pattern.subject, pattern.object)
    holders = [pattern.subject] + [n for n, _ in net.ancestors(pattern.subject)]
    for holder in holders:
        for link in net.outgoing(holder):
            if link.label == label and pattern.object in (WILDCARD, link.dst):
                return True
    return False


def instantiate(net: SemNet, script: Script, bindings) -> Episode:
    bindings = dict(bindings)
    for sym in script.role_symbols:
        if sym not in bindings:
            raise UnboundRole(sym)
    for cond in script.entry_conditions:
        if not pattern_holds(net, cond.substitute(bindings)):
            raise EntryConditionFailed(cond)
    return Episode(script=script.name, bindings=tuple(sorted(bindings.items())))


# -- gap filling -----------------------------------------------------------

def _unify(term: Optional[str], observed: Optional[str], symbols, bindings: dict) -> Optional[dict]:
    """Match one observed slot against a script slot, extending bindings."""
    if observed is None or observed == WILDCARD:
        return bindings
    if term is None:
        return None
    if observed == term:
        return bindings
    if term in symbols:
        bound = bindings.get(term)
        if bound is None:
            if observed in symbols:
                return None
            out = dict(bindings)
            out[term] = observed
            return out
        return bindings if bound == observed else None
    return None


def match_event(pattern: Event, observed: Event, symbols, bindings: dict) -> Optional[dict]:
    if pattern.action != observed.action:
        return None
    b = _unify(pattern.actor, observed.actor, symbols, bindings)
    if b is None:
        return None
    return _unify(pattern.object, observed.object, symbols, b)


def _bind_event(ev: Event, bindings: dict) -> Event:
    return Event(bindings.get(ev.actor, ev.actor), ev.action,
                 None if ev.object is None else bindings.get(ev.object, ev.object))


def _align_scene(events, observed, start, symbols, bindings):
    """Greedy leftmost match of ``observed[start:]`` against one scene."""
    idx = start
    hits = []
    for pos, ev in enumerate(events):
        if idx == len(observed):
            break
        b = match_event(ev, observed[idx], symbols, bindings)
        if b is not None:
            bindings = b
            hits.append(pos)
            idx += 1
    return idx, bindings, hits


def gap_fill(script: Script, observed, bindings=None) -> Episode:
    """Explain ``observed`` with the cheapest path from scene 1 to the last scene.

    Path cost is the number of events traversed.  Equal-cost paths are
    ordered by their scene-number sequence, and events are aligned greedily
    left to right, so the result is deterministic.
    """
    observed = tuple(observed)
    if not observed:
        raise NoAlignment("nothing observed")
    symbols = frozenset(script.role_symbols)
    start_bindings = dict(bindings or {})
    goal = script.last_scene
    scenes = {s.number: s for s in script.scenes}

    first = scenes[1]
    idx, b, hits = _align_scene(first.events, observed, 0, symbols, start_bindings)
    heap = [(len(first.events), (1,), idx, tuple(sorted(b.items())), ((1, tuple(hits)),))]
    settled = set()
    while heap:
        cost, path, idx, bkey, trail = heapq.heappop(heap)
        scene_no = path[-1]
        state = (scene_no, idx, bkey)
        if state in settled:
            continue
        settled.add(state)
        if scene_no == goal and idx == len(observed):
            return _episode(script, path, trail, dict(bkey))
        for nxt in script.successors(scene_no):
            scene = scenes[nxt]
            n_idx, n_b, n_hits = _align_scene(scene.events, observed, idx, symbols, dict(bkey))
            n_key = tuple(sorted(n_b.items()))
            if (nxt, n_idx, n_key) in settled:
                continue
            heapq.heappush(heap, (cost + len(scene.events), path + (nxt,), n_idx, n_key,
                                  trail + ((nxt, tuple(n_hits)),)))
    raise NoAlignment(f"observed events do not fit any path of script {script.name}")


def _episode(script: Script, path, trail, bindings: dict) -> Episode:
    events = []
    observed_at = []
    for scene_no, hits in trail:
        base = len(events)
        observed_at.extend(base + h for h in hits)
        events.extend(_bind_event(ev, bindings) for ev in script.scene(scene_no).events)
    return Episode(
        script=script.name,
        bindings=tuple(sorted(bindings.items())),
        scene_path=tuple(path),
        observed_at=tuple(observed_at),
        path_events=tuple(events),
    )


def replay_path(script: Script, scene_path, bindings) -> tuple:
    """Path events of ``scene_path`` with ``bindings`` substituted."""
    bindings = dict(bindings)
    return tuple(_bind_event(ev, bindings) for n in scene_path for ev in script.scene(n).events)


# -- completion ------------------------------------------------------------

def result_facts(script: Script, episode: Episode) -> list:
    b = episode.binding_map
    return [r.substitute(b) for r in script.results]


def complete(hkb, episode: Episode):
    """Assert the script's results for ``episode`` and close it.

    Returns ``(new_hkb, completed_episode)``.  Results go through TELL so
    duplicates are skipped like any other acquisition.
    """
    from . import kbsl

    if episode.status is Status.COMPLETED:
        raise AlreadyCompleted(episode.id or episode.script)
    if not episode.scene_path:
        raise EmptyEpisode(episode.id or episode.script)
    script = hkb.script(episode.script)
    for fact in result_facts(script, episode):
        hkb, outcome = kbsl.tell(hkb, kbsl.Fact(fact.subject, fact.predicate, fact.object, literal=True))
        if outcome.rejected:
            raise outcome.error
    done = replace(episode, status=Status.COMPLETED)
    if episode.id and episode.id in hkb.episodes:
        hkb = hkb.copy()
        hkb.episodes[episode.id] = done
    return hkb, done
