"""TELL/ASK front end over the hybrid store.

TELL runs new knowledge through acquisition: anything already known is
skipped, everything else is handed to the store that owns it (facts to the
net, script events to the open episode of their script) and the store's own
validation decides whether it is accommodated.

ASK never mutates.  Answers carry a confidence in (0, 1] and a trace of the
steps that produced them.  Asserted facts count 1.0, every inheritance hop
multiplies by ``decay`` and events a script filled in count ``gapfill``.
Failing to find a derivation yields ``unknown``; nothing is ever concluded
false.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Union

from .errors import (
    DuplicateEpisode,
    DuplicateLink,
    DuplicateNode,
    DuplicateScript,
    DuplicateSpace,
    KBError,
    MalformedQuery,
    NoOpenEpisode,
    NothingToExplain,
    UnknownNode,
    UnknownScript,
    UnlinkedRole,
)
from .hybrid import HybridKB, HybridLink, add_hybrid_link, resolve_role_attributes
from .script import WILDCARD, Episode, Event, Pattern, Script, gap_fill
from .semnet import GENERALIZATION, INSTANCE_OF, ISA, Link, Node, NodeKind, ROOT_SPACE, Space, normalize_label


@dataclass(frozen=True)
class Config:
    decay: float = 0.9
    gapfill: float = 0.7

    KEYS = ("confidence.decay", "confidence.gapfill")

    def __post_init__(self):
        for name in ("decay", "gapfill"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"confidence.{name} must lie in (0, 1], got {value}")

    def with_setting(self, key: str, value) -> "Config":
        if key not in self.KEYS:
            raise KeyError(f"unknown config key {key!r}; known: {', '.join(self.KEYS)}")
        return replace(self, **{key.split(".", 1)[1]: float(value)})


# -- assertions -------------------------------------------------------------

@dataclass(frozen=True)
class Fact:
    """``subject predicate object`` in a space.

    With ``literal`` set, an object that is not yet a node is created as a
    value node; otherwise the object must already exist.
    """

    subject: str
    predicate: str
    object: str
    space: str = ROOT_SPACE
    literal: bool = False


@dataclass(frozen=True)
class ScriptEvent:
    script: str
    event: Event


@dataclass(frozen=True)
class NodeDecl:
    node: Node
    parents: tuple = ()


Assertion = Union[Fact, ScriptEvent, NodeDecl, Space, Script, HybridLink, Episode]


class TellStatus(enum.Enum):
    ACCEPTED = "accepted"
    SKIPPED = "skipped"
    REJECTED = "rejected"


@dataclass(frozen=True)
class Outcome:
    status: TellStatus
    error: Optional[Exception] = None

    @property
    def accepted(self):
        return self.status is TellStatus.ACCEPTED

    @property
    def skipped(self):
        return self.status is TellStatus.SKIPPED

    @property
    def rejected(self):
        return self.status is TellStatus.REJECTED

    def __str__(self):
        if self.rejected:
            return f"rejected {type(self.error).__name__}: {self.error}"
        return self.status.value


ACCEPTED = Outcome(TellStatus.ACCEPTED)
SKIPPED = Outcome(TellStatus.SKIPPED)


def tell(hkb: HybridKB, assertion) -> tuple:
    """Return ``(hkb', outcome)``; ``hkb`` itself is never modified."""
    work = hkb.copy()
    outcome = apply(work, assertion)
    return (work if outcome.accepted else hkb), outcome


def apply(hkb: HybridKB, assertion) -> Outcome:
    """In-place TELL for callers that own ``hkb`` exclusively.

    A rejected composite assertion may leave partial changes behind; use
    :func:`tell` when the previous snapshot must survive.
    """
    handler = _DISPATCH.get(type(assertion))
    if handler is None:
        return Outcome(TellStatus.REJECTED, TypeError(f"cannot tell {type(assertion).__name__}"))
    try:
        return handler(hkb, assertion)
    except (KBError, ValueError) as exc:
        return Outcome(TellStatus.REJECTED, exc)


def _tell_fact(hkb: HybridKB, fact: Fact) -> Outcome:
    net = hkb.net
    label = normalize_label(fact.predicate)
    if fact.subject not in net.nodes:
        raise UnknownNode(fact.subject)
    existing = net.links.get((fact.subject, fact.object, label))
    if existing is not None:
        if existing.space == fact.space:
            return SKIPPED
        raise DuplicateLink(f"{fact.subject} {label} {fact.object} already in space {existing.space}")
    if fact.object not in net.nodes:
        if not fact.literal or label in GENERALIZATION:
            raise UnknownNode(fact.object)
        net.add_node(Node(fact.object, NodeKind.VALUE, space=fact.space))
    net.add_link(Link(fact.subject, fact.object, label, fact.space))
    return ACCEPTED


def _tell_node(hkb: HybridKB, decl: NodeDecl) -> Outcome:
    net = hkb.net
    node = decl.node
    label = INSTANCE_OF if node.kind is NodeKind.INSTANCE else ISA
    current = net.nodes.get(node.id)
    if current is not None and current != node:
        raise DuplicateNode(node.id)
    missing = [p for p in decl.parents if not net.has_link(node.id, label, p)]
    if current is not None and not missing:
        return SKIPPED
    if current is None:
        net.add_node(node)
    for parent in missing:
        net.add_link(Link(node.id, parent, label, node.space))
    return ACCEPTED


def _tell_space(hkb: HybridKB, space: Space) -> Outcome:
    current = hkb.net.spaces.get(space.id)
    if current is not None:
        if current == space:
            return SKIPPED
        raise DuplicateSpace(space.id)
    hkb.net.add_space(space)
    return ACCEPTED


def _tell_script(hkb: HybridKB, script: Script) -> Outcome:
    current = hkb.scripts.get(script.name)
    if current is not None:
        if current == script:
            return SKIPPED
        raise DuplicateScript(script.name)
    hkb.add_script(script)
    return ACCEPTED


def _tell_hybrid_link(hkb: HybridKB, link: HybridLink) -> Outcome:
    if link in hkb.links:
        return SKIPPED
    add_hybrid_link(hkb, link)
    return ACCEPTED


def _tell_episode(hkb: HybridKB, episode: Episode) -> Outcome:
    hkb.script(episode.script)
    if episode.id:
        current = hkb.episodes.get(episode.id)
        if current is not None:
            if current == episode:
                return SKIPPED
            raise DuplicateEpisode(episode.id)
    else:
        for current in hkb.episodes.values():
            if replace(current, id="") == episode:
                return SKIPPED
    hkb.add_episode(episode)
    return ACCEPTED


def _tell_script_event(hkb: HybridKB, item: ScriptEvent) -> Outcome:
    script = hkb.script(item.script)
    episode = hkb.open_episode(item.script)
    if episode is None:
        raise NoOpenEpisode(item.script)
    if item.event in episode.observed:
        return SKIPPED
    filled = gap_fill(script, episode.observed + (item.event,), episode.binding_map)
    hkb.episodes[episode.id] = replace(filled, id=episode.id, status=episode.status)
    return ACCEPTED


_DISPATCH = {
    Fact: _tell_fact,
    NodeDecl: _tell_node,
    Space: _tell_space,
    Script: _tell_script,
    HybridLink: _tell_hybrid_link,
    Episode: _tell_episode,
    ScriptEvent: _tell_script_event,
}


# -- queries ----------------------------------------------------------------

@dataclass(frozen=True)
class YesNo:
    pattern: Pattern


@dataclass(frozen=True)
class Wh:
    pattern: Pattern


@dataclass(frozen=True)
class RoleQuery:
    script: str
    role: str


@dataclass(frozen=True)
class DidHappen:
    script: str
    event: Event  # actor / object may be WILDCARD


Query = Union[YesNo, Wh, RoleQuery, DidHappen]


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"
    BINDINGS = "bindings"


ASSERTED = "asserted"
INHERITED = "inherited"
SCRIPT_INFERRED = "script-inferred"


@dataclass(frozen=True)
class Step:
    """One inference step.

    ``via`` names the KB element that supports the step: a link key
    ``(src, dst, label)`` for net steps, or ``("episode", id, position)``
    for script steps.
    """

    source: str
    subject: str
    predicate: str
    object: str
    confidence: float
    depth: int = 0
    via: tuple = ()
    note: str = ""

    def describe(self) -> str:
        head = f"inherited depth {self.depth}" if self.source == INHERITED else self.source
        text = f"{self.subject} {self.predicate} {self.object}"
        if self.note:
            text += f" ({self.note})"
        return f"{head}: {text}  confidence {self.confidence:.2f}"


@dataclass(frozen=True)
class Answer:
    verdict: Verdict
    confidence: Optional[float] = None
    trace: tuple = ()
    bindings: tuple = ()  # ((id, confidence), ...) for Wh / role queries

    @property
    def values(self) -> tuple:
        return tuple(b for b, _ in self.bindings)

    def __str__(self):
        if self.verdict is Verdict.UNKNOWN:
            return "unknown"
        head = ",".join(self.values) if self.verdict is Verdict.BINDINGS else self.verdict.value
        return f"{head or 'none'} {self.confidence:.2f}"


UNKNOWN = Answer(Verdict.UNKNOWN)


def _answer(verdict, chains, bindings=()) -> Answer:
    trace = tuple(step for chain in chains for step in chain)
    conf = min(step.confidence for step in trace) if trace else 1.0
    return Answer(verdict, conf, trace, tuple(bindings))


def _label(predicate: str) -> str:
    try:
        return normalize_label(predicate)
    except ValueError as exc:
        raise MalformedQuery(str(exc)) from None


def _net_chain(hkb: HybridKB, s: str, label: str, o: str, config: Config) -> Optional[list]:
    net = hkb.net
    if s not in net.nodes:
        return None
    if label in GENERALIZATION:
        if o not in net.nodes:
            return None
        if label == INSTANCE_OF and net.nodes[s].kind is not NodeKind.INSTANCE:
            return None
        if s == o:
            return [Step(ASSERTED, s, label, o, 1.0, note="identity")]
        path = net.generalization_path(s, o)
        if not path:
            return None
        return [Step(ASSERTED, l.src, l.label, l.dst, 1.0, via=l.key) for l in path]
    if net.has_link(s, label, o):
        return [Step(ASSERTED, s, label, o, 1.0, via=(s, o, label))]
    for anc, _depth in net.ancestors(s):
        if not net.has_link(anc, label, o):
            continue
        chain = [Step(ASSERTED, anc, label, o, 1.0, via=(anc, o, label))]
        conf = 1.0
        for hop, link in enumerate(reversed(net.generalization_path(s, anc)), start=1):
            conf *= config.decay
            chain.append(Step(INHERITED, link.src, label, o, conf, depth=hop, via=link.key,
                              note=f"via {link.src} {link.label} {link.dst}"))
        return chain
    return None


def _script_chain(hkb: HybridKB, s: str, action: str, o: Optional[str], config: Config,
                  script: Optional[str] = None, roles: bool = False) -> Optional[list]:
    best = None
    for ep in hkb.episodes.values():
        if script is not None and ep.script != script:
            continue
        b = ep.binding_map
        actor = b.get(s, s) if roles else s
        obj = (b.get(o, o) if roles else o) if o is not None else None
        observed = set(ep.observed_at)
        for pos, ev in enumerate(ep.path_events):
            if ev.action != action:
                continue
            if actor != WILDCARD and ev.actor != actor:
                continue
            if obj not in (None, WILDCARD) and ev.object != obj:
                continue
            if pos in observed:
                step = Step(ASSERTED, ev.actor, ev.action, ev.object or "-", 1.0,
                            via=("episode", ep.id, pos), note=f"observed in {ep.id}")
            else:
                step = Step(SCRIPT_INFERRED, ev.actor, ev.action, ev.object or "-", config.gapfill,
                            via=("episode", ep.id, pos), note=f"{ep.script} scenes {'-'.join(map(str, ep.scene_path))}")
            if best is None or step.confidence > best.confidence:
                best = step
            if best.confidence == 1.0:
                return [best]
    return None if best is None else [best]


def _prove(hkb: HybridKB, s: str, predicate: str, o: str, config: Config) -> Optional[list]:
    label = _label(predicate)
    candidates = [_net_chain(hkb, s, label, o, config), _script_chain(hkb, s, predicate, o, config)]
    best = None
    for chain in candidates:
        if chain and (best is None or chain[-1].confidence > best[-1].confidence):
            best = chain
    return best


def _wh_candidates(hkb: HybridKB, p: Pattern, label: str) -> set:
    net = hkb.net
    found = set()
    if p.object == WILDCARD:
        if p.subject in net.nodes:
            if label in GENERALIZATION:
                found.update(n for n, _ in net.ancestors(p.subject))
            else:
                for holder in [p.subject] + [n for n, _ in net.ancestors(p.subject)]:
                    found.update(l.dst for l in net.outgoing(holder) if l.label == label)
        for ep in hkb.episodes.values():
            found.update(e.object for e in ep.path_events
                         if e.actor == p.subject and e.action == p.predicate and e.object is not None)
        found.discard(p.subject)
    else:
        found.update(net.nodes)
        for ep in hkb.episodes.values():
            found.update(e.actor for e in ep.path_events
                         if e.action == p.predicate and e.object == p.object)
        found.discard(p.object)
    return found


def ask(hkb: HybridKB, query, config: Config = Config()) -> Answer:
    if isinstance(query, YesNo):
        p = query.pattern
        if WILDCARD in (p.subject, p.predicate, p.object):
            raise MalformedQuery("yes/no query must not contain a wildcard")
        chain = _prove(hkb, p.subject, p.predicate, p.object, config)
        return UNKNOWN if chain is None else _answer(Verdict.YES, [chain])

    if isinstance(query, Wh):
        p = query.pattern
        wild = [t == WILDCARD for t in (p.subject, p.predicate, p.object)]
        if sum(wild) != 1 or wild[1]:
            raise MalformedQuery("wh query needs exactly one wildcard, in subject or object position")
        label = _label(p.predicate)
        results = []
        for cand in _wh_candidates(hkb, p, label):
            s, o = (p.subject, cand) if p.object == WILDCARD else (cand, p.object)
            chain = _prove(hkb, s, p.predicate, o, config)
            if chain is not None:
                results.append((cand, chain[-1].confidence, chain))
        if not results:
            return UNKNOWN
        results.sort(key=lambda r: (-r[1], r[0]))
        return _answer(Verdict.BINDINGS, [r[2] for r in results], [(r[0], r[1]) for r in results])

    if isinstance(query, RoleQuery):
        try:
            detail = resolve_role_attributes(hkb, query.script, query.role)
        except (UnknownScript, UnlinkedRole):
            return UNKNOWN
        cls = detail.linked_class
        chains = [[Step(ASSERTED, f"{query.script}/{query.role}", "bound-to", cls, 1.0,
                        via=(query.script, query.role, cls))]]
        for child in detail.children:
            chains.append([Step(ASSERTED, child, ISA, cls, 1.0, via=(child, cls, ISA))])
        for rec in detail.attributes.values():
            if rec.depth == 0:
                chains.append([Step(ASSERTED, cls, rec.attribute, rec.value, 1.0,
                                    via=(cls, rec.value, rec.attribute))])
            else:
                chains.append([Step(INHERITED, cls, rec.attribute, rec.value, config.decay ** rec.depth,
                                    depth=rec.depth, via=(rec.source, rec.value, rec.attribute),
                                    note=f"from {rec.source}")])
        return _answer(Verdict.BINDINGS, chains, [(c, 1.0) for c in detail.children])

    if isinstance(query, DidHappen):
        ev = query.event
        chain = _script_chain(hkb, ev.actor, ev.action, ev.object, config, script=query.script, roles=True)
        return UNKNOWN if chain is None else _answer(Verdict.YES, [chain])

    raise MalformedQuery(f"not a query: {query!r}")


def explain(answer: Answer) -> str:
    if answer.verdict is Verdict.UNKNOWN or not answer.trace:
        raise NothingToExplain("no derivation to explain")
    return "\n".join(step.describe() for step in answer.trace)


def replay(hkb: HybridKB, answer: Answer) -> bool:
    """Check that every step of ``answer.trace`` is still supported by ``hkb``."""
    net = hkb.net
    for step in answer.trace:
        if step.note == "identity":
            ok = step.subject == step.object and step.subject in net.nodes
        elif step.via[:1] == ("episode",):
            ep = hkb.episodes.get(step.via[1])
            pos = step.via[2]
            ok = ep is not None and pos < len(ep.path_events) and (
                (pos in ep.observed_at) == (step.source == ASSERTED))
        elif len(step.via) == 3 and step.via in net.links:
            ok = True
        elif step.predicate == "bound-to":
            script, role, cls = step.via
            ok = any(l.src.script == script and l.src.key == (role,) and l.dst == cls for l in hkb.links)
        else:
            ok = False
        if not ok:
            return False
    return True
