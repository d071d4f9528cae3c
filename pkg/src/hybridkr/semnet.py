"""Semantic network store: nodes, labeled links and partition spaces.

Generalization runs along ``is-a`` (class to class) and ``instance``
(instance to class) links.  Any other link is an attribute of its source
node and is inherited down the generalization hierarchy, most specific
first.
"""
from __future__ import annotations

import copy
import enum
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (
    CycleDetected,
    DuplicateLink,
    DuplicateNode,
    DuplicateSpace,
    InvalidSpace,
    KindMismatch,
    UnknownNode,
    UnknownSpace,
)

ROOT_SPACE = "s0"

ISA = "is-a"
INSTANCE_OF = "instance"
HAS = "has"
BUILTIN_LABELS = (ISA, INSTANCE_OF, HAS)
GENERALIZATION = frozenset((ISA, INSTANCE_OF))

_RELATION_RE = re.compile(r"^[a-z][a-z0-9]*(-[a-z0-9]+)*$")
_LABEL_ALIASES = {"is-a": ISA, "isa": ISA, "instance": INSTANCE_OF, "instance-of": INSTANCE_OF, "has": HAS}


class NodeKind(enum.Enum):
    CLASS = "class"
    INSTANCE = "instance"
    VALUE = "value"


class SpaceKind(enum.Enum):
    ORDINARY = "ordinary"
    GENERAL = "general"


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    label: str = ""
    space: str = ROOT_SPACE

    @property
    def display(self) -> str:
        return self.label or self.id


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    label: str
    space: str = ROOT_SPACE

    @property
    def key(self):
        return (self.src, self.dst, self.label)


@dataclass(frozen=True)
class Space:
    id: str
    parent: Optional[str] = ROOT_SPACE
    kind: SpaceKind = SpaceKind.ORDINARY
    agent: Optional[str] = None
    variables: tuple = ()


@dataclass(frozen=True)
class AttributeRecord:
    attribute: str
    value: str
    source: str
    depth: int


def normalize_label(name: str) -> str:
    """Map a relation name onto its stored link label.

    The reserved spellings of the three built-in relations collapse to their
    canonical label; any other name must be lowercase kebab-case.
    """
    if name in _LABEL_ALIASES:
        return _LABEL_ALIASES[name]
    if not _RELATION_RE.match(name):
        raise ValueError(f"relation name must be lowercase kebab-case: {name!r}")
    return name


def is_relation_name(name: str) -> bool:
    return bool(_RELATION_RE.match(name))


@dataclass
class SemNet:
    nodes: dict = field(default_factory=dict)
    spaces: dict = field(default_factory=dict)
    links: dict = field(default_factory=dict)  # (src, dst, label) -> Link
    _out: dict = field(default_factory=dict, repr=False)  # src -> set of keys
    _children: dict = field(default_factory=dict, repr=False)  # dst -> set of srcs via is-a

    def __post_init__(self):
        if ROOT_SPACE not in self.spaces:
            self.spaces[ROOT_SPACE] = Space(ROOT_SPACE, parent=None)

    def copy(self) -> "SemNet":
        return copy.deepcopy(self)

    def __eq__(self, other):
        if not isinstance(other, SemNet):
            return NotImplemented
        return (self.nodes, self.spaces, set(self.links.values())) == (
            other.nodes, other.spaces, set(other.links.values()))

    # -- mutation -------------------------------------------------------

    def add_space(self, space: Space) -> "SemNet":
        if space.id in self.spaces:
            raise DuplicateSpace(space.id)
        if space.parent is None:
            raise InvalidSpace(f"only {ROOT_SPACE} may be a root space")
        if space.parent not in self.spaces:
            raise UnknownSpace(space.parent)
        if space.kind is SpaceKind.GENERAL and not space.variables:
            raise InvalidSpace(f"general statement space {space.id} needs a quantified variable")
        self.spaces[space.id] = space
        return self

    def add_node(self, node: Node) -> "SemNet":
        if node.id in self.nodes:
            raise DuplicateNode(node.id)
        if node.space not in self.spaces:
            raise UnknownSpace(node.space)
        self.nodes[node.id] = node
        return self

    def add_link(self, link: Link) -> "SemNet":
        for end in (link.src, link.dst):
            if end not in self.nodes:
                raise UnknownNode(end)
        if link.space not in self.spaces:
            raise UnknownSpace(link.space)
        if link.key in self.links:
            raise DuplicateLink(f"{link.src} {link.label} {link.dst}")
        src, dst = self.nodes[link.src], self.nodes[link.dst]
        if link.label == ISA:
            if src.kind is not NodeKind.CLASS or dst.kind is not NodeKind.CLASS:
                raise KindMismatch(f"is-a needs class -> class, got {src.kind.value} -> {dst.kind.value}")
            if link.src == link.dst or self._isa_reachable(link.dst, link.src):
                raise CycleDetected(f"{link.src} is-a {link.dst}")
        elif link.label == INSTANCE_OF:
            if src.kind is not NodeKind.INSTANCE or dst.kind is not NodeKind.CLASS:
                raise KindMismatch(f"instance needs instance -> class, got {src.kind.value} -> {dst.kind.value}")
        elif link.label != HAS:
            normalize_label(link.label)
        self.links[link.key] = link
        self._out.setdefault(link.src, set()).add(link.key)
        if link.label in GENERALIZATION:
            self._children.setdefault(link.dst, set()).add(link.src)
        return self

    def _isa_reachable(self, start: str, goal: str) -> bool:
        seen = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            if cur == goal:
                return True
            for key in self._out.get(cur, ()):
                if key[2] == ISA and key[1] not in seen:
                    seen.add(key[1])
                    stack.append(key[1])
        return False

    # -- queries --------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def has_link(self, src: str, label: str, dst: str) -> bool:
        return (src, dst, label) in self.links

    def outgoing(self, node_id: str) -> list:
        return [self.links[k] for k in self._out.get(node_id, ())]

    def parents(self, node_id: str) -> list:
        """Direct generalizations of ``node_id``, sorted by id."""
        return sorted(k[1] for k in self._out.get(node_id, ()) if k[2] in GENERALIZATION)

    def children(self, node_id: str, label: Optional[str] = None) -> list:
        kids = self._children.get(node_id, ())
        if label is not None:
            kids = [k for k in kids if (k, node_id, label) in self.links]
        return sorted(kids)

    def ancestors(self, node_id: str) -> list:
        """Breadth-first generalization closure as ``[(id, depth), ...]``.

        Levels come out in ascending depth and each level is sorted by id.
        The node itself is not included.
        """
        self.node(node_id)
        seen = {node_id}
        result = []
        frontier = [node_id]
        depth = 0
        while frontier:
            depth += 1
            level = set()
            for cur in frontier:
                for parent in self.parents(cur):
                    if parent not in seen:
                        level.add(parent)
            seen |= level
            frontier = sorted(level)
            result.extend((n, depth) for n in frontier)
        return result

    def generalization_path(self, node_id: str, ancestor: str) -> list:
        """Shortest generalization chain from ``node_id`` up to ``ancestor``.

        Returned as the list of links traversed; BFS visits parents in id
        order so the chain is deterministic.
        """
        self.node(node_id)
        self.node(ancestor)
        if node_id == ancestor:
            return []
        prev = {node_id: None}
        queue = deque([node_id])
        while queue:
            cur = queue.popleft()
            for parent in self.parents(cur):
                if parent in prev:
                    continue
                prev[parent] = cur
                if parent == ancestor:
                    chain = []
                    step = parent
                    while prev[step] is not None:
                        child = prev[step]
                        chain.append(self._generalization_link(child, step))
                        step = child
                    return chain[::-1]
                queue.append(parent)
        return []

    def _generalization_link(self, child: str, parent: str) -> Link:
        for label in (INSTANCE_OF, ISA):
            link = self.links.get((child, parent, label))
            if link is not None:
                return link
        raise UnknownNode(f"{child} -> {parent}")

    def is_a(self, a: str, b: str) -> bool:
        self.node(a)
        self.node(b)
        if a == b:
            return True
        return any(n == b for n, _ in self.ancestors(a))

    def attributes(self, node_id: str) -> list:
        """Locally asserted attribute links (everything but generalization)."""
        return sorted(
            (l for l in self.outgoing(node_id) if l.label not in GENERALIZATION),
            key=lambda l: (l.label, l.dst),
        )

    def inherited_attributes(self, node_id: str) -> dict:
        result = {}
        for source, depth in [(node_id, 0)] + self.ancestors(node_id):
            for link in self.attributes(source):
                rec = AttributeRecord(link.label, link.dst, source, depth)
                best = result.get(link.label)
                if best is None or (depth, source, link.dst) < (best.depth, best.source, best.value):
                    result[link.label] = rec
        return dict(sorted(result.items()))

    def relations_of(self, subject: str, label: Optional[str] = None) -> list:
        self.node(subject)
        links = self.outgoing(subject)
        if label is not None:
            want = normalize_label(label)
            links = [l for l in links if l.label == want]
        return sorted(links, key=lambda l: (l.label, l.dst))

    def space_chain(self, space_id: str) -> list:
        """The space followed by its enclosing spaces up to the root."""
        if space_id not in self.spaces:
            raise UnknownSpace(space_id)
        chain = []
        cur = space_id
        while cur is not None:
            chain.append(cur)
            cur = self.spaces[cur].parent
        return chain

    def space_depth(self, space_id: str) -> int:
        return len(self.space_chain(space_id)) - 1

    def visible_nodes(self, space_id: str) -> set:
        scope = set(self.space_chain(space_id))
        return {n.id for n in self.nodes.values() if n.space in scope}

    def nodes_in(self, space_id: str) -> set:
        if space_id not in self.spaces:
            raise UnknownSpace(space_id)
        return {n.id for n in self.nodes.values() if n.space == space_id}

    def check(self) -> list:
        """Deferred integrity checks; returns problem strings.

        Space agents and quantified variables may be declared before the
        nodes they name, so they are verified once loading has finished.
        """
        problems = []
        for sp in sorted(self.spaces.values(), key=lambda s: s.id):
            if sp.agent is not None and sp.agent not in self.nodes:
                problems.append(f"space {sp.id}: unknown agent {sp.agent}")
            for var in sp.variables:
                if var not in self.nodes:
                    problems.append(f"space {sp.id}: unknown variable {var}")
                elif self.nodes[var].space != sp.id:
                    problems.append(f"space {sp.id}: variable {var} lives in {self.nodes[var].space}")
        return problems


def build(nodes: Iterable[Node] = (), links: Iterable[Link] = (), spaces: Iterable[Space] = ()) -> SemNet:
    net = SemNet()
    for sp in spaces:
        net.add_space(sp)
    for n in nodes:
        net.add_node(n)
    for l in links:
        net.add_link(l)
    return net
