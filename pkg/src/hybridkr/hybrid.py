"""Cross-links from script elements into the semantic network.

A role of a script is *bound to* a class of the net; props and event
objects *denote* arbitrary nodes.  Links point one way, script to net, and
queries always start from the script side.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import (
    DanglingNode,
    DanglingScriptElement,
    DuplicateEpisode,
    DuplicateLink,
    DuplicateScript,
    InvalidScript,
    RoleLinkToNonClass,
    UnknownScript,
    UnlinkedRole,
)
from .script import Episode, Script, Status, validate_script
from .semnet import ISA, NodeKind, SemNet


class ElementKind(enum.Enum):
    ROLE = "role"
    PROP = "prop"
    EVENT = "event"


class LinkRelation(enum.Enum):
    BOUND_TO = "bound-to"
    DENOTES = "denotes"


@dataclass(frozen=True)
class ScriptElementRef:
    script: str
    kind: ElementKind
    key: tuple  # (symbol,) | (prop,) | (scene, event_index)

    def __str__(self):
        return f"{self.script}/{self.kind.value}/" + "/".join(str(k) for k in self.key)

    @classmethod
    def role(cls, script, symbol):
        return cls(script, ElementKind.ROLE, (symbol,))

    @classmethod
    def prop(cls, script, name):
        return cls(script, ElementKind.PROP, (name,))

    @classmethod
    def event_object(cls, script, scene, index):
        return cls(script, ElementKind.EVENT, (int(scene), int(index)))


@dataclass(frozen=True)
class HybridLink:
    src: ScriptElementRef
    dst: str

    @property
    def relation(self) -> LinkRelation:
        return LinkRelation.BOUND_TO if self.src.kind is ElementKind.ROLE else LinkRelation.DENOTES


@dataclass(frozen=True)
class RoleDetail:
    role: str
    linked_class: str
    attributes: dict
    children: tuple


@dataclass
class HybridKB:
    net: SemNet = field(default_factory=SemNet)
    scripts: dict = field(default_factory=dict)
    links: list = field(default_factory=list)
    episodes: dict = field(default_factory=dict)  # id -> Episode, insertion ordered

    def copy(self) -> "HybridKB":
        return HybridKB(self.net.copy(), dict(self.scripts), list(self.links), dict(self.episodes))

    def script(self, name: str) -> Script:
        try:
            return self.scripts[name]
        except KeyError:
            raise UnknownScript(name) from None

    def add_script(self, script: Script) -> "HybridKB":
        if script.name in self.scripts:
            raise DuplicateScript(script.name)
        problems = validate_script(script)
        if problems:
            raise InvalidScript(script.name, problems)
        self.scripts[script.name] = script
        return self

    def add_episode(self, episode: Episode) -> Episode:
        """Store ``episode``, assigning the next free ``epN`` id if it has none."""
        self.script(episode.script)
        if not episode.id:
            n = len(self.episodes) + 1
            while f"ep{n}" in self.episodes:
                n += 1
            episode = replace(episode, id=f"ep{n}")
        elif episode.id in self.episodes:
            raise DuplicateEpisode(episode.id)
        self.episodes[episode.id] = episode
        return episode

    def open_episode(self, script_name: str) -> Optional[Episode]:
        """Most recently added open episode of ``script_name``."""
        for ep in reversed(list(self.episodes.values())):
            if ep.script == script_name and ep.status is Status.OPEN:
                return ep
        return None

    def stats(self) -> dict:
        return {
            "spaces": len(self.net.spaces),
            "nodes": len(self.net.nodes),
            "links": len(self.net.links),
            "scripts": len(self.scripts),
            "hybrid_links": len(self.links),
            "episodes": len(self.episodes),
        }


def element_exists(hkb: HybridKB, ref: ScriptElementRef) -> bool:
    script = hkb.scripts.get(ref.script)
    if script is None:
        return False
    if ref.kind is ElementKind.ROLE:
        return ref.key[0] in script.role_symbols
    if ref.kind is ElementKind.PROP:
        return ref.key[0] in script.props
    scene_no, index = ref.key
    try:
        scene = script.scene(scene_no)
    except KeyError:
        return False
    return 0 <= index < len(scene.events) and scene.events[index].object is not None


def add_hybrid_link(hkb: HybridKB, link: HybridLink) -> HybridKB:
    if not element_exists(hkb, link.src):
        raise DanglingScriptElement(str(link.src))
    if link.dst not in hkb.net.nodes:
        raise DanglingNode(link.dst)
    if link.relation is LinkRelation.BOUND_TO and hkb.net.nodes[link.dst].kind is not NodeKind.CLASS:
        raise RoleLinkToNonClass(f"{link.src} -> {link.dst}")
    if link in hkb.links:
        raise DuplicateLink(f"{link.src} -> {link.dst}")
    hkb.links.append(link)
    return hkb


def role_classes(hkb: HybridKB, script_name: str, symbol: str) -> list:
    ref = ScriptElementRef.role(script_name, symbol)
    return sorted(l.dst for l in hkb.links if l.src == ref)


def check_binding_consistency(hkb: HybridKB, episode: Episode) -> list:
    """List ``(role, instance, class)`` for every binding that breaks a role link."""
    hkb.script(episode.script)
    violations = []
    for symbol, instance in episode.bindings:
        for cls in role_classes(hkb, episode.script, symbol):
            ok = instance in hkb.net.nodes and hkb.net.is_a(instance, cls)
            if not ok:
                violations.append((symbol, instance, cls))
    return violations


def resolve_role_attributes(hkb: HybridKB, script_name: str, symbol: str) -> RoleDetail:
    """Details the script alone cannot give about a role.

    Follows the role's link to its class, then returns that class's
    inherited attributes and its direct ``is-a`` specializations.  With more
    than one linked class the lowest id wins.
    """
    hkb.script(script_name)
    classes = role_classes(hkb, script_name, symbol)
    if not classes:
        raise UnlinkedRole(f"{script_name}/{symbol}")
    cls = classes[0]
    return RoleDetail(
        role=symbol,
        linked_class=cls,
        attributes=hkb.net.inherited_attributes(cls),
        children=tuple(hkb.net.children(cls, ISA)),
    )
