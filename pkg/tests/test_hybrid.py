import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridkr import kbsl
from hybridkr.errors import (
    DanglingNode,
    DanglingScriptElement,
    DuplicateLink,
    RoleLinkToNonClass,
    UnknownScript,
    UnlinkedRole,
)
from hybridkr.hybrid import (
    HybridKB,
    HybridLink,
    LinkRelation,
    ScriptElementRef,
    add_hybrid_link,
    check_binding_consistency,
    resolve_role_attributes,
)
from hybridkr.script import Episode, Event, Scene, Script
from hybridkr.semnet import ISA, Link, NodeKind
from oracles import random_dag_net

STUDENT_KINDS = ("full-time", "part-time", "regular")


def test_role_detail_for_student(lecture):
    detail = resolve_role_attributes(lecture, "lecture-room", "S")
    assert detail.linked_class == "Student"
    assert set(detail.children) == set(STUDENT_KINDS)
    assert detail.attributes["kind"].value == "human"
    assert detail.attributes["kind"].depth == 1
    assert detail.attributes["mode"].value == "regular"


def test_role_detail_is_two_step_composition(lecture):
    for symbol in ("T", "S"):
        (cls,) = [l.dst for l in lecture.links if l.src == ScriptElementRef.role("lecture-room", symbol)]
        detail = resolve_role_attributes(lecture, "lecture-room", symbol)
        assert detail.attributes == lecture.net.inherited_attributes(cls)
        assert set(detail.children) == {c for c in lecture.net.nodes if lecture.net.has_link(c, ISA, cls)}


def test_unlinked_role_and_unknown_script(restaurant):
    with pytest.raises(UnlinkedRole):
        resolve_role_attributes(restaurant, "restaurant", "W")
    with pytest.raises(UnknownScript):
        resolve_role_attributes(restaurant, "nope", "C")


def test_binding_consistency(lecture):
    ok = Episode("lecture-room", bindings=(("S", "anita"), ("T", "dr-sharma")))
    assert check_binding_consistency(lecture, ok) == []
    wrong = Episode("lecture-room", bindings=(("S", "dr-sharma"), ("T", "dr-sharma")))
    assert check_binding_consistency(lecture, wrong) == [("S", "dr-sharma", "Student")]


def test_link_integrity(lecture):
    ref = ScriptElementRef.role("lecture-room", "T")
    with pytest.raises(DanglingScriptElement):
        add_hybrid_link(lecture, HybridLink(ScriptElementRef.role("lecture-room", "X"), "Teacher"))
    with pytest.raises(DanglingScriptElement):
        add_hybrid_link(lecture, HybridLink(ScriptElementRef.event_object("lecture-room", 2, 99), "Room"))
    with pytest.raises(DanglingNode):
        add_hybrid_link(lecture, HybridLink(ref, "Martian"))
    with pytest.raises(RoleLinkToNonClass):
        add_hybrid_link(lecture, HybridLink(ref, "dr-sharma"))
    with pytest.raises(DuplicateLink):
        add_hybrid_link(lecture, HybridLink(ref, "Teacher"))


def test_relations_by_element_kind(story):
    kinds = {str(l.src): l.relation for l in story.links}
    assert kinds["ram-navami-observance/role/D"] is LinkRelation.BOUND_TO
    assert kinds["ram-navami-observance/prop/ramayana"] is LinkRelation.DENOTES
    assert kinds["ram-navami-observance/event/3/0"] is LinkRelation.DENOTES


def test_links_survive_later_growth(lecture):
    hkb = lecture
    for fact in [kbsl.Fact("Teacher", "earns", "salary", literal=True),
                 kbsl.Fact("anita", "likes", "chess", literal=True)]:
        hkb, _ = kbsl.tell(hkb, fact)
    for link in hkb.links:
        assert link.dst in hkb.net.nodes


# -- monotonicity ---------------------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_adding_isa_never_breaks_a_binding(seed):
    rng = random.Random(seed)
    net = random_dag_net(rng, max_nodes=25, max_edges=30)
    classes = sorted(n for n, node in net.nodes.items() if node.kind is NodeKind.CLASS)
    instances = sorted(n for n, node in net.nodes.items() if node.kind is NodeKind.INSTANCE)
    if not instances:
        return
    hkb = HybridKB(net=net)
    hkb.add_script(Script("s", roles=(("A", ""),), scenes=(Scene(1, "one", (Event("A", "go"),)),)))
    add_hybrid_link(hkb, HybridLink(ScriptElementRef.role("s", "A"), rng.choice(classes)))
    episodes = [Episode("s", bindings=(("A", i),)) for i in instances]
    before = [check_binding_consistency(hkb, ep) for ep in episodes]
    for _ in range(15):
        a, b = rng.choice(classes), rng.choice(classes)
        try:
            net.add_link(Link(a, b, ISA))
        except Exception:
            continue
        after = [check_binding_consistency(hkb, ep) for ep in episodes]
        for was, now in zip(before, after):
            if not was:
                assert not now
        before = after
