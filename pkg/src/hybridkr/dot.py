"""Graphviz DOT rendering of a hybrid KB.

Spaces become nested clusters holding their nodes.  Edge styles:
``is-a`` solid, ``instance`` dashed, named relations dotted, ``has`` solid
with a diamond tail, hybrid links bold.  Script elements that carry hybrid
links are drawn as boxes inside one cluster per script.  Everything is
emitted in sorted order so equal KBs give equal bytes.
"""
from __future__ import annotations

from .hybrid import HybridKB
from .semnet import HAS, INSTANCE_OF, ISA, NodeKind

_SHAPES = {NodeKind.CLASS: "ellipse", NodeKind.INSTANCE: "box", NodeKind.VALUE: "plaintext"}


def _q(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _edge_attrs(label: str) -> str:
    if label == ISA:
        return 'style=solid, label="is-a"'
    if label == INSTANCE_OF:
        return 'style=dashed, label="instance"'
    if label == HAS:
        return 'style=solid, dir=both, arrowtail=odiamond, label="has"'
    return f"style=dotted, label={_q(label)}"


def export_dot(hkb: HybridKB) -> str:
    net = hkb.net
    lines = ["digraph hybridkb {", "  rankdir=BT;", "  node [fontsize=10];", "  edge [fontsize=9];"]

    kids = {}
    for sp in net.spaces.values():
        if sp.parent is not None:
            kids.setdefault(sp.parent, []).append(sp.id)

    def cluster(space_id: str, indent: str):
        sp = net.spaces[space_id]
        title = space_id + (f" (agent {sp.agent})" if sp.agent else "")
        if sp.kind.value == "general":
            title += " forall " + ",".join(sp.variables)
        lines.append(f"{indent}subgraph {_q('cluster_' + space_id)} {{")
        lines.append(f"{indent}  label={_q(title)};")
        for node_id in sorted(net.nodes_in(space_id)):
            node = net.nodes[node_id]
            lines.append(f"{indent}  {_q(node_id)} [label={_q(node.display)}, shape={_SHAPES[node.kind]}];")
        for child in sorted(kids.get(space_id, ())):
            cluster(child, indent + "  ")
        lines.append(f"{indent}}}")

    cluster("s0", "  ")

    by_script = {}
    for link in hkb.links:
        by_script.setdefault(link.src.script, set()).add(link.src)
    for name in sorted(by_script):
        lines.append(f"  subgraph {_q('cluster_script_' + name)} {{")
        lines.append(f"    label={_q('script ' + name)};")
        for ref in sorted(by_script[name], key=str):
            label = f"{ref.kind.value} " + " ".join(str(k) for k in ref.key)
            lines.append(f"    {_q(str(ref))} [label={_q(label)}, shape=box, style=rounded];")
        lines.append("  }")

    for link in sorted(net.links.values(), key=lambda l: (l.src, l.label, l.dst)):
        lines.append(f"  {_q(link.src)} -> {_q(link.dst)} [{_edge_attrs(link.label)}];")
    for link in sorted(hkb.links, key=lambda l: (str(l.src), l.dst)):
        lines.append(f"  {_q(str(link.src))} -> {_q(link.dst)} [style=bold, label={_q(link.relation.value)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
