"""Hybrid knowledge representation: a semantic network joined to scripts.

The net holds declarative knowledge (classes, instances, inheritable
attributes, partition spaces); scripts hold stereotyped event sequences.
Hybrid links tie script roles and props to net nodes so a single query can
use both.
"""
from .dot import export_dot
from .dsl import load, parse, parse_query, serialize
from .hybrid import (
    HybridKB,
    HybridLink,
    ScriptElementRef,
    add_hybrid_link,
    check_binding_consistency,
    resolve_role_attributes,
)
from .kbsl import Answer, Config, Fact, ScriptEvent, ask, explain, tell
from .script import Episode, Event, Pattern, Scene, Script, Transition, complete, gap_fill, instantiate, validate_script
from .semnet import Link, Node, NodeKind, SemNet, Space, SpaceKind

__version__ = "0.1.0"
