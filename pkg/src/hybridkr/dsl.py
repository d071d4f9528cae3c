"""Reader, loader and canonical printer for ``.kb`` files.

A ``.kb`` file is a sequence of parenthesized forms::

    (space s0)
    (class Deity)
    (instance rama Deity)
    (rel rama son-of dasharatha)

Loading applies the forms in order through TELL.  The printer emits the
canonical form: forms grouped by kind and sorted by name, two-space
indentation, LF line endings.  Printing a loaded canonical file reproduces
it byte for byte.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import kbsl
from .errors import KBError
from .hybrid import ElementKind, HybridKB, HybridLink, ScriptElementRef
from .kbsl import DidHappen, Fact, NodeDecl, RoleQuery, ScriptEvent, Wh, YesNo
from .script import WILDCARD, Episode, Event, Pattern, Scene, Script, Status, Transition, replay_path
from .semnet import (
    HAS,
    INSTANCE_OF,
    ISA,
    ROOT_SPACE,
    Node,
    NodeKind,
    Space,
    SpaceKind,
    is_relation_name,
)

HEADS = ("space", "class", "instance", "value", "isa", "has", "rel", "attr", "script", "link", "episode", "event")
SCRIPT_HEADS = ("track", "props", "role", "entry", "result", "scene")
QUERY_HEADS = ("yesno", "wh", "roledetail", "didhappen")
RESERVED = frozenset(HEADS) | {"is-a", "instance-of"}
RESERVED_RELATIONS = {"is-a": ISA, "isa": ISA, "instance": INSTANCE_OF, "instance-of": INSTANCE_OF, "has": HAS}

_BARE_RE = re.compile(r'^[^\s()";:?][^\s()";]*$')


# -- reader -------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class Atom:
    text: str
    quoted: bool
    line: int
    column: int

    @property
    def keyword(self) -> bool:
        return not self.quoted and self.text.startswith(":") and len(self.text) > 1

    @property
    def wildcard(self) -> bool:
        return not self.quoted and self.text == WILDCARD


@dataclass(frozen=True)
class ListExpr:
    items: tuple
    line: int
    column: int

    @property
    def head(self) -> Optional[str]:
        if self.items and isinstance(self.items[0], Atom) and not self.items[0].quoted:
            return self.items[0].text
        return None


class FormError(Exception):
    def __init__(self, message, where):
        super().__init__(message)
        self.line = where.line
        self.column = where.column


def read(text: str):
    """Tokenize and nest ``text``.  Returns ``(exprs, diagnostics)``.

    Reading never raises; malformed input produces diagnostics and whatever
    structure could be recovered.
    """
    diags = []
    stack = []  # (items, line, col)
    top = []
    i, line, col = 0, 1, 1
    n = len(text)

    def emit(expr):
        (stack[-1][0] if stack else top).append(expr)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
        elif ch.isspace():
            i, col = i + 1, col + 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
        elif ch == "(":
            stack.append(([], line, col))
            i, col = i + 1, col + 1
        elif ch == ")":
            if not stack:
                diags.append(Diagnostic("error", "unbalanced parenthesis: unexpected ')'", line, col))
            else:
                items, l0, c0 = stack.pop()
                emit(ListExpr(tuple(items), l0, c0))
            i, col = i + 1, col + 1
        elif ch == '"':
            l0, c0 = line, col
            buf = []
            i, col = i + 1, col + 1
            closed = False
            while i < n:
                c = text[i]
                if c == "\\" and i + 1 < n:
                    buf.append(text[i + 1])
                    i, col = i + 2, col + 2
                    continue
                if c == '"':
                    closed = True
                    i, col = i + 1, col + 1
                    break
                if c == "\n":
                    line, col = line + 1, 1
                else:
                    col += 1
                buf.append(c)
                i += 1
            if not closed:
                diags.append(Diagnostic("error", "unterminated string", l0, c0))
            emit(Atom("".join(buf), True, l0, c0))
        else:
            l0, c0 = line, col
            start = i
            while i < n and not text[i].isspace() and text[i] not in '()";':
                i += 1
                col += 1
            emit(Atom(text[start:i], False, l0, c0))
    for _items, l0, c0 in reversed(stack):
        diags.append(Diagnostic("error", "unbalanced parenthesis: '(' is never closed", l0, c0))
    if stack:
        # keep the partially read forms so later checks still see them
        items, l0, c0 = stack[0]
        top.append(ListExpr(tuple(items), l0, c0))
    return top, diags


# -- form conversion ------------------------------------------------------------

@dataclass(frozen=True)
class EpisodeSpec:
    """An ``episode`` form; needs the script to rebuild path events."""

    id: str
    script: str
    status: Status = Status.OPEN
    bindings: tuple = ()
    scene_path: tuple = ()
    observed_at: tuple = ()

    def resolve(self, hkb: HybridKB) -> Episode:
        script = hkb.script(self.script)
        known = {sc.number for sc in script.scenes}
        for n in self.scene_path:
            if n not in known:
                raise KBError(f"episode {self.id}: unknown scene {n}")
        events = replay_path(script, self.scene_path, self.bindings)
        for i in self.observed_at:
            if not 0 <= i < len(events):
                raise KBError(f"episode {self.id}: observed position {i} outside its path")
        return Episode(self.script, tuple(sorted(self.bindings)), tuple(self.scene_path),
                       tuple(self.observed_at), events, self.status, self.id)


@dataclass(frozen=True)
class Form:
    value: object
    line: int
    column: int


def _split(expr: ListExpr, keywords=()):
    """Separate positional items from ``:keyword value`` pairs."""
    positional, opts = [], {}
    items = list(expr.items[1:])
    k = 0
    while k < len(items):
        item = items[k]
        if isinstance(item, Atom) and item.keyword:
            name = item.text[1:]
            if name not in keywords:
                raise FormError(f"unknown option :{name} for {expr.head}", item)
            if k + 1 >= len(items):
                raise FormError(f"option :{name} needs a value", item)
            opts[name] = items[k + 1]
            k += 2
        else:
            positional.append(item)
            k += 1
    return positional, opts


def _atom(item, what: str, where) -> str:
    if not isinstance(item, Atom):
        raise FormError(f"{what} must be an atom", item if item is not None else where)
    if item.keyword:
        raise FormError(f"{what} cannot be a keyword", item)
    return item.text


def _node_id(item, what: str, where) -> str:
    text = _atom(item, what, where)
    if item.wildcard:
        raise FormError(f"{what} cannot be a wildcard", item)
    if not text:
        raise FormError(f"{what} cannot be empty", item)
    if not item.quoted and text in RESERVED:
        raise FormError(f"reserved word {text!r} cannot be used as {what}", item)
    return text


def _int(item, what: str, where) -> int:
    text = _atom(item, what, where)
    try:
        return int(text)
    except ValueError:
        raise FormError(f"{what} must be an integer, got {text!r}", item) from None


def _arity(expr: ListExpr, positional, lo: int, hi: Optional[int] = None):
    hi = lo if hi is None else hi
    if not lo <= len(positional) <= (hi if hi >= 0 else len(positional)):
        want = str(lo) if lo == hi else (f"at least {lo}" if hi < 0 else f"{lo} to {hi}")
        raise FormError(f"{expr.head} expects {want} argument(s), got {len(positional)}", expr)


def _relation(item, where, *, allow_reserved: bool) -> str:
    text = _atom(item, "relation", where)
    if text in RESERVED_RELATIONS:
        if not allow_reserved:
            raise FormError(f"reserved word {text!r} cannot be used as an attribute name", item)
        return text
    if not is_relation_name(text):
        raise FormError(f"relation name must be lowercase kebab-case: {text!r}", item)
    return text


def _space_opt(opts, expr) -> str:
    return _node_id(opts["space"], "space", expr) if "space" in opts else ROOT_SPACE


def _label_opt(opts, expr) -> str:
    return _atom(opts["label"], "label", expr) if "label" in opts else ""


def _term(item, where) -> str:
    text = _atom(item, "term", where)
    return WILDCARD if item.wildcard else text


def _pattern(expr: ListExpr) -> Pattern:
    positional, _ = _split(expr)
    _arity(expr, positional, 3)
    s, p, o = positional
    pred = _atom(p, "predicate", expr)
    if not (pred in RESERVED_RELATIONS or is_relation_name(pred) or p.wildcard):
        raise FormError(f"relation name must be lowercase kebab-case: {pred!r}", p)
    return Pattern(_term(s, expr), pred, _term(o, expr))


def _event(items, where) -> Event:
    if not 2 <= len(items) <= 3:
        raise FormError(f"event expects actor, action and optional object, got {len(items)} item(s)", where)
    actor = _term(items[0], where)
    action = _atom(items[1], "action", where)
    obj = _term(items[2], where) if len(items) == 3 else None
    return Event(actor, action, obj)


def _sub_forms(expr: ListExpr, start: int):
    for item in expr.items[start:]:
        if not isinstance(item, ListExpr) or item.head is None:
            raise FormError(f"expected a sub-form inside {expr.head}", item)
        yield item


def _script(expr: ListExpr) -> Script:
    if len(expr.items) < 2:
        raise FormError("script expects a name", expr)
    name = _node_id(expr.items[1], "script name", expr)
    track, props, roles, entries, results, scenes = "", [], [], [], [], []
    for sub in _sub_forms(expr, 2):
        head = sub.head
        args = list(sub.items[1:])
        if head == "track":
            _arity(sub, args, 1)
            track = _atom(args[0], "track", sub)
        elif head == "props":
            props.extend(_atom(a, "prop", sub) for a in args)
        elif head == "role":
            _arity(sub, args, 1, 2)
            roles.append((_atom(args[0], "role symbol", sub), _atom(args[1], "role description", sub) if len(args) > 1 else ""))
        elif head == "entry":
            entries.append(_pattern(sub))
        elif head == "result":
            results.append(_pattern(sub))
        elif head == "scene":
            if len(args) < 2:
                raise FormError("scene expects a number and a name", sub)
            number = _int(args[0], "scene number", sub)
            scene_name = _atom(args[1], "scene name", sub)
            events, transitions = [], []
            for part in _sub_forms(sub, 3):
                if part.head == "event":
                    events.append(_event(part.items[1:], part))
                elif part.head == "goto":
                    if len(part.items) != 5:
                        raise FormError("goto expects a scene number and a condition (subject predicate object)", part)
                    target = _int(part.items[1], "goto target", part)
                    cond = _pattern(ListExpr(part.items[1:], part.line, part.column))
                    transitions.append(Transition(target, cond))
                else:
                    raise FormError(f"unknown scene sub-form {part.head!r}", part)
            scenes.append(Scene(number, scene_name, tuple(events), tuple(transitions)))
        else:
            raise FormError(f"unknown script sub-form {head!r}", sub)
    return Script(name, track, tuple(props), tuple(roles), tuple(entries), tuple(results), tuple(scenes))


def _link(expr: ListExpr) -> HybridLink:
    positional, _ = _split(expr)
    if len(positional) < 4:
        raise FormError("link expects a script, an element kind, the element and a node", expr)
    script = _node_id(positional[0], "script name", expr)
    kind = _atom(positional[1], "element kind", expr)
    if kind == "role":
        _arity(expr, positional, 4)
        ref = ScriptElementRef.role(script, _atom(positional[2], "role symbol", expr))
    elif kind == "prop":
        _arity(expr, positional, 4)
        ref = ScriptElementRef.prop(script, _atom(positional[2], "prop", expr))
    elif kind == "event":
        _arity(expr, positional, 5)
        ref = ScriptElementRef.event_object(script, _int(positional[2], "scene number", expr),
                                            _int(positional[3], "event index", expr))
    else:
        raise FormError(f"link element kind must be role, prop or event, got {kind!r}", positional[1])
    return HybridLink(ref, _node_id(positional[-1], "link target", expr))


def _episode(expr: ListExpr) -> EpisodeSpec:
    positional = []
    status = Status.OPEN
    bindings, path, observed = [], [], []
    items = list(expr.items[1:])
    k = 0
    while k < len(items):
        item = items[k]
        if isinstance(item, Atom) and item.keyword:
            if item.text != ":status" or k + 1 >= len(items):
                raise FormError(f"unknown or incomplete option {item.text}", item)
            value = _atom(items[k + 1], "status", expr)
            try:
                status = Status(value)
            except ValueError:
                raise FormError(f"status must be open or completed, got {value!r}", items[k + 1]) from None
            k += 2
            continue
        if isinstance(item, ListExpr):
            args = item.items[1:]
            if item.head == "bind":
                if len(args) != 2:
                    raise FormError("bind expects a role symbol and a node", item)
                bindings.append((_atom(args[0], "role symbol", item), _atom(args[1], "bound node", item)))
            elif item.head == "path":
                path.extend(_int(a, "scene number", item) for a in args)
            elif item.head == "observed":
                observed.extend(_int(a, "event position", item) for a in args)
            else:
                raise FormError(f"unknown episode sub-form {item.head!r}", item)
        else:
            positional.append(item)
        k += 1
    _arity(expr, positional, 2)
    return EpisodeSpec(_node_id(positional[0], "episode id", expr), _node_id(positional[1], "script name", expr),
                       status, tuple(bindings), tuple(path), tuple(observed))


def _space(expr: ListExpr) -> Space:
    positional, opts = _split(expr, ("parent", "kind", "agent", "vars"))
    _arity(expr, positional, 1)
    sid = _node_id(positional[0], "space id", expr)
    kind_text = _atom(opts["kind"], "space kind", expr) if "kind" in opts else "ordinary"
    try:
        kind = SpaceKind(kind_text)
    except ValueError:
        raise FormError(f"space kind must be ordinary or general, got {kind_text!r}", opts["kind"]) from None
    variables = ()
    if "vars" in opts:
        v = opts["vars"]
        items = v.items if isinstance(v, ListExpr) else (v,)
        variables = tuple(_node_id(a, "variable", expr) for a in items)
    agent = _node_id(opts["agent"], "agent", expr) if "agent" in opts else None
    if sid == ROOT_SPACE:
        if "parent" in opts:
            raise FormError(f"{ROOT_SPACE} is the root space and has no parent", opts["parent"])
        parent = None
    else:
        parent = _node_id(opts["parent"], "parent space", expr) if "parent" in opts else ROOT_SPACE
    return Space(sid, parent, kind, agent, variables)


def convert(expr) -> object:
    """Turn one top-level expression into an assertion object."""
    if not isinstance(expr, ListExpr):
        raise FormError("expected a parenthesized form", expr)
    head = expr.head
    if head is None:
        raise FormError("form has no head", expr)
    if head == "space":
        return _space(expr)
    if head in ("class", "value"):
        positional, opts = _split(expr, ("label", "space"))
        _arity(expr, positional, 1)
        kind = NodeKind.CLASS if head == "class" else NodeKind.VALUE
        return NodeDecl(Node(_node_id(positional[0], "node id", expr), kind, _label_opt(opts, expr), _space_opt(opts, expr)))
    if head == "instance":
        positional, opts = _split(expr, ("label", "space"))
        _arity(expr, positional, 1, -1)
        node = Node(_node_id(positional[0], "node id", expr), NodeKind.INSTANCE, _label_opt(opts, expr), _space_opt(opts, expr))
        return NodeDecl(node, tuple(_node_id(p, "class", expr) for p in positional[1:]))
    if head in ("isa", "has"):
        positional, opts = _split(expr, ("space",))
        _arity(expr, positional, 2)
        a, b = (_node_id(p, "node id", expr) for p in positional)
        return Fact(a, ISA if head == "isa" else HAS, b, _space_opt(opts, expr))
    if head in ("rel", "attr"):
        positional, opts = _split(expr, ("space",))
        _arity(expr, positional, 3)
        a = _node_id(positional[0], "node id", expr)
        rel = _relation(positional[1], expr, allow_reserved=(head == "rel"))
        b = _node_id(positional[2], "value" if head == "attr" else "node id", expr)
        return Fact(a, rel, b, _space_opt(opts, expr), literal=(head == "attr"))
    if head == "script":
        return _script(expr)
    if head == "link":
        return _link(expr)
    if head == "episode":
        return _episode(expr)
    if head == "event":
        if len(expr.items) < 2:
            raise FormError("event expects a script name and an event", expr)
        return ScriptEvent(_node_id(expr.items[1], "script name", expr), _event(expr.items[2:], expr))
    if head in QUERY_HEADS:
        raise FormError(f"{head} is a query, not a knowledge form", expr)
    raise FormError(f"unknown head {head!r}", expr.items[0])


@dataclass
class SourceUnit:
    forms: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


def parse(text: str) -> SourceUnit:
    unit = SourceUnit()
    try:
        exprs, unit.diagnostics = read(text)
    except Exception as exc:  # reading is total; this is a last resort
        unit.diagnostics.append(Diagnostic("error", f"internal reader error: {exc}", 1, 1))
        return unit
    for expr in exprs:
        try:
            unit.forms.append(Form(convert(expr), expr.line, expr.column))
        except FormError as exc:
            unit.diagnostics.append(Diagnostic("error", str(exc), exc.line, exc.column))
        except Exception as exc:
            unit.diagnostics.append(Diagnostic("error", f"cannot interpret form: {exc}", expr.line, expr.column))
    unit.diagnostics.sort(key=lambda d: (d.line, d.column))
    if not unit.ok:
        unit.forms = []
    return unit


def resolve(value, hkb: HybridKB):
    return value.resolve(hkb) if isinstance(value, EpisodeSpec) else value


def apply_forms(hkb: HybridKB, forms) -> list:
    """Tell each form into ``hkb`` in place; stop at the first rejection."""
    diags = []
    for form in forms:
        try:
            outcome = kbsl.apply(hkb, resolve(form.value, hkb))
        except KBError as exc:
            outcome = kbsl.Outcome(kbsl.TellStatus.REJECTED, exc)
        if outcome.rejected:
            err = outcome.error
            diags.append(Diagnostic("error", f"{type(err).__name__}: {err}", form.line, form.column))
            break
    return diags


def load(text: str, base: Optional[HybridKB] = None):
    """Parse and apply ``text``.  Returns ``(hkb or None, diagnostics)``."""
    unit = parse(text)
    if not unit.ok:
        return None, unit.diagnostics
    hkb = base.copy() if base is not None else HybridKB()
    diags = list(unit.diagnostics) + apply_forms(hkb, unit.forms)
    if not any(d.severity == "error" for d in diags):
        end = _end_position(text)
        diags.extend(Diagnostic("error", p, *end) for p in hkb.net.check())
    if any(d.severity == "error" for d in diags):
        return None, diags
    return hkb, diags


def _end_position(text: str):
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1 if lines[-1] else 1


def load_file(path):
    with open(path, encoding="utf-8") as fh:
        return load(fh.read())


def parse_form(text: str):
    """Parse exactly one knowledge form (CLI ``tell``)."""
    exprs, diags = read(text)
    if diags:
        raise FormError(diags[0].message, diags[0])
    if len(exprs) != 1:
        raise FormError(f"expected exactly one form, got {len(exprs)}", _Pos(1, 1))
    return convert(exprs[0])


@dataclass(frozen=True)
class _Pos:
    line: int
    column: int


def parse_query(text: str):
    exprs, diags = read(text)
    if diags:
        raise FormError(diags[0].message, diags[0])
    if len(exprs) != 1 or not isinstance(exprs[0], ListExpr):
        raise FormError("expected exactly one query form", _Pos(1, 1))
    expr = exprs[0]
    head = expr.head
    if head in ("yesno", "wh"):
        pattern = _pattern(expr)
        return YesNo(pattern) if head == "yesno" else Wh(pattern)
    if head == "roledetail":
        positional, _ = _split(expr)
        _arity(expr, positional, 2)
        return RoleQuery(_atom(positional[0], "script name", expr), _atom(positional[1], "role symbol", expr))
    if head == "didhappen":
        positional, opts = _split(expr, ("actor", "object"))
        _arity(expr, positional, 2)
        actor = _term(opts["actor"], expr) if "actor" in opts else WILDCARD
        obj = _term(opts["object"], expr) if "object" in opts else WILDCARD
        return DidHappen(_atom(positional[0], "script name", expr),
                         Event(actor, _atom(positional[1], "action", expr), obj))
    raise FormError(f"unknown query head {head!r}; expected one of {', '.join(QUERY_HEADS)}", expr)


def parse_event(text: str) -> Event:
    exprs, diags = read(text)
    if diags:
        raise FormError(diags[0].message, diags[0])
    if len(exprs) != 1 or not isinstance(exprs[0], ListExpr):
        raise FormError("expected one event like (actor action object)", _Pos(1, 1))
    return _event(exprs[0].items, exprs[0])


# -- printer -------------------------------------------------------------------

def quote(text: str) -> str:
    if _BARE_RE.match(text) and text not in RESERVED:
        return text
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _text(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _term_out(term: str) -> str:
    return WILDCARD if term == WILDCARD else quote(term)


def _opts(*pairs) -> str:
    return "".join(f" :{k} {v}" for k, v in pairs if v is not None)


def _space_kw(space: str):
    return None if space == ROOT_SPACE else quote(space)


def _pattern_out(p: Pattern) -> str:
    return f"{_term_out(p.subject)} {p.predicate} {_term_out(p.object)}"


def _event_out(ev: Event) -> str:
    parts = [_term_out(ev.actor), quote(ev.action)]
    if ev.object is not None:
        parts.append(_term_out(ev.object))
    return " ".join(parts)


def script_text(script: Script) -> str:
    lines = [f"(script {quote(script.name)}"]
    if script.track:
        lines.append(f"  (track {quote(script.track)})")
    if script.props:
        lines.append("  (props " + " ".join(quote(p) for p in script.props) + ")")
    for sym, desc in script.roles:
        lines.append(f"  (role {quote(sym)}" + (f" {_text(desc)}" if desc else "") + ")")
    for p in script.entry_conditions:
        lines.append(f"  (entry {_pattern_out(p)})")
    for p in script.results:
        lines.append(f"  (result {_pattern_out(p)})")
    for scene in sorted(script.scenes, key=lambda s: s.number):
        lines.append(f"  (scene {scene.number} {quote(scene.name)}")
        for ev in scene.events:
            lines.append(f"    (event {_event_out(ev)})")
        for tr in scene.transitions:
            lines.append(f"    (goto {tr.target} {_pattern_out(tr.condition)})")
        lines[-1] += ")"
    lines[-1] += ")"
    return "\n".join(lines)


def _episode_text(ep: Episode) -> str:
    lines = [f"(episode {quote(ep.id)} {quote(ep.script)} :status {ep.status.value}"]
    for sym, node in ep.bindings:
        lines.append(f"  (bind {quote(sym)} {quote(node)})")
    if ep.scene_path:
        lines.append("  (path " + " ".join(map(str, ep.scene_path)) + ")")
    if ep.observed_at:
        lines.append("  (observed " + " ".join(map(str, ep.observed_at)) + ")")
    lines[-1] += ")"
    return "\n".join(lines)


def _link_text(link: HybridLink) -> str:
    ref = link.src
    key = " ".join(quote(str(k)) if ref.kind is not ElementKind.EVENT else str(k) for k in ref.key)
    return f"(link {quote(ref.script)} {ref.kind.value} {key} {quote(link.dst)})"


def _link_sort_key(link: HybridLink):
    ref = link.src
    return (ref.script, ref.kind.value, tuple(str(k).zfill(6) if isinstance(k, int) else k for k in ref.key), link.dst)


def serialize(hkb: HybridKB) -> str:
    net = hkb.net
    out = []

    spaces = sorted(net.spaces.values(), key=lambda s: (net.space_depth(s.id), s.id))
    for sp in spaces:
        opts = []
        if sp.parent is not None and sp.parent != ROOT_SPACE:
            opts.append(("parent", quote(sp.parent)))
        if sp.kind is not SpaceKind.ORDINARY:
            opts.append(("kind", sp.kind.value))
        if sp.agent is not None:
            opts.append(("agent", quote(sp.agent)))
        if sp.variables:
            opts.append(("vars", "(" + " ".join(quote(v) for v in sp.variables) + ")"))
        out.append(f"(space {quote(sp.id)}{_opts(*opts)})")

    nodes = sorted(net.nodes.values(), key=lambda n: n.id)
    inline = set()
    for kind, head in ((NodeKind.CLASS, "class"), (NodeKind.INSTANCE, "instance"), (NodeKind.VALUE, "value")):
        for node in (n for n in nodes if n.kind is kind):
            classes = ""
            if kind is NodeKind.INSTANCE:
                same = [l for l in net.relations_of(node.id, INSTANCE_OF) if l.space == node.space]
                inline.update(l.key for l in same)
                classes = "".join(" " + quote(l.dst) for l in same)
            opts = _opts(("label", _text(node.label) if node.label else None), ("space", _space_kw(node.space)))
            out.append(f"({head} {quote(node.id)}{classes}{opts})")

    links = sorted(net.links.values(), key=lambda l: (l.src, l.label, l.dst))
    for label, head in ((ISA, "isa"), (HAS, "has")):
        for l in sorted((l for l in links if l.label == label), key=lambda l: (l.src, l.dst)):
            out.append(f"({head} {quote(l.src)} {quote(l.dst)}{_opts(('space', _space_kw(l.space)))})")
    named = [l for l in links if l.label not in (ISA, HAS) and l.key not in inline]
    for head, want_value in (("rel", False), ("attr", True)):
        for l in named:
            if (net.nodes[l.dst].kind is NodeKind.VALUE) != want_value or (want_value and l.label == INSTANCE_OF):
                continue
            out.append(f"({head} {quote(l.src)} {l.label} {quote(l.dst)}{_opts(('space', _space_kw(l.space)))})")

    for name in sorted(hkb.scripts):
        out.append(script_text(hkb.scripts[name]))
    for link in sorted(hkb.links, key=_link_sort_key):
        out.append(_link_text(link))
    for ep_id in sorted(hkb.episodes):
        out.append(_episode_text(hkb.episodes[ep_id]))
    return "\n".join(out) + "\n"


def save_file(hkb: HybridKB, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(hkb))
