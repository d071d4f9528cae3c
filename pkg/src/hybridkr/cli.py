"""Command-line front end.

One-shot mode chains commands left to right over a single session::

    hybridkr load ramnavami.kb ask "(yesno rama son-of dasharatha)"

``hybridkr repl`` reads the same commands one per line.  Exit status is 0
on success, 1 for usage errors and 2 when the KB rejects something.
Results go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import logging
import shlex
import sys
from dataclasses import dataclass, field

from . import dsl, kbsl
from .dot import export_dot
from .errors import KBError
from .hybrid import HybridKB
from .script import gap_fill

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_KB = 0, 1, 2

# name -> number of arguments (-1: one or more)
COMMANDS = {
    "load": 1,
    "save": 1,
    "tell": 1,
    "ask": 1,
    "explain": 0,
    "gapfill": -1,
    "export-dot": 1,
    "stats": 0,
    "repl": 0,
}
NEEDS_KB = {"save", "ask", "explain", "gapfill", "export-dot", "stats"}


class UsageError(Exception):
    pass


class CommandFailed(Exception):
    pass


@dataclass
class Session:
    hkb: HybridKB = field(default_factory=HybridKB)
    config: kbsl.Config = field(default_factory=kbsl.Config)
    loaded: bool = False
    history: list = field(default_factory=list)
    last_answer: kbsl.Answer = None
    out: object = None
    err: object = None

    def __post_init__(self):
        self.out = self.out or sys.stdout
        self.err = self.err or sys.stderr

    def say(self, text=""):
        print(text, file=self.out)

    def execute(self, name: str, args: list):
        if name not in COMMANDS:
            raise UsageError(f"unknown command {name!r}; commands: {', '.join(COMMANDS)}")
        if name in NEEDS_KB and not self.loaded:
            raise UsageError(f"{name}: no knowledge base yet; run load (or tell) first")
        self.history.append((name, tuple(args)))
        getattr(self, "cmd_" + name.replace("-", "_"))(*args)

    def cmd_load(self, path):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"load: {exc}") from None
        hkb, diags = dsl.load(text)
        for d in diags:
            print(f"{path}:{d}", file=self.err)
        if hkb is None:
            raise CommandFailed(f"load: {path} not loaded")
        self.hkb, self.loaded = hkb, True
        stats = hkb.stats()
        self.say(f"loaded {path}: {stats['nodes']} nodes, {stats['links']} links, "
                 f"{stats['scripts']} scripts, {stats['episodes']} episodes")

    def cmd_save(self, path):
        dsl.save_file(self.hkb, path)
        self.say(f"saved {path}")

    def cmd_tell(self, text):
        try:
            value = dsl.resolve(dsl.parse_form(text), self.hkb)
        except (dsl.FormError, KBError) as exc:
            raise CommandFailed(f"tell: {exc}") from None
        self.hkb, outcome = kbsl.tell(self.hkb, value)
        self.loaded = True
        if outcome.rejected:
            raise CommandFailed(f"tell: {outcome}")
        self.say(str(outcome))

    def cmd_ask(self, text):
        try:
            query = dsl.parse_query(text)
            answer = kbsl.ask(self.hkb, query, self.config)
        except (dsl.FormError, KBError) as exc:
            raise CommandFailed(f"ask: {exc}") from None
        self.last_answer = answer
        self.say(str(answer))
        for step in answer.trace:
            self.say("  " + step.describe())

    def cmd_explain(self):
        if self.last_answer is None:
            raise UsageError("explain: nothing asked yet")
        try:
            self.say(kbsl.explain(self.last_answer))
        except KBError as exc:
            raise CommandFailed(f"explain: {exc}") from None

    def cmd_gapfill(self, script_name, *event_texts):
        if not event_texts:
            raise UsageError("gapfill: give a script name and at least one event")
        try:
            script = self.hkb.script(script_name)
            events = [dsl.parse_event(t) for t in event_texts]
            episode = gap_fill(script, events)
        except (dsl.FormError, KBError) as exc:
            raise CommandFailed(f"gapfill: {exc}") from None
        self.hkb, outcome = kbsl.tell(self.hkb, episode)
        if outcome.rejected:
            raise CommandFailed(f"gapfill: {outcome}")
        stored = self.hkb.episodes.get(episode.id) or list(self.hkb.episodes.values())[-1]
        self.say(f"episode {stored.id} scenes {' '.join(map(str, stored.scene_path))}")
        for ev in stored.observed:
            self.say(f"  observed {ev}")
        for ev in stored.inferred:
            self.say(f"  inferred {ev}")

    def cmd_export_dot(self, path):
        text = export_dot(self.hkb)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.say(f"wrote {path}: {len(self.hkb.net.nodes)} nodes")

    def cmd_stats(self):
        for key, value in self.hkb.stats().items():
            self.say(f"{key} {value}")

    def cmd_repl(self):
        raise UsageError("repl must be the only command")


def split_commands(tokens: list) -> list:
    """Group a flat argv tail into ``[(command, args), ...]``."""
    groups = []
    i = 0
    while i < len(tokens):
        name = tokens[i]
        if name not in COMMANDS:
            raise UsageError(f"unknown command {name!r}; commands: {', '.join(COMMANDS)}")
        arity = COMMANDS[name]
        i += 1
        if arity >= 0:
            args = tokens[i:i + arity]
            if len(args) < arity:
                raise UsageError(f"{name} expects {arity} argument(s)")
            i += arity
        else:
            args = tokens[i:i + 1]
            i += 1
            while i < len(tokens) and tokens[i].lstrip().startswith("("):
                args.append(tokens[i])
                i += 1
            if not args:
                raise UsageError(f"{name} expects arguments")
        groups.append((name, args))
    return groups


def _split_forms(text: str) -> list:
    """Split ``"(a b) (c d)"`` into its top-level parenthesized chunks."""
    chunks, depth, start = [], 0, None
    for i, ch in enumerate(text):
        if ch == "(":
            if depth == 0:
                start = i
            depth += 1
        elif ch == ")" and depth:
            depth -= 1
            if depth == 0:
                chunks.append(text[start:i + 1])
    if depth:
        raise UsageError("unbalanced parenthesis in events")
    return chunks


def parse_repl_line(line: str):
    line = line.strip()
    if not line or line.startswith(";"):
        return None
    name, _, rest = line.partition(" ")
    rest = rest.strip()
    if name in ("tell", "ask"):
        return name, [rest] if rest else []
    if name == "gapfill":
        script, _, events = rest.partition(" ")
        return name, ([script] if script else []) + _split_forms(events)
    return name, shlex.split(rest)


def repl(session: Session, stream) -> int:
    interactive = hasattr(stream, "isatty") and stream.isatty()
    while True:
        if interactive:
            print("hybridkr> ", end="", file=session.out, flush=True)
        line = stream.readline()
        if not line:
            return EXIT_OK
        try:
            parsed = parse_repl_line(line)
            if parsed is None:
                continue
            name, args = parsed
            if name in ("quit", "exit"):
                return EXIT_OK
            if name == "repl":
                raise UsageError("already in the repl")
            arity = COMMANDS.get(name)
            if arity is not None and arity >= 0 and len(args) != arity:
                raise UsageError(f"{name} expects {arity} argument(s)")
            session.execute(name, args)
        except (UsageError, CommandFailed) as exc:
            print(f"error: {exc}", file=session.err)


def read_config(path: str, config: kbsl.Config) -> kbsl.Config:
    """Apply ``key = value`` lines from ``path`` (``#`` starts a comment)."""
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line or line.startswith("["):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{number}: expected key = value")
            config = config.with_setting(key.strip(), value.strip().strip('"'))
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridkr",
        description="Hybrid semantic-net and script knowledge base.",
        epilog="commands: load FILE | save FILE | tell FORM | ask QUERY | explain | "
               "gapfill SCRIPT EVENT... | export-dot FILE | stats | repl",
    )
    parser.add_argument("--config", help="file of key = value settings")
    parser.add_argument("--set", dest="settings", action="append", default=[], metavar="KEY=VALUE",
                        help="override a setting, e.g. confidence.decay=0.8")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("commands", nargs=argparse.REMAINDER)
    return parser


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        opts = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if opts.verbose else logging.WARNING, stream=stderr)

    session = Session(out=stdout, err=stderr)
    try:
        if opts.config:
            session.config = read_config(opts.config, session.config)
        for item in opts.settings:
            key, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            session.config = session.config.with_setting(key.strip(), value.strip())
        if not opts.commands:
            raise UsageError("no command given")
        if opts.commands == ["repl"]:
            return repl(session, stdin or sys.stdin)
        groups = split_commands(opts.commands)
        if any(name == "repl" for name, _ in groups):
            raise UsageError("repl must be the only command")
        for name, args in groups:
            session.execute(name, args)
    except (UsageError, KeyError, ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=stderr)
        parser.print_usage(stderr)
        return EXIT_USAGE
    except CommandFailed as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_KB
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
