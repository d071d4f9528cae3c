import io
import subprocess
import sys

import pytest

from hybridkr import dsl, fixtures
from hybridkr.cli import EXIT_KB, EXIT_OK, EXIT_USAGE, parse_repl_line, run, split_commands, UsageError


def cli(*argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdin=io.StringIO(stdin), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def kb(name):
    return str(fixtures.path(name))


def answers(text):
    """Answer and trace lines, dropping the load banner."""
    return [line for line in text.splitlines() if not line.startswith("loaded ")]


def test_story_one_shot():
    code, out, err = cli("load", kb("ramnavami"), "ask", "(yesno rama son-of dasharatha)")
    assert code == EXIT_OK, err
    lines = answers(out)
    assert lines[0] == "yes 1.00"
    assert lines[1] == "  asserted: rama son-of dasharatha  confidence 1.00"


def test_wh_answer_lists_both_parents():
    code, out, _ = cli("load", kb("ramnavami"), "ask", "(wh rama son-of ?)")
    assert answers(out)[0] == "dasharatha,kaushalya 1.00"


def test_ask_before_load_is_usage_error():
    code, out, err = cli("ask", "(yesno rama son-of dasharatha)")
    assert code == EXIT_USAGE
    assert out == ""
    assert "no knowledge base" in err


def test_usage_errors():
    assert cli()[0] == EXIT_USAGE
    assert cli("frobnicate")[0] == EXIT_USAGE
    assert cli("load")[0] == EXIT_USAGE
    assert cli("load", "/no/such/file.kb")[0] == EXIT_USAGE
    assert cli("--set", "confidence.bogus=1", "stats")[0] == EXIT_USAGE
    assert cli("load", kb("ramnavami"), "repl")[0] == EXIT_USAGE
    assert cli("load", kb("ramnavami"), "explain")[0] == EXIT_USAGE


def test_kb_errors(tmp_path):
    bad = tmp_path / "bad.kb"
    bad.write_text("(isa A B")
    code, _, err = cli("load", str(bad))
    assert code == EXIT_KB
    assert "bad.kb:1:1" in err
    code, _, err = cli("load", kb("ramnavami"), "tell", "(rel rama son-of nobody)")
    assert code == EXIT_KB
    assert "UnknownNode" in err
    assert cli("load", kb("restaurant"), "gapfill", "restaurant", "(rohan dance)")[0] == EXIT_KB


def test_gapfill_and_didhappen():
    code, out, _ = cli("load", kb("restaurant"), "gapfill", "restaurant", "(rohan enter restaurant)",
                       "(rohan eat pastries)", "ask", "(didhappen restaurant pay)", "explain")
    assert code == EXIT_OK
    lines = answers(out)
    assert lines[0] == "episode ep1 scenes 1 2 3 4"
    assert "  inferred (rohan order pastries)" in lines
    assert "yes 0.70" in lines
    assert lines[-1].startswith("script-inferred: rohan pay check")


def test_set_changes_confidence():
    code, out, _ = cli("--set", "confidence.gapfill=0.5", "load", kb("restaurant"), "gapfill", "restaurant",
                       "(rohan enter restaurant)", "ask", "(didhappen restaurant pay)")
    assert "yes 0.50" in answers(out)


def test_config_file(tmp_path):
    conf = tmp_path / "hybridkr.toml"
    conf.write_text("# settings\n[confidence]\nconfidence.decay = 0.5\n")
    code, out, _ = cli("--config", str(conf), "load", kb("lecture"), "ask", "(yesno permanent kind human)")
    assert code == EXIT_OK
    assert answers(out)[0] == "yes 0.25"


def test_export_dot_node_count(tmp_path):
    target = tmp_path / "out.dot"
    code, out, _ = cli("load", kb("ramnavami"), "export-dot", str(target))
    assert code == EXIT_OK
    text = target.read_text()
    declared = [l for l in text.splitlines() if "shape=" in l and "style=rounded" not in l]
    assert len(declared) == len(fixtures.load("ramnavami").net.nodes)


def test_empty_kb_dot(tmp_path):
    target = tmp_path / "empty.dot"
    code, _, _ = cli("tell", "(space s0)", "export-dot", str(target))
    assert code == EXIT_OK
    text = target.read_text()
    assert text.startswith("digraph")
    assert "shape=" not in text


def test_repl_session(tmp_path):
    saved = tmp_path / "saved.kb"
    script = "\n".join([
        f"load {kb('ramnavami')}",
        "; comment lines are ignored",
        "tell (rel rama born-in ayodhya)",
        "ask (yesno rama born-in ayodhya)",
        "ask (yesno rama born-in",
        f"save {saved}",
        "quit",
        "ask (yesno rama son-of dasharatha)",
    ])
    code, out, err = cli("repl", stdin=script)
    assert code == EXIT_OK
    assert "accepted" in out
    assert "yes 1.00" in out
    assert "error:" in err
    assert out.count("yes 1.00") == 1  # nothing runs after quit
    reloaded, diags = dsl.load(saved.read_text())
    assert diags == []
    assert dsl.serialize(reloaded) == saved.read_text()
    assert reloaded.net.has_link("rama", "born-in", "ayodhya")


QUERIES = ["(yesno rama son-of dasharatha)", "(wh rama son-of ?)", "(yesno rama receives offerings)",
           "(yesno rama son-of vishnu)", "(roledetail ram-navami-observance D)"]


def test_one_shot_and_repl_agree():
    argv = ["load", kb("ramnavami")]
    lines = [f"load {kb('ramnavami')}"]
    for q in QUERIES:
        argv += ["ask", q]
        lines.append(f"ask {q}")
    code1, out1, _ = cli(*argv)
    code2, out2, _ = cli("repl", stdin="\n".join(lines) + "\n")
    assert code1 == code2 == EXIT_OK
    assert out1 == out2


def test_command_splitting():
    groups = split_commands(["load", "a.kb", "gapfill", "r", "(x go)", "(y go)", "stats"])
    assert groups == [("load", ["a.kb"]), ("gapfill", ["r", "(x go)", "(y go)"]), ("stats", [])]
    assert parse_repl_line("gapfill r (x go) (y eat z)") == ("gapfill", ["r", "(x go)", "(y eat z)"])
    assert parse_repl_line("   ") is None
    with pytest.raises(UsageError):
        split_commands(["save"])


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hybridkr.cli", "load", kb("ramnavami"),
                           "ask", "(yesno rama incarnation-of vishnu)"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "yes 1.00" in proc.stdout
