"""Command-line jobs: exit codes, console output and written artifacts."""
import sys
import os

# Add repo root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import io

import pytest
from pydantic import ValidationError
from rich.console import Console

from src.cli import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, Job, build_parser, main, run
from src.config import get_config
from src.formats import read_library

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "fixtures")


def fixture(name):
    return os.path.join(FIXTURES, name)


def execute(command, *inputs, **options):
    """Run a job quietly; returns (exit code, console text)."""
    buffer = io.StringIO()
    console = Console(file=buffer, highlight=False, soft_wrap=True, width=200)
    code = run(Job(command=command, inputs=list(inputs), **options), console=console, quiet=True)
    return code, buffer.getvalue()


def test_validate_fixtures():
    for name in ("bz2.grpd", "bz4_swap.grpd", "pair2.grpd", "compose.grpd", "circle.grpd", "mobius.grpd"):
        code, out = execute("validate", fixture(name))
        assert code == EXIT_OK, out
        assert "[FAIL]" not in out


def test_validate_reports_broken_cocycle():
    code, out = execute("validate", fixture("broken_cocycle.grpd"))
    assert code == EXIT_NEGATIVE
    assert "cocycle" in out


def test_equiv_tells_z4_from_klein_four():
    code, out = execute("equiv", fixture("bz4_swap.grpd"), fixture("bz2xz2.grpd"))
    assert code == EXIT_NEGATIVE
    assert "stabilizer types differ" in out


def test_equiv_writes_a_certificate(tmp_path):
    out_path = str(tmp_path / "equiv.cert")
    code, _ = execute("equiv", fixture("pair2.grpd"), fixture("compose.grpd"), out=out_path)
    assert code == EXIT_OK
    code, out = execute("verify", out_path)
    assert code == EXIT_OK
    assert "claim equivalence" in out


def test_present_then_verify(tmp_path):
    out_path = str(tmp_path / "bz4.cert")
    code, out = execute("present", fixture("bz4_swap.grpd"), out=out_path)
    assert code == EXIT_OK
    assert "band center of order 2" in out
    assert os.path.exists(out_path)
    code, out = execute("verify", out_path)
    assert code == EXIT_OK
    assert "[OK]" in out


def test_verify_rejects_a_tampered_certificate(tmp_path):
    out_path = tmp_path / "bz4.cert"
    execute("present", fixture("bz4_swap.grpd"), out=str(out_path))
    out_path.write_text(out_path.read_text().replace("verdict verified", "verdict failed"))
    code, out = execute("verify", str(out_path))
    assert code == EXIT_NEGATIVE
    assert "[FAIL]" in out


def test_effectivize_writes_the_quotient(tmp_path):
    out_path = str(tmp_path / "eff.grpd")
    code, out = execute("effectivize", fixture("bz4_swap.grpd"), out=out_path)
    assert code == EXIT_OK
    assert "effective after quotient: True" in out
    lib = read_library([out_path])
    assert lib.groupoids["BZ4_eff"].n_arrows == 2


def test_frames_and_band():
    code, _ = execute("frames", fixture("effective_bz2.grpd"))
    assert code == EXIT_OK
    code, out = execute("band", fixture("bs3.grpd"))
    assert code == EXIT_OK
    assert "center of order 1" in out


def test_band_refuses_an_effective_groupoid():
    code, out = execute("band", fixture("effective_bz2.grpd"))
    assert code == EXIT_NEGATIVE
    assert "[NO]" in out


def test_compose_bibundles(tmp_path):
    out_path = str(tmp_path / "composite.grpd")
    code, out = execute("compose", fixture("compose.grpd"), out=out_path)
    assert code == EXIT_OK
    assert "1 points" in out
    lib = read_library([out_path])
    assert len(lib.bibundles["torsor_collapse"]) == 1


def test_glue(tmp_path):
    out_path = str(tmp_path / "glued.grpd")
    code, out = execute("glue", fixture("mobius.grpd"), out=out_path)
    assert code == EXIT_OK
    assert "6 points over 3 base points" in out
    assert len(read_library([out_path]).bibundles["mobius_glued"]) == 6
    code, _ = execute("glue", fixture("broken_cocycle.grpd"))
    assert code == EXIT_NEGATIVE


def test_stackcheck_on_the_circle():
    get_config.cache_clear()
    code, out = execute("stackcheck", fixture("circle.grpd"))
    assert code == EXIT_OK
    assert "exhaustive" in out
    assert "data 8, pairs 64" in out
    assert "capped" not in out


def test_input_problems_exit_with_two(tmp_path):
    code, _ = execute("validate", fixture("missing.grpd"))
    assert code == EXIT_INPUT
    bad = tmp_path / "bad.grpd"
    bad.write_text("GRPD v1\nname X\nbogus\nend\n")
    code, _ = execute("validate", str(bad))
    assert code == EXIT_INPUT
    code, _ = execute("present", fixture("bz4_swap.grpd"), max_size=4)
    assert code == EXIT_INPUT


def test_max_size_applies_to_one_job_only(monkeypatch):
    monkeypatch.delenv("GROUPOID_MAX_SIZE", raising=False)
    get_config.cache_clear()
    default = get_config().max_size
    code, _ = execute("present", fixture("bz4_swap.grpd"), max_size=4)
    assert code == EXIT_INPUT
    assert "GROUPOID_MAX_SIZE" not in os.environ
    assert get_config().max_size == default
    code, _ = execute("present", fixture("bz4_swap.grpd"))
    assert code == EXIT_OK

    monkeypatch.setenv("GROUPOID_MAX_SIZE", "5000")
    get_config.cache_clear()
    execute("validate", fixture("bz2.grpd"), max_size=4)
    assert os.environ["GROUPOID_MAX_SIZE"] == "5000"
    assert get_config().max_size == 5000
    get_config.cache_clear()


def test_unknown_command_is_rejected():
    with pytest.raises(ValidationError):
        Job(command="frobnicate")
    with pytest.raises(SystemExit):
        build_parser().parse_args(["frobnicate", "x"])


def test_main_returns_the_exit_code(capsys):
    assert main(["validate", fixture("bz2.grpd")]) == EXIT_OK
    assert "[OK]" in capsys.readouterr().out
