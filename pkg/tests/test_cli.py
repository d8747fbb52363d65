import subprocess
import sys

import pytest

from fmtderive.emit import run_cli

from conftest import MODEL_SOURCE


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.f"
    path.write_text(MODEL_SOURCE)
    return path


def test_parse_writes_one_doc_per_file(model_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli(["parse", str(model_file), "-o", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "Basic.TXT.format.xml", "ODTIME.PRN.format.xml",
    ]
    stdout = capsys.readouterr().out
    assert "ODTIME.PRN: input, 1 group(s)" in stdout
    assert "Basic.TXT: output, 1 group(s)" in stdout


def test_runs_are_byte_identical(model_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run_cli(["parse", str(model_file), "-o", str(out1)])
    run_cli(["parse", str(model_file), "-o", str(out2)])
    for name in ("ODTIME.PRN.format.xml", "Basic.TXT.format.xml"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_missing_sources_is_usage_error(capsys):
    assert run_cli(["parse"]) == 2
    assert run_cli([]) == 2


def test_malformed_open_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.f"
    bad.write_text("      X = 1\n      OPEN (, FILE='X')\n")
    assert run_cli(["parse", str(bad), "-o", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "bad.f" in err
    assert "line 2" in err


def test_unreadable_input_exits_one(tmp_path, capsys):
    assert run_cli(["parse", str(tmp_path / "nope.f"), "-o", str(tmp_path)]) == 1
    assert "nope.f" in capsys.readouterr().err


def test_lex_error_exits_one(tmp_path, capsys):
    bad = tmp_path / "lex.f"
    bad.write_text("      OPEN (2, FILE='UNTERMINATED\n")
    assert run_cli(["parse", str(bad), "-o", str(tmp_path)]) == 1
    assert "unterminated" in capsys.readouterr().err


def test_good_and_bad_sources_still_exit_one(model_file, tmp_path):
    bad = tmp_path / "bad.f"
    bad.write_text("      OPEN (, FILE='X')\n")
    assert run_cli(["parse", str(model_file), str(bad), "-o", str(tmp_path)]) == 1
    assert (tmp_path / "ODTIME.PRN.format.xml").exists()


def test_descriptor_subcommand(capsys):
    assert run_cli(["descriptor", "1X,2(1X,i4),3(1X,f12.6)"]) == 0
    out = capsys.readouterr().out
    assert "record width: 50" in out
    assert "space, space, integer with a width of 4" in out


def test_descriptor_subcommand_rejects_garbage(capsys):
    assert run_cli(["descriptor", "q9"]) == 1
    assert "error" in capsys.readouterr().err


def test_dump_flags(model_file, tmp_path, capsys):
    code = run_cli([
        "parse", str(model_file), "-o", str(tmp_path),
        "--dump-tokens", "--dump-ast", "--dump-symbols", "--dump-events",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "read-write-keyword(READ)" in out          # tokens
    assert "ReadStmt" in out                          # ast
    assert "N = 136" in out                           # symbols
    assert "line 8: READ ODTIME.PRN x18496" in out    # events
    assert "1:7 control-keyword(PARAMETER) PARAMETER" in out


def test_free_form_dialect_flag(tmp_path):
    src = tmp_path / "free.f90"
    src.write_text(
        "open(3, file='F.TXT')\n"
        "write(3,*) x  ! comment\n"
        "close(3)\n"
    )
    out = tmp_path / "out"
    assert run_cli(["parse", str(src), "--dialect", "free", "-o", str(out)]) == 0
    assert (out / "F.TXT.format.xml").exists()


def test_default_loop_count_flag(tmp_path):
    src = tmp_path / "var.f"
    src.write_text(
        "      OPEN(8,FILE='VAR.TXT')\n"
        "      DO 10 I=1,M\n"
        "      WRITE(8,*) I\n"
        "   10 CONTINUE\n"
        "      CLOSE(8)\n"
    )
    out = tmp_path / "out"
    assert run_cli(["parse", str(src), "-o", str(out), "--default-loop-count", "9"]) == 0
    text = (out / "VAR.TXT.format.xml").read_text()
    assert 'number="M" resolved="9" resolution="default"' in text


def test_stdout_pseudo_file_doc_name(tmp_path):
    src = tmp_path / "console.f"
    src.write_text("      WRITE(6,*) X\n")
    out = tmp_path / "out"
    assert run_cli(["parse", str(src), "-o", str(out)]) == 0
    assert (out / "stdout.format.xml").exists()


def test_module_entry_point(model_file, tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "fmtderive", "parse", str(model_file), "-o", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert (tmp_path / "o" / "Basic.TXT.format.xml").exists()
