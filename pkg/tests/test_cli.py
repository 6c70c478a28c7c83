"""Command-line surface: subcommand behavior, exit codes, report shape, and
byte-level determinism of seeded reports."""
import json

import pytest

from qkflag.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_build_small_projective_line(capsys):
    code, out = run(capsys, "build", "--shape", "1:2",
                    "--variant", "x-small", "--bound", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "qkflag-report/1"
    assert len(doc["coefficients"]) == 3


def test_build_level_variant_requires_flags(capsys):
    code, _ = run(capsys, "build", "--shape", "1:2", "--variant", "level",
                  "--bound", "1")
    assert code == 2
    code, out = run(capsys, "build", "--shape", "1:2", "--variant", "level",
                    "--level-i", "1", "--level-l", "1", "--bound", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["variant"]["kind"] == "level"


def test_invalid_shape_is_usage_error(capsys):
    code, _ = run(capsys, "verify", "pairing", "--shape", "junk")
    assert code == 2
    code, _ = run(capsys, "verify", "pairing", "--shape", "3,1:4")
    assert code == 2


def test_verify_recursion_passes(capsys):
    code, out = run(capsys, "verify", "recursion", "--shape", "1:2",
                    "--m", "1", "--bound", "3", "--seed", "7")
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True and doc["orbits"]


def test_verify_degree_gap(capsys):
    code, out = run(capsys, "verify", "degree-gap", "--shape", "2:4",
                    "--bound", "3")
    assert code == 0
    doc = json.loads(out)
    assert all(e["S"] >= 1 for e in doc["entries"])


def test_verify_pairing_with_residue_cross_check(capsys):
    code, out = run(capsys, "verify", "pairing", "--shape", "1:2",
                    "--seed", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == "1" and doc["residue_form"] == "1"


def test_verify_descent(capsys):
    code, out = run(capsys, "verify", "descent", "--shape", "1:2",
                    "--bound", "2", "--seed", "1")
    assert code == 0


def test_verify_vanishing_requires_complete_flag(capsys):
    code, _ = run(capsys, "verify", "vanishing", "--shape", "2:4",
                  "--m", "1", "--bound", "1")
    assert code == 2


def test_rationals_serialize_as_strings(capsys):
    _, out = run(capsys, "residue", "--shape", "1:2", "--fixed-point", "0",
                 "--label", "1,2,1", "--m", "1", "--bound", "2", "--seed", "0")
    doc = json.loads(out)
    for e in doc["entries"]:
        assert isinstance(e["residue"], str)
    assert "/" in doc["pole"] or doc["pole"].lstrip("-").isdigit()


def test_residue_requires_rational_pole_for_covers(capsys):
    code, _ = run(capsys, "residue", "--shape", "1:2", "--fixed-point", "0",
                  "--label", "1,2,1", "--m", "2", "--bound", "2")
    assert code == 2
    code, _ = run(capsys, "residue", "--shape", "1:2", "--fixed-point", "0",
                  "--label", "1,2,1", "--m", "2", "--bound", "2",
                  "--mth-power-characters")
    assert code == 0


def test_list_reports_canonical_indices(capsys):
    code, out = run(capsys, "list", "--shape", "1,2:3")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["fixed_points"]) == 6
    assert all(len(fp["directions"]) == 3 for fp in doc["fixed_points"])


def test_reports_are_byte_identical_across_runs(capsys, tmp_path):
    for check, extra in [
        ("pairing", []),
        ("degree-gap", ["--bound", "2"]),
        ("recursion", ["--m", "1", "--bound", "2"]),
        ("descent", ["--bound", "2"]),
        ("weyl", ["--variant", "tw-y", "--bound", "2"]),
        ("level-duality", ["--level-i", "1", "--level-l", "1",
                           "--bound", "2"]),
    ]:
        paths = [tmp_path / f"{check}-{k}.json" for k in (1, 2)]
        for p in paths:
            code = main(["verify", check, "--shape", "1:2", "--seed", "11",
                         "--out", str(p)] + extra)
            assert code == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        capsys.readouterr()
