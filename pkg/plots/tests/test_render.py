"""Secondary-package tests: the four figure kinds against real CLI outputs.

The fixtures produce the inputs by driving the primary package's command
line (its external interface); nothing here imports normkam.
"""

import os
import subprocess
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from render import EmptyInput, SchemaMismatch, main, render

PROBLEM_TOML = """\
omega = 1.4142135623730951
g = "arctan(x)"
g_limits = [-1.5707963267948966, 1.5707963267948966]
p_cos = [0.0, 0.1]
"""


def run_cli(args, cwd):
    proc = subprocess.run(["normkam"] + args, cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Criterion-3 and criterion-6 style outputs from the primary CLI."""
    root = tmp_path_factory.mktemp("artifacts")
    (root / "prob.toml").write_text(PROBLEM_TOML)
    run_cli(["demo", "linearizable", "--out", "demo", "--steps", "3"], str(root))
    run_cli(["oscillator", "twist", "--problem", "prob.toml",
             "--lambda", "50:400:10", "--phases", "4", "--ode-tol", "1e-9",
             "--out", "twist.csv"], str(root))
    return root


ALL_KINDS = [
    ("residual-decay", "demo/decay.csv"),
    ("twist-fit", "twist.csv"),
    ("rotation-staircase", "twist.csv"),
    ("poincare-section", "twist.csv"),
]


@pytest.mark.parametrize("kind,source", ALL_KINDS)
def test_kind_renders_svg(artifacts, tmp_path, kind, source):
    out = tmp_path / f"{kind}.svg"
    render(kind, str(artifacts / source), str(out))
    blob = out.read_bytes()
    assert blob.startswith(b"<?xml")
    assert b"</svg>" in blob
    assert len(blob) > 2000


@pytest.mark.parametrize("kind,source", ALL_KINDS)
def test_rendering_is_deterministic(artifacts, tmp_path, kind, source):
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    render(kind, str(artifacts / source), str(a))
    render(kind, str(artifacts / source), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_caption_uses_manifest_hash(artifacts, tmp_path):
    # the twist run writes twist.csv.manifest.json; the caption marks it
    out = tmp_path / "fig.svg"
    render("twist-fit", str(artifacts / "twist.csv"), str(out))
    assert b"manifest " in out.read_bytes()


def test_missing_column_fails_loudly(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("lambda,phase\n50.0,0.0\n")
    with pytest.raises(SchemaMismatch) as exc:
        render("twist-fit", str(bad), str(tmp_path / "x.svg"))
    assert "varsigma_advance" in str(exc.value)


def test_empty_input_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("step,s,d,schedule_d\n")
    with pytest.raises(EmptyInput):
        render("residual-decay", str(empty), str(tmp_path / "x.svg"))


def test_unknown_kind_rejected(tmp_path):
    src = tmp_path / "x.csv"
    src.write_text("a\n1\n")
    with pytest.raises(SchemaMismatch):
        render("pie-chart", str(src), str(tmp_path / "x.svg"))


def test_rotation_staircase_accepts_rotation_csv(tmp_path):
    src = tmp_path / "rotation.csv"
    src.write_text("lambda,phase,rotation\n50.0,0.0,0.701\n60.0,0.0,0.702\n"
                   "70.0,0.0,0.703\n")
    out = tmp_path / "stair.svg"
    render("rotation-staircase", str(src), str(out))
    assert out.read_bytes().startswith(b"<?xml")


def test_cli_exit_codes(artifacts, tmp_path):
    ok = main(["residual-decay", str(artifacts / "demo/decay.csv"),
               str(tmp_path / "ok.svg")])
    assert ok == 0
    missing = main(["residual-decay", str(tmp_path / "nope.csv"),
                    str(tmp_path / "x.svg")])
    assert missing == 2
    usage = main(["just-one-arg"])
    assert usage == 1
