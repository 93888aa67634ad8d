import csv
import io
import subprocess
import sys

import pytest

from sglgap import meshgen
from sglgap.cli import main
from sglgap.config import ENV_VAR, Tolerances, load_tolerances
from sglgap.corpus import (
    SUMMARY_COLUMNS,
    CorpusConfigError,
    CorpusEntry,
    counts,
    default_corpus,
    parse_corpus,
    run_corpus,
    run_entry,
    write_outputs,
)
from sglgap.gap_bound import GapBoundReport
from sglgap.mesh_domain import read_mesh, write_mesh

SMALL = """\
sq.source = square
sq.target_vertices = 1500
pent.v1.source = hyperbolic-polygon
pent.v1.sides = 5
pent.v1.target_vertices = 1500
wd.source = warped-disk
wd.K = -0.6
wd.N = 300
"""

FAST_TOL = Tolerances(fem_target_vertices=1500)


@pytest.fixture
def small_corpus(tmp_path):
    path = tmp_path / "small.corpus"
    path.write_text(SMALL)
    return path


@pytest.fixture
def square_mesh(tmp_path):
    path = tmp_path / "square.sglmesh"
    write_mesh(meshgen.square(n=24), path)
    return path


# ---------------------------------------------------------------------------
# corpus parsing


def test_parse_splits_at_last_dot():
    entries = {e.id: e for e in parse_corpus(SMALL)}
    assert sorted(entries) == ["pent.v1", "sq", "wd"]
    assert entries["pent.v1"].kwargs == {"sides": 5, "target_vertices": 1500}
    assert entries["wd"].K_lower == -0.6 and entries["wd"].k_upper is None
    assert not entries["sq"].is_file


def test_parse_resolves_file_sources(tmp_path):
    (e,) = parse_corpus("m.source = meshes/a.sglmesh\n", base=tmp_path)
    assert e.is_file and e.source == str(tmp_path / "meshes" / "a.sglmesh")


@pytest.mark.parametrize("text", [
    "square = 1\n",
    "a.alpha = 0.5\n",
    "a.source = square\na.expected = maybe\n",
    "a.source = square\na.alpha = 1.5\n",
    "a b.source = square\n",
    "a.source square\n",
])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_corpus(text)


def test_duplicate_ids_rejected():
    e = CorpusEntry("a", "square")
    with pytest.raises(CorpusConfigError):
        run_corpus([e, e])


def test_default_corpus_contents():
    entries = default_corpus()
    assert [e.id for e in entries] == sorted(e.id for e in entries)
    assert {e.source for e in entries} >= {"square", "warped-disk", "hyperbolic-polygon"}
    assert all(e.expected == "holds" for e in entries)


# ---------------------------------------------------------------------------
# entry statuses


def test_entry_holds():
    res = run_entry(CorpusEntry("sq", "square", params=(("target_vertices", 1500),)), FAST_TOL)
    assert res.status == "holds" and not res.unexpected
    assert res.extras["chiti"] == "+-"


def test_curvature_witness_entry():
    res = run_entry(CorpusEntry("sq", "square", K_lower=0.5, params=(("n", 12),)), FAST_TOL)
    assert res.status == "curvature-witness" and res.unexpected and res.report is None
    ok = run_entry(CorpusEntry("sq", "square", K_lower=0.5, expected="curvature-witness",
                               params=(("n", 12),)), FAST_TOL)
    assert not ok.unexpected


def test_warped_curvature_witness():
    # phi = r + 0.1 r^3 has curvature -0.6 / (1 + 0.1 r^2), which is -0.6 at the pole
    res = run_entry(CorpusEntry("wd", "warped-disk", K_lower=-0.1, params=(("N", 200),)), FAST_TOL)
    assert res.status == "curvature-witness"


def test_ineligible_entry():
    res = run_entry(CorpusEntry("cap", "spherical-cap", k_upper=1.0, params=(("R", 1.0), ("rings", 8))),
                    FAST_TOL)
    assert res.status == "ineligible"


def test_bad_generator_parameter_is_ineligible():
    res = run_entry(CorpusEntry("sq", "square", params=(("colour", 3),)), FAST_TOL)
    assert res.status == "ineligible" and "colour" in res.message


def test_eigen_residual_failure_is_error():
    res = run_entry(CorpusEntry("sq", "square", params=(("n", 16),)), Tolerances(eigen_residual=1e-30))
    assert res.status == "error" and "residual" in res.message


# ---------------------------------------------------------------------------
# outputs


def test_outputs_columns_and_determinism(tmp_path):
    entries = parse_corpus(SMALL)
    a = run_corpus(entries, FAST_TOL)
    b = run_corpus(entries, FAST_TOL, jobs=3)
    pa = write_outputs(a, tmp_path / "a")
    pb = write_outputs(b, tmp_path / "b")
    assert [p.name for p in pa] == ["pent.v1.csv", "sq.csv", "wd.csv", "summary.csv"]
    for x, y in zip(pa, pb):
        assert x.read_bytes() == y.read_bytes()
    rows = list(csv.reader(io.StringIO(pa[0].read_text())))
    assert rows[0] == GapBoundReport.columns()
    assert len(rows) == 2
    summary = list(csv.DictReader(io.StringIO(pa[-1].read_text())))
    assert list(summary[0]) == SUMMARY_COLUMNS
    assert [r["status"] for r in summary] == ["holds"] * 3
    assert counts(a)["holds"] == 3 and counts(a)["unexpected"] == 0


# ---------------------------------------------------------------------------
# tolerances


def test_tolerance_override(tmp_path, monkeypatch):
    path = tmp_path / "tol.txt"
    path.write_text("# tighter\nverdict_margin = 0.05\nbalance_max_iter = 7\n")
    monkeypatch.setenv(ENV_VAR, str(path))
    tol = load_tolerances()
    assert tol.verdict_margin == 0.05 and tol.balance_max_iter == 7
    assert tol.eigen_residual == Tolerances().eigen_residual


def test_tolerance_defaults(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    tol = load_tolerances()
    assert (tol.eigen_residual, tol.verdict_margin, tol.sharpness_margin) == (1e-8, 0.01, 0.02)


def test_unknown_tolerance_key_exits_2(tmp_path, monkeypatch, capsys):
    path = tmp_path / "tol.txt"
    path.write_text("speed = 11\n")
    monkeypatch.setenv(ENV_VAR, str(path))
    assert main(["verify-ball", "--n", "2", "--k", "0", "--R", "1"]) == 2
    assert "unknown tolerance key" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# command line


@pytest.mark.parametrize("argv,code", [
    (["--n", "2", "--k", "0", "--R", "1"], 0),
    (["--n", "2", "--k", "-1", "--R", "1"], 0),
    (["--n", "3", "--k", "1", "--R", "0.6"], 0),
    (["--n", "2", "--k", "1", "--R", "2"], 2),
    (["--n", "1", "--k", "0", "--R", "1"], 2),
    (["--n", "2", "--k", "0", "--R", "-1"], 2),
])
def test_cli_verify_ball(argv, code, capsys, monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert main(["verify-ball", *argv]) == code
    if code == 0:
        out = capsys.readouterr().out
        assert "sharp    yes" in out


def test_cli_verify_domain(square_mesh, tmp_path, capsys):
    out = tmp_path / "report.csv"
    assert main(["verify-domain", "--mesh", str(square_mesh), "--K", "0", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert printed == out.read_text()
    rows = list(csv.reader(io.StringIO(printed)))
    assert rows[0] == GapBoundReport.columns()
    assert rows[1][GapBoundReport.columns().index("verdict")] == "holds"


def test_cli_verify_domain_witness(square_mesh, capsys):
    assert main(["verify-domain", "--mesh", str(square_mesh), "--K", "0.5"]) == 2
    assert "exceeds" in capsys.readouterr().err


def test_cli_verify_domain_bad_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.sglmesh"
    bad.write_text("SGLMESH 1 flat 0\n3 1\n0 0\n1 0\n")
    assert main(["verify-domain", "--mesh", str(bad), "--K", "0"]) == 2
    assert "SGLMESH parse error: line 4: unexpected end of file" in capsys.readouterr().err
    assert main(["verify-domain", "--mesh", str(tmp_path / "none.sglmesh"), "--K", "0"]) == 2
    assert main(["verify-domain", "--mesh", str(bad), "--K", "0", "--alpha", "2"]) == 2


def test_cli_corpus(small_corpus, tmp_path, monkeypatch, capsys):
    tol = tmp_path / "tol.txt"
    tol.write_text("fem_target_vertices = 1500\n")
    monkeypatch.setenv(ENV_VAR, str(tol))
    out = tmp_path / "out"
    assert main(["corpus", "--config", str(small_corpus), "--jobs", "2", "--out", str(out)]) == 0
    assert "holds=3" in capsys.readouterr().out
    assert sorted(p.name for p in out.iterdir()) == ["pent.v1.csv", "sq.csv", "summary.csv", "wd.csv"]


def test_cli_corpus_unexpected_and_empty(tmp_path, capsys):
    cfg = tmp_path / "c.corpus"
    cfg.write_text("sq.source = square\nsq.n = 12\nsq.K = 1\n")
    assert main(["corpus", "--config", str(cfg)]) == 1
    assert "curvature-witness" in capsys.readouterr().out
    cfg.write_text("sq.source = square\nsq.n = 12\nsq.K = 1\nsq.expected = curvature-witness\n")
    assert main(["corpus", "--config", str(cfg)]) == 0
    cfg.write_text("# nothing here\n")
    assert main(["corpus", "--config", str(cfg)]) == 0
    cfg.write_text("sq.alpha = 1\n")
    assert main(["corpus", "--config", str(cfg)]) == 2
    assert main(["corpus", "--config", str(tmp_path / "missing")]) == 2


def test_cli_make_mesh(tmp_path, capsys):
    out = tmp_path / "p.sglmesh"
    assert main(["make-mesh", "hyperbolic-polygon", "--out", str(out), "-p", "sides=6", "-p", "m=4"]) == 0
    mesh = read_mesh(out)
    assert mesh.chart == "poincare_disk" and mesh.k == -1.0
    assert main(["make-mesh", "square", "--out", str(out), "-p", "colour=3"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sglgap", "verify-ball", "--n", "2", "--k", "0", "--R", "1"],
                          capture_output=True, text=True, env={"PATH": "/usr/bin:/bin"})
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("lambda1")
