import orjson
import pytest
from typer.testing import CliRunner

from main import app

runner = CliRunner()


def _run(*args):
    return runner.invoke(app, [str(a) for a in args])


def test_check_accepts_lazy(measures_dir) -> None:
    result = _run("check", measures_dir / "lazy.txt")
    assert result.exit_code == 0, result.output
    assert "mass_ok: yes" in result.output
    assert "maximal: yes" in result.output
    assert "aperiodic: yes" in result.output
    assert "gamma: 0.5" in result.output


def test_check_flags_periodic_walk(measures_dir) -> None:
    result = _run("check", measures_dir / "simple.txt")
    assert result.exit_code == 1
    assert "aperiodic: no (period 2)" in result.output


def test_check_rejects_bad_mass(measures_dir) -> None:
    result = _run("check", measures_dir / "bad_mass.txt")
    assert result.exit_code == 1
    assert "InvariantError" in result.output


def test_check_missing_file(tmp_path) -> None:
    result = _run("check", tmp_path / "missing.txt")
    assert result.exit_code == 1
    assert "ParseError" in result.output


def test_check_undetermined_with_small_cap(write_measure) -> None:
    path = write_measure("dim 1\nsteplength 10\n1 1/2\n-10 1/2\n")
    result = _run("check", path, "--cap", 5)
    assert result.exit_code == 1
    assert "aperiodic: undetermined (cap 5)" in result.output


def test_model_prints_json(measures_dir) -> None:
    result = _run("model", measures_dir / "lazy.txt")
    assert result.exit_code == 0
    document = orjson.loads(result.stdout)
    assert document["L"] == pytest.approx(-0.125)
    assert document["dominance_factor"] == pytest.approx(2.0)


def test_model_rejects_non_maximal(write_measure) -> None:
    path = write_measure("dim 2\nsteplength 1\n-1 0 1/4\n0 0 1/2\n1 0 1/4\n")
    result = _run("model", path)
    assert result.exit_code == 1
    assert "SingularCovariance" in result.output


def test_approx_lemma(measures_dir) -> None:
    result = _run("approx", measures_dir / "lazy.txt", "--n", 100, "--x", "0")
    assert result.exit_code == 0, result.output
    assert "approximant: 0.05634843" in result.output
    assert "exact (dp): 0.05634847" in result.output


def test_approx_bad_vector(measures_dir) -> None:
    result = _run("approx", measures_dir / "lazy.txt", "--n", 10, "--x", "1,2")
    assert result.exit_code == 2


def test_approx_theorem_needs_centered(measures_dir) -> None:
    result = _run("approx", measures_dir / "shifted.txt", "--n", 10, "--x", "10", "--mode", "theorem")
    assert result.exit_code == 1
    assert "PreconditionError" in result.output


def test_tilt(measures_dir) -> None:
    result = _run("tilt", measures_dir / "lazy.txt", "--xi", "1/2")
    assert result.exit_code == 0, result.output
    assert "I(xi): 0.26162" in result.output
    assert "dim 1" in result.output
    assert "# tilted to xi = 0.5" in result.output


def test_tilt_outside_hull(measures_dir) -> None:
    result = _run("tilt", measures_dir / "lazy.txt", "--xi", "1")
    assert result.exit_code == 1
    assert "NotInterior" in result.output


def test_corollary(measures_dir) -> None:
    result = _run("corollary", measures_dir / "lazy.txt", "--n", "100,200")
    assert result.exit_code == 0, result.output
    result = _run("corollary", measures_dir / "lazy.txt", "--n", "abc")
    assert result.exit_code == 2


def test_sweep_writes_reports(measures_dir, tmp_path) -> None:
    out = tmp_path / "report"
    result = _run("sweep", measures_dir / "lazy.txt", "--n", "10,20,30,40,50", "--mode", "lemma", "--out", out)
    assert result.exit_code == 0, result.output
    assert "slope:" in result.output
    assert (tmp_path / "report.csv").exists()
    document = orjson.loads((tmp_path / "report.json").read_bytes())
    assert document["mode"] == "lemma"
    assert [row["n"] for row in document["rows"]] == [10, 20, 30, 40, 50]


def test_sweep_theorem_prints_constant(measures_dir, tmp_path) -> None:
    result = _run("sweep", measures_dir / "asym.txt", "--n", "10,20,30,40,50", "--out", tmp_path / "asym")
    assert result.exit_code == 0, result.output
    assert "C_hat:" in result.output


@pytest.mark.parametrize(
    "args",
    [
        ("--n", "10,20,30,40,50", "--alpha", "0.7"),
        ("--n", "10,20"),
        ("--n", "10,20,30,50,40"),
        ("--n", "10,20,30,40,50", "--jobs", "0"),
    ],
)
def test_sweep_usage_errors(args, measures_dir, tmp_path) -> None:
    result = _run("sweep", measures_dir / "lazy.txt", *args, "--out", tmp_path / "r")
    assert result.exit_code == 2
    assert "Invalid" in result.output
    assert not (tmp_path / "r.csv").exists()


def test_sweep_reports_failure(measures_dir, tmp_path) -> None:
    result = _run("sweep", measures_dir / "shifted.txt", "--n", "10,20,30,40,50", "--out", tmp_path / "r")
    assert result.exit_code == 1
    assert "PreconditionError" in result.output


def test_suite(measures_dir, tmp_path) -> None:
    result = _run(
        "suite", measures_dir / "lazy.txt", measures_dir / "asym.txt", "--n", "10,20,30,40,50", "--out", tmp_path / "suite"
    )
    assert result.exit_code == 0, result.output
    assert "spread:" in result.output
    document = orjson.loads((tmp_path / "suite.json").read_bytes())
    assert [m["measure"] for m in document["measures"]] == ["lazy.txt", "asym.txt"]


def test_suite_with_bad_measure(measures_dir) -> None:
    result = _run("suite", measures_dir / "lazy.txt", measures_dir / "bad_mass.txt", "--n", "10,20,30,40,50")
    assert result.exit_code == 1


def test_suite_needs_enough_n(measures_dir) -> None:
    result = _run("suite", measures_dir / "lazy.txt", "--n", "10,20")
    assert result.exit_code == 2


def test_verbose_flag(measures_dir) -> None:
    result = _run("--verbose", "check", measures_dir / "lazy.txt")
    assert result.exit_code == 0


def test_check_undecodable_file(tmp_path) -> None:
    path = tmp_path / "latin.txt"
    path.write_bytes(b"dim 1\nsteplength 1\n# \xff\xfe\n0 1\n")
    result = _run("check", path)
    assert result.exit_code == 1
    assert "ParseError" in result.output


@pytest.mark.parametrize("alpha", ["0", "0.5", "-0.1"])
def test_alpha_must_be_strictly_inside(alpha, measures_dir) -> None:
    result = _run("approx", measures_dir / "lazy.txt", "--n", 10, "--x", "0", "--alpha", alpha)
    assert result.exit_code == 2
    result = _run("suite", measures_dir / "lazy.txt", "--n", "10,20,30,40,50", "--alpha", alpha)
    assert result.exit_code == 2
