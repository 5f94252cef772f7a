# tests/test_cli.py
"""
Tests for run configs, the batch services behind the commands and the typer CLI.
"""

from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from apps.core.cli import cli
from apps.core.config import GaugeKind, RunConfig, Task, line_paths, load_run_config, parse_run_config, suffixed
from apps.core.exceptions import ConfigError, HashMismatch, SceneError
from apps.core.service import (
    CURVE_AGREEMENT_REL,
    _check_agreement,
    _evaluate,
    _Nodes,
    run_check,
    run_forward,
    run_gauge,
    run_invert,
    run_verify,
)
from apps.transform import ForwardMethod, read_datagrid_csv, read_table_csv, scene_hash, sweep, write_datagrid_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

REFERENCE_CONFIGS = [
    "flat2d.cfg",
    "flat2d_constant.cfg",
    "gauge_const.cfg",
    "gauge_general.cfg",
    "gauge_fixed_theta.cfg",
    "depth_null.cfg",
    "hyperplane.cfg",
    "curve.cfg",
]

TANH_U1 = "-(0.6+0.2*tanh(x))"
TANH_V1 = "0.6-0.2*tanh(x)"

runner = CliRunner()


def flat_config_text(
    u1: str = TANH_U1,
    v1: str = TANH_V1,
    profile: str = "exp(-x^2)",
    x_range=(-1.0, 1.0),
    x_count: int = 201,
    d_max: float = 2e-3,
    d_count: int = 3,
    extra: str = "",
) -> str:
    return f"""
[scene]
kind = flat2d
u1 = "{u1}"
v1 = "{v1}"
profile = "{profile}"
support = -6, 6
domain = {x_range[0]}, {x_range[1]}

[grid]
x_min = {x_range[0]}
x_max = {x_range[1]}
x_count = {x_count}
d_max = {d_max}
d_count = {d_count}

[output]
data = data.csv
recon = recon.csv
{extra}
"""


def write_config(directory: Path, text: str, name: str = "run.cfg") -> Path:
    path = directory / name
    path.write_text(text, encoding="utf-8")
    return path


def flat_config(directory: Path, name: str = "run.cfg", **options) -> RunConfig:
    return load_run_config(write_config(directory, flat_config_text(**options), name))


def copy_config(name: str, directory: Path) -> Path:
    """Reference config copied next to the test's outputs."""
    return write_config(directory, (CONFIGS / name).read_text(encoding="utf-8"), name)


def config_error_key(text: str) -> str:
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config(text)
    return excinfo.value.details.get("key")


class TestRunConfig:
    """Test run-config parsing"""

    @pytest.mark.unit
    def test_reference_flat_config(self):
        """Test the shipped flat config and its output paths"""
        config = load_run_config(CONFIGS / "flat2d.cfg")
        assert config.scene.kind == "flat2d"
        assert config.task is Task.FORWARD
        assert config.grid.x_count == 601
        assert config.grid.axis2()[0] == 0.0
        assert config.invert.method == "thm21"
        assert config.output.data == CONFIGS / "out" / "flat2d.csv"

    @pytest.mark.unit
    @pytest.mark.parametrize("name", REFERENCE_CONFIGS)
    def test_reference_configs_load(self, name):
        """Test that every shipped config parses into a scene"""
        assert isinstance(load_run_config(CONFIGS / name), RunConfig)

    @pytest.mark.unit
    def test_unknown_scene_key(self):
        """Test that an unknown key is named in the error"""
        assert config_error_key(flat_config_text(extra="").replace("[grid]", "colour = 3\n\n[grid]")) == "scene.colour"

    @pytest.mark.unit
    def test_missing_scene_key(self):
        """Test that a missing expression is named in the error"""
        text = flat_config_text().replace(f'v1 = "{TANH_V1}"\n', "")
        assert config_error_key(text) == "scene.v1"

    @pytest.mark.unit
    def test_unknown_section(self):
        """Test that a stray section is rejected"""
        assert config_error_key(flat_config_text(extra="[plot]\ncolour = red\n")) == "plot"

    @pytest.mark.unit
    def test_d_axis_starts_at_zero(self):
        """Test that grid.d_min other than 0 is rejected"""
        text = flat_config_text().replace("d_count = 3", "d_count = 3\nd_min = 0.1")
        assert config_error_key(text) == "grid.d_min"

    @pytest.mark.unit
    def test_empty_grid(self):
        """Test that a grid without x nodes is a config error"""
        assert config_error_key(flat_config_text(x_count=0)) == "grid.x_count"

    @pytest.mark.unit
    def test_single_task(self):
        """Test that a config names one task"""
        assert config_error_key(flat_config_text(extra="[task]\ntask = forward, invert\n")) == "task.task"

    @pytest.mark.unit
    def test_bad_number(self):
        """Test that a malformed number names its key"""
        assert config_error_key(flat_config_text().replace("d_max = 0.002", "d_max = tiny")) == "grid.d_max"

    @pytest.mark.unit
    def test_gauge_scene_has_no_field(self):
        """Test that gauge configs take their field from [gauge]"""
        text = (CONFIGS / "gauge_const.cfg").read_text(encoding="utf-8")
        text = text.replace("box = -3, 0, 3, 6", 'box = -3, 0, 3, 6\nfield = "x*y"')
        assert config_error_key(text) == "scene.field"

    @pytest.mark.unit
    def test_gauge_field_injected(self):
        """Test that φ becomes the scene field"""
        config = load_run_config(CONFIGS / "gauge_const.cfg")
        assert config.gauge.kind is GaugeKind.CONSTANT
        assert config.scene.field2d(0.0, 3.0) == pytest.approx(1.0)

    @pytest.mark.unit
    def test_depth_profile_lifted(self):
        """Test that h(s) becomes a field in x3 only"""
        config = load_run_config(CONFIGS / "depth_null.cfg")
        field = config.scene.field3d
        assert field.variables == ("x1", "x2", "x3")
        assert field(5.0, -2.0, 1.0) == pytest.approx(np.exp(-1.0))

    @pytest.mark.unit
    def test_derivative_grid(self):
        """Test that inversions need three x nodes and two d rows"""
        with pytest.raises(ConfigError) as excinfo:
            parse_run_config(flat_config_text(x_count=2)).require_derivative_grid()
        assert excinfo.value.details["key"] == "grid.x_count"
        with pytest.raises(ConfigError):
            parse_run_config(flat_config_text(d_count=1, d_max=0.0)).require_derivative_grid()

    @pytest.mark.unit
    def test_output_paths(self):
        """Test per-line and per-method file names"""
        path = Path("out/data.csv")
        assert line_paths(path, (0.0,)) == [path]
        assert line_paths(path, (0.0, 0.5)) == [Path("out/data.line0.csv"), Path("out/data.line1.csv")]
        assert suffixed(path, "rmk22-1") == Path("out/data.rmk22-1.csv")


class TestForwardService:
    """Test the forward run behind `forward`"""

    @pytest.mark.unit
    def test_matches_in_process_sweep(self, temp_dir):
        """Test that the written CSV equals a sweep in the same process"""
        config = flat_config(temp_dir, x_count=21)
        summary = run_forward(config, threads=1)
        written = read_datagrid_csv(summary.paths[0])
        expected = sweep(config.scene, config.grid.axis1(), config.grid.axis2(), config.quad, threads=1)
        assert np.array_equal(written.values, expected.values)
        assert written.scene_hash == scene_hash(config.scene)
        assert summary.nodes == 63
        assert summary.max_value == pytest.approx(float(expected.values.max()))

    @pytest.mark.unit
    def test_zero_profile(self, temp_dir):
        """Test that a zero profile sweeps to zeros"""
        config = flat_config(temp_dir, profile="0*x", x_count=11)
        summary = run_forward(config, threads=1)
        assert np.all(read_datagrid_csv(summary.paths[0]).values == 0.0)

    @pytest.mark.unit
    def test_assumption_failure(self, temp_dir):
        """Test that v1 = 1.2 is rejected as a scene problem"""
        with pytest.raises(SceneError):
            run_forward(flat_config(temp_dir, v1="1.2"))

    @pytest.mark.unit
    def test_output_required(self):
        """Test that a forward run needs somewhere to write"""
        text = flat_config_text(x_count=3).replace("data = data.csv\n", "")
        with pytest.raises(ConfigError) as excinfo:
            run_forward(parse_run_config(text))
        assert excinfo.value.details["key"] == "output.data"


class TestInvertService:
    """Test reconstructions behind `invert`"""

    @pytest.mark.unit
    def test_variable_round_trip(self, temp_dir):
        """Test forward then invert on the tanh scene"""
        config = flat_config(temp_dir)
        run_forward(config, threads=2)
        summary = run_invert(config)
        assert [s.method for s in summary.stats] == ["thm21"]
        assert summary.stats[0].max_error <= 1e-4
        assert summary.stats[0].denom_min > 0.0
        assert not summary.hash_overridden
        _, columns, table = read_table_csv(temp_dir / "recon.csv")
        assert columns == ["x", "f_recon", "f_true", "abs_err"]
        assert table.shape == (201, 4)

    @pytest.mark.unit
    def test_constant_formulas(self, temp_dir):
        """Test that the auto method runs every constant-field formula"""
        config = flat_config(temp_dir, u1="-0.3", v1="0.6")
        run_forward(config, threads=2)
        summary = run_invert(config)
        assert set(summary.recons) == {"rmk22-1", "rmk22-2", "rmk22-3"}
        assert len(summary.pairwise) == 3
        assert max(summary.pairwise.values()) <= 1e-3
        for tag in summary.recons:
            assert (temp_dir / f"recon.{tag}.csv").is_file()

    @pytest.mark.unit
    def test_single_row(self, temp_dir):
        """Test the single-row method on the data row d = 1"""
        text = flat_config_text(u1="-0.3", v1="0.6", x_range=(-8.0, 8.0), x_count=801, d_max=1.0, d_count=2)
        config = load_run_config(write_config(temp_dir, text))
        run_forward(config, threads=2)
        summary = run_invert(config, method="partial")
        assert list(summary.recons) == ["rmk22-partial"]
        assert summary.stats[0].max_error <= 1e-2

    @pytest.mark.unit
    def test_method_must_fit_scene(self, temp_dir):
        """Test that a hyperplane method is refused for a flat scene"""
        config = flat_config(temp_dir, x_count=3)
        with pytest.raises(ConfigError) as excinfo:
            run_invert(config, method="thm31")
        assert excinfo.value.details["key"] == "invert.method"

    @pytest.mark.unit
    def test_hash_mismatch(self, temp_dir):
        """Test that data from another scene needs the override"""
        writer = flat_config(temp_dir, x_count=21)
        run_forward(writer, threads=1)
        reader = flat_config(temp_dir, profile="exp(-2*x^2)", x_count=21)
        with pytest.raises(HashMismatch):
            run_invert(reader)
        assert run_invert(reader, override_hash=True).hash_overridden


class TestGaugeAndVerifyServices:
    """Test the gauge, verify and check runs"""

    @pytest.mark.unit
    def test_constant_gauge(self, temp_dir):
        """Test the bump gauge and its report files"""
        outcome = run_gauge(load_run_config(copy_config("gauge_const.cfg", temp_dir)))
        assert outcome.report.max_forward_residual <= 1e-8
        assert outcome.report.exceeded() == []
        assert (temp_dir / "out" / "gauge_const.txt").is_file()
        assert read_datagrid_csv(temp_dir / "out" / "gauge_const.residuals.csv").shape == (13, 4)

    @pytest.mark.unit
    def test_depth_null_gauge(self, temp_dir):
        """Test h = s²exp(−s²)"""
        outcome = run_gauge(load_run_config(copy_config("depth_null.cfg", temp_dir)))
        assert outcome.report.kind == "depth-null"
        assert outcome.report.exceeded() == []

    @pytest.mark.unit
    def test_gauge_needs_section(self, temp_dir):
        """Test that gauge runs refuse configs without [gauge]"""
        with pytest.raises(ConfigError):
            run_gauge(flat_config(temp_dir, x_count=3))

    @pytest.mark.unit
    def test_check_constant_scene(self):
        """Test that constant fields fail the variable-field nondegeneracy"""
        report = run_check(parse_run_config(flat_config_text(u1="-0.3", v1="0.6", x_count=3)))
        assert "A1.nondegeneracy" in [v.name for v in report.failed()]

    @pytest.mark.unit
    def test_corrupted_data(self, temp_dir):
        """Test that a perturbed sample fails the data identities"""
        config = flat_config(temp_dir)
        grid = run_forward(config, threads=2).grids[0]
        values = grid.values.copy()
        values[100, 1] += 1e-3
        write_datagrid_csv(grid.model_copy(update={"values": values}), temp_dir / "bad.csv")
        suite = run_verify(config, temp_dir / "bad.csv")
        checks = {c.name: c for c in suite.checks}
        assert checks["data-hash"].passed
        assert not checks["data-identities"].passed
        assert not suite.passed

    @pytest.mark.unit
    def test_curve_agreement_is_relative(self):
        """Test the curve reduced-vs-geometric threshold against the reduced values"""
        config = load_run_config(CONFIGS / "curve.cfg")
        config = config.model_copy(update={"verify": config.verify.model_copy(update={"nodes": 4})})
        nodes = _Nodes(config)
        reduced = _evaluate(config.scene, nodes, ForwardMethod.REDUCED, config)
        check = _check_agreement(config, nodes)
        assert check.threshold == pytest.approx(CURVE_AGREEMENT_REL * np.max(np.abs(reduced)))
        assert check.threshold > 0.0
        assert check.passed, check


class TestCommands:
    """Test the typer commands end to end"""

    @pytest.mark.integration
    def test_forward_command(self, temp_dir):
        """Test `forward` output and CSV"""
        path = write_config(temp_dir, flat_config_text(x_count=21))
        result = runner.invoke(cli, ["forward", "--config", str(path), "--threads", "1"])
        assert result.exit_code == 0, result.output
        assert "nodes = 63" in result.output
        assert (temp_dir / "data.csv").is_file()

    @pytest.mark.integration
    def test_forward_is_deterministic(self, temp_dir):
        """Test that two runs write identical files"""
        path = write_config(temp_dir, flat_config_text(x_count=21))
        runner.invoke(cli, ["forward", "-c", str(path), "--out", str(temp_dir / "a.csv")])
        runner.invoke(cli, ["forward", "-c", str(path), "--out", str(temp_dir / "b.csv")])
        assert (temp_dir / "a.csv").read_bytes() == (temp_dir / "b.csv").read_bytes()

    @pytest.mark.integration
    def test_config_error_exit(self, temp_dir):
        """Test exit 2 naming the missing key"""
        path = write_config(temp_dir, flat_config_text().replace(f'u1 = "{TANH_U1}"\n', ""))
        result = runner.invoke(cli, ["forward", "--config", str(path)])
        assert result.exit_code == 2
        assert "scene.u1" in result.output

    @pytest.mark.integration
    def test_empty_grid_exit(self, temp_dir):
        """Test exit 2 for an empty grid"""
        path = write_config(temp_dir, flat_config_text(x_count=0))
        assert runner.invoke(cli, ["verify", "--config", str(path)]).exit_code == 2

    @pytest.mark.integration
    def test_scene_failure_exit(self, temp_dir):
        """Test exit 3 for v1 = 1.2"""
        path = write_config(temp_dir, flat_config_text(v1="1.2"))
        result = runner.invoke(cli, ["forward", "--config", str(path)])
        assert result.exit_code == 3
        assert "error:" in result.output

    @pytest.mark.integration
    def test_invert_hash_mismatch_exit(self, temp_dir):
        """Test exit 5 without the override and 0 with it"""
        writer = write_config(temp_dir, flat_config_text(x_count=21), "writer.cfg")
        reader = write_config(temp_dir, flat_config_text(profile="exp(-2*x^2)", x_count=21), "reader.cfg")
        assert runner.invoke(cli, ["forward", "--config", str(writer)]).exit_code == 0
        assert runner.invoke(cli, ["invert", "--config", str(reader)]).exit_code == 5
        result = runner.invoke(cli, ["invert", "--config", str(reader), "--override-hash"])
        assert result.exit_code == 0, result.output
        assert "hash mismatch ignored" in result.output

    @pytest.mark.integration
    def test_invert_all_prints_pairwise(self, temp_dir):
        """Test the pairwise table for constant fields"""
        path = write_config(temp_dir, flat_config_text(u1="-0.3", v1="0.6"))
        runner.invoke(cli, ["forward", "--config", str(path)])
        result = runner.invoke(cli, ["invert", "--config", str(path), "--method", "all"])
        assert result.exit_code == 0, result.output
        assert "pairwise max |difference|" in result.output
        assert "rmk22-2/rmk22-3" in result.output

    @pytest.mark.integration
    def test_gauge_boundary_exit(self, temp_dir):
        """Test exit 7 when φ does not vanish on the line"""
        path = copy_config("gauge_const.cfg", temp_dir)
        path.write_text(path.read_text().replace("exp(-4*(x^2+(y-3)^2))", "exp(-(x^2+(y-1)^2))"))
        result = runner.invoke(cli, ["gauge", "--config", str(path)])
        assert result.exit_code == 7
        assert "gliding set" in result.output

    @pytest.mark.integration
    def test_verify_corrupted_exit(self, temp_dir):
        """Test exit 1 naming a failed check"""
        path = write_config(temp_dir, flat_config_text())
        runner.invoke(cli, ["forward", "--config", str(path)])
        grid = read_datagrid_csv(temp_dir / "data.csv")
        values = grid.values.copy()
        values[50, 0] += 1e-3
        write_datagrid_csv(grid.model_copy(update={"values": values}), temp_dir / "data.csv")
        result = runner.invoke(cli, ["verify", "--config", str(path), "--data", str(temp_dir / "data.csv")])
        assert result.exit_code == 1
        assert "failed" in result.output
        row = next(line for line in result.output.splitlines() if line.startswith("data-identities"))
        assert "FAIL" in row

    @pytest.mark.integration
    def test_check_exit(self, temp_dir):
        """Test exit 0 for the tanh scene and 3 for constant fields"""
        good = write_config(temp_dir, flat_config_text(x_count=3), "good.cfg")
        constant = write_config(temp_dir, flat_config_text(u1="-0.3", v1="0.6", x_count=3), "constant.cfg")
        assert runner.invoke(cli, ["check", "--config", str(good)]).exit_code == 0
        result = runner.invoke(cli, ["check", "--config", str(constant)])
        assert result.exit_code == 3
        assert "A1.nondegeneracy" in result.output

    @pytest.mark.integration
    def test_metrics_out(self, temp_dir):
        """Test the Prometheus text written by --metrics-out"""
        path = write_config(temp_dir, flat_config_text(x_count=5))
        metrics = temp_dir / "metrics.prom"
        result = runner.invoke(cli, ["forward", "--config", str(path), "--metrics-out", str(metrics)])
        assert result.exit_code == 0, result.output
        text = metrics.read_text()
        assert "headwave_forward_evaluations_total" in text
        assert "headwave_quadrature_calls_total" in text


class TestReferenceRuns:
    """Acceptance runs on the shipped configs"""

    @pytest.mark.slow
    def test_flat_round_trip(self, temp_dir):
        """Test forward then invert on the tanh reference config"""
        config = load_run_config(copy_config("flat2d.cfg", temp_dir))
        run_forward(config)
        summary = run_invert(config)
        assert summary.stats[0].max_error <= 1e-4

    @pytest.mark.slow
    def test_constant_formulas_agree(self, temp_dir):
        """Test pairwise agreement of the three constant-field formulas"""
        config = load_run_config(copy_config("flat2d_constant.cfg", temp_dir))
        run_forward(config)
        summary = run_invert(config)
        assert max(summary.pairwise.values()) <= 1e-5
        assert max(s.max_error for s in summary.stats) <= 1e-4

    @pytest.mark.slow
    @pytest.mark.parametrize("name, tol", [("hyperplane.cfg", 1e-3), ("curve.cfg", 5e-4)])
    def test_round_trips(self, temp_dir, name, tol):
        """Test hyperplane and curve round trips"""
        config = load_run_config(copy_config(name, temp_dir))
        run_forward(config)
        summary = run_invert(config)
        assert summary.stats[0].max_error <= tol

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["flat2d.cfg", "flat2d_constant.cfg", "hyperplane.cfg", "curve.cfg"])
    def test_verify_passes(self, name):
        """Test that the reference configs pass every self-check"""
        suite = run_verify(load_run_config(CONFIGS / name))
        assert suite.passed, suite.to_text()
