"""
Tests for the command-line front end — run-config validation, output writers,
exit codes and end-to-end runs of every subcommand.
"""

import csv
import math
import textwrap
from pathlib import Path

import numpy as np
import pytest
import yaml

from src.cli.commands import RunContext, _settled
from src.cli.outputs import write_csv, write_report
from src.cli.run_config import load_run_config, parse_run_config
from src.core.errors import ConfigError
from src.main import main
from src.model.delay_system import DelaySystem, InitialHistory
from src.simulate.postprocess import ResponseKind
from src.ssm.storage import load_expansion

DUFFING_BLOCK = """\
problem:
  kind: duffing
  delta: 0.2
  alpha: 2.0
  beta: -4.0
  tau_d: {tau_d}
"""


def duffing_config(tau_d: float = 1.1, body: str = "") -> str:
    return DUFFING_BLOCK.format(tau_d=tau_d) + textwrap.dedent(body)


def write_config(tmp_path: Path, text: str, name: str = "run.yaml") -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def read_rows(path: Path) -> list[list[str]]:
    with open(path, encoding="utf-8") as f:
        return list(csv.reader(f))


# ============================================
# Run configuration
# ============================================
class TestRunConfig:
    def test_defaults(self):
        config = parse_run_config(duffing_config())
        assert config.problem.kind == "duffing"
        assert config.problem.tau_d == 1.1
        assert config.discretization.N == 100
        assert config.ssm.order == 9
        assert config.output.directory == "out"
        assert config.spectrum is None

    def test_full_document(self):
        config = parse_run_config(duffing_config(body="""
            name: post_hopf
            discretization:
              N: 40
            ssm:
              order: 7
              rho_max: 6.0
            predict:
              tasks: [backbone, frc]
              Omega_range: [1.3, 1.7]
              n_grid: 50
              validate:
                periods: 100
        """))
        assert config.name == "post_hopf"
        assert config.discretization.N == 40
        assert config.predict.tasks == ["backbone", "frc"]
        assert config.predict.Omega_range == (1.3, 1.7)
        assert config.predict.validate_.periods == 100.0

    def test_unknown_key_reports_path_and_line(self):
        text = duffing_config(body="""
            discretization:
              N: 40
              nodes: 3
        """)
        with pytest.raises(ConfigError) as exc:
            parse_run_config(text, source="run.yaml")
        message = str(exc.value)
        assert "discretization.nodes" in message
        assert "line 10" in message
        assert exc.value.exit_code == 2
        assert exc.value.context["errors"]

    def test_unknown_problem_key_is_located_through_the_union_tag(self):
        text = duffing_config() + "  gamma: 1.0\n"
        with pytest.raises(ConfigError) as exc:
            parse_run_config(text)
        assert "problem.duffing.gamma" in str(exc.value)
        assert "line 7" in str(exc.value)

    def test_invalid_yaml(self):
        with pytest.raises(ConfigError, match="invalid YAML at line"):
            parse_run_config("problem: kind: duffing\n")

    def test_top_level_must_be_mapping(self):
        with pytest.raises(ConfigError, match="mapping"):
            parse_run_config("- 1\n- 2\n")

    @pytest.mark.parametrize("order", [2, 8, 1])
    def test_order_must_be_odd(self, order):
        with pytest.raises(ConfigError, match="ssm.order"):
            parse_run_config(duffing_config(body=f"ssm:\n  order: {order}\n"))

    def test_frc_needs_omega_range(self):
        with pytest.raises(ConfigError, match="Omega_range is required"):
            parse_run_config(duffing_config(body="predict:\n  tasks: [frc]\n"))

    def test_torus_accepts_explicit_frequencies(self):
        config = parse_run_config(duffing_config(body="predict:\n  tasks: [torus]\n  torus_Omega: [1.615]\n"))
        assert config.predict.torus_Omega == [1.615]

    def test_omega_range_must_be_increasing(self):
        with pytest.raises(ConfigError, match="0 < lo < hi"):
            parse_run_config(duffing_config(body="predict:\n  tasks: [frc]\n  Omega_range: [1.7, 1.3]\n"))

    def test_constant_history_needs_value(self):
        with pytest.raises(ConfigError, match="needs 'value'"):
            parse_run_config(duffing_config(body="simulate:\n  t_end: 10\n  history:\n    kind: constant\n"))

    def test_ssm_history_needs_p0(self):
        with pytest.raises(ConfigError, match="needs 'p0'"):
            parse_run_config(duffing_config(body="simulate:\n  t_end: 10\n  history:\n    kind: ssm\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "absent.yaml")

    def test_load_from_file(self, tmp_path):
        config = load_run_config(write_config(tmp_path, duffing_config(tau_d=1.0)))
        assert config.problem.tau_d == 1.0


class TestRunContext:
    def setup_method(self):
        self.config = parse_run_config(duffing_config(body="ssm:\n  order: 7\n"))

    def test_defaults_from_config(self):
        ctx = RunContext.create(self.config)
        assert ctx.order == 7
        assert ctx.out == Path("out")
        assert ctx.threads >= 1

    def test_overrides(self, tmp_path):
        ctx = RunContext.create(self.config, out=tmp_path, order=11, grid_n=30, threads=2, omega_n=80)
        assert (ctx.out, ctx.order, ctx.N, ctx.omega_n, ctx.threads) == (tmp_path, 11, 30, 80, 2)

    def test_chain_size_defaults_to_discretization(self):
        assert RunContext.create(self.config).N == 100

    @pytest.mark.parametrize("overrides", [{"grid_n": 0}, {"omega_n": 1}])
    def test_bad_grid_overrides(self, overrides):
        with pytest.raises(ConfigError):
            RunContext.create(self.config, **overrides)

    @pytest.mark.parametrize("order", [4, 1])
    def test_bad_order_override(self, order):
        with pytest.raises(ConfigError):
            RunContext.create(self.config, order=order)


# ============================================
# Output writers
# ============================================
class TestOutputs:
    def test_csv_formatting(self, tmp_path):
        rows = [
            (1, 0.1 + 0.2, True, ResponseKind.PERIODIC),
            (np.int64(2), np.float64(1 / 3), np.bool_(False), "x"),
        ]
        path = write_csv(tmp_path / "sub" / "t.csv", ["i", "v", "flag", "kind"], rows, precision=6)
        assert read_rows(path) == [
            ["i", "v", "flag", "kind"],
            ["1", "0.3", "1", "periodic"],
            ["2", "0.333333", "0", "x"],
        ]

    def test_csv_default_precision(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", ["pi"], [(math.pi,)])
        assert read_rows(path)[1] == ["3.141592654"]

    def test_report_plain_values(self, tmp_path):
        report = {
            "lambda": 0.0102 + 1.516j,
            "gamma": np.array([-0.3 + 0.1j]),
            "kind": ResponseKind.DECAY,
            "roots": {5: [np.float64(4.5)]},
            "ok": np.bool_(True),
            "count": np.int32(3),
        }
        path = write_report(tmp_path / "r.yaml", report)
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
        assert data["lambda"] == {"re": 0.0102, "im": 1.516}
        assert data["gamma"] == [{"re": -0.3, "im": 0.1}]
        assert data["kind"] == "decay"
        assert data["roots"] == {"5": [4.5]}
        assert data["ok"] is True
        assert data["count"] == 3


# ============================================
# Exit codes
# ============================================
class TestExitCodes:
    def test_missing_config_file(self, tmp_path):
        assert main(["spectrum", "--config", str(tmp_path / "absent.yaml")]) == 2

    def test_invalid_config(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="ssm:\n  order: 4\n"))
        assert main(["ssm", "--config", path, "--out", str(tmp_path)]) == 2

    def test_missing_task_block(self, tmp_path):
        path = write_config(tmp_path, duffing_config())
        assert main(["predict", "--config", path, "--out", str(tmp_path)]) == 2

    def test_even_order_flag(self, tmp_path):
        path = write_config(tmp_path, duffing_config())
        assert main(["ssm", "--config", path, "--out", str(tmp_path), "--order", "6"]) == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["bogus"])
        assert exc.value.code == 2

    def test_real_leading_eigenvalue_is_a_numerical_failure(self, tmp_path):
        text = textwrap.dedent("""\
            problem:
              kind: custom
              n: 1
              tau_d: 1.0
              A_u0: [[0.5]]
              A_uN: [[-0.1]]
            discretization:
              N: 5
            ssm:
              order: 3
        """)
        path = write_config(tmp_path, text)
        assert main(["ssm", "--config", path, "--out", str(tmp_path)]) == 3

    def test_blow_up_is_a_numerical_failure(self, tmp_path):
        # ẋ = x² leaves every bound before t = 0.5
        text = textwrap.dedent("""\
            problem:
              kind: custom
              n: 1
              tau_d: 1.0
              A_u0: [[0.0]]
              A_uN: [[0.0]]
              monomials:
                - {row: 0, coeff: 1.0, now: {0: 2}}
            discretization:
              N: 5
            simulate:
              t_end: 5.0
              history: {kind: constant, value: [2.0]}
        """)
        path = write_config(tmp_path, text)
        assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == 3


# ============================================
# End-to-end runs
# ============================================
@pytest.mark.e2e
class TestEndToEnd:
    def test_spectrum(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="""
            discretization:
              N: 20
            spectrum:
              n_eigs: 6
        """))
        assert main(["spectrum", "--config", path, "--out", str(tmp_path)]) == 0
        rows = read_rows(tmp_path / "spectrum.csv")
        assert rows[0] == ["index", "re", "im"]
        assert len(rows) == 7
        report = yaml.safe_load((tmp_path / "spectrum_report.yaml").read_text(encoding="utf-8"))
        assert report["N"] == 20
        assert report["dim"] == 82
        assert report["leading"]["im"] == pytest.approx(1.516, abs=0.05)

    def test_grid_n_sets_chain_size(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="""
            discretization:
              N: 20
            spectrum:
              n_eigs: 4
        """))
        assert main(["spectrum", "--config", path, "--out", str(tmp_path), "--grid-n", "10"]) == 0
        report = yaml.safe_load((tmp_path / "spectrum_report.yaml").read_text(encoding="utf-8"))
        assert (report["N"], report["dim"]) == (10, 42)

    def test_ssm_writes_loadable_expansion(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="""
            discretization:
              N: 20
            ssm:
              order: 5
        """))
        assert main(["ssm", "--config", path, "--out", str(tmp_path)]) == 0
        ssm = load_expansion(tmp_path / "ssm.npz")
        assert ssm.order == 5
        assert ssm.dim == 82
        report = yaml.safe_load((tmp_path / "ssm_report.yaml").read_text(encoding="utf-8"))
        checks = report["checks"]
        assert checks["a_linear"] == pytest.approx(checks["re_lambda"], rel=1e-8)
        assert checks["b_constant"] == pytest.approx(checks["im_lambda"], rel=1e-8)
        assert set(report["rom"]) == {"O3", "O5"}

    def test_predict_backbone_from_saved_expansion(self, tmp_path):
        ssm_cfg = write_config(tmp_path, duffing_config(body="discretization:\n  N: 20\nssm:\n  order: 5\n"))
        assert main(["ssm", "--config", ssm_cfg, "--out", str(tmp_path)]) == 0
        expansion = tmp_path / "ssm.npz"
        path = write_config(tmp_path, duffing_config(body=f"""
            discretization:
              N: 20
            ssm:
              order: 5
              expansion: {expansion}
            predict:
              tasks: [backbone]
              rho_max: 2.0
              backbone_points: 50
        """), name="predict.yaml")
        assert main(["predict", "--config", path, "--out", str(tmp_path)]) == 0
        for O in (3, 5):
            rows = read_rows(tmp_path / f"backbone_O{O}.csv")
            assert rows[0] == ["rho", "omega", "phys_amp"]
            assert len(rows) == 51
        assert (tmp_path / "predict_report.yaml").exists()

    def test_predict_rejects_mismatched_expansion(self, tmp_path):
        ssm_cfg = write_config(tmp_path, duffing_config(body="discretization:\n  N: 10\nssm:\n  order: 3\n"))
        assert main(["ssm", "--config", ssm_cfg, "--out", str(tmp_path)]) == 0
        path = write_config(tmp_path, duffing_config(body=f"""
            discretization:
              N: 20
            ssm:
              order: 3
              expansion: {tmp_path / "ssm.npz"}
            predict:
              tasks: [backbone]
        """), name="predict.yaml")
        assert main(["predict", "--config", path, "--out", str(tmp_path)]) == 2

    def test_simulate_dde_and_chain(self, tmp_path):
        path = write_config(tmp_path, duffing_config(tau_d=1.0, body="""
            discretization:
              N: 20
            simulate:
              t_end: 20.0
              solvers: [dde, chain]
              dt_out: 0.05
              history: {kind: constant, value: [0.1, 0.0]}
        """))
        assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == 0
        for name in ("dde", "chain"):
            rows = read_rows(tmp_path / f"trajectory_{name}.csv")
            assert rows[0] == ["t", "x1", "x2"]
            assert float(rows[1][0]) == 0.0
            assert float(rows[1][1]) == pytest.approx(0.1)
        report = yaml.safe_load((tmp_path / "simulate_report.yaml").read_text(encoding="utf-8"))
        assert set(report["steady_state"]) == {"dde", "chain"}
        assert not (tmp_path / "poincare_dde.csv").exists()

    def test_simulate_history_length_mismatch(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="""
            discretization:
              N: 10
            simulate:
              t_end: 5.0
              history: {kind: constant, value: [0.1]}
        """))
        assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == 2

    def test_limit_cycle_needs_three_orders(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="""
            discretization:
              N: 10
            ssm:
              order: 5
            predict:
              tasks: [limit_cycle]
        """))
        assert main(["predict", "--config", path, "--out", str(tmp_path)]) == 2

    @pytest.mark.slow
    def test_predict_limit_cycle(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="""
            discretization:
              N: 100
            ssm:
              order: 9
            predict:
              tasks: [limit_cycle]
        """))
        assert main(["predict", "--config", path, "--out", str(tmp_path)]) == 0
        report = yaml.safe_load((tmp_path / "predict_report.yaml").read_text(encoding="utf-8"))
        section = report["limit_cycle"]
        assert section["classified"][0]["status"] == "converged"
        # b(ρ*) ≈ 1.428 for the post-Hopf Duffing oscillator
        assert section["period"] == pytest.approx(2 * math.pi / 1.428, rel=0.02)
        rows = read_rows(tmp_path / "limit_cycle.csv")
        assert rows[0] == ["theta", "x1", "x2"]
        assert len(rows) == 257

    def test_predict_is_deterministic(self, tmp_path):
        path = write_config(tmp_path, duffing_config(body="""
              forcing: {epsilon: 0.01, Omega: 1.5}
            discretization:
              N: 20
            ssm:
              order: 5
            predict:
              tasks: [backbone, frc]
              Omega_range: [1.4, 1.6]
              n_grid: 21
              rho_max: 6.0
        """))
        runs = [tmp_path / "a", tmp_path / "b"]
        for out in runs:
            assert main(["predict", "--config", path, "--out", str(out), "--threads", "2"]) == 0
        names = sorted(p.name for p in runs[0].iterdir())
        assert "frc.csv" in names
        assert names == sorted(p.name for p in runs[1].iterdir())
        for name in names:
            assert (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes(), name


# ============================================
# Validation against DDE simulation
# ============================================
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def validate_config(tmp_path: Path, name: str) -> list[list[str]]:
    assert main(["predict", "--config", str(CONFIGS / name), "--out", str(tmp_path), "--validate", "--threads", "4"]) == 0
    header, *rows = read_rows(tmp_path / "validation.csv")
    assert header == ["check", "Omega", "quantity", "predicted", "simulated", "rel_error", "status"]
    assert rows
    failed = [r for r in rows if r[-1] != "PASS"]
    assert not failed, failed
    return rows


class TestValidationHorizon:
    def setup_method(self):
        # ẋ = −(π/2)·x(t − 1) sits on its Hopf point: a neutral oscillation of period 4
        self.sys = DelaySystem(n=1, tau_d=1.0, A_u0=[[0.0]], A_uN=[[-math.pi / 2]])
        self.hist = InitialHistory.constant([1.0])

    def test_short_horizon_is_inconclusive(self):
        traj, st = _settled(self.sys, self.hist, 4.0, 0.01, 0, extensions=0)
        assert st.kind == ResponseKind.INCONCLUSIVE
        assert traj.t_end == pytest.approx(4.0)

    def test_horizon_doubles_until_settled(self):
        traj, st = _settled(self.sys, self.hist, 4.0, 0.01, 0, extensions=6)
        assert st.kind == ResponseKind.PERIODIC
        assert st.periods[0] == pytest.approx(4.0, rel=1e-3)
        assert traj.t_end >= 32.0


@pytest.mark.slow
@pytest.mark.e2e
class TestValidationRuns:
    def test_coupled_limit_cycle(self, tmp_path):
        rows = validate_config(tmp_path, "coupled_limit_cycle.yaml")
        assert {r[2] for r in rows} == {"amplitude", "period"}

    def test_hutchinson_limit_cycle(self, tmp_path):
        rows = validate_config(tmp_path, "hutchinson_limit_cycle.yaml")
        assert {r[2] for r in rows} == {"amplitude", "period"}

    def test_isola_stable_amplitudes(self, tmp_path):
        rows = validate_config(tmp_path, "duffing_isola.yaml")
        assert sum(r[0] == "frc" for r in rows) == 5

    def test_merged_branch_and_torus(self, tmp_path):
        rows = validate_config(tmp_path, "duffing_merged.yaml")
        assert sum(r[0] == "frc" for r in rows) == 5
        quantities = {r[2] for r in rows if r[0] == "torus"}
        assert {"amp_min", "amp_max", "hausdorff_rel"} <= quantities
