import json
import math
import subprocess
import sys

import numpy as np
import pytest

from balancedg import DomainError, IdealGas, build_example
from balancedg.cli import EXIT_FAULT, EXIT_OK, EXIT_USAGE, run_cli
from balancedg.config import parse_config
from balancedg.diagnostics import (ConvergenceTable, balance_error, convergence_table, l1_error, mass_audit,
                                   observed_orders)
from balancedg.equilibrium import equilibrium_state, polytropic_profile, project_equilibrium
from balancedg.field import DgField, l2_project
from balancedg.mesh import Mesh1D, Mesh2D
from balancedg.output import primitive_samples, read_grid, sample_points, write_csv, write_grid, write_summary

AIR = IdealGas(1.4)


# ------------------------------------------------------------- norms

class TestL1:
    def test_self_distance(self, rng):
        f = DgField(Mesh2D.uniform(((0, 1), (0, 2)), 3, 4), 2, rng.normal(size=(3, 4, 6, 4)))
        assert np.all(l1_error(f, f) == 0)

    def test_constant_offset(self):
        m = Mesh1D.uniform(0, 1, 7)
        f = l2_project(lambda x: np.stack([np.sin(x), x], -1), m, 2)
        g = f.with_coef(f.coef.copy())
        g.coef[:, 0, :] += 0.25
        assert np.allclose(l1_error(f, g), 0.25, rtol=1e-14)

    def test_normalization(self):
        m = Mesh1D.uniform(0, 3, 5)
        f = l2_project(lambda x: np.ones_like(x), m, 1)
        assert l1_error(f, lambda x: np.zeros(x.shape + (1,)))[0] == pytest.approx(1.0, rel=1e-15)
        assert l1_error(f, lambda x: np.zeros(x.shape + (1,)), normalized=False)[0] == pytest.approx(3.0)

    def test_mesh_mismatch(self):
        a = l2_project(lambda x: x, Mesh1D.uniform(0, 1, 4), 1)
        b = l2_project(lambda x: x, Mesh1D.uniform(0, 1, 5), 1)
        with pytest.raises(DomainError):
            l1_error(a, b)
        with pytest.raises(DomainError):
            l1_error(a, lambda x: np.zeros(x.shape + (3,)))

    def test_equilibrium_projection_rate(self):
        profile = polytropic_profile(1.0, 5 / 3)
        errs = []
        for M in (25, 50, 100):
            pe = project_equilibrium(profile, Mesh1D.uniform(0, 2, M), 2, IdealGas(5 / 3))
            errs.append(l1_error(pe.field, equilibrium_state(profile, IdealGas(5 / 3)), quad_points=8))
        orders = observed_orders(np.array(errs)[:, [0, 2]], [25, 50, 100])
        assert np.all(orders > 2.8)


class TestOrders:
    def test_third_order_example(self):
        assert observed_orders([[1.0], [0.125]], [8, 16])[0, 0] == pytest.approx(3.0)

    def test_reference_row(self):
        assert observed_orders([5.25e-4, 6.62e-5], [16, 32])[0] == pytest.approx(2.99, abs=0.005)

    def test_zero_error_is_undefined(self):
        orders = observed_orders([[0.0, 1.0], [0.0, 0.5]], [8, 16])
        assert math.isnan(orders[0, 0]) and orders[0, 1] == pytest.approx(1.0)
        table = ConvergenceTable([8, 16], np.array([[0.0, 1.0], [0.0, 0.5]]), orders, labels=("a", "b"))
        assert "undef" in table.format()

    def test_rejects_bad_sequences(self):
        with pytest.raises(DomainError):
            observed_orders([1.0], [8])
        with pytest.raises(DomainError):
            observed_orders([1.0, 0.5], [16, 8])

    def test_convergence_table_structure(self):
        cfg = build_example(4, {"degree": 1, "end_time": 0.01})
        table = convergence_table(cfg, [4, 8])
        assert table.errors.shape == (2, 4) and table.orders.shape == (1, 4)
        assert np.all(table.errors[1] < table.errors[0])
        assert len(table.reports) == 2

    def test_convergence_needs_exact(self):
        with pytest.raises(DomainError):
            convergence_table(build_example(1), [4, 8])


def test_reflective_run_conserves_mass():
    sim = build_example(3, {"cells": 200, "end_time": 1e-5}).build()
    coef, rep = sim.run()
    assert rep.steps > 5 and mass_audit(rep) <= 1e-12


def test_balance_error_zero_at_start():
    sim = build_example(1, {"cells": 10}).build()
    assert np.all(balance_error(sim, sim.coef0) == 0)


# ------------------------------------------------------------- output

class TestOutput:
    def test_sample_points(self):
        assert sample_points(1).tolist() == [0.0]
        assert np.allclose(sample_points(4), [-0.75, -0.25, 0.25, 0.75])
        with pytest.raises(DomainError):
            sample_points(0)

    def test_csv_round_trip_1d(self, tmp_path, rng):
        m = Mesh1D.uniform(0, 1, 5)
        f = l2_project(lambda x: np.stack([1 + x, np.sin(x), 3 + x * x], -1), m, 2)
        path = write_csv(tmp_path / "s.csv", f, AIR, samples=3)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        coords, cols = primitive_samples(f, AIR, 3)
        assert open(path).readline().strip() == "x,rho,u,p,E"
        assert np.array_equal(data[:, 0], coords[0]) and np.array_equal(data[:, 3], cols[2])

    def test_csv_2d_lattice_order(self, tmp_path):
        m = Mesh2D.uniform(((0, 2), (0, 1)), 2, 3)
        f = l2_project(lambda x, y: np.stack([1 + x + 10 * y, 0 * x, 0 * x, 2.5 + 0 * x], -1), m, 1)
        (px, py), cols = primitive_samples(f, AIR, 2)
        assert px.shape == (4, 6)
        assert np.all(np.diff(px[:, 0]) > 0) and np.all(np.diff(py[0, :]) > 0)
        assert np.allclose(cols[0], 1 + px + 10 * py, atol=1e-13)

    def test_grid_round_trip(self, tmp_path):
        m = Mesh2D.uniform(((0, 1), (0, 1)), 3, 2)
        f = l2_project(lambda x, y: np.stack([1 + x * y, 0 * x, 0 * x, 2.5 + y], -1), m, 2)
        path = write_grid(tmp_path / "rho.grid", f, AIR, "p", samples=2)
        q, x, y, vals = read_grid(path)
        (px, py), cols = primitive_samples(f, AIR, 2)
        assert q == "p" and np.array_equal(x, px[:, 0]) and np.array_equal(y, py[0])
        assert np.array_equal(vals, cols[3])

    def test_grid_rejections(self, tmp_path):
        f1 = l2_project(lambda x: np.stack([1 + x, x, 3 + x], -1), Mesh1D.uniform(0, 1, 2), 1)
        with pytest.raises(DomainError):
            write_grid(tmp_path / "g", f1, AIR)
        f2 = l2_project(lambda x, y: np.stack([1 + x, x, y, 3 + x], -1), Mesh2D.uniform(((0, 1), (0, 1)), 2, 2), 1)
        with pytest.raises(DomainError):
            write_grid(tmp_path / "g", f2, AIR, "temperature")

    def test_summary_json(self, tmp_path):
        path = write_summary(tmp_path / "s.json", {"a": np.float64(0.1), "b": np.arange(3), "c": math.inf,
                                                   "d": math.nan, "e": (1, np.int64(2))})
        data = json.loads(path.read_text())
        assert data == {"a": 0.1, "b": [0, 1, 2], "c": "inf", "d": None, "e": [1, 2]}


# ------------------------------------------------------------- config

class TestConfig:
    TEXT = """
    # a comment
    run.example = 4
    mesh.cells = 16      # trailing comment
    scheme.kind = wb-hllc
    limiter.pp = off
    time.end = 0.05
    run.convergence = 8, 16
    example.amplitude = 1e-6
    example.perturbed = on
    """

    def test_parse(self):
        opts, extras = parse_config(self.TEXT)
        assert opts == {"example": 4, "cells": 16, "scheme": "wb-hllc", "pp_limiter": False,
                        "end_time": 0.05, "convergence": [8, 16]}
        assert extras == {"amplitude": 1e-6, "perturbed": True}

    @pytest.mark.parametrize("text", ["mesh.bogus = 1", "mesh.cells", "mesh.cells = many", "limiter.pp = maybe"])
    def test_rejections(self, text):
        with pytest.raises(DomainError):
            parse_config(text)


# ------------------------------------------------------------- CLI

def run(argv, capsys):
    code = run_cli(argv)
    return code, capsys.readouterr()


def test_help(capsys):
    with pytest.raises(SystemExit) as info:
        run_cli(["--help"])
    assert info.value.code == 0
    assert "--example" in capsys.readouterr().out


def test_missing_example(capsys):
    with pytest.raises(SystemExit) as info:
        run_cli([])
    assert info.value.code == EXIT_USAGE


def test_bad_scheme_value(capsys):
    with pytest.raises(SystemExit) as info:
        run_cli(["--example", "1", "--scheme", "upwind"])
    assert info.value.code == EXIT_USAGE


def test_bad_override_is_usage_error(capsys):
    code, out = run(["--example", "2", "--set", "rho_c=1"], capsys)
    assert code == EXIT_USAGE and "rho_c" in out.err


def test_equilibrium_run_and_outputs(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("BALANCEDG_OUT", raising=False)
    code, out = run(["--example", "1", "--cells", "10", "--degree", "2", "--tend", "0.05",
                     "--out", str(tmp_path / "o"), "--seed", "3"], capsys)
    assert code == EXIT_OK
    assert "l1 distance to equilibrium" in out.out and "mass drift" in out.out
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["status"] == "ok" and summary["seed"] == 3
    assert max(summary["l1_equilibrium"].values()) < 1e-12
    assert (tmp_path / "o" / "solution.csv").exists()


def test_env_overrides_out(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BALANCEDG_OUT", str(tmp_path / "env"))
    code, _ = run(["--example", "7", "--cells", "4", "--degree", "1", "--tend", "0.001",
                   "--out", str(tmp_path / "flag")], capsys)
    assert code == EXIT_OK
    assert (tmp_path / "env" / "rho.grid").exists() and not (tmp_path / "flag").exists()


def test_config_file_with_flag_override(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("BALANCEDG_OUT", raising=False)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("run.example = 4\nmesh.cells = 4\nscheme.degree = 1\ntime.end = 0.01\n"
                   "output.dir = %s\n" % (tmp_path / "out"))
    code, out = run(["--config", str(cfg), "--cells", "6"], capsys)
    assert code == EXIT_OK and "l1 error vs exact" in out.out
    assert json.loads((tmp_path / "out" / "summary.json").read_text())["cells"] == [6, 6]


def test_convergence_mode(capsys):
    code, out = run(["--example", "4", "--degree", "1", "--tend", "0.01", "--convergence", "4,8"], capsys)
    assert code == EXIT_OK and "order" in out.out


def test_fault_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("BALANCEDG_OUT", raising=False)
    code, out = run(["--example", "2", "--cells", "100", "--limiter", "off", "--out", str(tmp_path)], capsys)
    assert code == EXIT_FAULT and "fault" in out.out
    assert json.loads((tmp_path / "summary.json").read_text())["status"] == "fault"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "balancedg", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "usage" in res.stdout


def test_repeated_runs_print_identical_numbers(capsys, monkeypatch):
    monkeypatch.delenv("BALANCEDG_OUT", raising=False)
    argv = ["--example", "7", "--cells", "6", "--degree", "2", "--tend", "0.005"]
    _, a = run(argv, capsys)
    _, b = run(argv, capsys)
    strip = [line for line in a.out.splitlines() if "wall time" not in line]
    assert strip == [line for line in b.out.splitlines() if "wall time" not in line]
