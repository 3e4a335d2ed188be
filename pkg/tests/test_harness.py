import json
import math

import numpy as np
import pytest
import sympy

from wbeuler.core import CartesianGrid, RunConfig, convergence_rate
from wbeuler.harness import cli
from wbeuler.harness import scenarios as sc
from wbeuler.harness.experiments import (
    SCENARIOS, Experiment, experiment_from_dict, load_experiment, run_experiment,
)
from wbeuler.harness.io import ErrorTable, read_error_csv, read_field_dump, write_field_dump
from wbeuler.physics import NonPhysicalStateError


class TestScenarios:
    def test_manufactured_phase_zero(self):
        for k in (1, 5):
            rho, v, p = sc.manufactured_1d(np.array([0.3]), t=0.3, k=k, u0=1.0)
            assert rho[0] == pytest.approx(1.0)
            assert p[0] == pytest.approx(4.5 + 1 / (5 * k * math.pi))
            assert v[0, 0] == 1.0

    def test_manufactured_momentum_balance(self):
        x, t, k, u0 = sympy.symbols("x t k u0")
        s = x - u0 * t
        rho = 1 + sympy.sin(k * sympy.pi * s) / 5
        p = sympy.Rational(9, 2) - s + sympy.cos(k * sympy.pi * s) / (5 * k * sympy.pi)
        assert sympy.simplify(sympy.diff(p, x) + rho) == 0
        xs = np.linspace(0, 2, 101)
        h = 1e-6
        _, _, pp = sc.manufactured_1d(xs + h, 0.1, 5, 1)
        _, _, pm = sc.manufactured_1d(xs - h, 0.1, 5, 1)
        r, _, _ = sc.manufactured_1d(xs, 0.1, 5, 1)
        assert np.max(np.abs((pp - pm) / (2 * h) + r)) <= 1e-8

    def test_manufactured_2d_steady_without_velocity(self):
        x, y = np.meshgrid(np.linspace(0, 2, 7), np.linspace(0, 2, 7))
        a = sc.manufactured_2d(x, y, 0.0, 1, 0.0, 0.0)
        b = sc.manufactured_2d(x, y, 0.7, 1, 0.0, 0.0)
        for u, v in zip(a, b):
            np.testing.assert_array_equal(u, v)

    def test_perturbed_states_reduce_to_equilibria(self):
        x = np.linspace(-1, 2, 11)
        rho, v, p = sc.perturbed_isothermal_1d(x, 0.0)
        np.testing.assert_array_equal(rho, np.exp(-x * x))
        np.testing.assert_array_equal(p, rho)
        X, Y = np.meshgrid(x, x)
        rho, v, p = sc.perturbed_isothermal_2d(X, Y, 0.0)
        np.testing.assert_allclose(p, np.exp(-1.21 * (X + Y)))
        np.testing.assert_allclose(rho, 1.21 * p)

    def test_rayleigh_taylor_pressure_continuity(self):
        theta = np.linspace(-3, 3, 50)
        eps = 1e-12
        for r in (0.5, 0.5 * (1 + 0.02 * np.cos(20 * theta))):
            _, _, pin = sc.rayleigh_taylor((r - eps) * np.cos(theta), (r - eps) * np.sin(theta))
            _, _, pout = sc.rayleigh_taylor((r + eps) * np.cos(theta), (r + eps) * np.sin(theta))
            np.testing.assert_allclose(pin, pout, rtol=1e-10)

    def test_rayleigh_taylor_density_follows_wiggled_interface(self):
        theta = np.linspace(-3, 3, 50)
        rI = 0.5 * (1 + 0.02 * np.cos(20 * theta))
        eps = 1e-9
        rin, _, _ = sc.rayleigh_taylor((rI - eps) * np.cos(theta), (rI - eps) * np.sin(theta))
        rout, _, _ = sc.rayleigh_taylor((rI + eps) * np.cos(theta), (rI + eps) * np.sin(theta))
        assert np.all(rout - rin > 0.09)

    def test_rayleigh_taylor_density_jump(self):
        eps = 1e-12
        rin, _, _ = sc.rayleigh_taylor(np.array([0.5 - eps]), np.array([0.0]), eta=0.0)
        rout, _, _ = sc.rayleigh_taylor(np.array([0.5 + eps]), np.array([0.0]), eta=0.0)
        assert rout[0] - rin[0] == pytest.approx(0.1, rel=1e-9)

    def test_rayleigh_taylor_degenerate_case(self):
        X, Y = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9))
        rho, v, p = sc.rayleigh_taylor(X, Y, eta=0.0, drho=0.0)
        r = np.hypot(X, Y)
        np.testing.assert_allclose(rho, np.exp(-r), rtol=1e-15)
        np.testing.assert_allclose(p, np.exp(-r), rtol=1e-15)

    def test_sound_crossing_time(self):
        c = sc.isothermal_sound_speed(1.0, 1.4)
        assert sc.sound_crossing_time(c, 0, 1) == pytest.approx(2 / math.sqrt(1.4))
        assert sc.sound_crossing_time(c, 0, 1) == pytest.approx(1.690, abs=1e-3)
        assert sc.sound_crossing_time(lambda x: 2.0 + 0 * x, 0, 1) == pytest.approx(1.0)
        assert sc.sound_crossing_time(c, 0, 0.5) == pytest.approx(0.5 * sc.sound_crossing_time(c, 0, 1))
        with pytest.raises(ValueError):
            sc.sound_crossing_time(lambda x: 0 * x, 0, 1)


class TestReports:
    def test_csv_layout_and_rates(self, tmp_path):
        t = ErrorTable(("rho", "mx", "E"))
        t.add(40, [1e-2, 2e-2, 3e-2])
        t.add(80, [2.5e-3, 5e-3, 1e-2])
        t.add(160, [3e-4, 1e-3, 2e-3])
        text = t.to_csv(tmp_path / "t.csv")
        lines = text.splitlines()
        assert lines[0] == "N,err_rho,rate_rho,err_mx,rate_mx,err_E,rate_E"
        assert lines[1] == "40,1.00000e-02,,2.00000e-02,,3.00000e-02,"
        head, rows = read_error_csv(tmp_path / "t.csv")
        assert head == lines[0].split(",")
        for prev, row in zip(rows, rows[1:]):
            for c in range(3):
                rate = float(row[2 + 2 * c])
                want = convergence_rate(float(prev[1 + 2 * c]), float(row[1 + 2 * c]))
                assert rate == pytest.approx(want, rel=1e-5)

    def test_2d_header(self):
        t = ErrorTable(("rho", "mx", "my", "E"))
        assert ",".join(t.header()) == "N,err_rho,rate_rho,err_mx,rate_mx,err_my,rate_my,err_E,rate_E"

    def test_rejects_wrong_width(self):
        with pytest.raises(ValueError):
            ErrorTable(("rho", "mx", "E")).add(10, [1.0, 2.0])

    def test_field_dump_round_trip(self, tmp_path):
        grid = CartesianGrid((0, -1), (1, 1), (3, 4), ghost=2)
        U = np.random.default_rng(0).random((4,) + grid.shape)
        pf = np.random.default_rng(1).random(grid.shape)
        path = tmp_path / "f.txt"
        write_field_dump(path, grid, U, pf, 0.1, 1.4)
        first = path.read_text().splitlines()[0].split()
        assert len(first) == 8 and first[:2] == ["3", "4"]
        meta, vals = read_field_dump(path)
        assert (meta["nx"], meta["ny"], meta["x0"], meta["dy"], meta["t"]) == (3, 4, 1 / 6, 0.5, 0.1)
        np.testing.assert_array_equal(vals[:4], U[(slice(None),) + grid.interior])
        np.testing.assert_array_equal(vals[4], pf[grid.interior])
        # second data row is cell (0, 1): x varies slowest
        row = np.array(path.read_text().splitlines()[2].split(), dtype=float)
        np.testing.assert_array_equal(row[:4], U[:, 2, 3])


class TestExperiments:
    def test_every_scenario_is_registered(self):
        assert set(SCENARIOS) == {
            "convergence-1d", "wellbalance-1d", "perturb-1d", "accuracy-2d", "wellbalance-2d",
            "perturb-2d", "rayleigh-taylor", "moving-accuracy", "moving-wellbalance", "custom",
        }

    def test_rejects_unknown_scenario_and_params(self):
        with pytest.raises(ValueError):
            Experiment("bogus")
        with pytest.raises(ValueError):
            Experiment("wellbalance-1d", params={"speed": 1})
        with pytest.raises(ValueError):
            Experiment("wellbalance-2d", RunConfig(order=5))

    def test_config_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"scenario": "wellbalance-1d", "order": 2, "grids": [10], "t_final": 0.1,
                                    "equilibrium": "polytropic", "params": {"hi": 0.5}}))
        exp = load_experiment(path)
        assert (exp.config.order, exp.grids, exp.parameters()["hi"]) == (2, (10,), 0.5)
        with pytest.raises(ValueError, match="unknown configuration"):
            experiment_from_dict({"scenario": "wellbalance-1d", "colour": "red"})
        with pytest.raises(ValueError):
            experiment_from_dict({"order": 3})

    def test_wellbalance_scenario(self):
        res = run_experiment(Experiment("wellbalance-1d", RunConfig(order=3, t_final=0.5), grids=(20,)))
        assert max(res.table.rows[0][1]) <= 1e-13

    def test_reproducible(self):
        exp = Experiment("perturb-1d", RunConfig(order=2), params={"A": 1e-3, "ref_cells_per_unit": 60}, grids=(20,))
        a, b = run_experiment(exp), run_experiment(exp)
        np.testing.assert_array_equal(a.fields[20], b.fields[20])
        assert a.metrics == b.metrics

    def test_zero_amplitude_perturbation_equals_wellbalance(self):
        cfg = RunConfig(order=3, t_final=0.25)
        pert = run_experiment(Experiment("perturb-1d", cfg, params={"A": 0.0}, grids=(20,)))
        wb_cfg = RunConfig(order=3, t_final=0.25, equilibrium="isothermal",
                           equilibrium_params={"phi": "x2", "T_eq": 1.0})
        wb = run_experiment(Experiment("wellbalance-1d", wb_cfg, params={"lo": -1.0, "hi": 2.0}, grids=(60,)))
        np.testing.assert_array_equal(pert.fields[20], wb.fields[60])

    def test_writes_outputs(self, tmp_path):
        cfg = RunConfig(order=3, t_final=0.02, output_dir=str(tmp_path))
        res = run_experiment(Experiment("wellbalance-2d", cfg, grids=(6, 12), name="wb2"))
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["wb2.csv", "wb2_N12.txt", "wb2_N6.txt"]
        meta, vals = read_field_dump(tmp_path / "wb2_N6.txt")
        assert vals.shape == (5, 6, 6) and meta["t"] == 0.02
        assert len(res.files) == 3

    def test_custom_scenario_and_abort_context(self):
        cfg = RunConfig(order=1, t_final=0.05, equilibrium="polytropic", equilibrium_params={"phi": "x+y"})
        res = run_experiment(Experiment("custom", cfg, params={"dim": 2, "A": 1e-3}, grids=(8,)))
        assert 0 < res.table.rows[0][1][0] < 1e-3
        bad = Experiment("custom", RunConfig(order=3, t_final=0.1), params={"A": -5.0}, grids=(10,))
        with pytest.raises(NonPhysicalStateError, match="custom"):
            run_experiment(bad)


class TestCli:
    def test_wellbalance_command(self, tmp_path, capsys):
        code = cli.main(["wellbalance", "--order", "2", "--grids", "10,20", "--t-final", "0.1",
                         "--equilibrium", "isothermal", "--equilibrium-param", "phi=\"sin2pix\"",
                         "--out", str(tmp_path), "--name", "w"])
        assert code == 0
        out = capsys.readouterr().out
        assert "wellbalance-1d" in out and "rate_rho" in out
        assert (tmp_path / "w.csv").exists()

    def test_run_command(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"scenario": "moving-wellbalance", "grids": [6], "t_final": 0.01}))
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "moving-wellbalance-q3-wb.csv").exists()

    def test_errors_give_exit_codes(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"scenario": "rt", "grids": [6]}))
        assert cli.main(["run", str(cfg)]) == 2
        assert "unknown scenario" in capsys.readouterr().err
        with pytest.raises(SystemExit):
            cli.main(["convergence", "--order", "4"])

    def test_parser_maps_subcommands(self):
        p = cli.build_parser()
        cases = {
            ("convergence",): "convergence-1d", ("convergence", "--dim", "2"): "accuracy-2d",
            ("perturb", "--dim", "2"): "perturb-2d", ("rt",): "rayleigh-taylor",
            ("moving",): "moving-wellbalance", ("moving", "--test", "accuracy"): "moving-accuracy",
        }
        for argv, scenario in cases.items():
            assert cli.experiment_from_args(p.parse_args(list(argv))).scenario == scenario
        exp = cli.experiment_from_args(p.parse_args(["moving", "--balance", "stationary", "--grids", "4,8"]))
        assert exp.parameters()["balance"] == "stationary" and exp.grids == (4, 8)
