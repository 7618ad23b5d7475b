import csv
import math

import numpy as np
import pytest

from polyham import kernels, solver
from polyham.errors import ConfigurationError, UnsupportedKindError
from polyham.models import electrodynamics_1p1, kg_1p1, scalar_ndim
from polyham.polynomial import Polynomial

TWO_PI = 2 * math.pi


def exact_wave(x, t, k, m):
    w = math.sqrt(k * k + m * m)
    return np.cos(k * x - w * t), w * np.sin(k * x - w * t)


def kg_pair(model, nodes, k, m, dt):
    h = 1.0 / nodes
    x = h * np.arange(nodes)
    phi0, v0 = exact_wave(x, 0.0, k, m)
    return solver.kg_initial(model, phi0, v0, h), solver.reference_initial(model, phi0, v0, h, dt), x


class TestKleinGordon:
    def test_static_field_is_fixed(self):
        model = kg_1p1(0.0)
        s = solver.kg_initial(model, np.full(32, 0.4), np.zeros(32), 1 / 32)
        out = solver.run(model, s, 1.0, 1 / 64).final
        assert np.array_equal(out.fields["phi"], s.fields["phi"])
        assert np.array_equal(out.momenta["P0"], s.momenta["P0"])
        ref = solver.run_reference(model, solver.reference_initial(model, np.full(32, 0.4), np.zeros(32), 1 / 32,
                                                                   1 / 64), 1.0)
        assert np.array_equal(ref.phi, np.full(32, 0.4))

    def test_returns_after_one_period(self):
        model = kg_1p1(0.0)
        errs = []
        for nodes in (64, 128):
            s = solver.plane_wave(model, nodes, TWO_PI, 1.0)
            out = solver.run(model, s, TWO_PI, (TWO_PI / nodes) / 2).final
            errs.append(np.abs(out.fields["phi"] - s.fields["phi"]).max())
        assert errs[1] < errs[0] / 3.5
        assert errs[1] < 5e-3

    def test_second_order_against_exact_solution(self):
        model = kg_1p1(1.0)
        k = TWO_PI
        ham, ref = [], []
        hs = [1 / 64, 1 / 128, 1 / 256]
        for h in hs:
            n = round(1 / h)
            s, r, x = kg_pair(model, n, k, 1.0, h / 2)
            exact, _ = exact_wave(x, 1.0, k, 1.0)
            ham.append(np.sqrt(h * np.sum((solver.run(model, s, 1.0, h / 2).final.fields["phi"] - exact) ** 2)))
            ref.append(np.sqrt(h * np.sum((solver.run_reference(model, r, 1.0).phi - exact) ** 2)))
        for errs in (ham, ref):
            slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
            assert slope == pytest.approx(2.0, abs=0.15)

    def test_agrees_with_reference(self):
        model = kg_1p1(1.0)
        gaps = []
        for n in (32, 64):
            h = 1 / n
            s, r, _ = kg_pair(model, n, TWO_PI, 1.0, h / 2)
            a = solver.run(model, s, 1.0, h / 2).final.fields["phi"]
            b = solver.run_reference(model, r, 1.0).phi
            gaps.append(np.sqrt(h * np.sum((a - b) ** 2)))
        assert 3.5 <= gaps[0] / gaps[1] <= 4.5

    def test_surface_drift_is_second_order(self):
        model = kg_1p1(1.0)
        drift = []
        for n in (64, 128):
            s, _, _ = kg_pair(model, n, TWO_PI, 1.0, 0.5 / n)
            traj = solver.run(model, s, 1.0, 0.5 / n, stride=8)
            drift.append(max(traj.diagnostics["eta_max"]))
        assert drift[0] / drift[1] == pytest.approx(4.0, rel=0.15)
        assert drift[1] < 1e-2

    def test_energy_over_ten_periods(self):
        model = kg_1p1(1.0)
        k, h = TWO_PI, 1 / 128
        w = math.sqrt(k * k + 1)
        s, _, _ = kg_pair(model, 128, k, 1.0, h / 2)
        traj = solver.run(model, s, 10 * TWO_PI / w, h / 2, stride=50)
        e = np.array(traj.diagnostics["energy"])
        assert np.abs(e / e[0] - 1).max() <= 1e-3

    @pytest.mark.parametrize("backend", ["python", "cython"])
    def test_time_reversal(self, backend):
        if backend == "cython" and kernels.BACKEND != "cython":
            pytest.skip("compiled kernels not built")
        impl = kernels.get_backend(backend)
        model = kg_1p1(1.0)
        s = solver.plane_wave(model, 128, 1.0, TWO_PI)
        phi, P0, Pphi = (a.copy() for a in (s.fields["phi"], s.momenta["P0"], s.momenta["Pphi"]))
        dt = s.h / 2
        impl.kg_hamiltonian_steps(phi, P0, Pphi, s.h, dt, 1.0, 200)
        impl.kg_hamiltonian_steps(phi, P0, Pphi, s.h, -dt, 1.0, 200)
        for a, b in ((phi, s.fields["phi"]), (P0, s.momenta["P0"]), (Pphi, s.momenta["Pphi"])):
            assert np.abs(a - b).max() <= 1e-10

    def test_kernel_matches_generic_step(self):
        model = kg_1p1(1.0)
        s = solver.plane_wave(model, 64, 1.0, TWO_PI)
        dt = s.h / 2
        fast = solver.run(model, s, 40 * dt, dt).final
        slow = s
        for _ in range(40):
            slow = solver.step_hamiltonian(model, slow, dt)
        for key in ("P0", "P1", "Pphi"):
            assert np.allclose(fast.momenta[key], slow.momenta[key], rtol=0, atol=1e-12)
        assert np.allclose(fast.fields["phi"], slow.fields["phi"], rtol=0, atol=1e-12)

    def test_generic_potential_path(self):
        model = kg_1p1(0.0)
        base = model.phase.base_names
        quartic = Polynomial.from_monomials(base, [({"phi": 2}, -0.5), ({"phi": 4}, -0.1)])
        model = scalar_ndim(np.diag([1.0, -1.0]), quartic)
        assert solver.mass_squared(model) is None
        s = solver.kg_initial(model, 0.3 * np.cos(TWO_PI * np.arange(64) / 64), np.zeros(64), 1 / 64)
        traj = solver.run(model, s, 0.5, 1 / 128, stride=16)
        assert max(traj.diagnostics["eta_max"]) < 1e-2
        e = np.array(traj.diagnostics["energy"])
        assert np.abs(e / e[0] - 1).max() < 1e-3

    def test_run_bookkeeping(self):
        model = kg_1p1(1.0)
        s = solver.plane_wave(model, 32, 1.0, TWO_PI)
        traj = solver.run(model, s, 0.3, 0.01, stride=4)
        t = traj.times
        assert np.all(np.diff(t) > 0)
        assert t[-1] == pytest.approx(0.3, abs=1e-14)
        assert traj.dt == pytest.approx(0.3 / 30)
        assert len(solver.run(model, s, 0.0, 0.01).snapshots) == 1

    def test_cfl_enforced(self):
        model = kg_1p1(0.0)
        s = solver.plane_wave(model, 32, 1.0, TWO_PI)
        with pytest.raises(ConfigurationError):
            solver.run(model, s, 1.0, 2 * s.h)
        with pytest.raises(ConfigurationError):
            solver.step_hamiltonian(model, s, 0.0)
        with pytest.raises(ConfigurationError):
            solver.run(model, s, -1.0, s.h / 2)

    def test_three_dimensional_model_not_simulated(self):
        with pytest.raises(UnsupportedKindError):
            solver.kg_initial(scalar_ndim(np.diag([1.0, -1.0, -1.0])), np.zeros(8), np.zeros(8), 0.1)


class TestFrequency:
    def test_dispersion_coarse(self):
        model = kg_1p1(1.0)
        k = 2.0
        s = solver.plane_wave(model, 128, TWO_PI / k, k)
        t, y = solver.probe_series(model, s, 10.0, s.h / 2)
        assert solver.measure_frequency(t, y) == pytest.approx(math.sqrt(5.0), rel=0.01)

    def test_sine_series(self):
        t = np.linspace(0, 20, 4001)
        assert solver.measure_frequency(t, np.cos(1.7 * t + 0.3)) == pytest.approx(1.7, rel=1e-5)

    def test_too_few_crossings(self):
        with pytest.raises(ValueError):
            solver.measure_frequency(np.linspace(0, 1, 10), np.cos(np.linspace(0, 1, 10)))


class TestElectrodynamics:
    def test_field_strength_conserved(self):
        model = electrodynamics_1p1(0.25)
        s = solver.ed_initial(model, 128, 1.0, 0.7, np.random.default_rng(0))
        traj = solver.run(model, s, 1.0, s.h / 2, stride=16)
        assert max(traj.diagnostics["f01_spread"]) <= 1e-8
        assert np.allclose(traj.final.diag["F01"], 0.7, atol=1e-10)
        assert max(traj.diagnostics["eta_max"]) <= 1e-10

    def test_constant_potential(self):
        model = electrodynamics_1p1(0.25, 0.5)
        s = solver.ed_initial(model, 64, 1.0, -0.3, np.random.default_rng(1))
        traj = solver.run(model, s, 0.5, s.h / 2, stride=8)
        assert max(traj.diagnostics["f01_spread"]) <= 1e-8

    def test_source_changes_field_strength(self):
        base = ("x0", "x1", "A0", "A1")
        model = electrodynamics_1p1(0.25, Polynomial.from_monomials(base, [({"A1": 1}, 0.4)]))
        s = solver.ed_initial(model, 32, 1.0, 0.0, np.random.default_rng(2))
        out = solver.run(model, s, 1.0, s.h / 2).final
        # d0 F01 = dPhi/dA1 / (2C) = 0.4
        S = out.momenta["P_A0x0"] + out.momenta["P_A1x1"]
        assert np.allclose(S / (2 * model.C), 0.4, atol=1e-12)
        # the diagnostic is the last half-step value
        assert np.allclose(out.diag["F01"], 0.4 * (1 - s.h / 4), atol=1e-12)


class TestExport:
    def test_trajectory_columns_and_precision(self, tmp_path):
        model = kg_1p1(1.0)
        s = solver.plane_wave(model, 16, 1.0, TWO_PI)
        traj = solver.run(model, s, 0.1, s.h / 2, stride=2)
        path = tmp_path / "traj.csv"
        solver.write_trajectory_csv(model, traj, path, "seed=3")
        lines = path.read_text().splitlines()
        assert lines[0] == "# seed=3"
        rows = list(csv.reader(lines[1:]))
        assert rows[0] == ["t", "node", "phi", "P0", "P1", "Pphi", "eta"]
        assert len(rows) == 1 + 16 * len(traj.snapshots)
        assert float(rows[1][2]) == s.fields["phi"][0]
        assert float(rows[5][3]) == s.momenta["P0"][4]

    def test_electrodynamics_columns(self, tmp_path):
        model = electrodynamics_1p1()
        s = solver.ed_initial(model, 8, 1.0, 0.7, np.random.default_rng(0))
        traj = solver.run(model, s, 0.1, s.h / 2)
        solver.write_diagnostics_csv(traj, tmp_path / "d.csv")
        solver.write_trajectory_csv(model, traj, tmp_path / "t.csv")
        head = (tmp_path / "t.csv").read_text().splitlines()[0].split(",")
        assert head[:4] == ["t", "node", "A0", "A1"] and head[-2:] == ["eta", "F01"]
        diag = (tmp_path / "d.csv").read_text().splitlines()[0]
        assert diag == "t,energy,eta_max,f01_spread"

    def test_deterministic(self, tmp_path):
        model = electrodynamics_1p1()
        for name in ("a", "b"):
            s = solver.ed_initial(model, 16, 1.0, 0.7, np.random.default_rng(9))
            solver.write_trajectory_csv(model, solver.run(model, s, 0.2, s.h / 2), tmp_path / name)
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
