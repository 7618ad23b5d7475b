"""Acceptance criteria 1-10.

Each test prints one ``PASS``/``FAIL`` line.  Run directly with
``python3 tests/test_acceptance.py`` for the summary alone.
"""
import math
import sys

import numpy as np
import pytest

from polyham import solver
from polyham.cli import main
from polyham.exterior import Polyvector, graph_tangent, is_decomposable, plucker_residuals
from polyham.lagrangian import QuadricVariety, homogenize
from polyham.legendre import ImplicitSurface, crit1_residual, crit2_order, double_dual_check
from polyham.models import derive_surface, ed_membership, electrodynamics_1p1, kg_1p1, scalar_ndim
from polyham.motion import build_motion_system, redundancy_check, sample_consistent_jets
from polyham.polynomial import Polynomial

_lines = []


def report(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    _lines.append(line)
    if _capsys is not None:
        with _capsys.disabled():
            print("\n" + line)
    return ok


_capsys = None


@pytest.fixture(autouse=True)
def _terminal(capsys):
    global _capsys
    _capsys = capsys
    yield
    _capsys = None


def unit_lead(p: Polynomial, name: str) -> Polynomial:
    key = tuple(int(v == name) for v in p.variables)
    return p * (1.0 / p.terms[key])


def scalar_closed_form(variables, signs, m):
    """``Pphi + 1/2 sum_i s_i (P^i)^2 + 1/2 m^2 phi^2`` for a diagonal metric."""
    terms = [({"Pphi": 1}, 1.0), ({"phi": 2}, 0.5 * m * m)]
    terms += [({f"P{i}": 2}, 0.5 * s) for i, s in enumerate(signs)]
    return Polynomial.from_monomials(variables, terms)


def test_criterion_1_kg_surface(tmp_path):
    assert main(["derive", "kg1p1", "--out", str(tmp_path)]) == 0
    eta = ImplicitSurface.from_json((tmp_path / "surface_kg1p1.json").read_text()).eta
    dist = unit_lead(eta, "Pphi").distance(scalar_closed_form(eta.variables, (1.0, -1.0), 0.0))
    assert report(1, dist <= 1e-12, f"KG surface coefficient distance {dist:.2e} <= 1e-12")


def test_criterion_2_ndim_surface():
    m = 1.3
    worst = 0.0
    for signs in ((1.0, -1.0), (1.0, -1.0, -1.0)):
        model = scalar_ndim(np.diag(signs), mass=m)
        eta = derive_surface(model)[0].eta
        worst = max(worst, unit_lead(eta, "Pphi").distance(scalar_closed_form(eta.variables, signs, m)))
    assert report(2, worst <= 1e-12, f"n-dim scalar surfaces, distance {worst:.2e} <= 1e-12")


def test_criterion_3_ed_membership():
    res = ed_membership(electrodynamics_1p1(0.25), 1000, np.random.default_rng(2024))
    worst = float(res.max())
    assert report(3, worst <= 1e-9, f"ED dual membership, 1000 samples, max relative {worst:.2e} <= 1e-9")


def test_criterion_4_crit1_crit2():
    rng = np.random.default_rng(4)
    models = [kg_1p1(1.0), scalar_ndim(np.diag([1.0, -1.0, -1.0]), mass=1.0), electrodynamics_1p1(0.25)]
    worst1 = 0.0
    orders = []
    for k in range(1000):
        model = models[k % 3]
        Lam = homogenize(model.lagrangian)
        f = rng.normal(size=(model.n_fields, model.n_worldsheet))
        x = rng.uniform(-1, 1, model.n_worldsheet)
        phi = rng.uniform(-1, 1, model.n_fields)
        xi = graph_tangent(f) * rng.uniform(0.5, 2.0)
        worst1 = max(worst1, crit1_residual(Lam, xi, x, phi))
        if k < 60:
            d = rng.normal(size=f.shape)
            orders.append(crit2_order(Lam, f, d / np.linalg.norm(d), x=x, phi=phi))
    dev = max(abs(o - 2.0) for o in orders)
    ok = worst1 <= 1e-12 and dev <= 0.1
    assert report(4, ok, f"Crit1 max relative {worst1:.2e} <= 1e-12 on 1000 jets; "
                         f"Crit2 orders in [{min(orders):.3f}, {max(orders):.3f}]")


def test_criterion_5_double_dual():
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in range(100):
        n = 3 + k % 5
        B = rng.normal(size=(n, n))
        Q = B + B.T
        if abs(np.linalg.det(Q)) < 1e-3 * np.abs(Q).max() ** n:
            Q += n * np.eye(n)
        worst = max(worst, double_dual_check(QuadricVariety(Q, tuple(f"X{i}" for i in range(n)))))
    assert report(5, worst <= 1e-10, f"double dual of 100 quadrics, distance {worst:.2e} <= 1e-10")


def test_criterion_6_redundancy():
    cases = [(kg_1p1(1.0), ["Part2_4", "Part2_5"]),
             (scalar_ndim(np.diag([1.0, -1.0, -1.0]), mass=1.0), ["HE4[0]", "HE4[1]", "HE4[2]"]),
             (electrodynamics_1p1(0.25), ["HEEM6", "HEEM9", "HEEM10"])]
    worst_red = worst_ind = 0.0
    for seed, (model, tags) in enumerate(cases):
        system = build_motion_system(model.expected_surface, model)
        assert set(tags) == set(system.redundant)
        rep = redundancy_check(system, sample_consistent_jets(system, 200, np.random.default_rng(60 + seed)))
        worst_ind = max(worst_ind, rep.worst(system.independent))
        worst_red = max(worst_red, rep.worst(tags))
    ok = worst_red <= 1e-9 and worst_ind <= 1e-12
    assert report(6, ok, f"redundant slots {worst_red:.2e} <= 1e-9 where independent ones hold ({worst_ind:.1e})")


def test_criterion_7_dynamics_oracle():
    model = kg_1p1(1.0)
    k = 2 * math.pi
    w = math.sqrt(k * k + 1)
    gaps = []
    for n in (64, 128, 256):
        h = 1.0 / n
        x = h * np.arange(n)
        phi0, v0 = np.cos(k * x), w * np.sin(k * x)
        a = solver.run(model, solver.kg_initial(model, phi0, v0, h), 1.0, h / 2).final.fields["phi"]
        b = solver.run_reference(model, solver.reference_initial(model, phi0, v0, h, h / 2), 1.0).phi
        gaps.append(math.sqrt(h * np.sum((a - b) ** 2)))
    ratios = [gaps[0] / gaps[1], gaps[1] / gaps[2]]
    ok = all(3.5 <= r <= 4.5 for r in ratios)
    assert report(7, ok, "Hamiltonian vs Lagrangian L2 gap ratios " + ", ".join(f"{r:.4f}" for r in ratios))


def test_criterion_8_dispersion():
    model = kg_1p1(1.0)
    k = 2.0
    length = 2 * math.pi / k
    s = solver.plane_wave(model, round(256 * length), length, k)
    t, y = solver.probe_series(model, s, 10.0, s.h / 2)
    w = solver.measure_frequency(t, y)
    err = abs(w / math.sqrt(5.0) - 1)
    assert report(8, err <= 0.01, f"frequency {w:.6f} vs sqrt(5), relative error {err:.2e} <= 1e-2")


def test_criterion_9_ed_conservation():
    model = electrodynamics_1p1(0.25)
    s = solver.ed_initial(model, 256, 1.0, 0.7, np.random.default_rng(9))
    T = 1.0
    traj = solver.run(model, s, T, s.h / 2, stride=32)
    rate = max(traj.diagnostics["f01_spread"]) / T
    assert report(9, rate <= 1e-8, f"F01 spread {rate:.2e} per unit time <= 1e-8")


def test_criterion_10_decomposability():
    rng = np.random.default_rng(10)
    shapes = [(1, 2), (2, 2), (3, 2), (1, 3), (2, 3), (2, 4)]
    passed = 0
    for k in range(600):
        n_fields, N = shapes[k % len(shapes)]
        v = graph_tangent(rng.normal(size=(n_fields, N)) * rng.uniform(0.1, 10))
        passed += is_decomposable(v, 1e-10)
    witness = Polyvector(4, 2, {(0, 1): 1.0, (2, 3): 1.0})
    w_res = max(abs(r) for r in plucker_residuals(witness))
    ok = passed == 600 and not is_decomposable(witness, 1e-10)
    assert report(10, ok, f"{passed}/600 graph tangents decomposable; witness residual {w_res:g}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
