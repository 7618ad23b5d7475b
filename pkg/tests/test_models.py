import numpy as np
import pytest

from polyham.errors import ConfigurationError, MembershipError, StructuralError, UnsupportedKindError
from polyham.exterior import graph_tangent
from polyham.lagrangian import custom, homogenize
from polyham.models import (
    GUESS_RENAMING,
    ModelSpec,
    by_name,
    derive_surface,
    ed_graph_point,
    ed_graph_polynomials,
    ed_membership,
    electrodynamics_1p1,
    guessed_surface_1p1,
    kg_1p1,
    rename,
    scalar_ndim,
)
from polyham.phase import scalar_phase
from polyham.polynomial import Polynomial


class TestScalarPresets:
    def test_massless_kg_surface(self):
        eta = kg_1p1(0.0).expected_surface.eta
        names = eta.variables
        expected = Polynomial.from_monomials(names, [({"Pphi": 1}, 1.0), ({"P0": 2}, 0.5), ({"P1": 2}, -0.5)])
        assert eta.distance(expected) == 0

    def test_guess_matches_after_renaming(self):
        guess = rename(guessed_surface_1p1(), GUESS_RENAMING)
        assert guess.distance(kg_1p1(0.0).expected_surface.eta) == 0

    def test_mass_potential(self):
        m = kg_1p1(1.0)
        assert m.potential_at([0.0, 0.0], [2.0]) == -2.0

    def test_negative_mass_rejected(self):
        with pytest.raises(ConfigurationError):
            kg_1p1(-1.0)

    def test_ndim_reduces_to_kg(self):
        a = scalar_ndim(np.diag([1.0, -1.0])).expected_surface.eta
        assert a.distance(kg_1p1(0.0).expected_surface.eta) == 0

    def test_sign_conjugated_metric(self):
        g = np.array([[1.0, 0.2, 0.1], [0.2, -1.0, 0.3], [0.1, 0.3, -1.0]])
        m = scalar_ndim(g)
        gcheck = np.linalg.inv(m.gcheck_lower)
        for i in range(3):
            for j in range(3):
                assert gcheck[i, j] == pytest.approx((-1) ** (i + j) * g[i, j])

    def test_euclidean_identity(self):
        m = scalar_ndim(np.eye(3))
        expected = np.array([[(-1.0) ** (i + j) * (i == j) for j in range(3)] for i in range(3)])
        assert np.allclose(m.gcheck_lower, expected)

    def test_degenerate_metric(self):
        with pytest.raises(ConfigurationError):
            scalar_ndim(np.diag([1.0, 0.0]))

    def test_asymmetric_metric(self):
        with pytest.raises(StructuralError):
            scalar_ndim(np.array([[1.0, 0.5], [0.0, -1.0]]))

    def test_phase_names(self):
        ph = scalar_phase(2)
        assert ph.momentum_names == ("P1", "P0", "Pphi")
        assert ph.volume_momentum == "Pphi"
        assert ph.surface_variables == ("x0", "x1", "phi", "P1", "P0", "Pphi")


class TestElectrodynamics:
    def test_coupling(self):
        assert electrodynamics_1p1(0.25).C == 0.5

    def test_zero_coupling_rejected(self):
        with pytest.raises(ConfigurationError):
            electrodynamics_1p1(0.0)

    def test_graph_relation(self):
        ed = electrodynamics_1p1(0.25, 0.6)
        F, pi = ed_graph_polynomials(ed)
        rng = np.random.default_rng(1)
        for _ in range(100):
            f = rng.normal(size=(2, 2))
            X = ed_graph_point(ed, f, rng.uniform(0.3, 3))
            assert abs(F(X)) <= 1e-12 * F.term_magnitude(X)
            assert abs(pi(X)) <= 1e-12 * pi.term_magnitude(X)

    def test_graph_polynomial_matches_field_strength(self):
        # on the graph chart X_A0x0 + X_A1x1 = F01 X_x0x1
        ed = electrodynamics_1p1()
        f = np.array([[0.3, -0.4], [1.2, 0.9]])
        v = graph_tangent(f)
        assert v[(0, 2)] + v[(1, 3)] == pytest.approx((f[1, 0] - f[0, 1]) * v[(2, 3)])
        Lam = homogenize(ed.lagrangian)
        assert Lam(v) == pytest.approx(ed.C * (f[1, 0] - f[0, 1]) ** 2)

    def test_tangents_satisfy_plucker(self):
        ed = electrodynamics_1p1()
        _, pi = ed_graph_polynomials(ed)
        rng = np.random.default_rng(2)
        for _ in range(200):
            X = ed_graph_point(ed, rng.normal(size=(2, 2)) * 3)
            assert abs(pi(X)) <= 1e-12 * max(1.0, pi.term_magnitude(X))

    def test_leading_part_is_deformed_plucker(self):
        # the cubic part of eta survives the limit Pi -> 0
        ed = electrodynamics_1p1(0.25)
        eta = ed.expected_surface.eta
        cubic = Polynomial(eta.variables, {k: v for k, v in eta.terms.items() if sum(k) == 3})
        v = {n: Polynomial.variable(eta.variables, n) for n in ed.phase.momentum_names}
        Q = v["P_A0A1"]
        expected = Q * (Q * v["P_x0x1"] - v["P_A0x0"] * v["P_A1x1"] + v["P_A0x1"] * v["P_A1x0"])
        assert cubic.distance(expected) == 0

    @pytest.mark.parametrize("phi0", [0.0, 0.7])
    def test_membership(self, phi0):
        ed = electrodynamics_1p1(0.25, phi0)
        res = ed_membership(ed, 300, np.random.default_rng(3))
        assert res.max() <= 1e-9

    def test_membership_with_field_dependent_potential(self):
        base = ("x0", "x1", "A0", "A1")
        pot = Polynomial.from_monomials(base, [({"A0": 2}, 0.3), ({"A1": 1, "x0": 1}, -0.2)])
        ed = electrodynamics_1p1(0.4, pot)
        assert ed_membership(ed, 200, np.random.default_rng(4)).max() <= 1e-9

    def test_wrong_surface_fails_membership(self):
        ed = electrodynamics_1p1(0.25)
        wrong = electrodynamics_1p1(0.3)
        bad = ModelSpec(ed.name, ed.kind, ed.phase, ed.metric, ed.potential, C0=ed.C0,
                        expected_surface=wrong.expected_surface)
        assert ed_membership(bad, 20, np.random.default_rng(5)).max() > 1e-3
        with pytest.raises(MembershipError):
            derive_surface(bad)


class TestDerive:
    @pytest.mark.parametrize("model", [kg_1p1(0.0), kg_1p1(1.0), scalar_ndim(np.diag([1.0, -1.0]), mass=1.0),
                                       scalar_ndim(np.diag([1.0, -1.0, -1.0]), mass=1.0),
                                       electrodynamics_1p1(0.25), electrodynamics_1p1(0.25, 0.7)],
                             ids=["kg0", "kg1", "nd2", "nd3", "ed", "ed-phi"])
    def test_regression(self, model):
        surface, log = derive_surface(model)
        assert surface.distance(model.expected_surface.canonical()) <= 1e-12
        steps = "".join(line[:3] for line in log)
        for tag in "abcde":
            assert f"({tag})" in steps

    def test_position_dependent_potential(self):
        base = ("x0", "x1", "x2", "phi")
        psi = Polynomial.from_monomials(base, [({"phi": 2, "x0": 1}, -0.4), ({"phi": 1, "x2": 1}, 0.3),
                                               ({"x1": 2}, 1.1)])
        model = scalar_ndim(np.diag([1.0, -1.0, -1.0]), psi)
        surface, _ = derive_surface(model)
        assert surface.distance(model.expected_surface) <= 1e-12

    def test_custom_kind_unsupported(self):
        L = custom(2, 1, lambda x, phi, J: 0.0)
        fake = ModelSpec("custom", L.kind, scalar_phase(2), np.eye(2), Polynomial(()))
        with pytest.raises(UnsupportedKindError):
            derive_surface(fake)


def test_lookup_by_name():
    assert by_name("kg1p1", mass=2.0).params["mass"] == 2.0
    assert by_name("scalar-ndim").n_worldsheet == 3
    assert by_name("ed1p1", c0=0.5).C == 1.0
    with pytest.raises(ConfigurationError):
        by_name("qed4")
