import math

import numpy as np
import pytest

from graphnls.energy import (
    EnergyOperator,
    default_gn_constants,
    el_residual,
    energy_gradient,
    energy_report,
    energy_value,
    gn_check,
    require_p,
)
from graphnls.functions import GraphFunction, Mesh, interpolate, kinetic_energy, project_mass
from graphnls.graphs import double_bridge, line_graph, metric_graph
from graphnls.solver import soliton_profile


def test_require_p_window():
    require_p(3.0)
    require_p(5.9)
    for bad in (2.0, 6.0, 7.0, 1.5):
        with pytest.raises(ValueError):
            require_p(bad)


def test_constant_energy_closed_form():
    # u = 1 on line_graph(2) with R=5: kinetic 0, potential over the core only
    mesh = Mesh(line_graph(2.0), h_max=0.02, r_cut=5.0)
    u = GraphFunction.constant(mesh, 1.0)
    for p in (2.5, 4.0):
        rep = energy_report(u, p)
        assert rep.kinetic == 0.0
        assert rep.potential == pytest.approx(2.0 / p, rel=1e-12)
        assert rep.total_energy == pytest.approx(-2.0 / p, rel=1e-12)
        assert rep.mass == pytest.approx(12.0, rel=1e-12)


def test_energy_scalar_scaling_identity():
    mesh = Mesh(double_bridge(0.8, 1.2), h_max=0.05, r_cut=4.0)
    rng = np.random.default_rng(5)
    u = GraphFunction(mesh, rng.standard_normal(mesh.n_dofs))
    p = 3.3
    rep = energy_report(u, p)
    for sigma in (0.5, 1.7):
        expected = sigma**2 * rep.kinetic - sigma**p * rep.potential
        assert energy_value(sigma * u, p) == pytest.approx(expected, rel=1e-12)


def test_uniform_nonlinearity_flag():
    mesh = Mesh(line_graph(1.0), h_max=0.05, r_cut=3.0)
    u = GraphFunction.constant(mesh, 1.0)
    op_core = EnergyOperator(mesh, 3.0)
    op_full = EnergyOperator(mesh, 3.0, uniform_nonlinearity=True)
    assert op_core.potential_integral(u.values) == pytest.approx(1.0, rel=1e-12)
    assert op_full.potential_integral(u.values) == pytest.approx(7.0, rel=1e-12)


def test_gradient_matches_finite_differences():
    mesh = Mesh(double_bridge(0.8, 1.1), h_max=0.08, r_cut=5.0)
    rng = np.random.default_rng(17)
    eps = 1e-5
    for p in (2.5, 3.0, 4.0, 5.5):
        u = GraphFunction(mesh, rng.standard_normal(mesh.n_dofs))
        g = energy_gradient(u, p).values
        for _ in range(5):
            d = rng.standard_normal(mesh.n_dofs)
            fd = (
                energy_value(GraphFunction(mesh, u.values + eps * d), p)
                - energy_value(GraphFunction(mesh, u.values - eps * d), p)
            ) / (2 * eps)
            assert float(np.dot(g, d)) == pytest.approx(fd, rel=1e-4, abs=1e-10)


def test_gradient_is_exact_discrete_derivative():
    # the Simpson-rule potential is itself a smooth function of nodal values,
    # so at machine precision the analytic gradient must beat O(eps^2) noise
    mesh = Mesh(line_graph(1.0), h_max=0.2, r_cut=1.0)
    u = GraphFunction(mesh, np.linspace(0.5, 1.5, mesh.n_dofs))
    p = 4.0
    g = energy_gradient(u, p).values
    d = np.ones(mesh.n_dofs)
    h = 1e-6
    fd = (
        energy_value(GraphFunction(mesh, u.values + h * d), p)
        - energy_value(GraphFunction(mesh, u.values - h * d), p)
    ) / (2 * h)
    assert float(np.dot(g, d)) == pytest.approx(fd, rel=1e-9)


def test_gn_constants_by_half_line_count():
    C1, c1 = default_gn_constants(4.0, 1)
    C2, c2 = default_gn_constants(4.0, 2)
    assert c1 == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert C1 == pytest.approx(2.0, rel=1e-15)  # c^(p-2) at p=4
    assert c2 == 1.0 and C2 == 1.0
    C5, c5 = default_gn_constants(5.0, 2)
    assert C5 == 1.0 and c5 == 1.0


def test_gn_slack_nonnegative_for_decaying_functions():
    mesh = Mesh(line_graph(1.0), h_max=0.02, r_cut=10.0)
    placement = {
        "core": lambda x: x - 0.5,
        "lead1": lambda x: -0.5 - x,
        "lead2": lambda x: 0.5 + x,
    }
    u = interpolate(mesh, lambda t: 1.0 / np.cosh(2.0 * t), placement)
    for p in (3.0, 4.5):
        slack_p, slack_inf = gn_check(u, p)
        assert slack_p >= -1e-10
        assert slack_inf >= -1e-10


def test_gn_equality_case_exponential():
    # e^{-|x|} saturates the sup-norm bound with c = 1 on a two-lead line
    mesh = Mesh(line_graph(1.0), h_max=0.005, r_cut=16.0)
    placement = {
        "core": lambda x: x - 0.5,
        "lead1": lambda x: -0.5 - x,
        "lead2": lambda x: 0.5 + x,
    }
    u = interpolate(mesh, lambda t: np.exp(-np.abs(t)), placement)
    _, slack_inf = gn_check(u, 4.0, c=1.0)
    assert abs(slack_inf) < 1e-3


def test_energy_report_degenerate_flag():
    mesh = Mesh(line_graph(1.0), h_max=0.1, r_cut=2.0)
    u = GraphFunction.constant(mesh, 1.0)
    rep = energy_report(u, 3.0)
    assert rep.gn_degenerate  # zero kinetic energy
    v = GraphFunction(mesh, np.linspace(0.0, 1.0, mesh.n_dofs))
    assert not energy_report(v, 3.0).gn_degenerate


def test_el_residual_zero_function_raises():
    mesh = Mesh(line_graph(1.0), h_max=0.1, r_cut=2.0)
    with pytest.raises(ValueError):
        el_residual(GraphFunction.constant(mesh, 0.0), 3.0)


def soliton_graph_function(mesh, mu, p, L):
    placement = {
        "core": lambda x: x - L / 2.0,
        "lead1": lambda x: -L / 2.0 - x,
        "lead2": lambda x: L / 2.0 + x,
    }
    return interpolate(mesh, lambda t: soliton_profile(t, mu, p), placement)


def test_el_residual_of_full_line_soliton():
    # with the nonlinearity everywhere, the soliton solves the stationary
    # equation; interior residuals must vanish under refinement
    L, mu, p = 6.0, 1.0, 4.0
    prev = None
    for h in (0.04, 0.02, 0.01):
        mesh = Mesh(line_graph(L), h_max=h, r_cut=30.0)
        u = soliton_graph_function(mesh, mu, p, L)
        el = el_residual(u, p, uniform_nonlinearity=True)
        worst = max(el.interior_residuals.values())
        if prev is not None:
            assert worst < prev * 0.6  # better than first order
        prev = worst
        # multiplier matches the closed form lam = mu^2/16 at p=4
        assert el.lambda_estimate == pytest.approx(mu**2 / 16.0, rel=5e-3)
    assert prev < 5e-4


def test_kirchhoff_residual_flags_kinks():
    mesh = Mesh(line_graph(2.0), h_max=0.01, r_cut=6.0)
    placement = {
        "core": lambda x: x - 1.0,
        "lead1": lambda x: -1.0 - x,
        "lead2": lambda x: 1.0 + x,
    }
    # |t| has a kink at the core midpoint, which is not a vertex; smooth at vertices
    u = interpolate(mesh, lambda t: np.exp(-np.abs(t)), placement)
    el = el_residual(u, 3.0)
    # vertices v1, v2 sit at |t| = 1 where e^{-|t|} is smooth: small residual
    assert max(el.kirchhoff_residuals.values()) < 5e-4

    # now center the kink exactly at vertex v1 (t = 0 there)
    placement2 = {
        "core": lambda x: x,
        "lead1": lambda x: -np.asarray(x, dtype=float),
        "lead2": lambda x: 2.0 + x,
    }
    w = interpolate(mesh, lambda t: np.exp(-np.abs(t)), placement2)
    el2 = el_residual(w, 3.0)
    # outgoing slopes at v1: -1 along the core, -1 along the lead -> |sum| = 2
    assert el2.kirchhoff_residuals["v1"] == pytest.approx(2.0, rel=1e-2)


def test_lambda_least_squares_agrees_with_pairing():
    L, mu, p = 6.0, 1.0, 4.0
    mesh = Mesh(line_graph(L), h_max=0.01, r_cut=30.0)
    u = soliton_graph_function(mesh, mu, p, L)
    el = el_residual(u, p, uniform_nonlinearity=True)
    assert el.lambda_lsq == pytest.approx(el.lambda_estimate, rel=1e-3)


def test_gradient_core_localization():
    # off the core the equation is linear: gradient there must not depend on p
    mesh = Mesh(line_graph(1.0), h_max=0.05, r_cut=4.0)
    rng = np.random.default_rng(23)
    u = GraphFunction(mesh, rng.standard_normal(mesh.n_dofs))
    g3 = energy_gradient(u, 3.0).values
    g5 = energy_gradient(u, 5.0).values
    interior_lead = mesh.edge_dofs["lead1"][2:]
    assert np.allclose(g3[interior_lead], g5[interior_lead], atol=1e-14)
    core_interior = mesh.edge_dofs["core"][1:-1]
    assert not np.allclose(g3[core_interior], g5[core_interior], atol=1e-8)


def test_single_half_line_graph_energy():
    # half-line with a unit segment core: mass of e^{-x} tail plus segment
    g = metric_graph(["a", "b"], [("seg", "a", "b", 1.0)], [("l", "b")])
    mesh = Mesh(g, h_max=0.01, r_cut=14.0)
    u = interpolate(
        mesh, lambda t: np.exp(-np.maximum(t - 1.0, 0.0)), {"seg": lambda x: x, "l": lambda x: 1.0 + x}
    )
    rep = energy_report(u, 3.0)
    assert rep.mass == pytest.approx(1.0 + 0.5, rel=1e-4)  # 1 + int e^{-2x}
    assert rep.potential == pytest.approx(1.0 / 3.0, rel=1e-6)  # core value 1
    assert rep.kinetic == pytest.approx(0.5 * 0.5, rel=1e-3)  # half of int e^{-2x}
