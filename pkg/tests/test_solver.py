"""Solver behavior against independently computed stationary states.

The reference energies below were produced by a two-parameter shooting
method on the stationary equation (amplitude and multiplier matched to the
decaying-tail condition and the mass constraint), integrated with an
adaptive RK at rtol 1e-12, an entirely different discretization from the
mesh descent under test. Agreement is limited by the P1 mesh (h = 0.02),
measured at roughly 1e-4 relative.
"""
import numpy as np
import pytest

from graphnls.functions import GraphFunction, Mesh, l2_norm_sq, linf_norm
from graphnls.graphs import double_bridge, line_graph, metric_graph, star_graph
from graphnls.solver import (
    INCONCLUSIVE,
    NEGATIVE_MINIMUM,
    ZERO_INFIMUM_SUSPECTED,
    SolverConfig,
    _verdict,
    dirichlet_line_min,
    existence_dichotomy,
    initializer_competitor,
    initializer_random,
    initializer_soliton,
    minimize,
    soliton_profile,
)

# (graph factory, p, truncation schedule, shooting energy, shooting multiplier)
SHOOTING_CASES = [
    (lambda: line_graph(1.0), 2.5, (20.0, 40.0), -0.0332399179, 0.1044398066),
    (lambda: line_graph(1.0), 3.0, (20.0, 40.0), -0.0070495399, 0.0378741300),
    (lambda: double_bridge(0.5, 0.5), 2.5, (20.0, 40.0), -0.0302621171, 0.0939914897),
    (lambda: double_bridge(0.5, 0.5), 3.0, (20.0, 40.0), -0.0063390671, 0.0332659619),
    # multiplier 0.022: slow tail, the drift rule needs the longer cuts
    (lambda: line_graph(3.0), 4.0, (40.0, 80.0), -0.0012982770, 0.0221966684),
    (lambda: star_graph((3.0,), half_lines_per_terminal=2), 4.0, (20.0, 40.0), -0.0266207548, 0.2483844135),
]


@pytest.mark.parametrize("factory,p,schedule,e_ref,lam_ref", SHOOTING_CASES)
def test_minimize_matches_shooting_oracle(factory, p, schedule, e_ref, lam_ref):
    cfg = SolverConfig(r_cut_schedule=schedule, h_max=0.02)
    res = minimize(factory(), 1.0, p, cfg)
    assert res.verdict == NEGATIVE_MINIMUM
    assert res.energy == pytest.approx(e_ref, rel=5e-4)
    assert res.el.lambda_estimate == pytest.approx(lam_ref, rel=5e-3)
    assert res.report.mass == pytest.approx(1.0, abs=1e-10)
    assert res.strictly_positive


def test_weakly_bound_state_needs_long_truncation():
    # p = 3.5 on line_graph(1): multiplier 0.00276, decay length about 19;
    # shooting energy -0.0002174268
    cfg = SolverConfig(r_cut_schedule=(20.0, 40.0, 80.0, 160.0), max_iters=8000)
    res = minimize(line_graph(1.0), 1.0, 3.5, cfg)
    assert res.verdict == NEGATIVE_MINIMUM
    assert res.energy == pytest.approx(-0.0002174268, rel=2e-3)
    assert res.el.lambda_estimate == pytest.approx(0.0027622728, rel=1e-2)


def test_zero_infimum_below_threshold():
    cfg = SolverConfig(r_cut_schedule=(10.0, 20.0, 40.0))
    res = minimize(line_graph(0.25), 1.0, 4.0, cfg)
    assert res.verdict == ZERO_INFIMUM_SUSPECTED
    energies = [row[1] for row in res.r_cut_table]
    assert energies[0] < energies[1] < energies[2] <= 0.0
    assert abs(energies[-1]) < 1e-3


def test_energy_trace_monotone():
    res = minimize(line_graph(1.0), 1.0, 3.0, SolverConfig(r_cut_schedule=(10.0,)))
    trace = res.energy_trace
    assert all(b <= a + 1e-15 for a, b in zip(trace, trace[1:]))


def test_minimize_rejects_bad_parameters():
    with pytest.raises(ValueError):
        minimize(line_graph(1.0), -1.0, 3.0)
    with pytest.raises(ValueError):
        minimize(line_graph(1.0), 1.0, 6.5)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(backtrack=1.5)
    with pytest.raises(ValueError):
        SolverConfig(r_cut_schedule=(20.0, 10.0))
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(initializer="fancy")


def test_determinism_with_seed():
    cfg = SolverConfig(
        r_cut_schedule=(6.0,), h_max=0.1, initializer="random", seed=42, max_iters=800
    )
    r1 = minimize(line_graph(1.0), 1.0, 3.0, cfg)
    r2 = minimize(line_graph(1.0), 1.0, 3.0, cfg)
    assert r1.energy == r2.energy
    assert np.array_equal(r1.function.values, r2.function.values)


# initializers


def test_initializer_masses():
    g = double_bridge(0.8, 1.2)
    for make in (initializer_competitor, initializer_soliton):
        u = make(g, 2.0, 3.5, h_max=0.05, r_cut=10.0)
        assert l2_norm_sq(u) == pytest.approx(2.0, rel=1e-10)
    u = initializer_random(g, 2.0, 3.5, seed=1, h_max=0.05, r_cut=10.0)
    assert l2_norm_sq(u) == pytest.approx(2.0, rel=1e-10)


def test_initializer_soliton_placement():
    g = line_graph(2.0)
    mesh = Mesh(g, h_max=0.05, r_cut=10.0)
    u = initializer_soliton(g, 1.0, 4.0, center_edge="core", center_offset=0.3, mesh=mesh)
    # peak node sits at the requested point
    peak_dof = int(np.argmax(u.values))
    core_dofs = list(mesh.edge_dofs["core"])
    assert peak_dof in core_dofs
    x_peak = mesh.edge_coords["core"][core_dofs.index(peak_dof)]
    assert x_peak == pytest.approx(0.3, abs=0.06)
    with pytest.raises(ValueError):
        initializer_soliton(g, 1.0, 4.0, center_edge="lead1", center_offset=0.5, mesh=mesh)
    with pytest.raises(ValueError):
        initializer_soliton(g, 1.0, 4.0, center_edge="core", center_offset=5.0, mesh=mesh)


def test_soliton_profile_solves_full_line_equation():
    # w'' + w^3 = lam w for the p = 4 profile, sampled pointwise; the decay
    # rate is 1/4, so +-60 captures the mass to well below 1e-6
    xs = np.linspace(-60.0, 60.0, 24001)
    h = xs[1] - xs[0]
    w = soliton_profile(xs, 1.0, 4.0)
    lam = 1.0 / 16.0
    resid = (w[2:] - 2 * w[1:-1] + w[:-2]) / h**2 + w[1:-1] ** 3 - lam * w[1:-1]
    assert np.max(np.abs(resid)) < 1e-5
    # mass integrates to mu over the whole line
    assert np.trapezoid(w**2, xs) == pytest.approx(1.0, rel=1e-6)


def test_soliton_profile_p4_constants():
    # amplitude sqrt(mu)/(2 sqrt(2)) ... peak value at x = 0 is sqrt(mu/8)
    assert soliton_profile(np.array([0.0]), 1.0, 4.0)[0] == pytest.approx(
        np.sqrt(1.0 / 8.0), rel=1e-12
    )


# dirichlet benchmark


def test_dirichlet_line_min_window():
    val, (xs, vs) = dirichlet_line_min(1.0, 1.0)
    assert 0.99 <= val <= 1.02
    # the pinned node carries the boundary value
    assert np.max(vs) == pytest.approx(1.0, abs=1e-12)


def test_dirichlet_half_line_window():
    val, _ = dirichlet_line_min(1.0, 1.0, half_line=True)
    assert 0.2475 <= val <= 0.255


def test_dirichlet_scaling_in_m_and_a():
    # exact value a^4/m on the line: double the mass, halve the value
    v1, _ = dirichlet_line_min(1.0, 1.0)
    v2, _ = dirichlet_line_min(2.0, 1.0)
    assert v2 == pytest.approx(v1 / 2.0, rel=0.03)
    v3, _ = dirichlet_line_min(1.0, 1.2)
    assert v3 == pytest.approx(1.2**4 * v1, rel=0.03)


def test_dirichlet_infeasible_pin():
    with pytest.raises(ValueError):
        dirichlet_line_min(1e-9, 1.0)


# verdict classification on synthetic truncation tables


def tbl(energies, converged=True):
    return [(10.0 * 2**i, e, 100, converged) for i, e in enumerate(energies)]


def test_verdict_negative_minimum():
    assert _verdict(tbl([-0.51, -0.502, -0.5019]), 1e-5) == NEGATIVE_MINIMUM


def test_verdict_zero_small_last_energy():
    assert _verdict(tbl([-3e-4, -2e-5, -8e-6]), 1e-5) == ZERO_INFIMUM_SUSPECTED


def test_verdict_zero_by_extrapolation():
    # ratios 0.5: limit -1.95e-5 + 1e-5 ... extrapolates above -tol
    assert _verdict(tbl([-8e-5, -4e-5, -2e-5]), 1e-5) == ZERO_INFIMUM_SUSPECTED


def test_verdict_inconclusive_when_drifting():
    assert _verdict(tbl([-0.9, -0.5, -0.3]), 1e-5) == INCONCLUSIVE


def test_verdict_inconclusive_without_convergence():
    assert _verdict(tbl([-0.51, -0.502, -0.5019], converged=False), 1e-5) == INCONCLUSIVE


def test_verdict_inconclusive_nonmonotone_near_zero():
    assert _verdict(tbl([-2e-5, -9e-4, -3e-4]), 1e-5) == INCONCLUSIVE


# dichotomy


def test_existence_dichotomy_negative_side():
    cfg = SolverConfig(r_cut_schedule=(10.0, 20.0), h_max=0.05, max_iters=3000)
    d = existence_dichotomy(star_graph((3.0,), half_lines_per_terminal=2), 1.0, 4.0, cfg)
    assert d.verdict == NEGATIVE_MINIMUM
    assert d.best_energy < -0.02
    assert d.best_label in d.runs
    assert d.runs[d.best_label].energy == d.best_energy


def test_existence_dichotomy_zero_side():
    cfg = SolverConfig(r_cut_schedule=(10.0, 20.0, 40.0), h_max=0.05, max_iters=3000)
    d = existence_dichotomy(line_graph(0.25), 1.0, 4.0, cfg)
    assert d.verdict == ZERO_INFIMUM_SUSPECTED
    # no initializer may find a negative minimum where none exists
    for res in d.runs.values():
        assert res.verdict != NEGATIVE_MINIMUM


def test_postprocess_keeps_mass_and_positivity():
    cfg = SolverConfig(r_cut_schedule=(8.0,), h_max=0.1, initializer="random", seed=3)
    res = minimize(double_bridge(0.5, 0.5), 1.0, 3.0, cfg)
    assert res.report.mass == pytest.approx(1.0, abs=1e-10)
    assert res.min_node_value >= 0.0


def test_warm_start_transfer_extends_tails():
    g = line_graph(1.0)
    cfg = SolverConfig(r_cut_schedule=(10.0, 20.0), h_max=0.05)
    res = minimize(g, 1.0, 3.0, cfg)
    mesh = res.function.mesh
    assert mesh.r_cut == 20.0
    # tail values decay, no truncation spike at the old cut
    lead = res.function.values[mesh.edge_dofs["lead1"]]
    tail = lead[len(lead) // 2 :]
    assert np.all(np.diff(tail) <= 1e-12)
