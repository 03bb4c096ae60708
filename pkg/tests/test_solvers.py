import math

import numpy as np
import pytest

from heatbounds import (ContractError, NumericalFailure, PeriodicSolution,
                        RadialGrid, euclid_jet, evolve_periodic, h3_jet,
                        periodic_jet, solve_radial)
from heatbounds import euclidean, hyperbolic


COARSE = RadialGrid(r_min=1e-3, r_max=12.0, dr=8e-3, dt=8e-3)


def test_grid_validation():
    with pytest.raises(ContractError):
        RadialGrid(r_min=0.0, r_max=1.0, dr=0.01, dt=0.01)
    with pytest.raises(ContractError):
        RadialGrid(r_min=0.1, r_max=1.0, dr=0.01, dt=0.02)  # dt must not exceed dr


def test_euclid_solution_matches_closed_form():
    sol = solve_radial(euclidean(3), lambda r: euclid_jet(3, r, 0.1).u, COARSE, 0.1, 1.0)
    mask = (sol.r >= 0.1) & (sol.r <= 3.0)
    exact = euclid_jet(3, sol.r[mask], 1.0).u
    assert np.abs(sol.u[mask] / exact - 1.0).max() < 1e-4
    assert sol.min_u > 0


def test_h3_solution_matches_closed_form():
    sol = solve_radial(hyperbolic(3), lambda r: h3_jet(r, 0.1).u, COARSE, 0.1, 1.0)
    mask = (sol.r >= 0.1) & (sol.r <= 3.0)
    exact = h3_jet(sol.r[mask], 1.0).u
    assert np.abs(sol.u[mask] / exact - 1.0).max() < 1e-3


def test_mass_conserved_and_positive():
    sol = solve_radial(hyperbolic(3), lambda r: h3_jet(r, 0.1).u, COARSE, 0.1, 1.0)
    drift = np.abs(sol.mass_history / sol.mass_history[0] - 1.0).max()
    assert drift < 1e-8
    assert sol.min_u > 0


def test_constant_data_is_steady():
    grid = RadialGrid(r_min=1e-3, r_max=5.0, dr=0.01, dt=0.01)
    sol = solve_radial(euclidean(3), lambda r: np.ones_like(r), grid, 0.0, 1.0)
    assert np.abs(sol.u - 1.0).max() < 1e-12


def test_escaping_mass_raises():
    grid = RadialGrid(r_min=1e-3, r_max=4.0, dr=0.01, dt=0.01)
    with pytest.raises(NumericalFailure):
        solve_radial(euclidean(3), lambda r: euclid_jet(3, r, 0.1).u, grid, 0.1, 3.0)


def test_rejects_bad_init():
    with pytest.raises(ContractError):
        solve_radial(euclidean(3), lambda r: -np.ones_like(r), COARSE, 0.0, 0.1)
    with pytest.raises(ContractError):
        solve_radial(euclidean(3), lambda r: np.zeros_like(r), COARSE, 0.0, 0.1)


def test_snapshots_land_on_requested_times():
    sol = solve_radial(euclidean(3), lambda r: euclid_jet(3, r, 0.1).u, COARSE,
                       0.1, 0.5, snapshot_times=[0.3])
    snap = sol.snapshots[0.3]
    exact = euclid_jet(3, sol.r, 0.3).u
    mask = (sol.r >= 0.1) & (sol.r <= 2.0)
    assert np.abs(snap[mask] / exact[mask] - 1.0).max() < 1e-3


# --- spectral periodic evolution ---------------------------------------------


def test_mean_is_invariant():
    sol = PeriodicSolution.from_function(lambda x: 1 + 0.3 * np.cos(x), (2 * math.pi,), 128, 0.0)
    assert sol.evolve(5.0).mean() == pytest.approx(sol.mean(), rel=1e-14)


def test_single_mode_decay_exact():
    L = 2 * math.pi
    sol = PeriodicSolution.from_function(lambda x: 1 + 0.5 * np.cos(x), (L,), 128, 1.0)
    out = evolve_periodic(sol, 2.0)
    expect = 1 + 0.5 * math.exp(-1.0) * np.cos(out.grids()[0])
    assert np.abs(out.values_on_grid() - expect).max() < 1e-14


def test_backward_evolution_rejected():
    sol = PeriodicSolution.from_function(lambda x: 1 + 0.1 * np.cos(x), (2 * math.pi,), 64, 1.0)
    with pytest.raises(ContractError):
        sol.evolve(0.5)


def test_spectral_matches_image_sum():
    L = 2 * math.pi
    m = 512
    x = -L / 2 + L * np.arange(m) / m
    sol = PeriodicSolution.from_samples(periodic_jet((L,), x, 0.5).u, (L,), 0.5)
    got = sol.evolve(1.0).values_on_grid()
    assert np.abs(got - periodic_jet((L,), x, 1.0).u).max() < 1e-10


def test_jet_of_spectral_solution_solves_heat_equation():
    sol = PeriodicSolution.from_function(
        lambda x: 1 + 0.4 * np.cos(x) + 0.1 * np.sin(2 * x), (2 * math.pi,), 256, 0.2)
    jet = sol.evolve(0.9).jet()
    assert np.abs(jet.heat_residual()).max() < 1e-13


def test_point_evaluation_matches_grid():
    sol = PeriodicSolution.from_function(lambda x: 1 + 0.4 * np.cos(x), (2 * math.pi,), 128, 0.3)
    grid_vals = sol.values_on_grid()
    xs = sol.grids()[0]
    assert np.abs(sol.evaluate(xs) - grid_vals).max() < 1e-12


def test_torus_evolution_is_productwise():
    lengths = (2 * math.pi, 4.0)
    sol = PeriodicSolution.from_function(
        lambda x, y: (1 + 0.3 * np.cos(x)) * (1 + 0.2 * np.cos(2 * math.pi * y / 4)),
        lengths, 32, 0.0)
    out = sol.evolve(0.3)
    xg, yg = np.meshgrid(*out.grids(), indexing="ij")
    expect = ((1 + 0.3 * math.exp(-0.3) * np.cos(xg))
              * (1 + 0.2 * math.exp(-0.3 * (2 * math.pi / 4) ** 2) * np.cos(2 * math.pi * yg / 4)))
    assert np.abs(out.values_on_grid() - expect).max() < 1e-13


def test_refinement_improves_by_second_order():
    # halving (dr, dt) must cut the error by at least 3.5x
    base = RadialGrid(r_min=1e-3, r_max=12.0, dr=1.6e-2, dt=1.6e-2)
    errs = []
    for grid in (base, base.halved()):
        sol = solve_radial(euclidean(3), lambda r: euclid_jet(3, r, 0.1).u, grid, 0.1, 1.0)
        mask = (sol.r >= 0.1) & (sol.r <= 3.0)
        exact = euclid_jet(3, sol.r[mask], 1.0).u
        errs.append(np.abs(sol.u[mask] / exact - 1.0).max())
    assert errs[0] / errs[1] >= 3.5
