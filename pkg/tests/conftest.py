from __future__ import annotations

import numpy as np
import pytest

from hetwave.grids import Curve1D, Grid1D
from hetwave.heteroclinic import minimize_heteroclinic
from hetwave.potentials import (WellPair, make_perturbed_gl,
                                make_scalar_allen_cahn,
                                make_unbalanced_bistable)


@pytest.fixture
def rng():
    return np.random.default_rng(1729)


@pytest.fixture(scope="session")
def ac_potential():
    return make_scalar_allen_cahn()


@pytest.fixture(scope="session")
def bistable_potential():
    return make_unbalanced_bistable(0.25)


@pytest.fixture(scope="session")
def pgl_potential():
    return make_perturbed_gl(3.0)


@pytest.fixture(scope="session")
def ac_grid():
    return Grid1D(20.0, 2001)


@pytest.fixture(scope="session")
def ac_tanh_curve(ac_grid):
    t = ac_grid.nodes
    vals = np.tanh(t / np.sqrt(2.0))[:, None]
    return Curve1D(ac_grid, vals, np.array([-1.0]), np.array([1.0]))


@pytest.fixture(scope="session")
def ac_minimizer(ac_potential, ac_grid):
    t = ac_grid.nodes
    init = np.tanh(t / 1.2)[:, None]
    init[0], init[-1] = -1.0, 1.0
    curve = Curve1D(ac_grid, init, np.array([-1.0]), np.array([1.0]))
    wells = WellPair(np.array([-1.0]), np.array([1.0]))
    return minimize_heteroclinic(ac_potential, wells, curve, tol=1e-9)


@pytest.fixture(scope="session")
def pgl_grid():
    return Grid1D(16.0, 1601)


@pytest.fixture(scope="session")
def pgl_minimizer(pgl_potential, pgl_grid):
    t = pgl_grid.nodes
    vals = np.stack([np.tanh(t / np.sqrt(2.0)), 0.6 / np.cosh(t / 2.0)], axis=1)
    vals[0] = [-1.0, 0.0]
    vals[-1] = [1.0, 0.0]
    curve = Curve1D(pgl_grid, vals, np.array([-1.0, 0.0]), np.array([1.0, 0.0]))
    wells = WellPair(np.array([-1.0, 0.0]), np.array([1.0, 0.0]))
    return minimize_heteroclinic(pgl_potential, wells, curve, tol=3e-7,
                                 max_iter=40000)
