from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetwave.potentials import (PotentialError, make_bump_perturbation,
                                make_ginzburg_landau, make_perturbed_gl,
                                make_scalar_allen_cahn,
                                make_unbalanced_bistable,
                                make_zuniga_sternberg, potential_from_config)

ALL_FACTORIES = [
    make_scalar_allen_cahn,
    make_ginzburg_landau,
    lambda: make_perturbed_gl(3.0),
    make_zuniga_sternberg,
    lambda: make_unbalanced_bistable(0.25),
    lambda: make_bump_perturbation(make_perturbed_gl(3.0), 0.05,
                                   np.array([0.0, -0.9]), 0.3),
]


def test_scalar_allen_cahn_values():
    pot = make_scalar_allen_cahn()
    assert pot.eval(np.array([1.0])) == pytest.approx(0.0, abs=1e-15)
    assert pot.eval(np.array([-1.0])) == pytest.approx(0.0, abs=1e-15)
    assert pot.eval(np.array([0.0])) == pytest.approx(0.25)
    # symbolic derivative of (1-u^2)^2/4 is -u(1-u^2)
    assert pot.grad(np.array([0.5]))[0] == pytest.approx(-0.375)


def test_ginzburg_landau_values():
    pot = make_ginzburg_landau()
    assert pot.eval(np.array([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert pot.eval(np.array([0.0, 0.0])) == pytest.approx(0.25)
    assert np.allclose(pot.grad(np.array([2.0, 0.0])), [6.0, 0.0])


def test_perturbed_gl_axis_and_symmetry(rng):
    pot = make_perturbed_gl(3.0)
    gl = make_ginzburg_landau()
    for well in ([-1.0, 0.0], [1.0, 0.0]):
        assert pot.eval(np.array(well)) == pytest.approx(0.0, abs=1e-15)
    u1 = rng.uniform(-2, 2, size=50)
    axis_pts = np.stack([u1, np.zeros_like(u1)], axis=1)
    assert np.allclose(pot.eval(axis_pts), gl.eval(axis_pts))
    pts = rng.uniform(-2, 2, size=(100, 2))
    mirrored = pts * np.array([1.0, -1.0])
    assert np.array_equal(pot.eval(pts), pot.eval(mirrored))
    eig = np.linalg.eigvalsh(pot.hess(np.array([1.0, 0.0])))
    assert eig[0] > 0


def test_zuniga_sternberg_wells():
    pot = make_zuniga_sternberg()
    r = 1.0 / np.sqrt(2.0)
    assert pot.eval(np.array([1.0, 0.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert pot.eval(np.array([0.0, r, r])) == pytest.approx(0.0, abs=1e-14)
    assert pot.eval(np.array([0.0, 0.0, 0.0])) == pytest.approx(0.5)
    # the two axis wells are degenerate (flagged); the others are not
    eig_axis = np.linalg.eigvalsh(pot.hess(np.array([1.0, 0.0, 0.0])))
    assert eig_axis[0] == pytest.approx(0.0, abs=1e-12)
    eig_diag = np.linalg.eigvalsh(pot.hess(np.array([0.0, r, r])))
    assert eig_diag[0] > 0
    assert not pot.nondegenerate_wells


def test_bump_perturbation_values(rng):
    base = make_perturbed_gl(3.0)
    u0 = np.array([0.0, -0.9])
    delta, r = 0.05, 0.3
    pot = make_bump_perturbation(base, delta, u0, r)
    # wells untouched
    assert np.allclose(pot.eval(base.wells), base.eval(base.wells))
    # center raised by exactly delta
    assert pot.eval(u0) == pytest.approx(base.eval(u0) + delta)
    # equal to the base outside the support, exactly
    far = rng.uniform(-3, 3, size=(200, 2))
    far = far[np.linalg.norm(far - u0, axis=1) > 2 * r]
    assert np.array_equal(pot.eval(far), base.eval(far))
    # bump profile decays monotonically along a ray through the shell
    radii = np.linspace(1.0 * r, 2.0 * r, 40)
    direction = np.array([0.3, -0.8])
    direction /= np.linalg.norm(direction)
    chi = (pot.eval(u0 + radii[:, None] * direction)
           - base.eval(u0 + radii[:, None] * direction)) / delta
    mid = chi[(radii > 1.4 * r) & (radii < 1.6 * r)]
    assert np.all((mid > 0) & (mid < 1))
    assert np.all(np.diff(chi) <= 1e-12)


def test_bump_rejects_well_overlap():
    base = make_scalar_allen_cahn()
    with pytest.raises(PotentialError):
        make_bump_perturbation(base, 0.1, np.array([0.9]), 0.2)


def test_unbalanced_bistable_levels():
    a = 0.25
    pot = make_unbalanced_bistable(a)
    assert pot.eval(np.array([0.0])) == pytest.approx(0.0, abs=1e-15)
    assert pot.grad(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-15)
    assert pot.eval(np.array([1.0])) == pytest.approx((2 * a - 1) / 12.0)
    assert pot.eval(np.array([1.0])) == pytest.approx(-1.0 / 24.0)
    assert pot.grad(np.array([a]))[0] == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(PotentialError):
        make_unbalanced_bistable(0.6)


def test_unbalanced_bistable_scaling():
    pot = make_unbalanced_bistable(0.25, scale=20.0)
    assert pot.eval(np.array([1.0])) == pytest.approx(20.0 * (-1.0 / 24.0))


@pytest.mark.parametrize("factory", ALL_FACTORIES)
def test_invariants_by_sampling(factory):
    factory().validate(np.random.default_rng(7))


@pytest.mark.parametrize("factory", ALL_FACTORIES)
def test_gradient_matches_finite_differences(factory, rng):
    pot = factory()
    pts = rng.uniform(-2, 2, size=(100, pot.dimension))
    h = 1e-5
    for p in pts:
        g_fd = np.empty(pot.dimension)
        for j in range(pot.dimension):
            e = np.zeros(pot.dimension)
            e[j] = h
            g_fd[j] = (pot.eval(p + e) - pot.eval(p - e)) / (2 * h)
        g = pot.grad(p)
        assert np.linalg.norm(g - g_fd) <= 1e-6 * max(1.0, np.linalg.norm(g))


@given(u=st.floats(-3, 3), v=st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_gl_nonnegative(u, v):
    pot = make_ginzburg_landau()
    assert pot.eval(np.array([u, v])) >= 0.0


def test_registry_lookup():
    pot = potential_from_config("unbalanced_bistable", {"a_param": 0.3})
    assert pot.params["a_param"] == 0.3
    with pytest.raises(PotentialError):
        potential_from_config("nonsense", {})
    withbump = potential_from_config(
        "perturbed_gl",
        {"t_bar": 3.0, "bump": {"delta": 0.05, "center": [0.0, -0.9], "radius": 0.3}})
    assert "delta" in withbump.params
