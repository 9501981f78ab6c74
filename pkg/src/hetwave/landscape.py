"""State-space abstraction for the traveling-wave solver.

The wave problem is a connection problem for curves t -> U(t) taking values
in a Hilbert space carrying an unbalanced potential: a global minimum set at
level a < 0 and a strict local minimum set at level 0.  Two concrete
instantiations are used:

* ``PointLandscape``: states are points of R^k, the potential is a scalar
  multi-well potential W with two minima at different levels, and the minimum
  sets are the two points.  This is the front problem in one space dimension.

* ``CurveFamilyLandscape``: states are discrete x2-slices, the potential is
  the 1D action E(.) - m_plus, and the minimum sets are the translate orbits
  of the two heteroclinic connections.  This is the planar problem.

Both expose values/gradients vectorized over a leading axis so the solver can
process all x1 nodes at once, nearest-point projections onto the two minimum
sets, the radial clipping map, and the eigenstructure of their internal
stiffness for preconditioning.
"""
from __future__ import annotations

import numpy as np
from scipy.fft import dst, idst

from .grids import Curve1D, trapezoid_weights, translate_values
from .heteroclinic import HeteroclinicResult, clip_radius
from .potentials import PotentialSpec

__all__ = ["PointLandscape", "CurveFamilyLandscape"]


class PointLandscape:
    """States are points u in R^k; potential W with the deeper minimum at
    a_minus (level a < 0 after renormalization) and a local minimum at
    a_plus (level 0)."""

    def __init__(self, potential: PotentialSpec, a_minus: np.ndarray, a_plus: np.ndarray):
        self.potential = potential
        self.sigma_minus = np.atleast_1d(np.asarray(a_minus, float))
        self.sigma_plus = np.atleast_1d(np.asarray(a_plus, float))
        self.dim = self.sigma_minus.shape[0]
        self.m_plus = float(potential.eval(self.sigma_plus))
        self.m_minus = float(potential.eval(self.sigma_minus))
        self.a = self.m_minus - self.m_plus
        if self.a >= 0:
            raise ValueError("a_minus must be the deeper minimum")
        self.mass = np.ones(self.dim)
        self.r_clip = 2.0 * potential.growth_radius
        # no internal stiffness: every coordinate is a zero-frequency mode
        self.stiff_nu = np.zeros(self.dim)

    # -- potential ---------------------------------------------------------
    def value_many(self, states: np.ndarray) -> np.ndarray:
        return self.potential.eval(states) - self.m_plus

    def grad_many(self, states: np.ndarray) -> np.ndarray:
        return self.potential.grad(states)

    # -- families ----------------------------------------------------------
    def family_rep(self, side: str) -> np.ndarray:
        return (self.sigma_minus if side == "minus" else self.sigma_plus).copy()

    def nearest(self, states: np.ndarray, side: str, tau_hints=None):
        """(distances, nearest family elements, taus) for a batch of states."""
        ref = self.family_rep(side)
        d = np.linalg.norm(states - ref[None, :], axis=1)
        refs = np.broadcast_to(ref, states.shape).copy()
        return d, refs, np.zeros(states.shape[0])

    def dist_to_family(self, state: np.ndarray, side: str,
                       tau_hint: float | None = None):
        ref = self.family_rep(side)
        return float(np.linalg.norm(state - ref)), ref, 0.0

    # -- geometry ----------------------------------------------------------
    def clip_many(self, states: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(states, axis=-1, keepdims=True)
        factor = np.where(norms > self.r_clip,
                          self.r_clip / np.where(norms > 0, norms, 1.0), 1.0)
        return states * factor

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.sum(self.mass * u * v))

    def norm_many(self, states: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(self.mass[None, :] * states * states, axis=-1))

    # -- stiffness transform (identity here) -------------------------------
    def stiff_forward(self, states: np.ndarray) -> np.ndarray:
        return states

    def stiff_inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs

    def translate_state(self, state: np.ndarray, tau: float) -> np.ndarray:
        return state

    # -- sampling hooks for the constants estimators ------------------------
    def random_direction(self, rng: np.random.Generator) -> np.ndarray:
        v = rng.normal(size=self.dim)
        return v / np.linalg.norm(v)

    def random_family_point(self, side: str, rng: np.random.Generator) -> np.ndarray:
        return self.family_rep(side)

    def h1_dist_to_family(self, state: np.ndarray, side: str) -> float:
        return self.dist_to_family(state, side)[0]

    def family_separation(self) -> float:
        return float(np.linalg.norm(self.sigma_minus - self.sigma_plus))


class CurveFamilyLandscape:
    """States are discrete slices on a shared x2 grid flattened to vectors of
    length n2*k; the potential is the 1D action renormalized by m_plus, and
    the minimum sets are the translate orbits of the two connections.

    Slice endpoints are pinned to the wells: gradients vanish there, and the
    internal stiffness acts on interior nodes, diagonalized exactly by the
    type-I sine transform.
    """

    def __init__(self, potential: PotentialSpec, q_minus: HeteroclinicResult,
                 q_plus: HeteroclinicResult):
        grid = q_minus.curve.grid
        if q_plus.curve.grid != grid:
            raise ValueError("both connections must share one x2 grid")
        self.potential = potential
        self.grid2 = grid
        self.k = q_minus.curve.k
        self.n2 = grid.n_points
        self.dim = self.n2 * self.k
        self.sigma_minus = q_minus.curve.left_well
        self.sigma_plus = q_minus.curve.right_well
        self.q_minus = q_minus
        self.q_plus = q_plus
        self.m_minus = q_minus.energy
        self.m_plus = q_plus.energy
        self.a = self.m_minus - self.m_plus
        if self.a >= 0:
            raise ValueError("the global connection must have the lower energy")
        h2 = grid.h
        self._h2 = h2
        self._w2 = trapezoid_weights(self.n2)
        self.mass = np.repeat(h2 * self._w2, self.k)
        self.r_clip = clip_radius(potential, q_minus.curve, q_plus.curve)
        modes = np.arange(1, self.n2 - 1)
        nu_interior = (2.0 - 2.0 * np.cos(modes * np.pi / (self.n2 - 1))) / h2 ** 2
        self.stiff_nu = np.repeat(nu_interior, self.k)

    # -- state <-> slice helpers -------------------------------------------
    def as_slices(self, states: np.ndarray) -> np.ndarray:
        return states.reshape(states.shape[0], self.n2, self.k)

    def curve_from_state(self, state: np.ndarray) -> Curve1D:
        return Curve1D(self.grid2, state.reshape(self.n2, self.k).copy(),
                       self.sigma_minus, self.sigma_plus)

    def state_from_curve(self, curve: Curve1D) -> np.ndarray:
        return curve.values.reshape(-1).copy()

    # -- potential ----------------------------------------------------------
    def value_many(self, states: np.ndarray) -> np.ndarray:
        vals = self.as_slices(states)
        d = (vals[:, 1:] - vals[:, :-1]) / self._h2
        kin = 0.5 * self._h2 * np.sum(d * d, axis=(1, 2))
        pot = self._h2 * np.sum(self._w2[None, :] * self.potential.eval(vals), axis=1)
        return kin + pot - self.m_plus

    def grad_many(self, states: np.ndarray) -> np.ndarray:
        """Plain partial derivatives of value_many; pinned rows zeroed."""
        vals = self.as_slices(states)
        g = np.zeros_like(vals)
        d = (vals[:, 1:] - vals[:, :-1]) / self._h2
        g[:, 1:] += d
        g[:, :-1] -= d
        g += self._h2 * self._w2[None, :, None] * self.potential.grad(vals)
        g[:, 0] = 0.0
        g[:, -1] = 0.0
        return g.reshape(states.shape)

    # -- families ------------------------------------------------------------
    def family_rep(self, side: str) -> np.ndarray:
        ref = self.q_minus if side == "minus" else self.q_plus
        return self.state_from_curve(ref.curve)

    def _family_curve(self, side: str) -> Curve1D:
        return (self.q_minus if side == "minus" else self.q_plus).curve

    def _translated_family(self, side: str, tau: float) -> np.ndarray:
        ref = self._family_curve(side)
        return translate_values(ref.values, self._h2, tau,
                                ref.left_well, ref.right_well).reshape(-1)

    def dist_to_family(self, state: np.ndarray, side: str,
                       tau_hint: float | None = None):
        """L2 distance to the translate orbit of the side's connection.

        Coarse scan (or the supplied hint) followed by parabolic refinement;
        returns (distance, nearest translate as a state vector, tau)."""
        w = self.mass

        def d2_at(tau):
            dv = state - self._translated_family(side, tau)
            return float(np.sum(w * dv * dv))

        if tau_hint is None:
            taus = np.linspace(-self.grid2.half_length / 2,
                               self.grid2.half_length / 2, 33)
            vals = [d2_at(x) for x in taus]
            tau = taus[int(np.argmin(vals))]
            step = taus[1] - taus[0]
        else:
            tau, step = float(tau_hint), 4.0 * self._h2
        for _ in range(60):
            f0, fm, fp = d2_at(tau), d2_at(tau - step), d2_at(tau + step)
            if fm < f0 or fp < f0:
                tau = tau - step if fm < fp else tau + step
            else:
                denom = fm - 2.0 * f0 + fp
                if denom > 0:
                    tau += np.clip(0.5 * step * (fm - fp) / denom, -step, step)
                step *= 0.5
            if step < 1e-10:
                break
        ref = self._translated_family(side, tau)
        dv = state - ref
        return float(np.sqrt(max(np.sum(w * dv * dv), 0.0))), ref, float(tau)

    def nearest(self, states: np.ndarray, side: str, tau_hints=None):
        m = states.shape[0]
        dists = np.empty(m)
        refs = np.empty_like(states)
        taus = np.empty(m)
        hint = None
        for i in range(m):
            if tau_hints is not None:
                hint = tau_hints[i]
            d, ref, tau = self.dist_to_family(states[i], side, tau_hint=hint)
            dists[i], refs[i], taus[i] = d, ref, tau
            if tau_hints is None:
                hint = tau
        return dists, refs, taus

    # -- geometry -------------------------------------------------------------
    def clip_many(self, states: np.ndarray) -> np.ndarray:
        vals = self.as_slices(states)
        norms = np.linalg.norm(vals, axis=-1, keepdims=True)
        factor = np.where(norms > self.r_clip,
                          self.r_clip / np.where(norms > 0, norms, 1.0), 1.0)
        return (vals * factor).reshape(states.shape)

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.sum(self.mass * u * v))

    def norm_many(self, states: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(self.mass[None, :] * states * states, axis=-1))

    def translate_state(self, state: np.ndarray, tau: float) -> np.ndarray:
        vals = translate_values(state.reshape(self.n2, self.k), self._h2, tau,
                                self.sigma_minus, self.sigma_plus)
        return vals.reshape(-1)

    # -- sampling hooks for the constants estimators ------------------------
    def random_direction(self, rng: np.random.Generator) -> np.ndarray:
        """Smooth random field: a handful of low-frequency sine modes with a
        random envelope, vanishing at the pinned ends, mass-normalized."""
        t = self.grid2.nodes
        L = self.grid2.half_length
        field = np.zeros((self.n2, self.k))
        for mode in range(1, 7):
            amp = rng.normal(size=self.k) / mode
            field += np.sin(mode * np.pi * (t[:, None] + L) / (2 * L)) * amp[None, :]
        v = field.reshape(-1)
        nrm = np.sqrt(np.sum(self.mass * v * v))
        return v / nrm

    def random_family_point(self, side: str, rng: np.random.Generator) -> np.ndarray:
        tau = rng.uniform(-self.grid2.half_length / 4, self.grid2.half_length / 4)
        return self._translated_family(side, tau)

    def h1_dist_to_family(self, state: np.ndarray, side: str) -> float:
        from .heteroclinic import project_nearest_translate
        _, dist = project_nearest_translate(self.curve_from_state(state),
                                            self._family_curve(side), norm="H1")
        return dist

    def family_separation(self) -> float:
        """Minimal L2 distance between the two translate orbits (dense scan
        plus refinement over the relative shift)."""
        ref = self.family_rep("plus")
        d, _, _ = self.dist_to_family(ref, "minus")
        return d

    def projection_single_valued(self, state: np.ndarray, side: str,
                                 tie_ratio: float = 0.01) -> bool:
        """Dense scan of the distance-to-translate map: True when the global
        minimum is unique (no second interior local minimum within
        tie_ratio)."""
        w = self.mass
        taus = np.linspace(-self.grid2.half_length / 2,
                           self.grid2.half_length / 2, 101)
        vals = np.empty(len(taus))
        for i, tau in enumerate(taus):
            dv = state - self._translated_family(side, tau)
            vals[i] = np.sum(w * dv * dv)
        interior = np.r_[False, (vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:]), False]
        mins = np.sort(vals[interior])
        if len(mins) <= 1:
            return True
        return bool(np.sqrt(mins[1]) > np.sqrt(mins[0]) * (1.0 + tie_ratio))

    # -- stiffness transform ----------------------------------------------
    def stiff_forward(self, states: np.ndarray) -> np.ndarray:
        vals = self.as_slices(states)[:, 1:-1, :]
        return dst(vals, type=1, axis=1, norm="ortho").reshape(states.shape[0], -1)

    def stiff_inverse(self, coeffs: np.ndarray) -> np.ndarray:
        m = coeffs.shape[0]
        inner = idst(coeffs.reshape(m, self.n2 - 2, self.k), type=1, axis=1,
                     norm="ortho")
        out = np.zeros((m, self.n2, self.k))
        out[:, 1:-1, :] = inner
        return out.reshape(m, -1)
