"""1D heteroclinic connections: global and local minimizers, phase fixing,
nearest-translate projection, the linearized (spectral) operator, and the
radial clipping map.

The descent engine is a spectral projected-gradient method (two-point
step-size rule with a nonmonotone Armijo safeguard) preconditioned by the
inverse of a Sobolev operator alpha*I - Lap_h with pinned ends.  The
preconditioner tames the stiffness gap between the second-difference modes
and the soft sliding modes of nearly-flat valleys; iterates are clipped to
the radial ball at every step, which never increases the energy.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.sparse import csr_array
from scipy.sparse.linalg import eigsh

from .energy import energy_1d, energy_1d_gradient
from .grids import Curve1D, translate_curve
from .potentials import PotentialSpec, WellPair

__all__ = [
    "HeteroclinicResult",
    "SpectralReport",
    "ConvergenceError",
    "minimize_heteroclinic",
    "minimize_local_heteroclinic",
    "fix_phase",
    "project_nearest_translate",
    "assemble_spectral_operator",
    "spectral_report",
    "clip_to_ball",
    "clip_radius",
]


class ConvergenceError(RuntimeError):
    pass


@dataclass
class SpectralReport:
    """Lowest eigenvalues of the linearized operator -v'' + D^2V(q) v.

    kernel_alignment is the cosine between the lowest eigenvector and q'
    (the translation mode); lambda2 is the gap above it.
    """

    eigenvalues: np.ndarray
    kernel_alignment: float
    lambda2: float

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "kernel_alignment": float(self.kernel_alignment),
            "lambda2": float(self.lambda2),
        }


@dataclass
class HeteroclinicResult:
    """A converged connection with its energy level and diagnostics."""

    curve: Curve1D
    energy: float
    kind: Literal["global", "local"]
    gradient_norm: float
    phase_convention: str
    iterations: int
    spectral: SpectralReport | None = None
    constraint_active: bool = False

    def to_dict(self) -> dict:
        d = {
            "energy": float(self.energy),
            "kind": self.kind,
            "gradient_norm": float(self.gradient_norm),
            "phase_convention": self.phase_convention,
            "iterations": int(self.iterations),
            "constraint_active": bool(self.constraint_active),
        }
        if self.spectral is not None:
            d["spectral"] = self.spectral.to_dict()
        return d


def clip_radius(potential: PotentialSpec, *curves: Curve1D) -> float:
    """Clipping radius: twice the max of the growth radius and the sup norms
    of the given reference curves."""
    r = potential.growth_radius
    for q in curves:
        r = max(r, float(np.max(np.linalg.norm(q.values, axis=-1))))
    return 2.0 * r


def clip_to_ball(q: Curve1D, r_max: float) -> Curve1D:
    """Pointwise radial projection of the curve onto the ball |u| <= r_max.

    Nonexpansive in L2 and never increases the action for coercive
    potentials with growth radius <= r_max.
    """
    norms = np.linalg.norm(q.values, axis=-1, keepdims=True)
    factor = np.where(norms > r_max, r_max / np.where(norms > 0, norms, 1.0), 1.0)
    return replace(q, values=q.values * factor)


def _clip_values(values: np.ndarray, r_max: float) -> np.ndarray:
    norms = np.linalg.norm(values, axis=-1, keepdims=True)
    factor = np.where(norms > r_max, r_max / np.where(norms > 0, norms, 1.0), 1.0)
    return values * factor


def _sobolev_factor(n: int, h: float, alpha: float = 1.0):
    """Cholesky factors of alpha*I - Lap_h with identity rows at the ends."""
    ab = np.zeros((2, n))
    ab[1, :] = alpha + 2.0 / h ** 2
    ab[0, 1:] = -1.0 / h ** 2
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = ab[0, -1] = 0.0
    return cholesky_banded(ab)


def _descend_curve(q: Curve1D, potential: PotentialSpec, tol: float,
                   max_iter: int, r_max: float,
                   retract=None, memory: int = 8):
    """Preconditioned spectral projected-gradient descent on the 1D action.

    Endpoints stay pinned.  `retract` (optional) maps values back to a
    feasible set after each trial step.  Returns (curve, energy,
    residual, iterations); residual is the max Euler-Lagrange residual
    |grad|/h over interior nodes.
    """
    n, h = q.grid.n_points, q.grid.h
    chol = _sobolev_factor(n, h)
    endL, endR = q.left_well, q.right_well

    def feas(vals):
        vals = _clip_values(vals, r_max)
        if retract is not None:
            vals = retract(vals)
        vals[0] = endL
        vals[-1] = endR
        return vals

    cur = replace(q, values=feas(q.values.copy()))
    E = energy_1d(cur, potential)
    g = energy_1d_gradient(cur, potential)

    def precondition(grad):
        return cho_solve_banded(chol, grad)

    hist = [E]
    step = 1.0
    vals_old = g_old = None
    res = np.inf
    it = 0
    for it in range(max_iter):
        d = precondition(g)
        res = float(np.max(np.abs(g))) / h
        if res < tol:
            break
        if vals_old is not None:
            s = (cur.values - vals_old).ravel()
            y = (g - g_old).ravel()
            sy = float(s @ y)
            yPy = float(y @ precondition((g - g_old)).ravel())
            if sy > 0 and yPy > 0:
                step = float(np.clip(sy / yPy, 1e-10, 1e8))
            else:
                step = min(2.0 * step, 1e6)
        vals_old, g_old = cur.values.copy(), g.copy()
        fmax = max(hist[-memory:])
        st = step
        accepted = False
        for _ in range(50):
            trial = feas(cur.values - st * d)
            cand = replace(cur, values=trial)
            En = energy_1d(cand, potential)
            dec = float(np.sum(g * (cur.values - trial)))
            if np.isfinite(En) and En <= fmax - 1e-4 * max(dec, 0.0):
                accepted = True
                break
            st *= 0.5
        if not accepted:
            break
        cur, E = cand, En
        g = energy_1d_gradient(cur, potential)
        hist.append(E)
    return cur, E, res, it


def _arc_variation(values: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(values, axis=0), axis=-1)))


def minimize_heteroclinic(potential: PotentialSpec, wells: WellPair,
                          init: Curve1D, tol: float = 1e-7,
                          max_iter: int = 20000,
                          with_spectrum: bool = True) -> HeteroclinicResult:
    """Minimize the 1D action over curves joining the two wells.

    Descends from `init` (which must satisfy the boundary conditions) until
    the Euler-Lagrange residual drops below tol; the result is phase-fixed
    so the first midpoint-hyperplane crossing sits at t=0.
    """
    if potential.isolated_wells:
        wells.check_membership(potential, tol=1e-8)
    init.check_boundaries(1e-8)
    r_max = clip_radius(potential, init)
    cur, E, res, it = _descend_curve(init, potential, tol, max_iter, r_max)
    if res >= tol:
        raise ConvergenceError(f"max iterations ({max_iter}) reached, residual {res:.2e}")
    min_var = 0.5 * float(np.linalg.norm(wells.sigma_plus - wells.sigma_minus))
    if _arc_variation(cur.values) < min_var:
        raise ConvergenceError("escaped to well: curve collapsed to a near-constant")
    cur = fix_phase(cur)
    E = energy_1d(cur, potential)
    spec = spectral_report(cur, potential) if with_spectrum else None
    return HeteroclinicResult(cur, E, "global", res, "first midpoint crossing at t=0",
                              it, spectral=spec)


def minimize_local_heteroclinic(potential: PotentialSpec, anchor: HeteroclinicResult,
                                radius: float, tol: float = 1e-7,
                                max_iter: int = 20000,
                                with_spectrum: bool = True) -> HeteroclinicResult:
    """Constrained minimization within H1 distance `radius` of the anchor's
    translate orbit (the local-minimizer search for bump-perturbed potentials).

    Raises ConvergenceError("constraint saturated") when the minimizer ends
    on the constraint boundary, in which case no local minimizer is certified.
    """
    ref = anchor.curve
    feas_tol = 1e-6 * radius

    def retract(vals):
        cand = replace(ref, values=vals)
        tau, dist = project_nearest_translate(cand, ref, norm="H1")
        if dist > radius:
            base = translate_curve(ref, tau).values
            vals = base + (radius / dist) * (vals - base)
        return vals

    r_max = clip_radius(potential, ref)
    cur, E, res, it = _descend_curve(ref.copy(), potential, tol, max_iter, r_max,
                                     retract=retract)
    if res >= tol:
        raise ConvergenceError(f"max iterations ({max_iter}) reached, residual {res:.2e}")
    _, dist = project_nearest_translate(cur, ref, norm="H1")
    active = dist >= radius - feas_tol
    if active:
        raise ConvergenceError("constraint saturated: no local minimizer certified")
    spec = spectral_report(cur, potential) if with_spectrum else None
    return HeteroclinicResult(cur, energy_1d(cur, potential), "local", res,
                              anchor.phase_convention, it, spectral=spec,
                              constraint_active=active)


def fix_phase(curve: Curve1D) -> Curve1D:
    """Translate so the first crossing of the midpoint hyperplane
    <q(t) - (s-+s+)/2, s+-s-> = 0 sits at t = 0."""
    mid = 0.5 * (curve.left_well + curve.right_well)
    axis = curve.right_well - curve.left_well
    f = (curve.values - mid) @ axis
    sign_change = np.nonzero(f[:-1] * f[1:] <= 0)[0]
    exact = np.nonzero(f == 0.0)[0]
    if len(sign_change) == 0 and len(exact) == 0:
        raise ValueError("no crossing of the midpoint hyperplane")
    t = curve.grid.nodes
    if len(exact) and (len(sign_change) == 0 or exact[0] <= sign_change[0]):
        t_cross = t[exact[0]]
    else:
        i = sign_change[0]
        t_cross = t[i] + curve.grid.h * f[i] / (f[i] - f[i + 1])
    if abs(t_cross) < 1e-14:
        return curve.copy()
    return translate_curve(curve, t_cross)


def project_nearest_translate(q: Curve1D, family_rep: Curve1D,
                              norm: Literal["L2", "H1"] = "L2",
                              bracket: float | None = None,
                              warn_ratio: float = 0.01) -> tuple[float, float]:
    """Distance of q to the translate orbit of family_rep.

    Returns (tau_star, distance) where tau_star minimizes
    ||q - family_rep(. + tau)||.  A coarse scan brackets the minimum (and
    warns when two local minima agree within warn_ratio); golden-section
    refinement follows.
    """
    L = q.grid.half_length
    h = q.grid.h
    if bracket is None:
        bracket = L / 2.0
    w = np.ones(q.grid.n_points)
    w[0] = w[-1] = 0.5

    def dist_at(tau):
        ref = translate_curve(family_rep, tau)
        dv = q.values - ref.values
        d2 = h * np.sum(w[:, None] * dv * dv)
        if norm == "H1":
            dd = np.diff(dv, axis=0) / h
            d2 += h * np.sum(dd * dd)
        return np.sqrt(max(d2, 0.0))

    taus = np.linspace(-bracket, bracket, 81)
    vals = np.array([dist_at(tau) for tau in taus])
    i0 = int(np.argmin(vals))
    interior = np.r_[False, (vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:]), False]
    locmins = np.nonzero(interior)[0]
    if len(locmins) > 1:
        best, second = np.sort(vals[locmins])[:2]
        if second <= best * (1.0 + warn_ratio):
            import warnings
            warnings.warn("nearest-translate projection: two local minima within "
                          f"{100*warn_ratio:.0f}% of each other", stacklevel=2)
    if i0 == 0 or i0 == len(taus) - 1:
        lo, hi = taus[max(i0 - 1, 0)], taus[min(i0 + 1, len(taus) - 1)]
        if vals[0] == vals[i0] or vals[-1] == vals[i0]:
            raise ValueError("bracket failure: no interior minimum of the distance map")
    else:
        lo, hi = taus[i0 - 1], taus[i0 + 1]
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - gr * (b - a)
    c2 = a + gr * (b - a)
    f1, f2 = dist_at(c1), dist_at(c2)
    while b - a > 1e-10 * max(1.0, L):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - gr * (b - a)
            f1 = dist_at(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + gr * (b - a)
            f2 = dist_at(c2)
    tau = 0.5 * (a + b)
    return float(tau), float(dist_at(tau))


def assemble_spectral_operator(q: Curve1D, potential: PotentialSpec):
    """Dirichlet discretization of v -> -v'' + D^2V(q) v on interior nodes.

    Returns a sparse symmetric matrix of size ((n-2)*k) x ((n-2)*k), ordered
    node-major: the Laplacian couples neighboring nodes component-wise and
    D^2V(q(t_i)) couples components within each node block.
    """
    h = q.grid.h
    k = q.k
    vals = q.values[1:-1]
    m = vals.shape[0]
    H = potential.hess(vals)  # (m, k, k)
    rows, cols, data = [], [], []
    idx = np.arange(m * k).reshape(m, k)
    for a in range(k):
        rows.append(idx[:, a]); cols.append(idx[:, a])
        data.append(np.full(m, 2.0 / h ** 2) + H[:, a, a])
        for b in range(a + 1, k):
            rows.append(idx[:, a]); cols.append(idx[:, b]); data.append(H[:, a, b])
            rows.append(idx[:, b]); cols.append(idx[:, a]); data.append(H[:, b, a])
        rows.append(idx[:-1, a]); cols.append(idx[1:, a])
        data.append(np.full(m - 1, -1.0 / h ** 2))
        rows.append(idx[1:, a]); cols.append(idx[:-1, a])
        data.append(np.full(m - 1, -1.0 / h ** 2))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    return csr_array((data, (rows, cols)), shape=(m * k, m * k))


def spectral_report(q: Curve1D, potential: PotentialSpec, n_eig: int = 6) -> SpectralReport:
    """Smallest eigenvalues of the linearized operator and the alignment of
    the ground mode with the translation direction q'."""
    A = assemble_spectral_operator(q, potential)
    n = A.shape[0]
    k_eig = min(n_eig, n - 2)
    try:
        vals, vecs = eigsh(A, k=k_eig, sigma=0.0, which="LM")
    except Exception:
        vals, vecs = eigsh(A, k=k_eig, which="SA")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    dq = (q.values[2:] - q.values[:-2]) / (2.0 * q.grid.h)
    mode = dq.reshape(-1)
    v0 = vecs[:, 0]
    denom = np.linalg.norm(mode) * np.linalg.norm(v0)
    align = float(abs(mode @ v0) / denom) if denom > 0 else 0.0
    lam2 = float(vals[1]) if len(vals) > 1 else np.nan
    return SpectralReport(vals, align, lam2)
