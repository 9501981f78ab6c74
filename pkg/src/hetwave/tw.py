"""Traveling-wave solver: constrained minimization of the weighted action
over truncated curve spaces, entry-time diagnostics, speed classification and
bisection, comparison surgeries, and the cross-energy uniqueness audit.

A state curve U maps the x1 grid into a landscape (points of R^k, or discrete
x2-slices; see ``landscape``).  For a speed c > 0 the anchored weighted action

    E_c(U) = sum_cells  w_cell * ||U_{i+1} - U_i||^2 / (2 h)
           + sum_nodes h * w_quad * w_node * pot(U_i),

with w_node = exp(c (t_i - t_ref)), is minimized subject to the membership
constraints: nodes with t <= -T stay within an L2 ball of the global minimum
set, nodes with t >= T within a ball of the local set.  Constraint handling
is by retraction onto the balls; iterates are also passed through the radial
clipping map, which never increases the action.

The descent engine is a preconditioned spectral projected-gradient method.
The preconditioner inverts (alpha*I + internal stiffness - d^2/dt^2) in the
weighted metric: the landscape's stiffness is diagonalized by its sine
transform and the x1 direction solved by batched tridiagonal factorizations.
Deterministic translation moves (integer grid shifts, which scale the action
by exp(-c tau) up to boundary flux) are interleaved to traverse the nearly
flat phase valley.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import Grid1D, trapezoid_weights

__all__ = [
    "ConstraintSpec",
    "ConstrainedMinimum",
    "SpeedSearchResult",
    "TravelingWaveProblem",
    "EntryTimeError",
    "SolverError",
    "minimize_constrained",
    "entry_times",
    "no_oscillation_check",
    "competitor_moves",
    "classify_speed",
    "find_speed",
    "uniqueness_audit",
    "equipartition_residual",
    "t_star_bound",
]


class SolverError(RuntimeError):
    pass


class EntryTimeError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstraintSpec:
    """Membership constraints of the truncated space: ball radii r_minus,
    r_plus (half the capture radii) enforced for t <= -T / t >= T."""

    T: float
    r_minus: float
    r_plus: float

    def __post_init__(self):
        if self.T < 1.0:
            raise ValueError("constraint time T must be >= 1")
        if self.r_minus <= 0 or self.r_plus <= 0:
            raise ValueError("ball radii must be positive")


@dataclass
class TravelingWaveProblem:
    """Everything the solver needs besides the speed: the landscape, the x1
    grid, the constraint radii, and the entry-time energy levels.

    eps_minus/eps_plus are the energy margins of the entry-time definitions
    (the ledger's two-sided analogues); they may be None when no ledger is
    available, in which case entry times fall back to measured floors.
    """

    landscape: object
    grid1: Grid1D
    r_minus: float
    r_plus: float
    eps_minus: float | None = None
    eps_plus: float | None = None
    alpha_star: float | None = None
    tol: float = 1e-8
    max_iter: int = 6000
    prec_alpha: float = 1.0
    init_widths: tuple = (0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0)
    init_phases: int = 25

    def constraint(self, T: float) -> ConstraintSpec:
        return ConstraintSpec(T, self.r_minus, self.r_plus)

    def classify_tol(self) -> float:
        return 1e-4 * abs(self.landscape.a)


@dataclass
class ConstrainedMinimum:
    """A converged constrained minimizer with its diagnostics."""

    states: np.ndarray            # (n1, dim)
    energy: float                 # anchored weighted action
    c: float
    t_ref: float
    constraints: ConstraintSpec
    iterations: int
    residual: float
    pot_values: np.ndarray        # per-node landscape potential values
    dist_minus: np.ndarray | None = None
    dist_plus: np.ndarray | None = None
    tau_minus: np.ndarray | None = None
    tau_plus: np.ndarray | None = None
    active_minus: bool = False
    active_plus: bool = False
    t_minus: float | None = None
    t_plus: float | None = None

    def derivative_l2_sq(self, problem: TravelingWaveProblem) -> float:
        """Unweighted int ||U'||^2 dt (translation invariant)."""
        h = problem.grid1.h
        d = self.states[1:] - self.states[:-1]
        mass = problem.landscape.mass
        return float(np.sum(mass[None, :] * d * d) / h)


@dataclass
class SpeedSearchResult:
    c_star: float
    bracket: tuple
    minimum: ConstrainedMinimum
    unconstrained: bool
    formula_speed: float
    residual: float
    t_schedule: list
    probes: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "c_star": float(self.c_star),
            "bracket": [float(self.bracket[0]), float(self.bracket[1])],
            "unconstrained": bool(self.unconstrained),
            "formula_speed": float(self.formula_speed),
            "residual": float(self.residual),
            "energy": float(self.minimum.energy),
            "t_minus": self.minimum.t_minus,
            "t_plus": self.minimum.t_plus,
            "t_schedule": [float(x) for x in self.t_schedule],
            "probes": self.probes,
            "notes": list(self.notes),
        }


class _BatchedTridiag:
    """Prefactored Thomas solves for a family of SPD tridiagonal systems
    sharing the sub/super-diagonal but with per-column main diagonals."""

    def __init__(self, sub: np.ndarray, diag: np.ndarray):
        n, m = diag.shape
        self.sub = sub                      # (n-1,)
        cp = np.empty((n - 1, m))
        dp = np.empty((n, m))
        dp[0] = diag[0]
        for i in range(1, n):
            cp[i - 1] = sub[i - 1] / dp[i - 1]
            dp[i] = diag[i] - cp[i - 1] * sub[i - 1]
        self.cp = cp
        self.dp = dp

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        n = self.dp.shape[0]
        y = np.empty_like(rhs)
        y[0] = rhs[0]
        for i in range(1, n):
            y[i] = rhs[i] - self.cp[i - 1] * y[i - 1]
        x = np.empty_like(rhs)
        x[-1] = y[-1] / self.dp[-1]
        for i in range(n - 2, -1, -1):
            x[i] = (y[i] - self.sub[i] * x[i + 1]) / self.dp[i]
        return x


class _WeightedCurveProblem:
    """One (c, T, t_ref) instance: weights, preconditioner, feasibility."""

    def __init__(self, problem: TravelingWaveProblem, c: float,
                 constraints: ConstraintSpec, t_ref: float):
        land = problem.landscape
        grid = problem.grid1
        if c * (grid.half_length - t_ref) > 600.0:
            raise OverflowError("weight overflow — re-anchor or shrink domain")
        self.problem = problem
        self.land = land
        self.c = c
        self.constraints = constraints
        self.t_ref = t_ref
        self.t = grid.nodes
        self.h = grid.h
        self.n1 = grid.n_points
        self.wq = trapezoid_weights(self.n1)
        self.wn = np.exp(c * (self.t - t_ref))
        self.wc = np.exp(c * (0.5 * (self.t[1:] + self.t[:-1]) - t_ref))
        self.mask_minus = self.t <= -constraints.T
        self.mask_plus = self.t >= constraints.T
        self.idx_minus = np.nonzero(self.mask_minus)[0]
        self.idx_plus = np.nonzero(self.mask_plus)[0]
        # preconditioner: per transformed mode, tridiagonal in x1
        nu = land.stiff_nu
        pot_scale = self.h * self.wq * self.wn
        diag = (pot_scale[:, None] * (problem.prec_alpha + nu[None, :])).copy()
        stiff = np.zeros(self.n1)
        stiff[1:] += self.wc / self.h
        stiff[:-1] += self.wc / self.h
        diag += stiff[:, None]
        self._thomas = _BatchedTridiag(-self.wc / self.h, diag)
        self.pot_scale = pot_scale
        # feasibility caches
        self._tau_m = np.zeros(len(self.idx_minus))
        self._tau_p = np.zeros(len(self.idx_plus))
        self._ref_m = None
        self._ref_p = None

    # -- energy -------------------------------------------------------------
    def value_grad(self, states: np.ndarray):
        land = self.land
        d = states[1:] - states[:-1]
        kin_cells = np.sum(land.mass[None, :] * d * d, axis=1)
        pot = land.value_many(states)
        E = float(np.sum(self.wc * kin_cells) / (2.0 * self.h)
                  + np.sum(self.pot_scale * pot))
        g = np.zeros_like(states)
        flux = (self.wc[:, None] * land.mass[None, :]) * d / self.h
        g[1:] += flux
        g[:-1] -= flux
        g += self.pot_scale[:, None] * land.grad_many(states)
        return E, g, pot

    def value(self, states: np.ndarray) -> float:
        d = states[1:] - states[:-1]
        kin_cells = np.sum(self.land.mass[None, :] * d * d, axis=1)
        pot = self.land.value_many(states)
        return float(np.sum(self.wc * kin_cells) / (2.0 * self.h)
                     + np.sum(self.pot_scale * pot))

    def precondition(self, g: np.ndarray) -> np.ndarray:
        coeffs = self.land.stiff_forward(g)
        sol = self._thomas.solve(coeffs)
        return self.land.stiff_inverse(sol)

    # -- feasibility ----------------------------------------------------------
    def _retract_side(self, states, idx, radius, side, taus, full: bool):
        if len(idx) == 0:
            return taus, False
        land = self.land
        sub = states[idx]
        refs = np.array([land.translate_state(land.family_rep(side), tau)
                         for tau in taus]) if hasattr(land, "translate_state") else None
        if refs is None:
            dists, refs, taus = land.nearest(sub, side, tau_hints=taus)
        else:
            dev = sub - refs
            dists = np.sqrt(np.sum(land.mass[None, :] * dev * dev, axis=1))
        suspicious = dists > radius
        active = False
        if np.any(suspicious) or full:
            which = np.arange(len(idx)) if full else np.nonzero(suspicious)[0]
            d2, r2, t2 = land.nearest(sub[which], side, tau_hints=taus[which])
            taus = taus.copy()
            taus[which] = t2
            for j, ii in enumerate(which):
                if d2[j] > radius:
                    scale = radius * (1.0 - 1e-12) / d2[j]
                    states[idx[ii]] = r2[j] + scale * (sub[ii] - r2[j])
                    active = True
        return taus, active

    def project(self, states: np.ndarray, full: bool = False):
        """Clip and retract onto the constraint balls; returns (states, any
        retraction applied on minus side, on plus side)."""
        states = self.land.clip_many(states)
        self._tau_m, act_m = self._retract_side(states, self.idx_minus,
                                                self.constraints.r_minus, "minus",
                                                self._tau_m, full)
        self._tau_p, act_p = self._retract_side(states, self.idx_plus,
                                                self.constraints.r_plus, "plus",
                                                self._tau_p, full)
        return states, act_m, act_p

    # -- translation moves -----------------------------------------------------
    def shift_candidates(self, states: np.ndarray, E: float):
        best, bestE = states, E
        n1 = self.n1
        for s in (-256, -64, -16, -4, -1, 1, 4, 16, 64, 256):
            if abs(s) >= n1 - 1:
                continue
            if s > 0:
                cand = np.concatenate([states[s:], np.repeat(states[-1:], s, axis=0)])
            else:
                cand = np.concatenate([np.repeat(states[:1], -s, axis=0), states[:s]])
            cand, _, _ = self.project(cand)
            Ec = self.value(cand)
            if Ec < bestE:
                best, bestE = cand, Ec
        return best, bestE


def _logistic_profile(t, t0, w):
    z = np.clip((t - t0) / w, -60, 60)
    return 1.0 / (1.0 + np.exp(-z))


def _init_candidates(wp: _WeightedCurveProblem):
    """Deterministic scan of interpolating fronts: logistic blends between
    the two family representatives over widths and phases, plus the
    piecewise-linear ramp.  Returns the best candidate overall and the best
    among right-parked phases."""
    prob = wp.problem
    land = wp.land
    ref_m = land.family_rep("minus")
    ref_p = land.family_rep("plus")
    t = wp.t
    T = wp.constraints.T
    best = None
    best_right = None
    phases = np.linspace(-T + 1.0, min(T + 2.0, wp.t[-1] - 1.0), prob.init_phases)
    for w in prob.init_widths:
        for t0 in phases:
            s = _logistic_profile(t, t0, w)[:, None]
            cand = ref_m[None, :] * (1.0 - s) + ref_p[None, :] * s
            cand, _, _ = wp.project(cand)
            E = wp.value(cand)
            if best is None or E < best[0]:
                best = (E, cand)
            if t0 > T - 4.0 and (best_right is None or E < best_right[0]):
                best_right = (E, cand)
    s = np.clip((t + 1.0) / 2.0, 0.0, 1.0)[:, None]
    ramp = ref_m[None, :] * (1.0 - s) + ref_p[None, :] * s
    ramp, _, _ = wp.project(ramp)
    E = wp.value(ramp)
    if E < best[0]:
        best = (E, ramp)
    out = [best[1]]
    if best_right is not None:
        out.append(best_right[1])
    return out


def _spg(wp: _WeightedCurveProblem, states: np.ndarray, tol: float,
         max_iter: int, memory: int = 8, shift_every: int = 20):
    states, _, _ = wp.project(states.copy())
    E, g, pot = wp.value_grad(states)
    hist = [E]
    step = 1.0
    states_old = g_old = None
    res = np.inf
    it = 0
    for it in range(max_iter):
        if shift_every and it % shift_every == 0:
            cand, Ec = wp.shift_candidates(states, E)
            if Ec < E:
                states, E = cand, Ec
                _, g, pot = wp.value_grad(states)
                states_old = None
        d = wp.precondition(g)
        # residual: scaled Euler-Lagrange defect of free nodes
        trial, _, _ = wp.project(states - d)
        res = float(np.max(np.abs(trial - states)))
        if res < tol:
            break
        if states_old is not None:
            s = (states - states_old).ravel()
            y = (g - g_old).ravel()
            sy = float(s @ y)
            yPy = float(y @ wp.precondition(g - g_old).ravel())
            if sy > 0 and yPy > 0:
                step = float(np.clip(sy / yPy, 1e-10, 1e8))
            else:
                step = min(2.0 * step, 1e6)
        states_old, g_old = states.copy(), g.copy()
        fmax = max(hist[-memory:])
        st = step
        accepted = False
        for _ in range(50):
            cand, _, _ = wp.project(states - st * d)
            Ec = wp.value(cand)
            dec = float(np.sum(g * (states - cand)))
            if np.isfinite(Ec) and Ec <= fmax - 1e-4 * max(dec, 0.0):
                accepted = True
                break
            st *= 0.5
        if not accepted:
            break
        states = cand
        E, g, pot = wp.value_grad(states)
        hist.append(E)
    return states, E, pot, res, it


def minimize_constrained(problem: TravelingWaveProblem, init: np.ndarray | None,
                         c: float, T: float, t_ref: float = 0.0,
                         tol: float | None = None,
                         max_iter: int | None = None) -> ConstrainedMinimum:
    """Minimize the anchored weighted action over the truncated space.

    When ``init`` is None, a deterministic scan of interpolating fronts picks
    the starting curves (the scan-best and a right-parked variant) and the
    lower converged minimum is returned.
    """
    if c <= 0:
        raise ValueError("speed c must be positive")
    constraints = problem.constraint(T)
    wp = _WeightedCurveProblem(problem, c, constraints, t_ref)
    tol = problem.tol if tol is None else tol
    max_iter = problem.max_iter if max_iter is None else max_iter
    inits = [init] if init is not None else _init_candidates(wp)
    best = None
    total_it = 0
    for U0 in inits:
        states, E, pot, res, it = _spg(wp, np.asarray(U0, float), tol, max_iter)
        total_it += it
        if best is None or E < best[1]:
            best = (states, E, pot, res)
    states, E, pot, res = best
    # final feasibility audit with full projections
    states, act_m, act_p = wp.project(states, full=True)
    E = wp.value(states)
    land = problem.landscape
    dist_m, _, tau_m = land.nearest(states, "minus",
                                    tau_hints=None)
    dist_p, _, tau_p = land.nearest(states, "plus", tau_hints=None)
    feas_slack = 1e-6
    active_minus = bool(np.any(dist_m[wp.mask_minus] >= constraints.r_minus * (1 - feas_slack)))
    active_plus = bool(np.any(dist_p[wp.mask_plus] >= constraints.r_plus * (1 - feas_slack)))
    return ConstrainedMinimum(states, E, c, t_ref, constraints, total_it, res,
                              land.value_many(states), dist_m, dist_p,
                              tau_m, tau_p, active_minus, active_plus)


def entry_times(minimum: ConstrainedMinimum, problem: TravelingWaveProblem,
                auto_floor: bool = True) -> tuple:
    """Entry times of the curve into tight neighborhoods of the two minimum
    sets with near-extremal potential values.

    t_minus: last node with pot <= a + eps_minus and dist to the global set
    <= r_minus.  t_plus: first node with pot <= eps_plus and dist to the
    local set <= r_plus.  With auto_floor, levels too tight for the discrete
    tails are raised to twice the measured floor (recorded on the result);
    otherwise EntryTimeError is raised when no node qualifies.
    """
    t = problem.grid1.nodes
    pot = minimum.pot_values
    a = problem.landscape.a
    dm, dp = minimum.dist_minus, minimum.dist_plus
    eps_m = problem.eps_minus
    eps_p = problem.eps_plus
    third = len(t) // 3
    if eps_m is None or (auto_floor and not np.any(pot[:third] - a <= eps_m)):
        eps_m = 2.0 * float(np.min(pot[:third] - a))
    if eps_p is None or (auto_floor and not np.any(pot[-third:] <= eps_p)):
        eps_p = 2.0 * float(np.min(pot[-third:]))
    ok_m = (pot <= a + eps_m) & (dm <= problem.r_minus)
    ok_p = (pot <= eps_p) & (dp <= problem.r_plus)
    if not np.any(ok_m):
        raise EntryTimeError("undefined entry time on the minus side")
    if not np.any(ok_p):
        raise EntryTimeError("undefined entry time on the plus side")
    t_minus = float(t[np.nonzero(ok_m)[0][-1]])
    t_plus = float(t[np.nonzero(ok_p)[0][0]])
    minimum.t_minus = t_minus
    minimum.t_plus = t_plus
    return t_minus, t_plus, float(eps_m), float(eps_p)


def t_star_bound(c: float, a: float, alpha_star: float) -> float:
    """Upper bound on the entry-time gap: ln(1 - a/alpha_star)/c (only
    defined when alpha_star > 0, i.e. under the perturbation assumption)."""
    if alpha_star <= 0:
        raise ValueError("alpha_star must be positive")
    return float(np.log(-a / alpha_star + 1.0) / c)


def no_oscillation_check(minimum: ConstrainedMinimum,
                         problem: TravelingWaveProblem) -> bool:
    """True iff the curve stays in the minus ball before t_minus, in the plus
    ball after t_plus, and its potential is nonnegative after t_minus."""
    if minimum.t_minus is None or minimum.t_plus is None:
        entry_times(minimum, problem)
    t = problem.grid1.nodes
    before = t <= minimum.t_minus
    after = t >= minimum.t_plus
    tol = 1e-9
    ok_minus = bool(np.all(minimum.dist_minus[before] < problem.r_minus + tol))
    ok_plus = bool(np.all(minimum.dist_plus[after] < problem.r_plus + tol))
    ok_energy = bool(np.all(minimum.pot_values[t >= minimum.t_minus] >= -1e-9))
    return ok_minus and ok_plus and ok_energy


def competitor_moves(minimum: ConstrainedMinimum,
                     problem: TravelingWaveProblem) -> np.ndarray | None:
    """Surgery competitors for oscillating curves.

    Negative side: if the curve leaves the half-radius ball of the global set
    before its entry time, replace the early part by the nearest family
    element with a unit-time linear splice (two cases depending on where the
    re-entry point sits).  Positive side: if it leaves the plus ball after
    t_plus, freeze it at the nearest family element from t_plus + 1 on.
    Returns the improved state curve, or None when no surgery applies.
    """
    land = problem.landscape
    t = problem.grid1.nodes
    h = problem.grid1.h
    if minimum.t_minus is None or minimum.t_plus is None:
        entry_times(minimum, problem)
    states = minimum.states
    i_minus = int(np.searchsorted(t, minimum.t_minus, side="right")) - 1
    i_plus = int(np.searchsorted(t, minimum.t_plus))
    bad_m = np.nonzero((t < minimum.t_minus) & (minimum.dist_minus >= problem.r_minus))[0]
    bad_p = np.nonzero((t > minimum.t_plus) & (minimum.dist_plus >= problem.r_plus))[0]
    n_splice = max(int(round(1.0 / h)), 1)
    if len(bad_m):
        i_tilde = int(bad_m[-1])
        # first node in [i_tilde, i_minus] back near the family with low potential
        a = land.a
        eps_m = problem.eps_minus if problem.eps_minus is not None else \
            2.0 * float(np.min(minimum.pot_values[:max(i_minus, 1)] - a))
        window = np.arange(i_tilde, i_minus + 1)
        good = window[(minimum.pot_values[window] <= a + eps_m)
                      & (minimum.dist_minus[window] <= problem.r_minus)]
        i0 = int(good[0]) if len(good) else i_minus
        hint = None if minimum.tau_minus is None else minimum.tau_minus[i0]
        _, v_ref, _ = land.dist_to_family(states[i0], "minus", tau_hint=hint)
        out = states.copy()
        if i0 - i_tilde <= n_splice:
            lo = max(i0 - n_splice, 0)
            out[:lo] = v_ref
            lam = np.linspace(0.0, 1.0, i0 - lo + 1)[:, None]
            out[lo:i0 + 1] = (1 - lam) * v_ref[None, :] + lam * states[i0][None, :]
        else:
            lo = i_tilde
            hi = min(lo + n_splice, i0)
            out[:lo] = v_ref
            lam = np.linspace(0.0, 1.0, hi - lo + 1)[:, None]
            out[lo:hi + 1] = (1 - lam) * v_ref[None, :] + lam * states[i0][None, :]
            out[hi:i0 + 1] = states[i0]
        return out
    if len(bad_p):
        i0 = i_plus
        hint = None if minimum.tau_plus is None else minimum.tau_plus[i0]
        _, v_ref, _ = land.dist_to_family(states[i0], "plus", tau_hint=hint)
        out = states.copy()
        hi = min(i0 + n_splice, len(t) - 1)
        lam = np.linspace(0.0, 1.0, hi - i0 + 1)[:, None]
        out[i0:hi + 1] = (1 - lam) * states[i0][None, :] + lam * v_ref[None, :]
        out[hi:] = v_ref
        return out
    return None


def classify_speed(problem: TravelingWaveProblem, c: float, T: float,
                   t_ref: float = 0.0) -> tuple:
    """Classify a speed: 'below' iff the constrained minimum is negative
    beyond the classification tolerance (then translation pumping drives the
    untruncated infimum to -infinity), else 'at_or_above'."""
    m = minimize_constrained(problem, None, c, T, t_ref)
    label = "below" if m.energy < -problem.classify_tol() else "at_or_above"
    return label, m


def _auto_bracket(problem, lo, hi, T, t_ref, probes):
    lab_lo, m_lo = classify_speed(problem, lo, T, t_ref)
    probes.append({"c": lo, "label": lab_lo, "energy": m_lo.energy})
    attempts = 0
    while lab_lo != "below" and attempts < 8:
        lo *= 0.5
        lab_lo, m_lo = classify_speed(problem, lo, T, t_ref)
        probes.append({"c": lo, "label": lab_lo, "energy": m_lo.energy})
        attempts += 1
    if lab_lo != "below":
        raise SolverError("bracket not found: no speed classifies below")
    lab_hi, m_hi = classify_speed(problem, hi, T, t_ref)
    probes.append({"c": hi, "label": lab_hi, "energy": m_hi.energy})
    attempts = 0
    while lab_hi != "at_or_above" and attempts < 8:
        hi *= 2.0
        lab_hi, m_hi = classify_speed(problem, hi, T, t_ref)
        probes.append({"c": hi, "label": lab_hi, "energy": m_hi.energy})
        attempts += 1
    if lab_hi != "at_or_above":
        raise SolverError("bracket not found: no speed classifies at_or_above")
    return lo, hi


def find_speed(problem: TravelingWaveProblem, bracket_hint: tuple,
               tol_c: float = 1e-3, T0: float | None = None,
               t_ref: float = 0.0, release_rounds: int = 10) -> SpeedSearchResult:
    """Bisection for the threshold speed, then constraint release.

    The bracket hint is auto-expanded until it straddles the threshold.  At
    the final speed the solver re-minimizes on a growing constraint-time
    schedule and nudges the speed inside the final bracket (guided by which
    side saturates) until the minimizer leaves both constraints inactive.
    """
    notes = []
    probes = []
    L1 = problem.grid1.half_length
    if T0 is None:
        if problem.alpha_star is not None and problem.alpha_star > 0:
            T0 = max(1.0, 2.0 * t_star_bound(max(bracket_hint[0], 1e-6),
                                             problem.landscape.a, problem.alpha_star))
            notes.append("T0 from entry-time bound")
        else:
            T0 = max(1.0, L1 / 4.0)
            notes.append("T0 from domain quarter (no entry-time bound available)")
    T0 = min(T0, 0.8 * L1)
    lo, hi = _auto_bracket(problem, bracket_hint[0], bracket_hint[1], T0, t_ref, probes)
    while hi - lo > tol_c:
        mid = 0.5 * (lo + hi)
        label, m = classify_speed(problem, mid, T0, t_ref)
        probes.append({"c": mid, "label": label, "energy": m.energy})
        if label == "below":
            lo = mid
        else:
            hi = mid
    c_star = 0.5 * (lo + hi)
    schedule = [T0]
    for fac in (2.0, 4.0):
        Tn = min(fac * T0, 0.8 * L1)
        if Tn > schedule[-1]:
            schedule.append(Tn)
    # release: nudge c within the bracket guided by the saturated side
    c_try = c_star
    c_lo, c_hi = lo, hi
    best = None
    unconstrained = False
    for _ in range(release_rounds):
        minimum = None
        for T in schedule:
            minimum = minimize_constrained(problem, None, c_try, T, t_ref)
            if not (minimum.active_minus or minimum.active_plus):
                break
        best = minimum
        if not (minimum.active_minus or minimum.active_plus):
            unconstrained = True
            c_star = c_try
            break
        if minimum.active_plus and not minimum.active_minus:
            c_lo = c_try          # wave wants to run right: speed too low
            c_try = 0.5 * (c_try + c_hi)
        elif minimum.active_minus and not minimum.active_plus:
            c_hi = c_try
            c_try = 0.5 * (c_lo + c_try)
        else:
            notes.append("both sides active during release")
            break
    if not unconstrained:
        notes.append(f"constraints never released (largest T {schedule[-1]:.3g})")
        c_star = c_try
    minimum = best
    try:
        entry_times(minimum, problem)
    except EntryTimeError as exc:
        notes.append(str(exc))
    deriv = minimum.derivative_l2_sq(problem)
    formula = -problem.landscape.a / deriv if deriv > 0 else np.nan
    residual = strong_residual(minimum, problem)
    return SpeedSearchResult(c_star, (c_lo, c_hi), minimum, unconstrained,
                             formula, residual, schedule, probes, notes)


def strong_residual(minimum: ConstrainedMinimum,
                    problem: TravelingWaveProblem) -> float:
    """Max interior strong-form residual |-c U' - U'' + grad pot(U)| in the
    landscape metric (per-coordinate max norm)."""
    h = problem.grid1.h
    U = minimum.states
    c = minimum.c
    inner = slice(1, -1)
    d1 = (U[2:] - U[:-2]) / (2.0 * h)
    d2 = (U[2:] - 2.0 * U[1:-1] + U[:-2]) / h ** 2
    land = problem.landscape
    grad = land.grad_many(U[inner])
    mass = land.mass[None, :]
    res = -c * d1 - d2 + np.where(mass > 0, grad / np.where(mass > 0, mass, 1.0), 0.0)
    # pinned coordinates carry zero gradient rows; exclude them from the max
    free = land.mass > 0
    return float(np.max(np.abs(res[:, free])))


def equipartition_residual(minimum: ConstrainedMinimum,
                           problem: TravelingWaveProblem) -> np.ndarray:
    """Discrete residual of d/dt
    (pot(U) - ||U'||^2/2) = c ||U'||^2 at interior nodes."""
    h = problem.grid1.h
    U = minimum.states
    land = problem.landscape
    d1 = np.empty_like(U)
    d1[1:-1] = (U[2:] - U[:-2]) / (2.0 * h)
    d1[0] = (U[1] - U[0]) / h
    d1[-1] = (U[-1] - U[-2]) / h
    speed2 = np.sum(land.mass[None, :] * d1 * d1, axis=1)
    f = minimum.pot_values - 0.5 * speed2
    df = (f[2:] - f[:-2]) / (2.0 * h)
    return df - minimum.c * speed2[1:-1]


def uniqueness_audit(problem: TravelingWaveProblem,
                     c1: float, m1: ConstrainedMinimum,
                     c2: float, m2: ConstrainedMinimum,
                     window: tuple | None = None) -> dict:
    """Cross-energy identity audit on a truncated window.

    For a solution U of the profile equation at speed c2, and any c1,

      c1 * E_c1(U; (t1,t2)) = (c1-c2) int ||U'||^2 e^{c1 t}
                              + [e^{c1 t} (pot(U) - ||U'||^2/2)]_{t1}^{t2};

    the report carries the defect of this identity for both orderings and
    the speed difference.
    """
    t = problem.grid1.nodes
    h = problem.grid1.h
    if window is None:
        i1, i2 = 1, len(t) - 2
    else:
        i1 = int(np.searchsorted(t, window[0]))
        i2 = int(np.searchsorted(t, window[1]))
    land = problem.landscape

    def audit(ca, cb, m):
        U = m.states
        d1 = np.empty_like(U)
        d1[1:-1] = (U[2:] - U[:-2]) / (2.0 * h)
        d1[0] = (U[1] - U[0]) / h
        d1[-1] = (U[-1] - U[-2]) / h
        speed2 = np.sum(land.mass[None, :] * d1 * d1, axis=1)
        pot = m.pot_values
        wq = np.ones(i2 - i1 + 1)
        wq[0] = wq[-1] = 0.5
        seg = slice(i1, i2 + 1)
        wt = np.exp(ca * t[seg])
        Eca = float(h * np.sum(wq * wt * (0.5 * speed2[seg] + pot[seg])))
        integral = float(h * np.sum(wq * wt * speed2[seg]))
        boundary = float(np.exp(ca * t[i2]) * (pot[i2] - 0.5 * speed2[i2])
                         - np.exp(ca * t[i1]) * (pot[i1] - 0.5 * speed2[i1]))
        lhs = ca * Eca
        rhs = (ca - cb) * integral + boundary
        scale = max(abs(lhs), abs(rhs), 1e-300)
        return {"lhs": lhs, "rhs": rhs, "defect": lhs - rhs,
                "relative_defect": (lhs - rhs) / scale}

    return {
        "c1_on_U2": audit(c1, c2, m2),
        "c2_on_U1": audit(c2, c1, m1),
        "speed_difference": abs(c1 - c2),
    }
