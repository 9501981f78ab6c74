"""Numerical constants ledger and assumption checks.

The existence theory runs on a handful of constants describing the local
geometry of the action around the two minimizing families: capture radii
rho0 (projection single-valued, action positive above the level), quadratic
constants beta (action excess controls squared distance), the annulus infima
e_r, the inverse moduli nu(r) (small excess forces small H1 distance), the
separation d0 between the half-radius neighborhoods, and the derived bounds
E_max and mu_minus.  None of these is constructive, so they are estimated by
seeded sampling; the sampling protocol travels with the ledger and the
headline bound carries a configurable safety factor.

Everything here works on a landscape (point or curve-family, see
``landscape``), so the same ledger machinery serves the scalar front problem
and the planar problem.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grids import Curve1D, Grid1D
from .heteroclinic import HeteroclinicResult
from .landscape import CurveFamilyLandscape
from .potentials import PotentialSpec

__all__ = [
    "ConstantsLedger",
    "AssumptionReport",
    "EstimationError",
    "estimate_rho0",
    "estimate_beta",
    "estimate_e_r",
    "estimate_nu",
    "compute_d0",
    "compute_ledger",
    "check_assumptions",
    "gl_circle_competitor",
    "check_gl_competitor",
    "bump_trace_integral",
]


class EstimationError(RuntimeError):
    pass


@dataclass
class ConstantsLedger:
    """Estimated constants for one problem instance.

    All values are seeded sampled estimates, not certified bounds; `protocol`
    records seeds and sample counts.  ``e_max_effective`` is the headline
    upper bound after applying the safety factor.
    """

    rho0_minus: float
    rho0_plus: float
    beta_minus: float
    beta_plus: float
    beta_minus_spectral: float
    beta_plus_spectral: float
    beta_bar_minus: float
    beta_bar_plus: float
    mu_minus: float
    d0: float
    delta0_minus: float
    r_frak_minus: float
    eta0_plus: float
    r_hat_plus: float
    e_r_table: dict
    nu_table: dict
    e_max: float
    e_max_plus: float
    safety_factor: float
    m_minus: float
    m_plus: float
    gap: float
    alpha_star: float
    protocol: dict = field(default_factory=dict)

    @property
    def e_max_effective(self) -> float:
        return self.safety_factor * self.e_max

    @property
    def e_max_plus_effective(self) -> float:
        return self.safety_factor * self.e_max_plus

    def to_dict(self) -> dict:
        out = {k: (v if isinstance(v, (dict, str)) else float(v))
               for k, v in self.__dict__.items()}
        out["e_max_effective"] = float(self.e_max_effective)
        out["e_max_plus_effective"] = float(self.e_max_plus_effective)
        return out

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1))

    def speed_bound(self) -> float:
        """sqrt(2 gap)/d0, the upper bound on the threshold speed."""
        return float(np.sqrt(2.0 * self.gap) / self.d0)


@dataclass
class AssumptionReport:
    perturbation_ok: bool
    perturbation_margin: float
    sublevel_ok: bool
    convergence_ok: bool
    convergence_margin: float
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "perturbation_ok": bool(self.perturbation_ok),
            "perturbation_margin": float(self.perturbation_margin),
            "sublevel_ok": bool(self.sublevel_ok),
            "convergence_ok": bool(self.convergence_ok),
            "convergence_margin": float(self.convergence_margin),
            "notes": self.notes,
        }


def _side_level(landscape, side: str) -> float:
    return landscape.a if side == "minus" else 0.0


def _sample_at_distance(landscape, side: str, r: float, rng) -> np.ndarray:
    base = landscape.random_family_point(side, rng)
    return base + r * landscape.random_direction(rng)


def estimate_rho0(landscape, side: str, rng: np.random.Generator,
                  n_samples: int = 50, n_sweep: int = 12) -> float:
    """Capture radius estimate: the largest radius in a dyadic sweep such
    that (a) the nearest-point projection is single-valued for random
    perturbations of that norm and (b) the action stays strictly above the
    side's level on the sampled punctured ball.

    For point landscapes (a) is automatic; (b) caps the radius at the first
    level-set crossing.  The result is additionally capped so the two
    family neighborhoods stay disjoint.
    """
    sep = landscape.family_separation()
    r_cap = 0.45 * sep
    level = _side_level(landscape, side)
    r = r_cap
    for _ in range(n_sweep):
        ok = True
        for j in range(n_samples):
            frac = rng.uniform(0.3, 1.0)
            state = _sample_at_distance(landscape, side, r * frac, rng)
            state = landscape.clip_many(state[None, :])[0]
            d, _, _ = landscape.dist_to_family(state, side)
            if d < 1e-12:
                continue
            excess = float(landscape.value_many(state[None, :])[0]) - level
            if excess <= 0:
                ok = False
                break
            if hasattr(landscape, "projection_single_valued"):
                if not landscape.projection_single_valued(state, side):
                    ok = False
                    break
        if ok:
            return float(r)
        r *= 0.5
    return float(r)


def estimate_beta(landscape, side: str, rho0: float, rng: np.random.Generator,
                  lambda2: float | None = None, n_samples: int = 60) -> tuple:
    """Quadratic constant of the action around a family.

    The spectral estimate is 2/lambda2 (gap of the linearized operator; for
    point landscapes the smallest Hessian eigenvalue).  Because the sharp
    local constant can fail at finite radius, the returned working value is
    inflated to cover the sampled ratio dist^2 / (action excess) over the
    rho0 ball.  Returns (beta, beta_spectral).
    """
    level = _side_level(landscape, side)
    if lambda2 is None:
        if hasattr(landscape, "hess_at"):
            lambda2 = float(np.linalg.eigvalsh(landscape.hess_at(side))[0])
        else:
            raise EstimationError("lambda2 required for curve landscapes")
    if lambda2 <= 0:
        raise EstimationError("nonpositive spectral gap; beta undefined")
    beta_spec = 2.0 / lambda2
    worst = beta_spec
    for _ in range(n_samples):
        r = rho0 * rng.uniform(0.1, 1.0)
        state = _sample_at_distance(landscape, side, r, rng)
        d = landscape.h1_dist_to_family(state, side)
        excess = float(landscape.value_many(state[None, :])[0]) - level
        if excess <= 0:
            continue
        worst = max(worst, d * d / excess)
    return float(1.05 * worst), float(beta_spec)


def estimate_e_r(landscape, side: str, r: float, rho0: float,
                 rng: np.random.Generator, n_starts: int = 6,
                 n_iter: int = 400) -> float:
    """Upper estimate of the annulus infimum
    inf { action : dist to the family in [r, rho0] }.

    Projected descent with radial retraction onto the annulus, multi-start
    from random perturbations; the best value found is returned.  Since the
    estimate enters the headline bound through a min, overestimation only
    inflates that bound (hence the ledger's safety factor).
    """
    if not 0 < r <= rho0:
        raise EstimationError("need 0 < r <= rho0")
    best = np.inf

    def retract(state):
        d, ref, _ = landscape.dist_to_family(state, side)
        if d < r:
            if d < 1e-12:
                return ref + r * landscape.random_direction(rng)
            return ref + (r / d) * (state - ref)
        if d > rho0:
            return ref + (rho0 / d) * (state - ref)
        return state

    for _ in range(n_starts):
        state = retract(_sample_at_distance(landscape, side, r * 1.2, rng))
        val = float(landscape.value_many(state[None, :])[0])
        step = 0.1 * r
        for _ in range(n_iter):
            g = landscape.grad_many(state[None, :])[0]
            mass = landscape.mass
            gn = np.sqrt(np.sum(mass * g * g))
            if gn < 1e-12:
                break
            cand = retract(state - step * g / max(gn, 1e-300))
            v2 = float(landscape.value_many(cand[None, :])[0])
            if v2 < val:
                state, val = cand, v2
                step *= 1.3
            else:
                step *= 0.5
                if step < 1e-10 * r:
                    break
        best = min(best, val)
    if not np.isfinite(best):
        raise EstimationError("no feasible start for the annulus estimate")
    return float(best)


def estimate_nu(landscape, side: str, r: float, rho0: float,
                rng: np.random.Generator, n_samples: int = 200,
                n_sweep: int = 14) -> float:
    """Sampled inversion of the modulus nu(r): the largest epsilon in a
    dyadic sweep such that all sampled states with action excess <= epsilon
    (within the rho0/2 neighborhood) lie within H1 distance r of the family.

    Falls back to the smallest sweep value (conservative) when every level
    fails.
    """
    level = _side_level(landscape, side)

    def sample_with_excess(eps):
        direction = landscape.random_direction(rng)
        base = landscape.random_family_point(side, rng)
        lo, hi = 0.0, rho0 / 2
        target = eps * rng.uniform(0.2, 1.0)
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            ex = float(landscape.value_many((base + mid * direction)[None, :])[0]) - level
            if ex < target:
                lo = mid
            else:
                hi = mid
        return base + lo * direction

    eps = abs(landscape.a)
    smallest = eps
    for _ in range(n_sweep):
        ok = True
        for _ in range(n_samples // 4):
            state = sample_with_excess(eps)
            if landscape.h1_dist_to_family(state, side) > r:
                ok = False
                break
        if ok:
            # denser confirmation pass
            for _ in range(n_samples):
                state = sample_with_excess(eps)
                if landscape.h1_dist_to_family(state, side) > r:
                    ok = False
                    break
        if ok:
            return float(eps)
        smallest = eps
        eps *= 0.5
    return float(smallest)


def compute_d0(landscape, rho0_minus: float, rho0_plus: float) -> float:
    """Separation of the half-radius neighborhoods: the minimal distance
    between the two families minus (rho0_minus + rho0_plus)/2."""
    sep = landscape.family_separation()
    d0 = sep - 0.5 * (rho0_minus + rho0_plus)
    if d0 <= 0:
        raise EstimationError("families overlap: d0 <= 0")
    return float(d0)


def compute_ledger(landscape, seed: int = 0,
                   lambda2_minus: float | None = None,
                   lambda2_plus: float | None = None,
                   safety_factor: float = 0.5) -> ConstantsLedger:
    """Estimate the full constants ledger for a landscape instance.

    lambda2_minus/plus are the spectral gaps of the linearized operators at
    the two families (from the heteroclinic stage for curve landscapes;
    computed from the well Hessians for point landscapes).
    """
    rng = np.random.default_rng(seed)
    a = landscape.a
    m_minus = landscape.m_minus
    m_plus = landscape.m_plus
    gap = m_plus - m_minus

    rho0_m = estimate_rho0(landscape, "minus", rng)
    rho0_p = estimate_rho0(landscape, "plus", rng)
    beta_m, beta_m_spec = estimate_beta(landscape, "minus", rho0_m, rng, lambda2_minus)
    beta_p, beta_p_spec = estimate_beta(landscape, "plus", rho0_p, rng, lambda2_plus)

    def beta_bar(b):
        return 0.5 * b * b * (b * b + (b + 1.0) ** 2)

    bbar_m = beta_bar(beta_m)
    bbar_p = beta_bar(beta_p)
    mu_minus = 1.0 / (beta_m + bbar_m)
    d0 = compute_d0(landscape, rho0_m, rho0_p)

    e_r = {}
    nu = {}
    # minus side
    r_quarter = rho0_m / 4.0
    e_r[("minus", "rho0/4")] = estimate_e_r(landscape, "minus", r_quarter, rho0_m, rng)
    delta0_m = min(np.sqrt(np.exp(-1.0) * r_quarter
                           * np.sqrt(2.0 * (e_r[("minus", "rho0/4")] - m_minus))),
                   r_quarter)
    r_frak_m = rho0_m / (beta_m + 1.0)
    e_r[("minus", "delta0")] = estimate_e_r(landscape, "minus", delta0_m, rho0_m, rng)
    nu[("minus", "r_frak")] = estimate_nu(landscape, "minus", r_frak_m, rho0_m, rng)
    nu[("minus", "delta0")] = estimate_nu(landscape, "minus", delta0_m, rho0_m, rng)
    e_max = (1.0 / (beta_m ** 2 * (beta_m + 1.0))) * min(
        delta0_m ** 2 / 4.0,
        e_r[("minus", "delta0")] - m_minus,
        nu[("minus", "r_frak")],
        nu[("minus", "delta0")],
    )
    # plus side (enters the entry times and alpha_star)
    rp_quarter = rho0_p / 4.0
    e_r[("plus", "rho0/4")] = estimate_e_r(landscape, "plus", rp_quarter, rho0_p, rng)
    kappa_quarter = e_r[("plus", "rho0/4")] - m_plus
    eta0_p = min(np.sqrt(np.exp(-1.0) * rp_quarter * np.sqrt(2.0 * max(kappa_quarter, 0.0))),
                 rp_quarter)
    r_hat_p = rho0_p / (beta_p + 1.0)
    e_r[("plus", "eta0")] = estimate_e_r(landscape, "plus", eta0_p, rho0_p, rng)
    nu[("plus", "r_hat")] = estimate_nu(landscape, "plus", r_hat_p, rho0_p, rng)
    nu[("plus", "eta0")] = estimate_nu(landscape, "plus", eta0_p, rho0_p, rng)
    e_max_p = (1.0 / (beta_p ** 2 * (beta_p + 1.0))) * min(
        eta0_p ** 2 / 4.0,
        e_r[("plus", "eta0")] - m_plus,
        nu[("plus", "r_hat")],
        nu[("plus", "eta0")],
    )
    alpha_star = min(safety_factor * e_max_p, safety_factor * e_max + a)

    ledger = ConstantsLedger(
        rho0_minus=rho0_m, rho0_plus=rho0_p,
        beta_minus=beta_m, beta_plus=beta_p,
        beta_minus_spectral=beta_m_spec, beta_plus_spectral=beta_p_spec,
        beta_bar_minus=bbar_m, beta_bar_plus=bbar_p,
        mu_minus=mu_minus, d0=d0,
        delta0_minus=float(delta0_m), r_frak_minus=float(r_frak_m),
        eta0_plus=float(eta0_p), r_hat_plus=float(r_hat_p),
        e_r_table={f"{s}:{k}": float(v) for (s, k), v in e_r.items()},
        nu_table={f"{s}:{k}": float(v) for (s, k), v in nu.items()},
        e_max=float(e_max), e_max_plus=float(e_max_p),
        safety_factor=float(safety_factor),
        m_minus=float(m_minus), m_plus=float(m_plus), gap=float(gap),
        alpha_star=float(alpha_star),
        protocol={"seed": int(seed), "rho0_samples": 50, "nu_samples": 200,
                  "e_r_starts": 6,
                  "beta_inflation": "max of 2/lambda2 and 1.05x sampled ratio"},
    )
    return ledger


def compute_ledger_curves(potential: PotentialSpec, q_minus: HeteroclinicResult,
                          q_plus: HeteroclinicResult, seed: int = 0,
                          safety_factor: float = 0.5) -> ConstantsLedger:
    land = CurveFamilyLandscape(potential, q_minus, q_plus)
    lam_m = q_minus.spectral.lambda2 if q_minus.spectral else None
    lam_p = q_plus.spectral.lambda2 if q_plus.spectral else None
    return compute_ledger(land, seed=seed, lambda2_minus=lam_m,
                          lambda2_plus=lam_p, safety_factor=safety_factor)


def check_assumptions(ledger: ConstantsLedger, landscape,
                      rng: np.random.Generator | None = None,
                      n_sublevel: int = 100) -> AssumptionReport:
    """Evaluate the perturbation and convergence hypotheses from the ledger.

    The sublevel check samples states with action strictly below the local
    level m_plus and verifies they all sit within rho0_minus/2 of the global
    family.
    """
    rng = rng or np.random.default_rng(1234)
    gap = ledger.gap
    e_max = ledger.e_max_effective
    perturbation_range = 0.0 < gap < e_max
    margin = gap / e_max if e_max > 0 else np.inf

    sublevel_ok = True
    found = 0
    attempts = 0
    while found < n_sublevel and attempts < 40 * n_sublevel:
        attempts += 1
        r = rng.uniform(0, ledger.rho0_minus)
        state = _sample_at_distance(landscape, "minus", r, rng)
        pot = float(landscape.value_many(state[None, :])[0])
        if pot >= 0.0:   # need action below m_plus, i.e. potential < 0
            continue
        found += 1
        d, _, _ = landscape.dist_to_family(state, "minus")
        if d > ledger.rho0_minus / 2.0:
            sublevel_ok = False
            break
    notes = "" if found else "no sublevel states sampled"

    conv_bound = 0.5 * (ledger.mu_minus * ledger.d0) ** 2
    convergence_ok = bool(perturbation_range and sublevel_ok and gap < conv_bound)
    return AssumptionReport(
        perturbation_ok=bool(perturbation_range and sublevel_ok),
        perturbation_margin=float(margin),
        sublevel_ok=bool(sublevel_ok),
        convergence_ok=convergence_ok,
        convergence_margin=float(gap / conv_bound) if conv_bound > 0 else np.inf,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# Ginzburg-Landau circle competitor
# ---------------------------------------------------------------------------

def gl_circle_competitor(T: float, grid: Grid1D) -> Curve1D:
    """The explicit low-action connection between (-1,0) and (1,0) for the
    Ginzburg-Landau action: linear dives onto the circle of radius
    tanh(T/sqrt2) glued to a half-circle arc traversed over [-T, T]."""
    t = grid.nodes
    qT = np.tanh(T / np.sqrt(2.0))
    vals = np.zeros((grid.n_points, 2))
    m1 = t <= -T - 1.0
    m2 = (t > -T - 1.0) & (t < -T)
    m3 = np.abs(t) <= T
    m4 = (t > T) & (t < T + 1.0)
    m5 = t >= T + 1.0
    vals[m1, 0] = -1.0
    vals[m2, 0] = (t[m2] + T) + (t[m2] + T + 1.0) * (-qT)
    ang = np.pi * (t[m3] + T) / (2.0 * T)
    vals[m3, 0] = -qT * np.cos(ang)
    vals[m3, 1] = -qT * np.sin(ang)
    vals[m4, 0] = (t[m4] - T) - (t[m4] - T - 1.0) * qT
    vals[m5, 0] = 1.0
    return Curve1D(grid, vals, np.array([-1.0, 0.0]), np.array([1.0, 0.0]))


def check_gl_competitor(T_values=(5.0, 10.0, 20.0), n_per_unit: int = 200) -> dict:
    """Action of the circle competitor for several arc times (the values
    decrease toward 0 as T grows, certifying the off-axis shortcut)."""
    from .energy import energy_1d
    from .potentials import make_ginzburg_landau
    pot = make_ginzburg_landau()
    out = {}
    for T in T_values:
        L = T + 3.0
        n = int(2 * L * n_per_unit) + 1
        if n % 2 == 0:
            n += 1
        grid = Grid1D(L, n)
        q = gl_circle_competitor(T, grid)
        out[float(T)] = float(energy_1d(q, pot))
    return out


def bump_trace_integral(bump_spec: PotentialSpec, base: PotentialSpec,
                        curve: Curve1D) -> float:
    """Trace integral of the bump indicator along a curve:
    int chi(q(t)) dt = int (V_delta - V)/delta along q."""
    delta = bump_spec.params.get("delta")
    if delta is None:
        raise EstimationError("bump_spec carries no delta parameter")
    chi_vals = (bump_spec.eval(curve.values) - base.eval(curve.values)) / delta
    from .grids import trapezoid_integral
    return trapezoid_integral(chi_vals, curve.grid.h)
