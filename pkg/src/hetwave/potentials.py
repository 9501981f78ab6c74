"""Multi-well potentials on R^k: interface, invariant checks, and factories.

A potential is a nonnegative smooth function V with a finite list of wells
(zeros with positive-definite Hessian) and coercive growth at infinity.  The
factories below build the concrete examples used throughout the package:
the scalar double well, the Ginzburg-Landau potential and its symmetric
perturbation with two geometrically distinct minimizing connections, the
three-dimensional six-well example, localized bump perturbations V + delta*chi,
and the unbalanced two-minima potential for scalar front problems.

All callables are vectorized over a trailing state axis: ``eval`` maps
``(..., k) -> (...)``, ``grad`` maps ``(..., k) -> (..., k)`` and ``hess``
maps ``(..., k) -> (..., k, k)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "PotentialSpec",
    "WellPair",
    "PotentialError",
    "make_scalar_allen_cahn",
    "make_ginzburg_landau",
    "make_perturbed_gl",
    "make_zuniga_sternberg",
    "make_bump_perturbation",
    "make_unbalanced_bistable",
    "potential_from_config",
    "POTENTIAL_FACTORIES",
]


class PotentialError(ValueError):
    """Raised when a potential violates its declared structure."""


def _smoothstep(x: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 for x<=0, 1 for x>=1, C^2 at both ends."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def _smoothstep_d1(x: np.ndarray) -> np.ndarray:
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * xc * xc * (1.0 + xc * (-2.0 + xc)), 0.0)


def _smoothstep_d2(x: np.ndarray) -> np.ndarray:
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 60.0 * xc * (1.0 + xc * (-3.0 + 2.0 * xc)), 0.0)


@dataclass(frozen=True)
class PotentialSpec:
    """A multi-well potential with analytic gradient and Hessian.

    Attributes:
        name: identifier used in configs and run manifests.
        dimension: k, the state-space dimension.
        wells: array of shape (n_wells, k) with the declared minima.
        eval/grad/hess: vectorized callables (see module docstring).
        growth_radius: R0 beyond which <grad V(u), u> > 0 holds.
        isolated_wells: False when the zero set is a manifold (pure
            Ginzburg-Landau); disables the isolated-well checks.
        nondegenerate_wells: False when some declared well has a singular
            Hessian; disables the positive-definiteness check there.
        zero_at_wells: False for unbalanced potentials whose global minimum
            sits below zero; disables the V(well)=0 check.
        params: constructor parameters, recorded for provenance.
    """

    name: str
    dimension: int
    wells: np.ndarray
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    growth_radius: float
    isolated_wells: bool = True
    nondegenerate_wells: bool = True
    zero_at_wells: bool = True
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        wells = np.atleast_2d(np.asarray(self.wells, dtype=float))
        object.__setattr__(self, "wells", wells)
        if wells.shape[1] != self.dimension:
            raise PotentialError(
                f"wells have dimension {wells.shape[1]}, expected {self.dimension}"
            )

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.eval(np.asarray(u, dtype=float))

    def validate(self, rng: np.random.Generator | None = None,
                 n_grad: int = 100, n_hess: int = 20, box: float = 2.0) -> None:
        """Check the declared invariants by sampling; raise PotentialError on failure.

        Verifies well values, Hessian positive definiteness, nonnegativity,
        coercivity beyond the growth radius, and consistency of grad/hess
        with finite differences of eval/grad.
        """
        rng = rng or np.random.default_rng(0)
        k = self.dimension
        if self.zero_at_wells:
            vals = self.eval(self.wells)
            if np.any(np.abs(vals) > 1e-12):
                raise PotentialError(f"{self.name}: V(well) != 0 (max {np.max(np.abs(vals)):.2e})")
        if self.nondegenerate_wells:
            for w in self.wells:
                eig = np.linalg.eigvalsh(self.hess(w))
                if eig[0] <= 0:
                    raise PotentialError(f"{self.name}: Hessian at well {w} not positive definite")
        pts = rng.uniform(-box, box, size=(n_grad, k))
        if self.zero_at_wells and np.any(self.eval(pts) < -1e-12):
            raise PotentialError(f"{self.name}: negative value sampled")
        # coercivity beyond R0
        dirs = rng.normal(size=(50, k))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        far = dirs * rng.uniform(self.growth_radius, 2 * self.growth_radius, size=(50, 1))
        if np.any(np.sum(self.grad(far) * far, axis=-1) <= 0):
            raise PotentialError(f"{self.name}: <grad V, u> <= 0 beyond growth radius")
        # gradient vs central differences of eval
        h = 1e-5
        for p in pts:
            g = self.grad(p)
            g_fd = np.empty(k)
            for j in range(k):
                e = np.zeros(k)
                e[j] = h
                g_fd[j] = (self.eval(p + e) - self.eval(p - e)) / (2 * h)
            denom = max(1.0, np.linalg.norm(g))
            if np.linalg.norm(g - g_fd) / denom > 1e-6:
                raise PotentialError(f"{self.name}: grad/eval mismatch at {p}")
        for p in pts[:n_hess]:
            H = self.hess(p)
            if np.linalg.norm(H - H.swapaxes(-1, -2)) > 1e-10:
                raise PotentialError(f"{self.name}: Hessian not symmetric at {p}")
            H_fd = np.empty((k, k))
            for j in range(k):
                e = np.zeros(k)
                e[j] = h
                H_fd[:, j] = (self.grad(p + e) - self.grad(p - e)) / (2 * h)
            denom = max(1.0, np.linalg.norm(H))
            if np.linalg.norm(H - 0.5 * (H_fd + H_fd.T)) / denom > 1e-5:
                raise PotentialError(f"{self.name}: hess/grad mismatch at {p}")


@dataclass(frozen=True)
class WellPair:
    """The two distinguished wells connected by the heteroclinics."""

    sigma_minus: np.ndarray
    sigma_plus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma_minus", np.atleast_1d(np.asarray(self.sigma_minus, float)))
        object.__setattr__(self, "sigma_plus", np.atleast_1d(np.asarray(self.sigma_plus, float)))
        if np.allclose(self.sigma_minus, self.sigma_plus):
            raise PotentialError("WellPair: the two wells coincide")

    def check_membership(self, potential: PotentialSpec, tol: float = 1e-10) -> None:
        for s in (self.sigma_minus, self.sigma_plus):
            if not np.any(np.all(np.abs(potential.wells - s) <= tol, axis=1)):
                raise PotentialError(f"well {s} not in the potential's well list")


def _default_growth_radius(wells: np.ndarray) -> float:
    return 2.0 * float(np.max(np.linalg.norm(np.atleast_2d(wells), axis=1))) + 1.0


def make_scalar_allen_cahn() -> PotentialSpec:
    """Scalar double well V(u) = (1-u^2)^2/4 with wells at -1 and +1."""

    def ev(u):
        return (1.0 - u[..., 0] ** 2) ** 2 / 4.0

    def gr(u):
        return ((u[..., 0] ** 2 - 1.0) * u[..., 0])[..., None]

    def he(u):
        return (3.0 * u[..., 0] ** 2 - 1.0)[..., None, None]

    wells = np.array([[-1.0], [1.0]])
    return PotentialSpec("scalar_allen_cahn", 1, wells, ev, gr, he,
                         _default_growth_radius(wells))


def make_ginzburg_landau() -> PotentialSpec:
    """V(u) = (1-|u|^2)^2/4 on R^2; zero set is the whole unit circle.

    The two axis points are listed for bookkeeping and the isolated-well
    checks are disabled: this potential is a construction ingredient, never
    a solver target.
    """

    def ev(u):
        return (1.0 - np.sum(u * u, axis=-1)) ** 2 / 4.0

    def gr(u):
        s = np.sum(u * u, axis=-1)
        return (s - 1.0)[..., None] * u

    def he(u):
        s = np.sum(u * u, axis=-1)
        eye = np.eye(u.shape[-1])
        return (s - 1.0)[..., None, None] * eye + 2.0 * u[..., :, None] * u[..., None, :]

    wells = np.array([[-1.0, 0.0], [1.0, 0.0]])
    return PotentialSpec("ginzburg_landau", 2, wells, ev, gr, he,
                         _default_growth_radius(wells),
                         isolated_wells=False, nondegenerate_wells=False)


def make_perturbed_gl(t_bar: float = 3.0) -> PotentialSpec:
    """Double-well perturbation of Ginzburg-Landau, symmetric in u2.

    Adds u2^2 * phi(|u|^2) where phi is a quintic smoothstep vanishing below
    q^2 + eps and equal to 1 above 1 - eps, with q = tanh(t_bar/sqrt(2)) and
    eps = (1-q^2)/4.  The result has exactly two wells (+-1, 0) and two
    mirror-image minimizing connections with a trace leaving the axis,
    provided the circle competitor beats the axis connection at t_bar.
    """
    if t_bar <= 0:
        raise PotentialError("t_bar must be positive")
    q = np.tanh(t_bar / np.sqrt(2.0))
    eps = (1.0 - q * q) / 4.0
    s0 = q * q + eps
    s1 = 1.0 - eps
    inv_w = 1.0 / (s1 - s0)

    def phi(s):
        return _smoothstep((s - s0) * inv_w)

    def dphi(s):
        return _smoothstep_d1((s - s0) * inv_w) * inv_w

    def d2phi(s):
        return _smoothstep_d2((s - s0) * inv_w) * inv_w * inv_w

    def ev(u):
        s = np.sum(u * u, axis=-1)
        return (1.0 - s) ** 2 / 4.0 + u[..., 1] ** 2 * phi(s)

    def gr(u):
        s = np.sum(u * u, axis=-1)
        g = (s - 1.0)[..., None] * u + (2.0 * u[..., 1] ** 2 * dphi(s))[..., None] * u
        g = np.array(g, copy=True)
        g[..., 1] += 2.0 * u[..., 1] * phi(s)
        return g

    def he(u):
        s = np.sum(u * u, axis=-1)
        eye = np.eye(2)
        outer = u[..., :, None] * u[..., None, :]
        H = (s - 1.0)[..., None, None] * eye + 2.0 * outer
        u2 = u[..., 1]
        # u2^2 * phi(s): D^2 = 4 u2^2 phi'' u u^T + 2 u2^2 phi' I
        #                 + 4 u2 phi' (u e2^T + e2 u^T) + 2 phi e2 e2^T
        H = H + (4.0 * u2 ** 2 * d2phi(s))[..., None, None] * outer
        H = H + (2.0 * u2 ** 2 * dphi(s))[..., None, None] * eye
        cross = np.zeros_like(H)
        cross[..., 1, :] += u
        cross[..., :, 1] += u
        H = H + (4.0 * u2 * dphi(s))[..., None, None] * cross
        e22 = np.zeros((2, 2))
        e22[1, 1] = 1.0
        H = H + (2.0 * phi(s))[..., None, None] * e22
        return H

    wells = np.array([[-1.0, 0.0], [1.0, 0.0]])
    return PotentialSpec("perturbed_gl", 2, wells, ev, gr, he,
                         _default_growth_radius(wells), params={"t_bar": float(t_bar)})


def make_zuniga_sternberg() -> PotentialSpec:
    """Six-well potential on R^3 vanishing exactly at (+-1,0,0) and
    (0, +-1/sqrt2, +-1/sqrt2).

    Direct computation shows D^2 V is singular at (+-1,0,0) (the quartic
    terms are flat in u2, u3 there), so the nondegeneracy check is disabled
    for this potential.
    """

    def parts(u):
        u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
        g = (1.0 - u1 * u1) ** 2 / 2.0
        return u1, u2, u3, g

    def ev(u):
        u1, u2, u3, g = parts(u)
        return u1 ** 2 * (1.0 - u1 ** 2) ** 2 + (u2 ** 2 - g) ** 2 + (u3 ** 2 - g) ** 2

    def gr(u):
        u1, u2, u3, g = parts(u)
        dg = -2.0 * u1 * (1.0 - u1 * u1)
        a2 = u2 ** 2 - g
        a3 = u3 ** 2 - g
        out = np.empty_like(u)
        out[..., 0] = (2.0 * u1 * (1.0 - u1 ** 2) ** 2
                       + u1 ** 2 * 2.0 * (1.0 - u1 ** 2) * (-2.0 * u1)
                       - 2.0 * (a2 + a3) * dg)
        out[..., 1] = 4.0 * u2 * a2
        out[..., 2] = 4.0 * u3 * a3
        return out

    def he(u):
        u1, u2, u3, g = parts(u)
        dg = -2.0 * u1 * (1.0 - u1 * u1)          # dg/du1
        d2g = -2.0 + 6.0 * u1 * u1                # d2g/du1^2
        a2 = u2 ** 2 - g
        a3 = u3 ** 2 - g
        H = np.zeros(u.shape + (3,))
        # f1 = u1^2 (1-u1^2)^2 : f1'' in u1
        f1dd = 2.0 * (1.0 - u1 ** 2) ** 2 - 16.0 * u1 ** 2 * (1.0 - u1 ** 2) + 8.0 * u1 ** 4
        H[..., 0, 0] = f1dd + 2.0 * (dg * dg - a2 * d2g) + 2.0 * (dg * dg - a3 * d2g)
        H[..., 1, 1] = 4.0 * a2 + 8.0 * u2 ** 2
        H[..., 2, 2] = 4.0 * a3 + 8.0 * u3 ** 2
        H[..., 0, 1] = H[..., 1, 0] = -4.0 * u2 * dg
        H[..., 0, 2] = H[..., 2, 0] = -4.0 * u3 * dg
        return H

    r = 1.0 / np.sqrt(2.0)
    wells = np.array([
        [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0],
        [0.0, r, r], [0.0, -r, r], [0.0, r, -r], [0.0, -r, -r],
    ])
    return PotentialSpec("zuniga_sternberg", 3, wells, ev, gr, he,
                         _default_growth_radius(wells), nondegenerate_wells=False)


def make_bump_perturbation(base: PotentialSpec, delta: float,
                           center: np.ndarray, radius: float) -> PotentialSpec:
    """Return V + delta*chi with chi a radial C^2 bump supported in B(center, 2r).

    chi = 1 on B(center, r), decays through a quintic smoothstep on the
    annulus r <= |u-center| <= 2r, and vanishes outside.  Every well of the
    base potential must stay out of B(center, 2r) so the zero set is
    unchanged.
    """
    if delta <= 0:
        raise PotentialError("delta must be positive")
    if radius <= 0:
        raise PotentialError("radius must be positive")
    u0 = np.asarray(center, dtype=float)
    if u0.shape != (base.dimension,):
        raise PotentialError("bump center has wrong dimension")
    d_wells = np.linalg.norm(base.wells - u0, axis=1)
    if np.any(d_wells < 2.0 * radius):
        raise PotentialError("a well lies inside the bump support B(center, 2r)")
    inv_r = 1.0 / radius

    def chi(u):
        rho = np.linalg.norm(u - u0, axis=-1)
        return 1.0 - _smoothstep((rho - radius) * inv_r)

    def dchi(u):
        dev = u - u0
        rho = np.linalg.norm(dev, axis=-1)
        amp = -_smoothstep_d1((rho - radius) * inv_r) * inv_r
        safe = np.where(rho > 0, rho, 1.0)
        return (amp / safe)[..., None] * dev

    def d2chi(u):
        dev = u - u0
        rho = np.linalg.norm(dev, axis=-1)
        safe = np.where(rho > 0, rho, 1.0)
        e = dev / safe[..., None]
        B1 = -_smoothstep_d1((rho - radius) * inv_r) * inv_r
        B2 = -_smoothstep_d2((rho - radius) * inv_r) * inv_r * inv_r
        eye = np.eye(base.dimension)
        proj = e[..., :, None] * e[..., None, :]
        return B2[..., None, None] * proj + (B1 / safe)[..., None, None] * (eye - proj)

    def ev(u):
        return base.eval(u) + delta * chi(u)

    def gr(u):
        return base.grad(u) + delta * dchi(u)

    def he(u):
        return base.hess(u) + delta * d2chi(u)

    spec = PotentialSpec(
        base.name + "_bump", base.dimension, base.wells, ev, gr, he,
        base.growth_radius,
        isolated_wells=base.isolated_wells,
        nondegenerate_wells=base.nondegenerate_wells,
        zero_at_wells=base.zero_at_wells,
        params={**base.params, "delta": float(delta),
                "bump_center": [float(x) for x in u0], "bump_radius": float(radius)},
    )
    return spec


def make_unbalanced_bistable(a_param: float, scale: float = 1.0) -> PotentialSpec:
    """W(u) = -scale * int_0^u s(1-s)(s-a) ds on R, for 0 < a < 1/2.

    Local minimum W(0)=0, global minimum W(1) = scale*(2a-1)/12 < 0.  The
    optional ``scale`` stiffens the wells without changing the zero set;
    the exact front profile and speed scale accordingly (see
    ``analysis.exact_bistable_reference``).
    """
    if not 0.0 < a_param < 0.5:
        raise PotentialError("a_param must lie in (0, 1/2)")
    if scale <= 0:
        raise PotentialError("scale must be positive")
    a = float(a_param)
    S = float(scale)

    def ev(u):
        x = u[..., 0]
        return S * (a * x ** 2 / 2.0 - (1.0 + a) * x ** 3 / 3.0 + x ** 4 / 4.0)

    def gr(u):
        x = u[..., 0]
        return (-S * x * (1.0 - x) * (x - a))[..., None]

    def he(u):
        x = u[..., 0]
        return (S * (a - 2.0 * (1.0 + a) * x + 3.0 * x ** 2))[..., None, None]

    wells = np.array([[0.0], [1.0]])
    return PotentialSpec("unbalanced_bistable", 1, wells, ev, gr, he,
                         _default_growth_radius(wells),
                         zero_at_wells=False, params={"a_param": a, "scale": S})


POTENTIAL_FACTORIES = {
    "scalar_allen_cahn": make_scalar_allen_cahn,
    "ginzburg_landau": make_ginzburg_landau,
    "perturbed_gl": make_perturbed_gl,
    "zuniga_sternberg": make_zuniga_sternberg,
    "unbalanced_bistable": make_unbalanced_bistable,
}


def potential_from_config(name: str, params: dict | None = None) -> PotentialSpec:
    """Build a potential by registry name plus parameter map (CLI entry point)."""
    if name not in POTENTIAL_FACTORIES:
        raise PotentialError(f"unknown potential '{name}' "
                             f"(known: {sorted(POTENTIAL_FACTORIES)})")
    params = dict(params or {})
    bump = params.pop("bump", None)
    spec = POTENTIAL_FACTORIES[name](**params)
    if bump is not None:
        spec = make_bump_perturbation(spec, bump["delta"],
                                      np.asarray(bump["center"], float), bump["radius"])
    return spec
