"""Uniform grids, discrete curves and 2D profiles, quadrature and differences.

Curves are sampled connections between two wells on a symmetric interval
[-L, L] with an odd number of nodes so that t = 0 is a node (the phase-fixing
anchor).  Profiles store a 2D field as a stack of x2-slices over an x1 grid.
CSV/JSON serialization keeps one row per node and a small manifest with the
grid metadata.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

__all__ = [
    "Grid1D",
    "Curve1D",
    "Profile2D",
    "trapezoid_integral",
    "trapezoid_weights",
    "central_difference",
    "translate_curve",
    "translate_values",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [-L, L] with an odd number of nodes."""

    half_length: float
    n_points: int

    def __post_init__(self):
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("n_points must be odd and >= 3")

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.half_length, self.half_length, self.n_points)


def trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def trapezoid_integral(samples: np.ndarray, h: float) -> float:
    """Trapezoid rule over uniformly spaced samples."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    return float(h * (np.sum(samples, axis=0) - 0.5 * (samples[0] + samples[-1])))


@dataclass
class Curve1D:
    """A discrete path q: [-L, L] -> R^k joining two wells.

    values has shape (n_points, k); left_well/right_well are the boundary
    targets sigma_minus / sigma_plus.
    """

    grid: Grid1D
    values: np.ndarray
    left_well: np.ndarray
    right_well: np.ndarray

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.ndim == 2 and self.values.shape[0] == 1 and self.grid.n_points > 1:
            self.values = self.values.T
        self.left_well = np.atleast_1d(np.asarray(self.left_well, dtype=float))
        self.right_well = np.atleast_1d(np.asarray(self.right_well, dtype=float))
        if self.values.shape != (self.grid.n_points, self.k):
            raise ValueError(f"values shape {self.values.shape} does not match grid/wells")

    @property
    def k(self) -> int:
        return self.left_well.shape[0]

    def copy(self) -> "Curve1D":
        return replace(self, values=self.values.copy())

    def boundary_errors(self) -> tuple[float, float]:
        return (float(np.linalg.norm(self.values[0] - self.left_well)),
                float(np.linalg.norm(self.values[-1] - self.right_well)))

    def check_boundaries(self, tol: float) -> None:
        eL, eR = self.boundary_errors()
        if eL > tol or eR > tol:
            raise ValueError(f"boundary mismatch: left {eL:.2e}, right {eR:.2e} > {tol:.2e}")

    def to_csv(self, path: str | Path) -> None:
        t = self.grid.nodes
        data = np.column_stack([t, self.values])
        header = "t," + ",".join(f"q{i+1}" for i in range(self.k))
        np.savetxt(path, data, delimiter=",", header=header, comments="")
        manifest = {
            "kind": "Curve1D",
            "half_length": self.grid.half_length,
            "n_points": self.grid.n_points,
            "k": self.k,
            "left_well": self.left_well.tolist(),
            "right_well": self.right_well.tolist(),
        }
        Path(str(path) + ".json").write_text(json.dumps(manifest, sort_keys=True, indent=1))

    @staticmethod
    def from_csv(path: str | Path) -> "Curve1D":
        manifest = json.loads(Path(str(path) + ".json").read_text())
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        grid = Grid1D(manifest["half_length"], manifest["n_points"])
        return Curve1D(grid, data[:, 1:], np.array(manifest["left_well"]),
                       np.array(manifest["right_well"]))


@dataclass
class Profile2D:
    """A discrete field U(x1, x2) stored as x1-slices sharing one x2 grid."""

    x1_grid: Grid1D
    x2_grid: Grid1D
    values: np.ndarray           # (n1, n2, k)
    sigma_minus: np.ndarray
    sigma_plus: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.sigma_minus = np.atleast_1d(np.asarray(self.sigma_minus, dtype=float))
        self.sigma_plus = np.atleast_1d(np.asarray(self.sigma_plus, dtype=float))
        n1, n2, k = self.x1_grid.n_points, self.x2_grid.n_points, self.sigma_minus.shape[0]
        if self.values.shape != (n1, n2, k):
            raise ValueError(f"values shape {self.values.shape}, expected {(n1, n2, k)}")

    @property
    def k(self) -> int:
        return self.sigma_minus.shape[0]

    def slice(self, i: int) -> Curve1D:
        return Curve1D(self.x2_grid, self.values[i], self.sigma_minus, self.sigma_plus)

    def slices(self):
        for i in range(self.x1_grid.n_points):
            yield self.slice(i)

    def to_csv(self, path: str | Path) -> None:
        n1, n2 = self.x1_grid.n_points, self.x2_grid.n_points
        x1 = np.repeat(self.x1_grid.nodes, n2)
        x2 = np.tile(self.x2_grid.nodes, n1)
        data = np.column_stack([x1, x2, self.values.reshape(n1 * n2, self.k)])
        header = "x1,x2," + ",".join(f"u{i+1}" for i in range(self.k))
        np.savetxt(path, data, delimiter=",", header=header, comments="")
        manifest = {
            "kind": "Profile2D",
            "x1": {"half_length": self.x1_grid.half_length, "n_points": n1},
            "x2": {"half_length": self.x2_grid.half_length, "n_points": n2},
            "k": self.k,
            "sigma_minus": self.sigma_minus.tolist(),
            "sigma_plus": self.sigma_plus.tolist(),
        }
        Path(str(path) + ".json").write_text(json.dumps(manifest, sort_keys=True, indent=1))

    @staticmethod
    def from_csv(path: str | Path) -> "Profile2D":
        manifest = json.loads(Path(str(path) + ".json").read_text())
        g1 = Grid1D(manifest["x1"]["half_length"], manifest["x1"]["n_points"])
        g2 = Grid1D(manifest["x2"]["half_length"], manifest["x2"]["n_points"])
        k = manifest["k"]
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        values = data[:, 2:].reshape(g1.n_points, g2.n_points, k)
        return Profile2D(g1, g2, values, np.array(manifest["sigma_minus"]),
                         np.array(manifest["sigma_plus"]))


def central_difference(curve: Curve1D | np.ndarray, h: float | None = None) -> np.ndarray:
    """Second-order derivative estimate along axis 0.

    Interior nodes use the central stencil, the endpoints one-sided
    second-order stencils.  Exact on linear data.
    """
    if isinstance(curve, Curve1D):
        values, h = curve.values, curve.grid.h
    else:
        values = np.asarray(curve, dtype=float)
        if h is None:
            raise ValueError("h required for raw arrays")
    if values.shape[0] < 3:
        raise ValueError("need at least 3 nodes")
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    return out


def _catmull_rom(p0, p1, p2, p3, s):
    """Catmull-Rom cubic on [p1, p2] with local coordinate s in [0,1]."""
    s = s[..., None]
    return (p1 + 0.5 * s * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3
                                           + s * (3.0 * (p1 - p2) + p3 - p0))))


def translate_values(values: np.ndarray, h: float, tau: float,
                     pad_left: np.ndarray, pad_right: np.ndarray) -> np.ndarray:
    """Resample values at t + tau by Catmull-Rom interpolation.

    Content that moves outside the original support is padded with the given
    boundary states.  Grid-aligned shifts (tau a multiple of h) are exact.
    """
    n = values.shape[0]
    shift = tau / h
    j = int(np.floor(shift))
    frac = shift - j
    pad_left = np.asarray(pad_left, float)
    pad_right = np.asarray(pad_right, float)

    def node(idx):
        idx = np.asarray(idx)
        out = np.empty(idx.shape + values.shape[1:])
        lo = idx < 0
        hi = idx > n - 1
        mid = ~(lo | hi)
        out[lo] = pad_left
        out[hi] = pad_right
        out[mid] = values[idx[mid]]
        return out

    base = np.arange(n) + j
    if abs(frac) < 1e-14:
        return node(base)
    s = np.full(n, frac)
    return _catmull_rom(node(base - 1), node(base), node(base + 1), node(base + 2), s)


def translate_curve(curve: Curve1D, tau: float) -> Curve1D:
    """Translate a curve: new values are q(t + tau), padded with the wells."""
    if abs(tau) >= curve.grid.half_length:
        raise ValueError("|tau| must be smaller than the grid half-length")
    vals = translate_values(curve.values, curve.grid.h, tau,
                            curve.left_well, curve.right_well)
    return replace(curve, values=vals)
