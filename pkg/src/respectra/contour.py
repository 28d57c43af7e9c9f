"""Discretized complex contours and the quadrature primitives built on them.

A contour runs from 0 on the real axis into the lower half plane and back to
the real axis at a finite cutoff X.  Composite Gauss-Legendre nodes are mapped
onto the path; the panel touching the origin uses a quartic parameter map so
that quarter- and half-integer powers of z (the branch behaviour of the
built-in form factors) integrate with spectral accuracy.

Delta distributions on the curve are never sampled: an atom at position u
pairs with a function f as f(u) with unit weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from .errors import ContourError, EvaluationError

_SHAPES = ("rectangle", "semi_ellipse")


@dataclass(frozen=True)
class ContourSpec:
    """Geometry of the deformed path: maximum depth below the axis, real-axis
    cutoff, shape tag and total node count."""

    depth: float = 0.5
    cutoff: float = 20.0
    shape: str = "rectangle"
    n_nodes: int = 200

    def __post_init__(self):
        if not self.depth > 0:
            raise ContourError(f"contour depth must be positive, got {self.depth}")
        if not self.cutoff > 0:
            raise ContourError(f"contour cutoff must be positive, got {self.cutoff}")
        if self.shape not in _SHAPES:
            raise ContourError(f"unknown contour shape {self.shape!r}; choose from {_SHAPES}")
        if self.n_nodes < 16:
            raise ContourError(f"n_nodes must be at least 16, got {self.n_nodes}")


class ContourGrid:
    """Quadrature nodes/weights along a contour (or its upper-half conjugate).

    ``nodes`` are the complex sample points z_j, ``weights`` the path measure
    dz weights w_j, and ``tangents`` unit tangents used when a derivative
    along the curve is needed.  Grids are immutable and safe to share.
    """

    def __init__(self, spec: ContourSpec, nodes, weights, tangents, conjugate: bool = False):
        self.spec = spec
        self.nodes = np.asarray(nodes, dtype=complex)
        self.weights = np.asarray(weights, dtype=complex)
        self.tangents = np.asarray(tangents, dtype=complex)
        self.conjugate = bool(conjugate)
        for a in (self.nodes, self.weights, self.tangents):
            a.setflags(write=False)

    @property
    def cutoff(self) -> float:
        return self.spec.cutoff

    @property
    def n(self) -> int:
        return len(self.nodes)

    def conjugated(self) -> "ContourGrid":
        """The mirror grid in the opposite half plane, same orientation 0 -> cutoff."""
        return ContourGrid(self.spec, np.conj(self.nodes), np.conj(self.weights),
                           np.conj(self.tangents), conjugate=not self.conjugate)

    def node_index(self, u: complex, tol: float = 1e-12) -> int | None:
        """Index of the grid node equal to u, or None."""
        i = int(np.argmin(np.abs(self.nodes - u)))
        if abs(self.nodes[i] - u) <= tol * max(1.0, self.cutoff):
            return i
        return None


def _gauss(n: int):
    x, w = roots_legendre(n)
    return (x + 1.0) / 2.0, w / 2.0   # on [0, 1]


def _split_counts(n: int) -> tuple[int, int, int]:
    n_end = max(6, int(round(0.12 * n)))
    n_mid = n - 2 * n_end
    if n_mid < 4:
        n_end = (n - 4) // 2
        n_mid = n - 2 * n_end
    return n_end, n_mid, n_end


def build_contour(spec: ContourSpec) -> ContourGrid:
    """Composite Gauss-Legendre grid on the path 0 -> lower half plane -> cutoff."""
    d, X, n = spec.depth, spec.cutoff, spec.n_nodes
    if spec.shape == "rectangle":
        nA, nB, nC = _split_counts(n)
        nodes, weights, tangents = [], [], []
        # descending segment 0 -> -i d, quartic grading at the origin
        s, w = _gauss(nA)
        z = -1j * d * s**4
        dz = -4j * d * s**3
        nodes.append(z); weights.append(w * dz); tangents.append(np.full(nA, -1j))
        # bottom segment -i d -> X - i d
        t, w = _gauss(nB)
        nodes.append(-1j * d + X * t); weights.append(w * X + 0j)
        tangents.append(np.full(nB, 1.0 + 0j))
        # ascending segment X - i d -> X
        r, w = _gauss(nC)
        nodes.append(X - 1j * d * (1.0 - r)); weights.append(w * (1j * d))
        tangents.append(np.full(nC, 1j))
        return ContourGrid(spec, np.concatenate(nodes), np.concatenate(weights),
                           np.concatenate(tangents))
    # semi-ellipse: z(theta) = X/2 (1 - cos theta) - i d sin theta, theta = pi s^4
    s, w = _gauss(n)
    theta = np.pi * s**4
    dtheta = 4 * np.pi * s**3
    z = 0.5 * X * (1.0 - np.cos(theta)) - 1j * d * np.sin(theta)
    dz = (0.5 * X * np.sin(theta) - 1j * d * np.cos(theta)) * dtheta
    tang = dz / np.abs(dz)
    return ContourGrid(spec, z, w * dz, tang)


def real_axis_grid(cutoff: float, n_nodes: int = 400) -> ContourGrid:
    """Graded Gauss-Legendre grid on [0, cutoff] with the same quartic map at 0.

    Used for undeformed reference integrals and principal values.  Returned as
    a (degenerate) ContourGrid so the same integration helpers apply.
    """
    spec = ContourSpec(depth=min(1.0, cutoff / 4), cutoff=cutoff, n_nodes=n_nodes)
    h = min(1.0, cutoff / 10.0)
    nA = max(8, int(round(0.2 * n_nodes)))
    nB = n_nodes - nA
    s, w = _gauss(nA)
    x1 = h * s**4
    w1 = w * 4 * h * s**3
    t, w2 = _gauss(nB)
    x2 = h + (cutoff - h) * t
    w2 = w2 * (cutoff - h)
    nodes = np.concatenate([x1, x2]).astype(complex)
    weights = np.concatenate([w1, w2]).astype(complex)
    return ContourGrid(spec, nodes, weights, np.ones_like(nodes))


def integrate_contour(grid: ContourGrid, f: Callable) -> complex:
    """Quadrature of f along the grid's path: sum_j w_j f(z_j).

    For f analytic between the path and the real axis this approximates the
    undeformed integral over [0, cutoff].
    """
    vals = np.asarray(f(grid.nodes), dtype=complex)
    if not np.all(np.isfinite(vals)):
        bad = grid.nodes[~np.isfinite(vals)][:3]
        raise EvaluationError(f"integrand not finite at contour nodes, e.g. z={bad}")
    return complex(np.sum(grid.weights * vals))


def cderiv(f: Callable, u: complex, direction: complex = 1.0 + 0j, delta: float = 1e-3) -> complex:
    """Fourth-order directional derivative df/dz at u along a unit direction."""
    t = direction / abs(direction)
    d = delta * t
    f1 = f(u + d)
    f2 = f(u + 2 * d)
    fm1 = f(u - d)
    fm2 = f(u - 2 * d)
    return (fm2 - 8 * fm1 + 8 * f1 - f2) / (12 * delta * t)


def _pv_log_term(grid: ContourGrid, u: complex) -> complex:
    # PV of \int dz / (u - z) along the path from 0 to X; principal logs are
    # safe because u and X - u stay in the closed right half plane here.
    X = grid.cutoff
    if u == 0 or u == X:
        raise EvaluationError("principal value undefined at a contour endpoint")
    return complex(np.log(u) - np.log(X - u))


def pv_curve(grid: ContourGrid, h: Callable, u: complex,
             h_samples=None, hu: complex | None = None) -> complex:
    """Principal value of \\int h(z)/(u - z) dz for u on the grid's curve.

    The singularity is subtracted globally:
    PV = \\int [h(z) - h(u)]/(u - z) dz + h(u) * PV \\int dz/(u - z),
    with the second factor known in closed form.  If u coincides with a node
    the removable 0/0 sample is replaced by -h'(u) from a five-point stencil
    along the local tangent.
    """
    if hu is None:
        hu = complex(h(u))
    vals = np.asarray(h(grid.nodes), dtype=complex) if h_samples is None \
        else np.asarray(h_samples, dtype=complex)
    diff = u - grid.nodes
    idx = grid.node_index(u)
    if idx is not None:
        diff = diff.copy()
        diff[idx] = 1.0  # placeholder, replaced below
    q = (vals - hu) / diff
    if idx is not None:
        q[idx] = -cderiv(h, u, grid.tangents[idx])
    return complex(np.sum(grid.weights * q) + hu * _pv_log_term(grid, u))


def pole_kernel_integral(grid: ContourGrid, h: Callable, u: complex, side: int,
                         h_samples=None, hu: complex | None = None) -> complex:
    """\\int h(z) / (u + side*i0 - z) dz along the curve, u on the curve.

    ``side=+1`` displaces u toward the region between the curve and the real
    axis (the outgoing prescription), ``side=-1`` the other way.  Realized as
    the curve principal value minus side * i*pi * h(u).
    """
    if side not in (+1, -1):
        raise ValueError("side must be +1 or -1")
    if hu is None:
        hu = complex(h(u))
    return pv_curve(grid, h, u, h_samples=h_samples, hu=hu) - side * 1j * np.pi * hu


def pv_real_axis(f: Callable, x0: float, grid: ContourGrid) -> complex:
    """PV \\int_0^X f(w)/(w - x0) dw on a real-axis grid via global subtraction."""
    X = grid.cutoff
    if not 0 < x0 < X:
        raise EvaluationError(f"principal-value point {x0} outside (0, {X})")
    f0 = complex(f(x0))
    w = grid.nodes.real
    vals = np.asarray(f(w), dtype=complex)
    diff = w - x0
    mask = np.abs(diff) < 1e-13 * max(1.0, X)
    diff[mask] = 1.0
    q = (vals - f0) / diff
    if mask.any():
        q[mask] = cderiv(f, x0)
    return complex(np.sum(grid.weights.real * q) + f0 * np.log((X - x0) / x0))


def plemelj_integral(f: Callable, x0: float, side: str,
                     grid: ContourGrid | None = None, cutoff: float = 20.0,
                     n_nodes: int = 400) -> complex:
    """Boundary value \\int_0^X f(w) / (x0 - w +- i0) dw.

    side "+i0" gives -i*pi*f(x0) - PV \\int f/(w - x0); side "-i0" is the
    conjugate prescription +i*pi*f(x0) - PV \\int f/(w - x0).
    """
    signs = {"+i0": +1, "-i0": -1, +1: +1, -1: -1}
    if side not in signs:
        raise ValueError(f"side must be '+i0' or '-i0', got {side!r}")
    s = signs[side]
    if grid is None:
        grid = real_axis_grid(cutoff, n_nodes)
    pv = pv_real_axis(f, x0, grid)
    return complex(-s * 1j * np.pi * f(x0) - pv)
