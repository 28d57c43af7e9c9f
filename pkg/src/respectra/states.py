"""Analytic test vectors and their real-axis reference pairings.

A vector is stored in the bilinear representation: the ket side holds the
amplitude function <z|Phi>, the bra side holds <Psi|z> directly, so pairings
never conjugate.  Profiles must continue analytically to the half plane named
by ``side`` ("lower" for kets, "upper" for bras, "both" for either use).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contour import ContourGrid, real_axis_grid
from .model import ModelSpec, eval_V, eval_V2

_SIDES = ("lower", "upper", "both")


@dataclass(frozen=True)
class AnalyticVector:
    """d-component plus an analytic continuum profile (None means zero)."""

    d: complex = 0j
    profile: Callable | None = None
    side: str = "both"

    def __post_init__(self):
        if self.side not in _SIDES:
            raise ValueError(f"side must be one of {_SIDES}")

    def at(self, z):
        if self.profile is None:
            return np.zeros_like(np.asarray(z, dtype=complex))
        return np.asarray(self.profile(z), dtype=complex)


def unstable_state() -> AnalyticVector:
    """The bare discrete level |1> (or <1| on the bra side)."""
    return AnalyticVector(d=1.0 + 0j, profile=None, side="both")


def random_analytic(rng: np.random.Generator, d_scale: float = 1.0) -> AnalyticVector:
    """Seeded random entire profile c_k z^{m_k} e^{-a_k z}, two-sided analytic.

    Decay rates stay above 0.3 so the cutoff tail is negligible on default
    contours.
    """
    terms = []
    for _ in range(3):
        c = complex(rng.standard_normal(), rng.standard_normal()) / 3.0
        a = float(rng.uniform(0.35, 1.2))
        m = int(rng.integers(0, 3))
        terms.append((c, a, m))
    d = complex(rng.standard_normal(), rng.standard_normal()) * d_scale / 2.0

    def profile(z, _terms=tuple(terms)):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c, a, m in _terms:
            out = out + c * z**m * np.exp(-a * z)
        return out

    return AnalyticVector(d=d, profile=profile, side="both")


def real_axis_inner(psi: AnalyticVector, phi: AnalyticVector,
                    grid: ContourGrid | None = None, cutoff: float = 20.0) -> complex:
    """Reference <Psi|Phi> evaluated on the undeformed positive axis."""
    if grid is None:
        grid = real_axis_grid(cutoff)
    w = grid.nodes.real
    val = np.sum(grid.weights.real * psi.at(w) * phi.at(w))
    return complex(psi.d * phi.d + val)


def real_axis_inner_H(model: ModelSpec, psi: AnalyticVector, phi: AnalyticVector,
                      grid: ContourGrid | None = None) -> complex:
    """Reference <Psi|H|Phi> on the positive axis, including the kernel term."""
    if grid is None:
        grid = real_axis_grid(model.contour.cutoff)
    w = grid.nodes.real
    ww = grid.weights.real
    pw = psi.at(w)
    fw = phi.at(w)
    v = eval_V(model, w)
    out = model.omega_level * psi.d * phi.d
    out += np.sum(ww * w * pw * fw)
    out += np.sum(ww * v * pw) * phi.d + psi.d * np.sum(ww * np.conj(v) * fw)
    if model.has_kernel():
        k = eval_V2(model, w[:, None], w[None, :])
        out += (ww * pw) @ k @ (ww * fw)
    return complex(out)
