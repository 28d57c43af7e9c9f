"""Brute-force ground truth: dense Hermitian discretization of the model.

The continuum is replaced by n midpoint bins on [0, omega_max]; couplings pick
up sqrt(bin width) and the kernel a full bin width, which makes the (n+1) x
(n+1) matrix Hermitian and the finite model exactly solvable by a dense
eigendecomposition.  All outputs carry (n, omega_max) so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EvaluationError
from .model import ModelSpec, eval_V, eval_V2


@dataclass(frozen=True)
class DiscretizedSystem:
    n: int
    omega_max: float
    grid: np.ndarray = field(repr=False)
    d_omega: float = 0.0
    hamiltonian: np.ndarray = field(repr=False, default=None)
    eigenvalues: np.ndarray = field(repr=False, default=None)
    transform: np.ndarray = field(repr=False, default=None)
    level_index: int = 0

    @property
    def dimension(self) -> int:
        return self.n + 1


def discretize(model: ModelSpec, n: int, omega_max: float | None = None) -> DiscretizedSystem:
    """Midpoint-grid Hermitian matrix for the model; dense eigendecomposition."""
    if n < 100:
        raise ConfigError("oracle discretization needs n >= 100")
    if omega_max is None:
        omega_max = model.contour.cutoff
    dw = omega_max / n
    w = (np.arange(n) + 0.5) * dw
    H = np.zeros((n + 1, n + 1), dtype=complex)
    H[0, 0] = model.omega_level
    np.fill_diagonal(H[1:, 1:], w)
    v = np.asarray(eval_V(model, w), dtype=complex) * np.sqrt(dw)
    H[1:, 0] = v
    H[0, 1:] = np.conj(v)
    if model.has_kernel():
        k = np.asarray(eval_V2(model, w[:, None], w[None, :]), dtype=complex) * dw
        H[1:, 1:] += k
    herm = np.max(np.abs(H - H.conj().T))
    if herm > 1e-13 * max(1.0, np.max(np.abs(H))):
        raise EvaluationError(f"assembled matrix not Hermitian (defect {herm:.2e}); "
                              "check the kernel symmetry")
    if np.max(np.abs(H.imag)) == 0.0:
        evals, U = np.linalg.eigh(H.real)
        U = U.astype(complex)
    else:
        evals, U = np.linalg.eigh(H)
    return DiscretizedSystem(n=n, omega_max=float(omega_max), grid=w, d_omega=dw,
                             hamiltonian=H, eigenvalues=evals, transform=U)


def propagate(sys: DiscretizedSystem, vec: np.ndarray, t: float) -> np.ndarray:
    """exp(-iHt) vec through the eigendecomposition."""
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (sys.dimension,):
        raise ConfigError(f"vector has shape {vec.shape}, expected ({sys.dimension},)")
    c = sys.transform.conj().T @ vec
    return sys.transform @ (np.exp(-1j * sys.eigenvalues * t) * c)


def commutator_apply(sys: DiscretizedSystem, O: np.ndarray) -> np.ndarray:
    """[H, O] by two dense multiplies."""
    O = np.asarray(O, dtype=complex)
    if O.shape != (sys.dimension, sys.dimension):
        raise ConfigError(f"operator has shape {O.shape}, expected square of {sys.dimension}")
    H = sys.hamiltonian
    return H @ O - O @ H


def amplitude_curve(sys: DiscretizedSystem, left_vec: np.ndarray, right_vec: np.ndarray,
                    ts: np.ndarray) -> np.ndarray:
    """Bilinear amplitudes left . exp(-iHt) . right for every t at once."""
    lc = left_vec @ sys.transform
    rc = sys.transform.conj().T @ right_vec
    phases = np.exp(-1j * np.outer(np.asarray(ts, dtype=float), sys.eigenvalues))
    return phases @ (lc * rc)
