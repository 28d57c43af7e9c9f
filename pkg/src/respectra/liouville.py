"""Superoperator extension: five-block observables, generalized state
functionals, the zero-eigenvalue sector, continuum branches and relaxation.

Observables carry blocks {1, omega (singular diagonal), omega-omega',
omega-1, 1-omega'}; the deformed generator acts block-wise with the
omega-omega' kernel living on the conjugate-curve x curve product.  States
are functionals on that algebra; delta atoms on the singular diagonal are
kept symbolic (position, weight) and paired analytically, never sampled.

Requires a coupling that is real on the positive axis and no
continuum-continuum kernel; all branch formulas are second order.

Sign conventions: the evolution factor is exp(+i lambda t), which sends the
decay eigenvalue lambda_d = 2 pi i V(Omega)^2 to the damping exp(-2 pi
V(Omega)^2 t).  The curve-1 branch lives on the upper curve, the 1-curve
branch on the lower one, and both second-order shifts point into the upper
half plane, so every factor decays for t > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .contour import ContourGrid, build_contour, real_axis_grid
from .errors import ConfigError, EvaluationError
from .model import ModelSpec, eval_V, eval_Vbar
from .oracle import DiscretizedSystem


def _require_liouville_model(model: ModelSpec):
    if model.has_kernel():
        raise EvaluationError("the superoperator branch supports no continuum kernel")
    w = np.linspace(0.1, min(5.0, model.contour.cutoff / 2), 7)
    v = np.asarray(eval_V(model, w))
    if np.max(np.abs(v.imag)) > 1e-12 * max(1.0, np.max(np.abs(v))):
        raise EvaluationError("the superoperator branch requires a coupling that is "
                              "real on the positive axis")


@dataclass(frozen=True)
class LiouvilleGrids:
    """Lower curve, its conjugate, and the undeformed axis for the singular block."""

    gamma: ContourGrid
    gamma_bar: ContourGrid
    real: ContourGrid

    @classmethod
    def for_model(cls, model: ModelSpec, n_nodes: int | None = None) -> "LiouvilleGrids":
        spec = model.contour
        if n_nodes is not None and n_nodes != spec.n_nodes:
            spec = replace(spec, n_nodes=n_nodes)
        g = build_contour(spec)
        return cls(g, g.conjugated(), real_axis_grid(spec.cutoff, max(200, spec.n_nodes)))


# --------------------------------------------------------------------------
# observables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockObservable:
    """Operator of the five-block class.  Continuum blocks are analytic
    callables (omega block two-sided near the positive axis); node samples
    for serialization come from ``samples``."""

    o1: complex = 0j
    o_omega: Callable | None = None
    o_omom: Callable | None = None     # (z upper, z' lower)
    o_om1: Callable | None = None      # z upper
    o_1om: Callable | None = None      # z' lower

    def samples(self, grids: LiouvilleGrids) -> dict:
        w = grids.real.nodes.real
        zu = grids.gamma_bar.nodes
        zl = grids.gamma.nodes
        return {
            "o1": complex(self.o1),
            "o_omega": None if self.o_omega is None else np.asarray(self.o_omega(w)),
            "o_om1": None if self.o_om1 is None else np.asarray(self.o_om1(zu)),
            "o_1om": None if self.o_1om is None else np.asarray(self.o_1om(zl)),
            "o_omom": None if self.o_omom is None
            else np.asarray(self.o_omom(zu[:, None], zl[None, :])),
        }

    def hermiticity_defect(self, grids: LiouvilleGrids) -> float:
        """Max violation of the reality/conjugation conditions on the real axis."""
        w = grids.real.nodes.real[:: max(1, grids.real.n // 40)]
        out = abs(complex(self.o1).imag)
        if self.o_omega is not None:
            out = max(out, float(np.max(np.abs(np.imag(self.o_omega(w))))))
        if (self.o_om1 is None) != (self.o_1om is None):
            return np.inf
        if self.o_om1 is not None:
            d = np.abs(np.asarray(self.o_om1(w)) - np.conj(np.asarray(self.o_1om(w))))
            out = max(out, float(np.max(d)))
        if self.o_omom is not None:
            k = np.asarray(self.o_omom(w[:, None], w[None, :]))
            out = max(out, float(np.max(np.abs(k - k.conj().T))))
        return out


def identity_observable() -> BlockObservable:
    return BlockObservable(o1=1.0 + 0j, o_omega=lambda z: np.ones_like(np.asarray(z, complex)))


def level_projector_observable() -> BlockObservable:
    return BlockObservable(o1=1.0 + 0j)


def apply_L(model: ModelSpec, O: BlockObservable,
            grids: LiouvilleGrids | None = None) -> BlockObservable:
    """Block action of the commutator generator on an observable.

    The free part scales the off-diagonal blocks by (z - Omega), (Omega - z')
    and (z - z') and kills the 1 and omega blocks; the interaction mixes
    blocks through the coupling.  No omega-diagonal block is ever produced.
    The output is generally not Hermitian (a commutator is anti-Hermitian
    under conjugation), so no hermiticity is enforced here.
    """
    _require_liouville_model(model)
    if grids is None:
        grids = LiouvilleGrids.for_model(model)
    om = model.omega_level
    gl, gu = grids.gamma, grids.gamma_bar

    o1 = complex(O.o1)
    o_omega = O.o_omega
    o_om1 = O.o_om1
    o_1om = O.o_1om
    o_omom = O.o_omom

    def new_o1_value():
        total = 0j
        if o_1om is not None:
            total -= np.sum(gl.weights * eval_V(model, gl.nodes)
                            * np.asarray(o_1om(gl.nodes)))
        if o_om1 is not None:
            total += np.sum(gu.weights * eval_V(model, gu.nodes)
                            * np.asarray(o_om1(gu.nodes)))
        return complex(total)

    def new_om1(z):
        z = np.asarray(z, dtype=complex)
        out = (z - om) * (np.asarray(o_om1(z)) if o_om1 is not None else 0.0)
        v = eval_V(model, z)
        out = out + v * o1
        if o_omega is not None:
            out = out - v * np.asarray(o_omega(z))
        if o_omom is not None:
            zz = np.atleast_1d(z)
            k = np.asarray(o_omom(zz[:, None], gl.nodes[None, :]))
            contr = k @ (gl.weights * eval_V(model, gl.nodes))
            out = out - (contr[0] if z.ndim == 0 else contr)
        return out

    def new_1om(zp):
        zp = np.asarray(zp, dtype=complex)
        out = (om - zp) * (np.asarray(o_1om(zp)) if o_1om is not None else 0.0)
        v = eval_V(model, zp)
        out = out - v * o1
        if o_omega is not None:
            out = out + v * np.asarray(o_omega(zp))
        if o_omom is not None:
            zz = np.atleast_1d(zp)
            k = np.asarray(o_omom(gu.nodes[:, None], zz[None, :]))
            contr = (gu.weights * eval_V(model, gu.nodes)) @ k
            out = out + (contr[0] if zp.ndim == 0 else contr)
        return out

    def new_omom(z, zp):
        z = np.asarray(z, dtype=complex)
        zp = np.asarray(zp, dtype=complex)
        out = np.zeros(np.broadcast(z, zp).shape, dtype=complex)
        if o_omom is not None:
            out = out + (z - zp) * np.asarray(o_omom(z, zp))
        if o_1om is not None:
            out = out + eval_V(model, z) * np.asarray(o_1om(zp))
        if o_om1 is not None:
            out = out - eval_V(model, zp) * np.asarray(o_om1(z))
        return out

    return BlockObservable(
        o1=new_o1_value(),
        o_omega=None,
        o_omom=new_omom if (o_omom is not None or o_1om is not None or o_om1 is not None) else None,
        o_om1=new_om1 if (o_om1 is not None or abs(o1) > 0 or o_omega is not None
                          or o_omom is not None) else None,
        o_1om=new_1om if (o_1om is not None or abs(o1) > 0 or o_omega is not None
                          or o_omom is not None) else None,
    )


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneralizedState:
    """Functional on the observable algebra.

    The singular diagonal carries explicit atoms plus a smooth real-axis
    density; relaxed states additionally carry curve densities paired against
    the analytically continued omega block (their localized content at the
    resonance position is reported by ``atom_weight``).
    """

    c1: complex = 0j
    atoms: tuple = ()                       # ((position, weight), ...)
    omega_smooth: Callable | None = None
    f_om1: Callable | None = None           # density on the upper curve
    f_1om: Callable | None = None           # density on the lower curve
    f_omom: Callable | None = None          # kernel density (upper, lower)
    g_up: Callable | None = None            # omega-block density on the upper curve
    g_dn: Callable | None = None            # omega-block density on the lower curve
    g_loc: float | None = None              # localization point of the g densities

    def is_p0_supported(self) -> bool:
        return self.f_om1 is None and self.f_1om is None and self.f_omom is None \
            and self.g_up is None and self.g_dn is None

    def expect(self, O: BlockObservable, grids: LiouvilleGrids) -> complex:
        total = self.c1 * O.o1
        if self.atoms and O.o_omega is not None:
            for pos, wt in self.atoms:
                total += wt * complex(np.asarray(O.o_omega(pos)).item())
        if self.omega_smooth is not None and O.o_omega is not None:
            w = grids.real.nodes.real
            total += np.sum(grids.real.weights.real
                            * np.asarray(self.omega_smooth(w)) * np.asarray(O.o_omega(w)))
        if self.g_up is not None and O.o_omega is not None:
            zu = grids.gamma_bar.nodes
            total += np.sum(grids.gamma_bar.weights * np.asarray(self.g_up(zu))
                            * np.asarray(O.o_omega(zu)))
        if self.g_dn is not None and O.o_omega is not None:
            zl = grids.gamma.nodes
            total += np.sum(grids.gamma.weights * np.asarray(self.g_dn(zl))
                            * np.asarray(O.o_omega(zl)))
        if self.f_om1 is not None and O.o_om1 is not None:
            zu = grids.gamma_bar.nodes
            total += np.sum(grids.gamma_bar.weights * np.asarray(self.f_om1(zu))
                            * np.asarray(O.o_om1(zu)))
        if self.f_1om is not None and O.o_1om is not None:
            zl = grids.gamma.nodes
            total += np.sum(grids.gamma.weights * np.asarray(self.f_1om(zl))
                            * np.asarray(O.o_1om(zl)))
        if self.f_omom is not None and O.o_omom is not None:
            zu, zl = grids.gamma_bar.nodes, grids.gamma.nodes
            k = np.asarray(self.f_omom(zu[:, None], zl[None, :])) \
                * np.asarray(O.o_omom(zu[:, None], zl[None, :]))
            total += grids.gamma_bar.weights @ k @ grids.gamma.weights
        return complex(total)

    def normalization(self, grids: LiouvilleGrids) -> complex:
        return self.expect(identity_observable(), grids)

    def atom_weight(self, position: float, grids: LiouvilleGrids) -> complex:
        """Weight concentrated at the given diagonal position: explicit atoms
        plus the localized content of the curve densities (whose poles sit at
        ``g_loc``)."""
        total = sum(wt for pos, wt in self.atoms
                    if abs(complex(pos) - position) < 1e-12)
        if self.g_loc is not None and abs(self.g_loc - position) < 1e-12:
            if self.g_up is not None:
                total += np.sum(grids.gamma_bar.weights
                                * np.asarray(self.g_up(grids.gamma_bar.nodes)))
            if self.g_dn is not None:
                total += np.sum(grids.gamma.weights
                                * np.asarray(self.g_dn(grids.gamma.nodes)))
        return complex(total)


def unstable_state_functional() -> GeneralizedState:
    """The bare-level population functional (the pure state of the level)."""
    return GeneralizedState(c1=1.0 + 0j)


# --------------------------------------------------------------------------
# spectrum of the extended generator
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LeftEigvec:
    """Left eigenfunctional reduced to the pieces that pair with block
    observables; continuum functional blocks are carried as callables."""

    label: str
    eigenvalue: complex
    c1: complex = 0j
    omega_atoms: tuple = ()                  # ((position, weight), ...) incl. complex positions
    om1_atoms: tuple = ()                    # atoms in the omega-1 block (upper curve)
    c1om_atoms: tuple = ()                   # atoms in the 1-omega block (lower curve)
    omom_atoms: tuple = ()                   # atoms in the kernel block
    om1_density: Callable | None = None
    c1om_density: Callable | None = None
    omom_row: Callable | None = None

    def pair_identity(self) -> complex:
        """(this | I): only the 1 and omega blocks of the identity exist."""
        return complex(self.c1 + sum(w for _, w in self.omega_atoms))


def check_physicality(model: ModelSpec, eigvec: LeftEigvec,
                      tol: float = 1e-10) -> tuple[bool, float]:
    """A nonzero-eigenvalue functional must annihilate the identity; a zero
    mode may carry probability.  Returns (is_consistent, |(Psi|I)|)."""
    val = abs(eigvec.pair_identity())
    if abs(eigvec.eigenvalue) > tol:
        return (val <= 1e-8, val)
    return (True, val)


@dataclass(frozen=True)
class ZeroSectorResult:
    lam_d: complex
    coeff_on_level: complex             # eigenproblem coefficient alpha
    coeff_on_diagonal: complex          # cross coefficient beta (= -alpha)
    decay_right: GeneralizedState      # block content of the decay eigenoperator
    decay_left: LeftEigvec
    invariant_left_label: str = "omega-family"


def _branch_shift_lower(model: ModelSpec, grids: LiouvilleGrids) -> complex:
    """\\int over the lower curve of V^2/(z - Omega) dz (= PV + i pi V(Omega)^2)."""
    g = grids.gamma
    v2 = eval_V(model, g.nodes) * eval_Vbar(model, g.nodes)
    return complex(np.sum(g.weights * v2 / (g.nodes - model.omega_level)))


def _branch_shift_upper(model: ModelSpec, grids: LiouvilleGrids) -> complex:
    g = grids.gamma_bar
    v2 = eval_V(model, g.nodes) * eval_Vbar(model, g.nodes)
    return complex(np.sum(g.weights * v2 / (g.nodes - model.omega_level)))


def _eta2_lower(model: ModelSpec, grids: LiouvilleGrids) -> complex:
    g = grids.gamma
    v2 = eval_V(model, g.nodes) * eval_Vbar(model, g.nodes)
    return complex(np.sum(g.weights * v2 / (g.nodes - model.omega_level) ** 2))


def _eta2_upper(model: ModelSpec, grids: LiouvilleGrids) -> complex:
    g = grids.gamma_bar
    v2 = eval_V(model, g.nodes) * eval_Vbar(model, g.nodes)
    return complex(np.sum(g.weights * v2 / (g.nodes - model.omega_level) ** 2))


def zero_sector_spectrum(model: ModelSpec,
                         grids: LiouvilleGrids | None = None) -> ZeroSectorResult:
    """Degenerate second-order solve on the invariant subspace.

    The effective operator maps the level population to itself with
    coefficient alpha = \\int_lower V^2/(z - Omega) - \\int_upper V^2/(z - Omega)
    and maps diagonal densities to the level with the opposite coefficient, so
    the sector splits into the decay mode (eigenvalue alpha) and the invariant
    continuum family (eigenvalue 0).
    """
    _require_liouville_model(model)
    if grids is None:
        grids = LiouvilleGrids.for_model(model)
    om = model.omega_level
    if not 0.0 < om < grids.gamma.cutoff:
        raise EvaluationError("the resonance position must lie inside the continuum "
                              "window for the diagonal atom to be defined")
    lower = _branch_shift_lower(model, grids)
    upper = _branch_shift_upper(model, grids)
    alpha = lower - upper
    # cross coefficient from the action on a unit diagonal density
    beta = complex(-lower + upper)

    def om1_corr(z):
        z = np.asarray(z, dtype=complex)
        return -eval_V(model, z) / (z - om)

    def c1om_corr(zp):
        zp = np.asarray(zp, dtype=complex)
        return -eval_V(model, zp) / (zp - om)

    def omom_corr(z, zp):
        z = np.asarray(z, dtype=complex)
        zp = np.asarray(zp, dtype=complex)
        return (eval_V(model, z) * eval_V(model, zp)
                / ((z - om) * (zp - om)))

    decay_right = GeneralizedState(c1=1.0 + 0j, f_om1=om1_corr, f_1om=c1om_corr,
                                   f_omom=omom_corr)
    decay_left = LeftEigvec(label="decay", eigenvalue=alpha, c1=1.0 + 0j,
                            omega_atoms=((om, -1.0 + 0j),),
                            om1_density=om1_corr, c1om_density=c1om_corr,
                            omom_row=omom_corr)
    return ZeroSectorResult(lam_d=alpha, coeff_on_level=alpha, coeff_on_diagonal=beta,
                            decay_right=decay_right, decay_left=decay_left)


@dataclass(frozen=True)
class BranchSeries:
    """Eigenpair of a continuum branch through second order: lambda_0 the
    free difference, first-order shift identically zero, lambda_2 the
    interaction shift; vectors through first order."""

    label: str
    u: complex
    lam0: complex
    lam2: complex
    right_c1: complex
    left: LeftEigvec

    @property
    def eigenvalue(self) -> complex:
        return self.lam0 + self.lam2

    @property
    def lam1(self) -> complex:
        return 0.0 + 0j


def branch_u1(model: ModelSpec, u: complex,
              grids: LiouvilleGrids | None = None) -> BranchSeries:
    """Branch built on the upper-curve point u against the level."""
    _require_liouville_model(model)
    if grids is None:
        grids = LiouvilleGrids.for_model(model)
    u = complex(u)
    if grids.gamma_bar.node_index(u) is None and u.imag < 0:
        raise EvaluationError(f"branch point {u} must lie on the upper curve")
    om = model.omega_level
    lam2 = _branch_shift_lower(model, grids)
    a = complex(eval_V(model, u)) / (u - om)

    def omom_row(zp, _a=a):
        zp = np.asarray(zp, dtype=complex)
        return -eval_V(model, zp) / (zp - om)

    left = LeftEigvec(label="u1", eigenvalue=(u - om) + lam2, c1=a,
                      omega_atoms=((u, -a),), om1_atoms=((u, 1.0 + 0j),),
                      omom_row=omom_row)
    return BranchSeries("u1", u, u - om, lam2, right_c1=a, left=left)


def branch_1u(model: ModelSpec, up: complex,
              grids: LiouvilleGrids | None = None) -> BranchSeries:
    """Branch built on the level against the lower-curve point u'."""
    _require_liouville_model(model)
    if grids is None:
        grids = LiouvilleGrids.for_model(model)
    up = complex(up)
    if grids.gamma.node_index(up) is None and up.imag > 0:
        raise EvaluationError(f"branch point {up} must lie on the lower curve")
    om = model.omega_level
    lam2 = -_branch_shift_upper(model, grids)
    a = complex(eval_V(model, up)) / (up - om)

    def omom_col(z, _a=a):
        z = np.asarray(z, dtype=complex)
        return -eval_V(model, z) / (z - om)

    left = LeftEigvec(label="1u", eigenvalue=(om - up) + lam2, c1=a,
                      omega_atoms=((up, -a),), c1om_atoms=((up, 1.0 + 0j),),
                      omom_row=omom_col)
    return BranchSeries("1u", up, om - up, lam2, right_c1=a, left=left)


def branch_uu(model: ModelSpec, u: complex, up: complex,
              grids: LiouvilleGrids | None = None) -> BranchSeries:
    """Doubly continuous branch: the interaction produces no shift at all."""
    _require_liouville_model(model)
    if grids is None:
        grids = LiouvilleGrids.for_model(model)
    u, up = complex(u), complex(up)
    om = model.omega_level
    au = complex(eval_V(model, u)) / (u - om)
    aup = complex(eval_V(model, up)) / (up - om)
    left = LeftEigvec(label="uu", eigenvalue=u - up, c1=0j,
                      omom_atoms=(((u, up), 1.0 + 0j),),
                      om1_atoms=((u, aup),), c1om_atoms=((up, au),))
    return BranchSeries("uu", u, u - up, 0.0 + 0j, right_c1=0j, left=left)


def eigenvalue_symmetry_defect(model: ModelSpec,
                               grids: LiouvilleGrids | None = None) -> float:
    """max over paired nodes of |lam_1u(u') + conj(lam_u1(conj u'))|."""
    if grids is None:
        grids = LiouvilleGrids.for_model(model)
    worst = 0.0
    for i in range(0, grids.gamma.n, max(1, grids.gamma.n // 16)):
        up = complex(grids.gamma.nodes[i])
        l_1u = branch_1u(model, up, grids).eigenvalue
        l_u1 = branch_u1(model, np.conj(up), grids).eigenvalue
        worst = max(worst, abs(l_1u + np.conj(l_u1)))
    return worst


# --------------------------------------------------------------------------
# relaxation
# --------------------------------------------------------------------------

class LiouvilleSystem:
    """Precomputed spectral data for relaxation of invariant-sector states."""

    def __init__(self, model: ModelSpec, grids: LiouvilleGrids | None = None):
        _require_liouville_model(model)
        self.model = model
        self.grids = grids if grids is not None else LiouvilleGrids.for_model(model)
        self.zero = zero_sector_spectrum(model, self.grids)
        self.lam_d = self.zero.lam_d
        self.shift_lower = _branch_shift_lower(model, self.grids)     # lam2 of u1
        self.shift_upper = -_branch_shift_upper(model, self.grids)    # lam2 of 1u
        eta2_l = _eta2_lower(model, self.grids)
        eta2_u = _eta2_upper(model, self.grids)
        # pair normalizers through second order
        self.norm_d = 1.0 + eta2_l + eta2_u
        self.norm_u1 = 1.0 + eta2_l
        self.norm_1u = 1.0 + eta2_u
        om = model.omega_level
        gu, gl = self.grids.gamma_bar, self.grids.gamma
        self._mu_up = (eval_V(model, gu.nodes) * eval_Vbar(model, gu.nodes)
                       / (gu.nodes - om) ** 2)
        self._mu_dn = (eval_V(model, gl.nodes) * eval_Vbar(model, gl.nodes)
                       / (gl.nodes - om) ** 2)

    def lam_u1(self, u) -> np.ndarray:
        return np.asarray(u, dtype=complex) - self.model.omega_level + self.shift_lower

    def lam_1u(self, up) -> np.ndarray:
        return self.model.omega_level - np.asarray(up, dtype=complex) + self.shift_upper

    def branch_sums(self, t: float) -> tuple[complex, complex]:
        """Normalized upper/lower branch background integrals at time t."""
        gu, gl = self.grids.gamma_bar, self.grids.gamma
        up = np.sum(gu.weights * self._mu_up * np.exp(1j * self.lam_u1(gu.nodes) * t))
        dn = np.sum(gl.weights * self._mu_dn * np.exp(1j * self.lam_1u(gl.nodes) * t))
        return complex(up / self.norm_u1), complex(dn / self.norm_1u)

    def survival(self, t: float) -> complex:
        """(rho_t | level population) for the bare-level initial functional."""
        b_up, b_dn = self.branch_sums(t)
        return complex(np.exp(1j * self.lam_d * t) / self.norm_d + b_up + b_dn)


def evolve_state(model: ModelSpec, rho0: GeneralizedState, t: float,
                 system: LiouvilleSystem | None = None) -> GeneralizedState:
    """Relaxed state functional at time t >= 0.

    The initial functional must be supported on the invariant sector (level
    population, diagonal atoms, diagonal density).  Mode content: the zeroth
    order invariant family, the decay mode through second order, the singly
    continuous branches through first order, and the doubly continuous branch
    with the coefficient fixed by the factorized form (upper generator on the
    left, lower on the right) of the extended commutator; every pair is
    divided by its second-order normalization.  Probability is conserved
    identically and the level population plus the weight grown at the
    resonance position sum to the initial population by construction.
    """
    if t < 0:
        raise ConfigError("negative times are refused: upper-shifted eigenvalues "
                          "would grow exponentially")
    if not rho0.is_p0_supported():
        raise ConfigError("evolve_state supports functionals on the invariant sector "
                          "(population, diagonal atoms, diagonal density) only")
    if system is None:
        system = LiouvilleSystem(model)
    om = model.omega_level
    c1r = complex(rho0.c1)
    decay_phase = np.exp(1j * system.lam_d * t) / system.norm_d
    b_up, b_dn = system.branch_sums(t)
    surv = complex(decay_phase + b_up + b_dn)

    atoms = [(om, c1r * (1.0 - decay_phase))]
    for pos, wt in rho0.atoms:
        if abs(complex(pos) - om) < 1e-12:
            atoms[0] = (om, atoms[0][1] + wt)
        else:
            atoms.append((pos, wt))

    n_u1, n_1u, n_d = system.norm_u1, system.norm_1u, system.norm_d
    lam_u1, lam_1u = system.lam_u1, system.lam_1u

    def g_up(z, _c=c1r):
        z = np.asarray(z, dtype=complex)
        v2 = eval_V(model, z) * eval_Vbar(model, z)
        return -_c * v2 / (z - om) ** 2 * np.exp(1j * lam_u1(z) * t) / n_u1

    def g_dn(z, _c=c1r):
        z = np.asarray(z, dtype=complex)
        v2 = eval_V(model, z) * eval_Vbar(model, z)
        return -_c * v2 / (z - om) ** 2 * np.exp(1j * lam_1u(z) * t) / n_1u

    def f_om1(z, _c=c1r):
        z = np.asarray(z, dtype=complex)
        a = eval_V(model, z) / (z - om)
        return _c * a * (np.exp(1j * lam_u1(z) * t) / n_u1
                         - decay_phase * np.ones_like(z))

    def f_1om(z, _c=c1r):
        z = np.asarray(z, dtype=complex)
        a = eval_V(model, z) / (z - om)
        return _c * a * (np.exp(1j * lam_1u(z) * t) / n_1u
                         - decay_phase * np.ones_like(z))

    def f_omom(z, zp, _c=c1r):
        z = np.asarray(z, dtype=complex)
        zp = np.asarray(zp, dtype=complex)
        a = eval_V(model, z) / (z - om) * eval_V(model, zp) / (zp - om)
        bracket = (decay_phase
                   - np.exp(1j * lam_u1(z) * t) / n_u1
                   - np.exp(1j * lam_1u(zp) * t) / n_1u
                   + np.exp(1j * (z - zp) * t))
        return _c * a * bracket

    return GeneralizedState(
        c1=c1r * surv,
        atoms=tuple(atoms),
        omega_smooth=rho0.omega_smooth,
        f_om1=f_om1 if abs(c1r) > 0 else None,
        f_1om=f_1om if abs(c1r) > 0 else None,
        f_omom=f_omom if abs(c1r) > 0 else None,
        g_up=g_up if abs(c1r) > 0 else None,
        g_dn=g_dn if abs(c1r) > 0 else None,
        g_loc=om if abs(c1r) > 0 else None,
    )


# --------------------------------------------------------------------------
# matrix mapping for oracle checks
# --------------------------------------------------------------------------

def observable_to_matrix(O: BlockObservable, dsys: DiscretizedSystem) -> np.ndarray:
    """Dense image of a block observable on the oracle's midpoint grid."""
    n = dsys.n
    w = dsys.grid
    dw = dsys.d_omega
    M = np.zeros((n + 1, n + 1), dtype=complex)
    M[0, 0] = O.o1
    if O.o_omega is not None:
        M[1:, 1:] += np.diag(np.asarray(O.o_omega(w), dtype=complex))
    if O.o_omom is not None:
        M[1:, 1:] += np.asarray(O.o_omom(w[:, None], w[None, :]), dtype=complex) * dw
    if O.o_om1 is not None:
        M[1:, 0] = np.asarray(O.o_om1(w), dtype=complex) * np.sqrt(dw)
    if O.o_1om is not None:
        M[0, 1:] = np.asarray(O.o_1om(w), dtype=complex) * np.sqrt(dw)
    return M


def matrix_blocks(M: np.ndarray, dsys: DiscretizedSystem) -> dict:
    """Inverse of ``observable_to_matrix`` up to the singular-diagonal split."""
    dw = dsys.d_omega
    return {
        "o1": complex(M[0, 0]),
        "o_om1": np.asarray(M[1:, 0]) / np.sqrt(dw),
        "o_1om": np.asarray(M[0, 1:]) / np.sqrt(dw),
        "o_omom_plus_diag": np.asarray(M[1:, 1:]) / dw,
    }
