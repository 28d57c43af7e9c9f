"""Order-by-order biorthogonal eigensystem of the deformed generator.

Vectors are coefficient bundles over the basis {discrete level, curve points}:
a d-component, exact delta atoms (position, weight), and smooth terms.  Smooth
terms are either plain analytic functions on the curve or "pole terms"
N(z) / (u + side*i0 - z) whose pairings go through the curve principal value
plus half residue.  Left vectors are functionals stored independently of the
right ones; no pairing ever conjugates.

The discrete branch implements the recursion to arbitrary order n: with the
usual gauge (vanishing d-component of every correction) the order-1 eigenvalue
shift is identically zero and

    phi_n(z) = [V(z) delta_{n,1} + \\int K(z,z') phi_{n-1}(z') dz'
                - sum_{k>=2} lambda_k phi_{n-k}(z)] / (Omega - z),
    lambda_n = \\int Vbar(z) phi_{n-1}(z) dz .

The continuous branch keeps the eigenvalue exactly at u (every correction
vanishes because the kernel carries no delta component) and is implemented
through second order with the outgoing (+i0) kernel on the right and the
conjugate prescription on the left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .contour import ContourGrid, build_contour, pole_kernel_integral
from .errors import ConfigError, DegeneratePairError, EvaluationError
from .friedrichs import exact_system
from .model import ModelSpec, eval_V, eval_V2, eval_Vbar
from .states import AnalyticVector


@dataclass(frozen=True)
class PlainTerm:
    """Smooth coefficient function on the curve."""

    fn: Callable
    samples: np.ndarray | None = None

    def values(self, grid: ContourGrid) -> np.ndarray:
        if self.samples is not None:
            return self.samples
        return np.asarray(self.fn(grid.nodes), dtype=complex)

    def at(self, z):
        return self.fn(z)

    def scaled(self, c: complex) -> "PlainTerm":
        fn = self.fn
        samples = None if self.samples is None else self.samples * c
        return PlainTerm(lambda z, _f=fn, _c=c: _c * _f(z), samples)


@dataclass(frozen=True)
class PoleTerm:
    """Distribution kernel N(z) / (u + side*i0 - z) with analytic numerator."""

    num: Callable
    pole: complex
    side: int

    def at(self, z):
        # pointwise value away from the pole position
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z - self.pole) < 1e-12):
            raise EvaluationError("pole term evaluated at its own singular point")
        return np.asarray(self.num(z), dtype=complex) / (self.pole - z)

    def scaled(self, c: complex) -> "PoleTerm":
        fn = self.num
        return PoleTerm(lambda z, _f=fn, _c=c: _c * _f(z), self.pole, self.side)


@dataclass(frozen=True)
class VectorCoeffs:
    """d-component + exact atoms + smooth terms; used for kets and functionals."""

    d: complex = 0j
    atoms: tuple = ()
    smooth: tuple = ()

    def scaled(self, c: complex) -> "VectorCoeffs":
        return VectorCoeffs(self.d * c,
                            tuple((u, w * c) for u, w in self.atoms),
                            tuple(t.scaled(c) for t in self.smooth))

    def plus(self, other: "VectorCoeffs") -> "VectorCoeffs":
        return VectorCoeffs(self.d + other.d, self.atoms + other.atoms,
                            self.smooth + other.smooth)

    # block selectors: the projector algebra of the unperturbed generator
    def project_d(self) -> "VectorCoeffs":
        return VectorCoeffs(self.d, (), ())

    def project_continuum(self) -> "VectorCoeffs":
        return VectorCoeffs(0j, self.atoms, self.smooth)

    def continuum_at(self, z: complex) -> complex:
        """Value of the smooth continuum part at z (atoms excluded)."""
        return complex(sum(t.at(z) for t in self.smooth)) if self.smooth else 0j


def as_coeffs(vec: AnalyticVector) -> VectorCoeffs:
    smooth = (PlainTerm(vec.at),) if vec.profile is not None else ()
    return VectorCoeffs(complex(vec.d), (), smooth)


def pair_coeffs(left: VectorCoeffs, right: VectorCoeffs, grid: ContourGrid) -> complex:
    """Bilinear pairing <left|right> on the curve.

    Atom-atom products are distributional (delta on the curve) and are
    rejected; callers integrate over the family first when such a pairing is
    needed weakly.
    """
    total = left.d * right.d
    if left.atoms and right.atoms:
        raise EvaluationError("atom-atom pairing is a curve delta; integrate the "
                              "family against a smooth weight first")
    for u, w in right.atoms:
        total += w * sum(t.at(u) for t in left.smooth)
    for v, b in left.atoms:
        total += b * sum(t.at(v) for t in right.smooth)
    for lt in left.smooth:
        for rt in right.smooth:
            total += _pair_terms(lt, rt, grid)
    return complex(total)


def _pair_terms(lt, rt, grid: ContourGrid) -> complex:
    lplain, rplain = isinstance(lt, PlainTerm), isinstance(rt, PlainTerm)
    if lplain and rplain:
        return complex(np.sum(grid.weights * lt.values(grid) * rt.values(grid)))
    if lplain and not rplain:
        h = (lambda z, f=lt.fn, g=rt.num: np.asarray(f(z)) * np.asarray(g(z)))
        return pole_kernel_integral(grid, h, rt.pole, rt.side)
    if rplain and not lplain:
        h = (lambda z, f=rt.fn, g=lt.num: np.asarray(f(z)) * np.asarray(g(z)))
        return pole_kernel_integral(grid, h, lt.pole, lt.side)
    raise EvaluationError("pole-pole pairing is distributional; not supported directly")


@dataclass(frozen=True)
class PerturbationSeries:
    """Eigenvalue corrections and right/left vector corrections, order by order."""

    orders: tuple          # tuple of (lambda_k, right_k, left_k)
    branch: str            # "discrete" or "continuous"
    base: complex          # Omega or the curve point u

    @property
    def eigenvalue(self) -> complex:
        return complex(sum(lam for lam, _, _ in self.orders))

    def lambda_at(self, k: int) -> complex:
        return self.orders[k][0]

    def right_total(self) -> VectorCoeffs:
        out = VectorCoeffs()
        for _, r, _ in self.orders:
            out = out.plus(r)
        return out

    def left_total(self) -> VectorCoeffs:
        out = VectorCoeffs()
        for _, _, l in self.orders:
            out = out.plus(l)
        return out


def _kernel_column(model: ModelSpec, grid: ContourGrid, samples: np.ndarray,
                   transpose: bool) -> Callable:
    """z -> \\int K(z, z') f(z') dz' (or the transposed contraction)."""
    wts = grid.weights * samples

    def fn(z, _w=wts, _nodes=grid.nodes, _t=transpose):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        zz = np.atleast_1d(z)
        if _t:
            k = eval_V2(model, _nodes[None, :], zz[:, None])
        else:
            k = eval_V2(model, zz[:, None], _nodes[None, :])
        out = k @ _w
        return complex(out[0]) if scalar else out

    return fn


def perturb_discrete(model: ModelSpec, order: int = 2,
                     grid: ContourGrid | None = None) -> PerturbationSeries:
    """Discrete branch through the requested order (validated ceiling 2; the
    same loop yields any order when a kernel makes higher terms nonzero)."""
    if order < 0:
        raise ConfigError("order must be non-negative")
    if grid is None:
        grid = build_contour(model.contour)
    om = model.omega_level
    nodes, wts = grid.nodes, grid.weights
    vbar = np.asarray(eval_Vbar(model, nodes), dtype=complex)
    v = np.asarray(eval_V(model, nodes), dtype=complex)

    lambdas: list[complex] = [complex(om)]
    rights: list[VectorCoeffs] = [VectorCoeffs(d=1.0 + 0j)]
    lefts: list[VectorCoeffs] = [VectorCoeffs(d=1.0 + 0j)]
    phi_fns: list[Callable | None] = [None]
    psi_fns: list[Callable | None] = [None]
    phi_samps: list[np.ndarray] = [np.zeros_like(nodes)]
    psi_samps: list[np.ndarray] = [np.zeros_like(nodes)]

    for n in range(1, order + 1):
        if n == 1:
            # the gauge leaves no diagonal matrix element: the shift vanishes
            lam_n = 0.0 + 0j
            phi_fn = (lambda z: eval_V(model, z) / (om - np.asarray(z, dtype=complex)))
            psi_fn = (lambda z: eval_Vbar(model, z) / (om - np.asarray(z, dtype=complex)))
        else:
            lam_n = complex(np.sum(wts * vbar * phi_samps[n - 1]))
            terms_r: list[Callable] = []
            terms_l: list[Callable] = []
            if model.has_kernel():
                terms_r.append(_kernel_column(model, grid, phi_samps[n - 1], transpose=False))
                terms_l.append(_kernel_column(model, grid, psi_samps[n - 1], transpose=True))
            sub = [(complex(lambdas[k]) if k >= 2 else 0j, n - k) for k in range(2, n)]

            def _make(fns, subs, base_terms):
                def fn(z):
                    z = np.asarray(z, dtype=complex)
                    acc = np.zeros_like(np.atleast_1d(z))
                    for t in base_terms:
                        acc = acc + np.atleast_1d(np.asarray(t(z), dtype=complex))
                    for lam_k, m in subs:
                        if fns[m] is not None:
                            acc = acc - lam_k * np.atleast_1d(np.asarray(fns[m](z), dtype=complex))
                    acc = acc / (om - np.atleast_1d(z))
                    return acc[0] if np.asarray(z).ndim == 0 else acc
                return fn

            phi_fn = _make(phi_fns, sub, terms_r)
            psi_fn = _make(psi_fns, sub, terms_l)
        phi_fns.append(phi_fn)
        psi_fns.append(psi_fn)
        phi_samps.append(np.asarray(phi_fn(nodes), dtype=complex))
        psi_samps.append(np.asarray(psi_fn(nodes), dtype=complex))
        if n == 1:
            lam_n = 0.0 + 0j  # exact, not a computed small number
        lambdas.append(lam_n)
        rights.append(VectorCoeffs(smooth=(PlainTerm(phi_fn, phi_samps[n]),)))
        lefts.append(VectorCoeffs(smooth=(PlainTerm(psi_fn, psi_samps[n]),)))

    return PerturbationSeries(tuple(zip(lambdas, rights, lefts)), "discrete", complex(om))


def perturb_continuous(model: ModelSpec, u: complex, order: int = 2,
                       grid: ContourGrid | None = None) -> PerturbationSeries:
    """Continuous branch at curve point u, through second order.

    The eigenvalue stays exactly u; corrections live in the d-component and in
    pole terms with the outgoing kernel (right) / its conjugate (left).
    """
    if order < 0 or order > 2:
        raise ConfigError("continuous branch is implemented through order 2")
    if grid is None:
        grid = build_contour(model.contour)
    u = complex(u)
    om = model.omega_level
    if abs(u.imag) == 0.0 and abs(u - om) < 1e-12:
        raise EvaluationError("curve point coincides with the discrete level")
    vb_u = complex(eval_Vbar(model, u))
    v_u = complex(eval_V(model, u))

    orders = [(u, VectorCoeffs(atoms=((u, 1.0 + 0j),)),
               VectorCoeffs(atoms=((u, 1.0 + 0j),)))]
    if order >= 1:
        d1 = vb_u / (u - om)
        e1 = v_u / (u - om)
        r_smooth = ()
        l_smooth = ()
        if model.has_kernel():
            r_smooth = (PoleTerm(lambda z: eval_V2(model, z, u), u, +1),)
            l_smooth = (PoleTerm(lambda z: eval_V2(model, u, z), u, -1),)
        orders.append((0.0 + 0j, VectorCoeffs(d=d1, smooth=r_smooth),
                       VectorCoeffs(d=e1, smooth=l_smooth)))
    if order >= 2:
        d2 = 0j
        e2 = 0j
        k_r = None
        k_l = None
        if model.has_kernel():
            h_r = (lambda z: eval_Vbar(model, z) * eval_V2(model, z, u))
            d2 = pole_kernel_integral(grid, h_r, u, +1) / (u - om)
            h_l = (lambda z: eval_V(model, z) * eval_V2(model, u, z))
            e2 = pole_kernel_integral(grid, h_l, u, -1) / (u - om)

            def k_r(z, _u=u):
                z = np.asarray(z, dtype=complex)
                scalar = z.ndim == 0
                out = np.array([
                    pole_kernel_integral(grid,
                                         lambda zp, _z=zz: eval_V2(model, _z, zp)
                                         * eval_V2(model, zp, _u), _u, +1)
                    for zz in np.atleast_1d(z)])
                return out[0] if scalar else out

            def k_l(z, _u=u):
                z = np.asarray(z, dtype=complex)
                scalar = z.ndim == 0
                out = np.array([
                    pole_kernel_integral(grid,
                                         lambda zp, _z=zz: eval_V2(model, _u, zp)
                                         * eval_V2(model, zp, _z), _u, -1)
                    for zz in np.atleast_1d(z)])
                return out[0] if scalar else out

        d1 = vb_u / (u - om)   # also needed when order 1 was skipped
        e1 = v_u / (u - om)

        def num_r(z, _d1=d1, _k=k_r):
            base = eval_V(model, z) * _d1
            return base + _k(z) if _k is not None else base

        def num_l(z, _e1=e1, _k=k_l):
            base = eval_Vbar(model, z) * _e1
            return base + _k(z) if _k is not None else base

        orders.append((0.0 + 0j,
                       VectorCoeffs(d=d2, smooth=(PoleTerm(num_r, u, +1),)),
                       VectorCoeffs(d=e2, smooth=(PoleTerm(num_l, u, -1),))))
    return PerturbationSeries(tuple(orders), "continuous", u)


def normalize_pair(right: VectorCoeffs, left: VectorCoeffs,
                   grid: ContourGrid) -> tuple[VectorCoeffs, VectorCoeffs]:
    """Scale both members by 1/sqrt(<left|right>) (principal branch)."""
    n = pair_coeffs(left, right, grid)
    if abs(n) < 1e-14:
        raise DegeneratePairError("self-orthogonal pair: <left|right> = 0")
    s = 1.0 / np.sqrt(n)
    return right.scaled(s), left.scaled(s)


class BiorthogonalSystem:
    """Assembled spectral data: normalized discrete pair + continuum family.

    Backed either by the order-by-order engine or by the exact solution; both
    expose the same coefficient structures, so reconstruction and dynamics are
    agnostic to the source.
    """

    def __init__(self, model: ModelSpec, grid: ContourGrid, pole: complex,
                 disc_right: VectorCoeffs, disc_left: VectorCoeffs,
                 cont_right: Sequence[VectorCoeffs], cont_left: Sequence[VectorCoeffs],
                 source: str):
        self.model = model
        self.grid = grid
        self.pole = complex(pole)
        self.disc_right = disc_right
        self.disc_left = disc_left
        self.cont_right = list(cont_right)
        self.cont_left = list(cont_left)
        self.source = source

    @classmethod
    def from_perturbation(cls, model: ModelSpec, order: int = 2,
                          grid: ContourGrid | None = None) -> "BiorthogonalSystem":
        if grid is None:
            grid = build_contour(model.contour)
        disc = perturb_discrete(model, order, grid)
        r, l = normalize_pair(disc.right_total(), disc.left_total(), grid)
        cont_r, cont_l = [], []
        for u in grid.nodes:
            ser = perturb_continuous(model, complex(u), min(order, 2), grid)
            cont_r.append(ser.right_total())
            cont_l.append(ser.left_total())
        return cls(model, grid, disc.eigenvalue, r, l, cont_r, cont_l,
                   source=f"perturbation(order={order})")

    @classmethod
    def from_exact(cls, model: ModelSpec, grid: ContourGrid | None = None) -> "BiorthogonalSystem":
        sysx = exact_system(model, grid)
        grid = sysx.grid
        dr = VectorCoeffs(d=sysx.f_disc_d(), smooth=(PlainTerm(sysx.f_disc_smooth()),))
        dl = VectorCoeffs(d=sysx.ftilde_disc_d(), smooth=(PlainTerm(sysx.ftilde_disc_smooth()),))
        cont_r, cont_l = [], []
        for i in range(grid.n):
            c = sysx.cont_coeffs(i)
            cont_r.append(VectorCoeffs(d=c["right_d"], atoms=((c["u"], 1.0 + 0j),),
                                       smooth=(PoleTerm(c["right_pole_num"], c["u"], +1),)))
            cont_l.append(VectorCoeffs(d=c["left_d"], atoms=((c["u"], 1.0 + 0j),),
                                       smooth=(PoleTerm(c["left_pole_num"], c["u"], -1),)))
        return cls(model, grid, sysx.pole.lambda_pole, dr, dl, cont_r, cont_l, source="exact")

    # -- reconstruction ------------------------------------------------------
    def overlap_tables(self, psi: AnalyticVector, phi: AnalyticVector):
        """Per-mode products <Psi|f_m> and <f~_m|Phi> (pole entry first)."""
        lvec = as_coeffs(psi)
        rvec = as_coeffs(phi)
        a_pole = pair_coeffs(lvec, self.disc_right, self.grid)
        b_pole = pair_coeffs(self.disc_left, rvec, self.grid)
        a = np.array([pair_coeffs(lvec, fr, self.grid) for fr in self.cont_right])
        b = np.array([pair_coeffs(fl, rvec, self.grid) for fl in self.cont_left])
        return a_pole, b_pole, a, b

    def reconstruct_inner(self, psi: AnalyticVector, phi: AnalyticVector) -> complex:
        a0, b0, a, b = self.overlap_tables(psi, phi)
        return complex(a0 * b0 + np.sum(self.grid.weights * a * b))

    def reconstruct_H(self, psi: AnalyticVector, phi: AnalyticVector) -> complex:
        a0, b0, a, b = self.overlap_tables(psi, phi)
        return complex(self.pole * a0 * b0
                       + np.sum(self.grid.weights * self.grid.nodes * a * b))

    def to_dict(self) -> dict:
        """Node-sampled serialization of the assembled system."""
        zs = self.grid.nodes
        def smooth_samples(vc: VectorCoeffs):
            out = np.zeros_like(zs)
            for t in vc.smooth:
                if isinstance(t, PlainTerm):
                    out = out + t.values(self.grid)
            return out
        dr = smooth_samples(self.disc_right)
        dl = smooth_samples(self.disc_left)
        return {
            "source": self.source,
            "pole": [self.pole.real, self.pole.imag],
            "n_nodes": int(self.grid.n),
            "nodes_re": zs.real.tolist(),
            "nodes_im": zs.imag.tolist(),
            "disc_right_d": [self.disc_right.d.real, self.disc_right.d.imag],
            "disc_left_d": [self.disc_left.d.real, self.disc_left.d.imag],
            "disc_right_smooth_re": dr.real.tolist(),
            "disc_right_smooth_im": dr.imag.tolist(),
            "disc_left_smooth_re": dl.real.tolist(),
            "disc_left_smooth_im": dl.imag.tolist(),
            "cont_right_d_re": [c.d.real for c in self.cont_right],
            "cont_right_d_im": [c.d.imag for c in self.cont_right],
            "cont_left_d_re": [c.d.real for c in self.cont_left],
            "cont_left_d_im": [c.d.imag for c in self.cont_left],
        }


def assemble_system(model: ModelSpec, order: int = 2,
                    grid: ContourGrid | None = None) -> BiorthogonalSystem:
    """Perturbative biorthogonal system through the given order."""
    return BiorthogonalSystem.from_perturbation(model, order, grid)
