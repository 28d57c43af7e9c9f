import numpy as np
import pytest

from respectra.contour import ContourGrid, ContourSpec
from respectra.dynamics import decay_rate, oracle_survival_curve
from respectra.errors import ConfigError, EvaluationError
from respectra.liouville import (BlockObservable, GeneralizedState, LiouvilleGrids,
                                 LiouvilleSystem, apply_L, branch_1u, branch_u1,
                                 branch_uu, check_physicality,
                                 eigenvalue_symmetry_defect, evolve_state,
                                 identity_observable, level_projector_observable,
                                 matrix_blocks, observable_to_matrix,
                                 unstable_state_functional, zero_sector_spectrum)
from respectra.model import eval_V, make_model, separable_test_kernel
from respectra.oracle import commutator_apply, discretize


@pytest.fixture(scope="module")
def li_model():
    return make_model("sqrt_exp", [1.0], 1.0, 0.1,
                      ContourSpec(depth=0.5, cutoff=20.0, n_nodes=128))


@pytest.fixture(scope="module")
def li_grids(li_model):
    return LiouvilleGrids.for_model(li_model)


def _rnd_profile(rng):
    c = rng.standard_normal(3) / 2
    a = rng.uniform(0.4, 1.0, 3)
    return lambda z, c=c, a=a: sum(ci * np.exp(-ai * np.asarray(z, complex))
                                   for ci, ai in zip(c, a))


class TestApplyL:
    def test_identity_is_annihilated(self, li_model, li_grids):
        out = apply_L(li_model, identity_observable(), li_grids)
        w = li_grids.real.nodes.real[::40]
        assert abs(out.o1) < 1e-14
        assert out.o_omega is None
        assert np.max(np.abs(out.o_om1(li_grids.gamma_bar.nodes[::20]))) < 1e-14
        assert np.max(np.abs(out.o_1om(li_grids.gamma.nodes[::20]))) < 1e-14

    def test_free_action_scales_blocks(self, li_grids):
        m0 = make_model("sqrt_exp", [1.0], 1.0, 0.0,
                        ContourSpec(depth=0.5, cutoff=20.0, n_nodes=128))
        f = lambda z: np.exp(-0.5 * np.asarray(z, complex))
        O = BlockObservable(o_om1=f, o_1om=f)
        out = apply_L(m0, O, li_grids)
        z = li_grids.gamma_bar.nodes[::25]
        assert np.max(np.abs(out.o_om1(z) - (z - 1.0) * f(z))) < 1e-14
        zp = li_grids.gamma.nodes[::25]
        assert np.max(np.abs(out.o_1om(zp) - (1.0 - zp) * f(zp))) < 1e-14

    def test_against_matrix_commutator(self, li_model, rng):
        # same midpoint measure on both sides isolates the block algebra
        dsys = discretize(li_model, 400)
        w, dw = dsys.grid, dsys.d_omega
        spec = li_model.contour
        mid = ContourGrid(spec, w.astype(complex), np.full(len(w), dw, dtype=complex),
                          np.ones(len(w), dtype=complex))
        grids = LiouvilleGrids(gamma=mid, gamma_bar=mid, real=mid)
        O = BlockObservable(o1=0.7 + 0j, o_omega=_rnd_profile(rng),
                            o_omom=(lambda f1, f2: (lambda z, zp: f1(z) * f2(zp)))(
                                _rnd_profile(rng), _rnd_profile(rng)),
                            o_om1=_rnd_profile(rng), o_1om=_rnd_profile(rng))
        LO = apply_L(li_model, O, grids)
        blocks = matrix_blocks(commutator_apply(dsys, observable_to_matrix(O, dsys)),
                               dsys)
        assert abs(LO.o1 - blocks["o1"]) < 1e-8
        assert np.max(np.abs(LO.o_om1(w) - blocks["o_om1"])) < 1e-8
        assert np.max(np.abs(LO.o_1om(w) - blocks["o_1om"])) < 1e-8
        assert np.max(np.abs(LO.o_omom(w[:, None], w[None, :])
                             - blocks["o_omom_plus_diag"])) < 1e-8

    def test_requires_plain_coupling(self, li_grids):
        m = make_model("sqrt_exp", [1.0], 1.0, 0.1,
                       ContourSpec(depth=0.5, cutoff=20.0, n_nodes=128),
                       kernel=separable_test_kernel())
        with pytest.raises(EvaluationError):
            apply_L(m, identity_observable(), li_grids)

    def test_p0_block_product_vanishes_identically(self, li_model, li_grids):
        # the interaction maps the invariant sector entirely out of itself:
        # no level or diagonal block ever comes back at first order
        rng = np.random.default_rng(3)
        O = BlockObservable(o1=1.3 + 0j, o_omega=_rnd_profile(rng))
        out = apply_L(li_model, O, li_grids)
        assert out.o1 == 0j            # interaction part: no 1-block from P0
        assert out.o_omega is None     # and never a diagonal block


def test_hermiticity_defect(li_grids, rng):
    f = _rnd_profile(rng)
    good = BlockObservable(o1=1.0 + 0j, o_omega=f, o_om1=f, o_1om=f)
    assert good.hermiticity_defect(li_grids) < 1e-14
    bad = BlockObservable(o1=1.0 + 0.2j)
    assert bad.hermiticity_defect(li_grids) > 0.1
    lop = BlockObservable(o_om1=f)     # missing conjugate partner
    assert lop.hermiticity_defect(li_grids) == np.inf


class TestZeroSector:
    def test_decay_eigenvalue(self, li_model, li_grids):
        zs = zero_sector_spectrum(li_model, li_grids)
        v2 = float(np.real(eval_V(li_model, 1.0) ** 2))
        assert abs(zs.lam_d - 2j * np.pi * v2) < 1e-10
        assert abs(zs.lam_d.real) < 1e-12
        assert abs(zs.coeff_on_diagonal + zs.coeff_on_level) < 1e-14

    def test_free_limit(self, li_grids):
        m0 = make_model("sqrt_exp", [1.0], 1.0, 0.0,
                        ContourSpec(depth=0.5, cutoff=20.0, n_nodes=128))
        assert zero_sector_spectrum(m0, li_grids).lam_d == 0.0

    def test_level_outside_window_rejected(self):
        # diagonal atom at the level is undefined when the grids' continuum
        # window does not contain it
        m = make_model("sqrt_exp", [1.0], 1.5, 0.05,
                       ContourSpec(depth=0.2, cutoff=20.0, n_nodes=64))
        narrow = LiouvilleGrids.for_model(
            make_model("sqrt_exp", [1.0], 0.5, 0.05,
                       ContourSpec(depth=0.2, cutoff=1.2, n_nodes=64)))
        with pytest.raises(EvaluationError):
            zero_sector_spectrum(m, narrow)

    def test_zero_sector_orthogonality_atoms(self, li_model, li_grids):
        # symbolic atom bookkeeping of the degenerate sector
        zs = zero_sector_spectrum(li_model, li_grids)
        # (Psi_d|Phi_d): level against level (curve blocks are orthogonal to
        # the invariant-sector functionals)
        assert zs.decay_left.c1 * zs.decay_right.c1 == 1.0
        # (Psi_omega~|Phi_d): the decay operator has no diagonal block to pair
        assert not zs.decay_right.atoms and zs.decay_right.omega_smooth is None
        # (Psi_d|Phi_omega~): the level reading of |omega~) + delta(omega~-L)|1)
        # cancels against the -(L| atom exactly at omega~ = L
        atom_weights = dict(zs.decay_left.omega_atoms)
        assert atom_weights[li_model.omega_level] == -1.0
        assert zs.decay_left.c1 + atom_weights[li_model.omega_level] == 0.0

    def test_zero_sector_completeness(self, li_model, li_grids, rng):
        # P0 reconstruction acts as the identity on invariant-sector states
        g = _rnd_profile(rng)
        rho = GeneralizedState(c1=0.4 + 0j, omega_smooth=lambda w: np.real(g(w)),
                               atoms=((2.5, 0.2),))
        O = BlockObservable(o1=0.9 + 0j, o_omega=_rnd_profile(rng))
        direct = rho.expect(O, li_grids)
        om = li_model.omega_level
        o_at_level = complex(np.asarray(O.o_omega(om)).item())
        # decay mode: (rho|Phi_d)(Psi_d|O) with (rho|Phi_d) = c1
        recon = rho.c1 * (O.o1 - o_at_level)
        # invariant family: \int dm (rho|Phi_m)(m|O) with the atom algebra
        w = li_grids.real.nodes.real
        ww = li_grids.real.weights.real
        recon += np.sum(ww * np.asarray(rho.omega_smooth(w)) * np.asarray(O.o_omega(w)))
        recon += 0.2 * complex(np.asarray(O.o_omega(2.5)).item())
        recon += rho.c1 * o_at_level
        assert abs(recon - direct) < 1e-8


class TestBranches:
    def test_free_limit(self, li_grids):
        m0 = make_model("sqrt_exp", [1.0], 1.0, 0.0,
                        ContourSpec(depth=0.5, cutoff=20.0, n_nodes=128))
        u = complex(li_grids.gamma_bar.nodes[40])
        b = branch_u1(m0, u, li_grids)
        assert b.eigenvalue == u - 1.0 and b.lam2 == 0.0

    def test_upper_shift(self, li_model, li_grids):
        v2 = float(np.real(eval_V(li_model, 1.0) ** 2))
        u = complex(li_grids.gamma_bar.nodes[40])
        b = branch_u1(li_model, u, li_grids)
        assert abs(b.lam2.imag - np.pi * v2) < 1e-10
        bp = branch_1u(li_model, np.conj(u), li_grids)
        assert abs(bp.lam2.imag - np.pi * v2) < 1e-10
        assert b.lam1 == 0.0

    def test_uu_no_shift(self, li_model, li_grids):
        u = complex(li_grids.gamma_bar.nodes[33])
        b = branch_uu(li_model, u, np.conj(u), li_grids)
        assert b.lam2 == 0.0 and b.eigenvalue == u - np.conj(u)

    def test_eigenvalue_symmetry(self, li_model, li_grids):
        assert eigenvalue_symmetry_defect(li_model, li_grids) < 1e-10

    def test_physicality(self, li_model, li_grids):
        zs = zero_sector_spectrum(li_model, li_grids)
        ok, val = check_physicality(li_model, zs.decay_left)
        assert ok and val == 0.0
        u = complex(li_grids.gamma_bar.nodes[25])
        for b in (branch_u1(li_model, u, li_grids),
                  branch_1u(li_model, np.conj(u), li_grids),
                  branch_uu(li_model, u, np.conj(u), li_grids)):
            ok, val = check_physicality(li_model, b.left)
            assert ok and val <= 1e-8

    def test_invariant_family_carries_probability(self, li_model):
        from respectra.liouville import LeftEigvec
        inv = LeftEigvec(label="invariant", eigenvalue=0.0, c1=0j,
                         omega_atoms=((2.0, 1.0 + 0j),))
        ok, val = check_physicality(li_model, inv)
        assert ok and val == 1.0


class TestEvolution:
    def test_negative_time_refused(self, li_model):
        with pytest.raises(ConfigError):
            evolve_state(li_model, unstable_state_functional(), -1.0)

    def test_non_invariant_input_refused(self, li_model):
        rho = GeneralizedState(c1=1.0 + 0j, f_om1=lambda z: z * 0)
        with pytest.raises(ConfigError):
            evolve_state(li_model, rho, 1.0)

    def test_initial_state_recovered(self, li_model, li_grids):
        lsys = LiouvilleSystem(li_model, li_grids)
        st = evolve_state(li_model, unstable_state_functional(), 0.0, lsys)
        # fourth-order-coherent at t=0
        assert abs(st.c1 - 1.0) < 5e-4
        assert abs(st.atom_weight(1.0, li_grids)) < 5e-4
        assert abs(st.normalization(li_grids) - 1.0) < 1e-12

    def test_survival_and_atom_growth(self, li_model, li_grids):
        lsys = LiouvilleSystem(li_model, li_grids)
        rate = decay_rate(li_model)
        rho0 = unstable_state_functional()
        for t in (0.5 / rate, 1.5 / rate):
            st = evolve_state(li_model, rho0, t, lsys)
            assert abs(st.c1 - np.exp(-rate * t)) < 5.0 * li_model.coupling**2
            aw = st.atom_weight(1.0, li_grids)
            assert abs(aw - (1.0 - np.exp(-rate * t))) < 5.0 * li_model.coupling**2
            assert abs(st.c1.imag) < 1e-14
            assert abs(st.normalization(li_grids) - 1.0) < 1e-8
            assert abs(st.atom_weight(1.0, li_grids) + st.c1 - 1.0) < 1e-12

    def test_off_resonance_atoms_are_invariant(self, li_model, li_grids):
        lsys = LiouvilleSystem(li_model, li_grids)
        rho0 = GeneralizedState(c1=0.5 + 0j, atoms=((3.0, 0.5),))
        st = evolve_state(li_model, rho0, 8.0, lsys)
        kept = [w for p, w in st.atoms if abs(p - 3.0) < 1e-12]
        assert kept and abs(kept[0] - 0.5) < 1e-15
        assert abs(st.normalization(li_grids) - 1.0) < 1e-8

    def test_matches_hilbert_oracle(self, li_model):
        # short-window consistency at the default coupling; the acceptance
        # suite runs the full window at a smaller coupling
        grids = LiouvilleGrids.for_model(li_model, n_nodes=100)
        lsys = LiouvilleSystem(li_model, grids)
        rate = decay_rate(li_model)
        ts = np.linspace(0.0, 1.2 / rate, 40)
        c1 = np.array([evolve_state(li_model, unstable_state_functional(), float(t),
                                    lsys).c1.real for t in ts])
        orac = oracle_survival_curve(li_model, ts, n_levels=1500)
        assert np.max(np.abs(c1 - orac.survival)) < 4.5e-3


def test_level_projector_expectation(li_model, li_grids):
    rho = unstable_state_functional()
    assert rho.expect(level_projector_observable(), li_grids) == 1.0
    assert rho.normalization(li_grids) == 1.0
