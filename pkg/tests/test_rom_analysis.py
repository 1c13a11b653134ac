"""
Tests for ROM analysis — backbones, limit-cycle roots, forced response curves,
branch assembly and reduced-flow tori.
"""

import math

import numpy as np
import pytest
import scipy.integrate
from numpy.polynomial import polynomial as P

from src.analysis.backbone import backbone, convergence_domain
from src.analysis.branches import branch_connect
from src.analysis.frc import (
    BifFlag,
    FrcPoint,
    FrcResult,
    amplitude_equation,
    bifurcation_summary,
    fixed_point_jacobian,
    fixed_point_residual,
    frc_convergence,
    frc_periodic,
)
from src.analysis.roots import RootStatus, limit_cycle_predict, limit_cycle_roots, positive_roots
from src.analysis.tori import (
    CycleStatus,
    find_rom_cycle,
    hausdorff_relative,
    rom_limit_cycles,
    torus_observable,
    torus_section,
)
from src.chain.chain_system import build_chain
from src.core.errors import CycleNotFoundError, RootFindingError
from src.model.benchmarks import make_duffing
from src.spectral.eigen import compute_spectrum, select_master
from src.ssm.expansion import Rom, build_rom
from src.ssm.parameterization import compute_ssm, nonauto_correction


def odd_poly(*coeffs: float) -> np.ndarray:
    """a(ρ) from (c1, c3, c5, ...) in increasing odd powers."""
    a = np.zeros(2 * len(coeffs))
    a[1::2] = coeffs
    return a


def even_poly(*coeffs: float) -> np.ndarray:
    """b(ρ) from (c0, c2, c4, ...) in increasing even powers."""
    b = np.zeros(2 * len(coeffs) - 1)
    b[0::2] = coeffs
    return b


# Delayed Duffing, τ_d = 1.0 (before the Hopf point) and 1.1 (after)
DUFFING_PRE_A = odd_poly(-0.005656, -0.0004142, -2.099e-6, -1.576e-8, -1.45e-10)
DUFFING_POST_A = odd_poly(0.01023, -0.0004357, -2.403e-6, -1.874e-8, -1.773e-10)
DUFFING_POST_B = even_poly(1.516, -0.003826, -1.78e-5, -1.34e-7, -1.212e-9)
COUPLED_A = odd_poly(0.001039, -4.157e-5, 1.386e-7, -1.249e-9, 1.593e-11)
HUTCHINSON_POST_A = odd_poly(0.02234, -0.0004296, -4.028e-7, -5.792e-10, -4.517e-13)
# τ_d = 1.75 at order 15
DUFFING_LONG_DELAY_A = odd_poly(0.07559, -0.0002964, -3.243e-6, -3.104e-8, -3.437e-10, -4.092e-12, -5.134e-14, -6.711e-16)


def duffing_post_rom(**kwargs) -> Rom:
    return Rom(a_coeffs=DUFFING_POST_A, b_coeffs=DUFFING_POST_B, **kwargs)


def truncations(a: np.ndarray, orders) -> dict[int, np.ndarray]:
    return {o: a[: o + 1] for o in orders}


def perturbed_polar_flow(rom: Rom, pt: FrcPoint, delta: float, t_end: float) -> tuple[float, float]:
    """Final and peak distance from a fixed point of ρ̇ + iρψ̇ = a + iρ(b − Ω) + εf e^{−iψ} after a kick."""
    force = rom.epsilon * rom.f_eff(pt.Omega)

    def rhs(t, y):
        rho, psi = y
        z = rom.a(rho) + 1j * rho * (rom.b(rho) - pt.Omega) + force * np.exp(-1j * psi)
        return [z.real, z.imag / rho]

    sol = scipy.integrate.solve_ivp(
        rhs, (0.0, t_end), [pt.rho + delta, pt.theta + delta], method="DOP853",
        rtol=1e-10, atol=1e-12, t_eval=np.linspace(0.0, t_end, 2000),
    )
    dist = np.abs(sol.y[0] * np.exp(1j * sol.y[1]) - pt.rho * np.exp(1j * pt.theta))
    return float(dist[-1]), float(dist.max())


# ============================================
# Limit-cycle roots
# ============================================
class TestRoots:
    def test_duffing_post_hopf_root(self):
        (root,) = positive_roots(DUFFING_POST_A)
        assert root == pytest.approx(4.54634, abs=2e-3)

    def test_duffing_pre_hopf_has_no_cycle(self):
        assert positive_roots(DUFFING_PRE_A) == []

    def test_coupled_root(self):
        assert positive_roots(COUPLED_A)[0] == pytest.approx(5.179, abs=0.025)

    def test_hutchinson_root(self):
        (root,) = positive_roots(HUTCHINSON_POST_A)
        assert root == pytest.approx(7.03785, abs=2e-3)

    def test_general_polynomial_roots(self):
        # (ρ − 1)(ρ − 2)(ρ + 3)
        assert positive_roots([6.0, -7.0, 0.0, 1.0]) == pytest.approx([1.0, 2.0])

    def test_persistent_root_converges(self):
        result = limit_cycle_roots(truncations(DUFFING_POST_A, (5, 7, 9)))
        assert result.has_limit_cycle
        assert result.converged == pytest.approx([4.54634], abs=2e-3)

    def test_root_near_convergence_boundary_is_spurious(self):
        result = limit_cycle_roots(truncations(DUFFING_POST_A, (5, 7, 9)), conv_radius=4.7)
        assert not result.has_limit_cycle
        assert "boundary" in result.classified[0].reason

    def test_drifting_root_is_spurious(self):
        result = limit_cycle_roots(truncations(DUFFING_LONG_DELAY_A, (11, 13, 15)))
        assert not result.has_limit_cycle
        assert all(r.status == RootStatus.SPURIOUS for r in result.classified)
        first = sorted(result.roots_by_order[o][0] for o in (11, 13, 15))
        assert first == pytest.approx([8.396, 8.516, 8.693], abs=2e-3)

    def test_needs_three_orders(self):
        with pytest.raises(RootFindingError):
            limit_cycle_roots(truncations(DUFFING_POST_A, (7, 9)))

    def test_limit_cycle_period(self):
        rom = duffing_post_rom()
        rho = positive_roots(DUFFING_POST_A)[0]
        pred = limit_cycle_predict(rom, None, rho)
        assert pred.period == pytest.approx(2 * math.pi / rom.b(rho))
        assert pred.orbit.shape == (256, 0)
        assert math.isnan(pred.amplitude)

    def test_negative_frequency_rejected(self):
        rom = Rom(a_coeffs=[0.0, 0.1], b_coeffs=[-1.0])
        with pytest.raises(CycleNotFoundError):
            limit_cycle_predict(rom, None, 1.0)


# ============================================
# Backbones
# ============================================
class TestBackbone:
    def test_backbone_frequencies(self):
        rom = duffing_post_rom()
        points = backbone(rom, 5.0, 11)
        assert points[0].omega == pytest.approx(1.516)
        assert points[-1].rho == pytest.approx(5.0)
        assert points[-1].omega == pytest.approx(rom.b(5.0))
        assert math.isnan(points[0].phys_amp)

    def test_convergence_domain_grows_with_order(self):
        rom = duffing_post_rom()
        curves = {o: backbone(rom.truncated(o), 8.0, 801) for o in (3, 5, 7, 9)}
        radii = convergence_domain(curves)
        assert list(radii) == [5, 7, 9]
        assert radii[5] < radii[7] < radii[9]
        assert radii[5] == pytest.approx(3.0, abs=0.2)

    def test_convergence_domain_needs_two_orders(self):
        with pytest.raises(ValueError):
            convergence_domain({9: backbone(duffing_post_rom(), 1.0, 3)})

    def test_invalid_rho_max(self):
        with pytest.raises(ValueError):
            backbone(duffing_post_rom(), 0.0, 3)


# ============================================
# Forced response curves
# ============================================
class TestFrc:
    def setup_method(self):
        # linear reduced flow: ρ = ε / |λ − iΩ|
        self.linear = Rom.from_gamma(-0.1 + 1.0j, [], modal_force=1.0, epsilon=0.01)

    def test_linear_closed_form(self):
        result = frc_periodic(self.linear, (0.8, 1.2), 21, rho_max=1.0)
        assert len(result.points) == 21
        assert not result.sn_points and not result.hb_points
        for pt in result.points:
            expected = 0.01 / math.hypot(0.1, 1.0 - pt.Omega)
            assert pt.rho == pytest.approx(expected, rel=1e-10)
            assert pt.stable
            assert pt.residual < 1e-12

    def test_fixed_points_satisfy_polar_equations(self):
        rom = duffing_post_rom(modal_force=1.0, epsilon=0.01)
        result = frc_periodic(rom, (1.3, 1.7), 41, rho_max=7.0)
        assert result.points
        for pt in result.points:
            assert abs(amplitude_equation(rom, pt.rho, pt.Omega)) < 1e-10
            assert fixed_point_residual(rom, pt.rho, pt.theta, pt.Omega) < 1e-8

    def test_saddle_nodes_bound_fold(self):
        rom = duffing_post_rom(modal_force=1.0, epsilon=0.01)
        result = frc_periodic(rom, (1.3, 1.7), 81, rho_max=7.0)
        for sn in result.sn_points:
            assert sn.bif_flag == BifFlag.SN
            _, det = fixed_point_jacobian(rom, sn.rho, sn.Omega)
            assert abs(det) < 1e-3

    def test_hopf_points_closed_form(self):
        rom = Rom.from_gamma(0.1 + 1.0j, [-0.1 + 0.0j], modal_force=1.0, epsilon=0.1)
        result = frc_periodic(rom, (0.5, 1.5), 51, rho_max=3.0)
        omegas = sorted(pt.Omega for pt in result.hb_points)
        shift = math.sqrt((0.01 - 0.1**2 * 0.125) / 0.5)
        assert omegas == pytest.approx([1 - shift, 1 + shift], abs=1e-9)
        for pt in result.hb_points:
            assert pt.rho == pytest.approx(math.sqrt(0.5))
            assert not pt.stable
        summary = bifurcation_summary(result)
        assert len(summary["hopf"]) == 2

    def test_unforced_points_are_backbone_roots(self):
        result = frc_periodic(duffing_post_rom(), (1.3, 1.6), 5)
        (pt,) = result.points
        assert pt.rho == pytest.approx(4.54634, abs=2e-3)
        assert pt.stable

    def test_sweep_roots_match_polynomial_roots(self):
        rom = duffing_post_rom(modal_force=1.0, epsilon=0.01)
        result = frc_periodic(rom, (1.4, 1.6), 21, rho_max=7.0)
        for Omega in result.Omegas[::5]:
            a, b = P.Polynomial(DUFFING_POST_A), P.Polynomial(DUFFING_POST_B) - Omega
            x = P.Polynomial([0.0, 1.0])
            G = a * a + x * x * b * b - (rom.epsilon * abs(rom.f_eff(Omega))) ** 2
            expected = sorted(r.real for r in G.roots() if abs(r.imag) < 1e-9 and 0 < r.real < 7.0)
            found = sorted(pt.rho for pt in result.points if pt.Omega == Omega)
            assert found
            assert found == pytest.approx(expected, rel=1e-7)

    def test_stability_matches_time_integration(self):
        rom = duffing_post_rom(modal_force=1.0, epsilon=0.01)
        result = frc_periodic(rom, (1.3, 1.7), 41, rho_max=7.0)
        checked = {True: 0, False: 0}
        for pt in result.points:
            trace, det = fixed_point_jacobian(rom, pt.rho, pt.Omega)
            rates = np.roots([1.0, -trace, det]).real
            if np.abs(rates).min() < 2e-3:
                continue
            final, peak = perturbed_polar_flow(rom, pt, delta=1e-3, t_end=10.0 / np.abs(rates).min())
            if pt.stable:
                assert final < 1e-4
            else:
                assert peak > 1e-1
            checked[pt.stable] += 1
        assert checked[True] and checked[False]

    def test_order_to_order_agreement(self):
        rom = duffing_post_rom(modal_force=1.0, epsilon=0.001)
        study = frc_convergence({9: rom, 7: rom.truncated(7)}, (1.45, 1.6), 16)
        assert study.orders == (7, 9)
        assert study.converged

    def test_order_to_order_disagreement(self):
        rom = duffing_post_rom(modal_force=1.0, epsilon=0.01)
        other = Rom.from_gamma(0.01 + 1.5j, [-0.0004 - 0.004j], modal_force=1.0, epsilon=0.01)
        study = frc_convergence({9: rom, 3: other}, (1.3, 1.7), 21)
        assert not study.converged


# ============================================
# Branch assembly
# ============================================
def _pt(Omega, rho, flag=BifFlag.NONE):
    return FrcPoint(Omega=Omega, rho=rho, theta=0.0, stable=True, bif_flag=flag)


class TestBranches:
    def test_isola_closes(self):
        points = [_pt(1, 0.1), _pt(2, 0.1), _pt(2, 1.0), _pt(2, 3.0), _pt(3, 0.1), _pt(3, 1.2), _pt(3, 2.8), _pt(4, 0.1)]
        sn = [_pt(1.5, 2.0, BifFlag.SN), _pt(3.5, 2.0, BifFlag.SN)]
        result = FrcResult(epsilon=0.01, Omegas=np.arange(1.0, 5.0), counts=np.array([1, 3, 3, 1]),
                           points=points, sn_points=sn)
        branches = branch_connect(result)
        assert len(branches.branches) == 2
        (isola,) = branches.isolas
        assert len(isola.points) == 6
        assert sum(p.bif_flag == BifFlag.SN for p in isola.points) == 2
        assert not branches.ambiguous

    def test_branches_merge_at_saddle_node(self):
        points = [_pt(1, 0.1), _pt(1, 0.5), _pt(1, 2.5), _pt(2, 0.1)]
        sn = [_pt(1.5, 1.5, BifFlag.SN)]
        result = FrcResult(epsilon=0.01, Omegas=np.array([1.0, 2.0]), counts=np.array([3, 1]),
                           points=points, sn_points=sn)
        branches = branch_connect(result)
        assert not branches.isolas
        merged = max(branches.branches, key=lambda b: len(b.points))
        assert [p.rho for p in merged.points] == [0.5, 1.5, 2.5]

    def test_unexplained_count_jump_is_ambiguous(self):
        points = [_pt(1, 0.1), _pt(2, 0.1), _pt(2, 1.0)]
        result = FrcResult(epsilon=0.01, Omegas=np.array([1.0, 2.0]), counts=np.array([1, 2]), points=points)
        branches = branch_connect(result)
        assert len(branches.ambiguous) == 1

    def test_empty(self):
        result = FrcResult(epsilon=0.01, Omegas=np.zeros(0), counts=np.zeros(0, dtype=int))
        assert branch_connect(result).branches == []


# ============================================
# Reduced-flow cycles and tori
# ============================================
class TestTori:
    def setup_method(self):
        # supercritical normal form: attracting circle ρ = 1
        self.rom = Rom.from_gamma(0.1 + 1.0j, [-0.1 + 0.0j])

    def test_unforced_cycle_in_rotating_frame(self):
        res = find_rom_cycle(self.rom, 0.5, rho_max=3.0)
        assert res.status == CycleStatus.CYCLE
        cycle = res.cycle
        assert cycle.period == pytest.approx(4 * math.pi, rel=1e-6)
        np.testing.assert_allclose(cycle.samples[:, 0], 1.0, atol=1e-6)
        assert cycle.stable
        assert cycle.multiplier == pytest.approx(math.exp(-0.2 * 4 * math.pi), rel=1e-3)

    def test_stable_fixed_point_has_no_cycle(self):
        rom = Rom.from_gamma(-0.1 + 1.0j, [], modal_force=1.0, epsilon=0.01)
        res = find_rom_cycle(rom, 1.0)
        assert res.status == CycleStatus.STABLE_FIXED_POINT
        assert res.cycle is None

    def test_weakly_forced_cycle(self):
        rom = Rom.from_gamma(0.1 + 1.0j, [-0.1 + 0.0j], modal_force=1.0, epsilon=0.01)
        (res,) = rom_limit_cycles(rom, None, (0.5, 0.5), rho_max=3.0)
        assert res.status == CycleStatus.CYCLE
        assert 0.9 < res.cycle.samples[:, 0].min() <= res.cycle.samples[:, 0].max() < 1.1
        assert res.torus is None

    def test_hausdorff(self):
        theta = np.linspace(0, 2 * np.pi, 200, endpoint=False)
        circle = np.column_stack([np.cos(theta), np.sin(theta)])
        assert hausdorff_relative(circle, circle) == 0.0
        shifted = circle + [0.1, 0.0]
        assert hausdorff_relative(shifted, circle) == pytest.approx(0.1 / math.hypot(2.0, 2.0), rel=1e-2)


# ============================================
# Delayed Duffing benchmark
# ============================================
@pytest.fixture(scope="module")
def duffing_ssm():
    cs = build_chain(make_duffing(delta=0.2, alpha=2.0, beta=-4.0, tau_d=1.1), 100)
    ssm = compute_ssm(cs, select_master(compute_spectrum(cs)), 9)
    return cs, ssm


@pytest.mark.slow
class TestDuffingForcedResponse:
    def _rom(self, duffing_ssm, epsilon):
        cs, ssm = duffing_ssm
        forced = nonauto_correction(ssm, cs.with_forcing(epsilon, 1.5), 1.5)
        return build_rom(forced, epsilon=epsilon)

    def test_isola_below_merging_amplitude(self, duffing_ssm):
        rom = self._rom(duffing_ssm, 0.0009)
        result = frc_periodic(rom, (1.3, 1.6), 301, rho_max=7.0)
        assert len(result.sn_points) == 2
        branches = branch_connect(result)
        assert len(branches.branches) == 2
        (isola,) = branches.isolas
        (main,) = [b for b in branches.branches if not b.isola]
        assert not any(p.stable for p in main.points)
        assert any(p.stable for p in isola.points)

    def test_merged_branch_with_hopf(self, duffing_ssm):
        rom = self._rom(duffing_ssm, 0.01)
        result = frc_periodic(rom, (1.3, 1.7), 401, rho_max=7.0)
        branches = branch_connect(result)
        assert not branches.isolas
        assert len(branches.branches) == 1
        assert len(result.sn_points) == 2
        assert len(result.hb_points) == 1

    def test_isola_shrinks_toward_backbone_point(self, duffing_ssm):
        rho_star = min(positive_roots(self._rom(duffing_ssm, 0.0009).a_coeffs), key=lambda r: abs(r - 4.55))
        extents = []
        for epsilon in (9e-4, 3e-4, 1e-4):
            rom = self._rom(duffing_ssm, epsilon)
            center = float(rom.b(rho_star))
            # Ω-extent of the closed level set around (b(ρ*), ρ*)
            half = 3 * epsilon * abs(rom.f_eff(center)) * (1 / rho_star + abs(rom.db(rho_star) / rom.da(rho_star)))
            result = frc_periodic(rom, (center - half, center + half), 121, rho_max=7.0, n_rho=100_000)
            (isola,) = branch_connect(result).isolas
            rhos = [p.rho for p in isola.points]
            assert min(rhos) < rho_star < max(rhos)
            extents.append(max(rhos) - min(rhos))
        assert extents[0] > extents[1] > extents[2]

    def test_torus_after_hopf(self, duffing_ssm):
        cs, ssm = duffing_ssm
        rom = self._rom(duffing_ssm, 0.01)
        (res,) = rom_limit_cycles(rom, ssm, (1.615, 1.615), cs=cs, rho_max=7.0)
        assert res.status == CycleStatus.CYCLE
        lo, hi = res.amp_band
        assert 0 < lo < hi
        assert res.torus.shape[1] == 4
        forced = nonauto_correction(ssm, cs.with_forcing(0.01, 1.615), 1.615)
        grid = torus_observable(res.cycle, forced)
        assert grid.shape == (res.cycle.q.size, 64)
        section = torus_section(res.cycle, forced)
        assert section.shape == (res.cycle.q.size, cs.dim)
        np.testing.assert_allclose(section[:, 0], grid[:, 0], atol=1e-12)
