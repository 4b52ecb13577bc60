import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from zzkit import (
    FosterMode,
    JunctionParticipation,
    KerrParams,
    SquidSpec,
    TransmonSpec,
    effective_josephson_energy,
    kerr_from_foster,
    participation_from_foster,
    transmon_spectrum,
    two_transmon_kerr,
)
from zzkit.circuit import transmon_omega01_asymptotic
from zzkit.constants import capacitance_from_ec
from zzkit.errors import ConvergenceError, DimensionMismatchError

from conftest import make_transmon


class TestEffectiveJosephsonEnergy:
    def test_zero_flux(self):
        assert effective_josephson_energy(SquidSpec(20e9, 0.481, 0.0)) == pytest.approx(20e9)

    def test_half_flux_gives_asymmetry_fraction(self):
        # at half flux only the junction imbalance survives
        ej = effective_josephson_energy(SquidSpec(20e9, 0.481, 0.5))
        assert ej == pytest.approx(0.481 * 20e9, rel=1e-12)

    def test_symmetric_quarter_flux(self):
        ej = effective_josephson_energy(SquidSpec(20e9, 0.0, 0.25))
        assert ej == pytest.approx(20e9 / np.sqrt(2), rel=1e-12)

    @given(d=st.floats(-0.95, 0.95), flux=st.floats(-2.0, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_periodic_and_even_in_flux(self, d, flux):
        # abs floor: at d = 0 and half flux the true value is 0, so two
        # evaluations only agree to machine noise on the E_J_sum scale
        base = effective_josephson_energy(SquidSpec(17e9, d, flux))
        tol = dict(rel=1e-12, abs=1e-12 * 17e9)
        assert effective_josephson_energy(SquidSpec(17e9, d, flux + 1.0)) == pytest.approx(
            base, **tol)
        assert effective_josephson_energy(SquidSpec(17e9, d, -flux)) == pytest.approx(
            base, **tol)

    def test_flux_periodicity_on_grid(self):
        fluxes = np.linspace(-0.5, 0.5, 101)
        sq = [effective_josephson_energy(SquidSpec(20e9, 0.3, f)) for f in fluxes]
        sq_shift = [effective_josephson_energy(SquidSpec(20e9, 0.3, f + 1.0)) for f in fluxes]
        np.testing.assert_allclose(sq, sq_shift, rtol=1e-14)

    def test_strictly_positive_with_asymmetry(self):
        assert effective_josephson_energy(SquidSpec(20e9, 0.05, 0.5)) > 0

    def test_unity_asymmetry_limit_is_flux_flat(self):
        # as |d| -> 1 the two junction branches balance at every flux
        vals = [effective_josephson_energy(SquidSpec(20e9, 1 - 1e-9, f))
                for f in np.linspace(0, 1, 21)]
        assert (max(vals) - min(vals)) / max(vals) < 1e-8

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            SquidSpec(20e9, 1.0, 0.0)
        with pytest.raises(ValueError):
            SquidSpec(-1e9, 0.0, 0.0)


class TestTransmonSpectrum:
    def test_anharmonicity_asymptote(self):
        # |alpha| -> E_C from above; the excess falls off like (E_J/E_C)^(-1/2),
        # so the 5% level is only reached around ratio ~300
        ec = 0.25e9
        excesses = []
        for ratio in (50, 200, 2000):
            s = transmon_spectrum(make_transmon(ratio * ec, ec))
            excesses.append(abs(s.anharmonicity_hz) / ec - 1.0)
        assert excesses[0] == pytest.approx(0.149, abs=0.01)
        assert excesses[0] > excesses[1] > excesses[2]
        assert excesses[2] < 0.05

    def test_anharmonicity_negative(self):
        s = transmon_spectrum(make_transmon(15e9, 0.3e9))
        assert s.anharmonicity_hz < 0

    def test_table_point_alpha_at_sweet_spot(self):
        # E_J root-solved so omega01 = 6.27 GHz at E_C = 351 MHz; the exact
        # charge-basis anharmonicity there is -407.8 MHz, i.e. the quoted
        # -351 MHz value corresponds to a back-solved E_C near 309 MHz
        ec = 0.351e9
        ej = brentq(
            lambda x: transmon_spectrum(make_transmon(x, ec)).omega01_hz - 6.27e9,
            5e9, 60e9)
        s = transmon_spectrum(make_transmon(ej, ec))
        assert s.omega01_hz == pytest.approx(6.27e9, abs=1e3)
        assert s.anharmonicity_hz == pytest.approx(-407.8e6, rel=0.01)

    def test_charge_basis_vs_asymptotic_formula(self):
        s = transmon_spectrum(make_transmon(15e9, 0.3e9))
        w_asym = transmon_omega01_asymptotic(15e9, 0.3e9)
        assert abs(s.omega01_hz - w_asym) / s.omega01_hz < 0.02

    def test_levels_nondecreasing_and_cutoff_stable(self):
        spec = make_transmon(20e9, 0.3e9, n_levels=5)
        s = transmon_spectrum(spec)
        assert np.all(np.diff(s.levels_hz) > 0)
        bigger = TransmonSpec(spec.squid, spec.ec_hz, n_levels=5,
                              charge_basis_cutoff=spec.charge_basis_cutoff + 5)
        s2 = transmon_spectrum(bigger)
        assert np.max(np.abs(s.levels_hz - s2.levels_hz)) < 1e3

    def test_sweet_spot_extrema(self):
        # omega01 is flux-stationary at zero and half flux
        spec = make_transmon(25e9, 0.3e9, d=0.45)
        h = 1e-4
        for flux in (0.0, 0.5):
            wp = transmon_spectrum(spec.at_flux(flux + h)).omega01_hz
            wm = transmon_spectrum(spec.at_flux(flux - h)).omega01_hz
            w0 = transmon_spectrum(spec.at_flux(flux)).omega01_hz
            # derivative vanishes: symmetric difference ~ curvature * h^2
            assert abs(wp - wm) / 2 < abs(wp + wm - 2 * w0) * 10
        mid = transmon_spectrum(spec.at_flux(0.25 + h)).omega01_hz
        mid2 = transmon_spectrum(spec.at_flux(0.25 - h)).omega01_hz
        assert abs(mid - mid2) / 2 > 1e3   # generic point is not stationary

    def test_convergence_error_at_max_cutoff(self):
        spec = TransmonSpec(SquidSpec(400e9), 0.2e9, charge_basis_cutoff=3)
        with pytest.raises(ConvergenceError):
            transmon_spectrum(spec, max_cutoff=3)

    def test_warns_outside_transmon_regime(self):
        with pytest.warns(UserWarning, match="transmon regime"):
            transmon_spectrum(make_transmon(3e9, 0.3e9))

    def test_n_levels_floor(self):
        with pytest.raises(ValueError):
            make_transmon(15e9, 0.3e9, n_levels=2)


class TestKerrFromFoster:
    def test_quartic_hand_value(self):
        # E_J/2 * phi^4 = 10 GHz / 2 * 0.3^4 = 40.5 MHz
        part = JunctionParticipation(np.array([[0.3]]), np.array([10e9]))
        mode = FosterMode(1e-9, 1e-13)
        params = kerr_from_foster([mode], part)
        assert params.self_kerr_hz[0] == pytest.approx(-40.5e6, rel=1e-12)

    def test_shared_junction_cross_kerr_identity(self, rng):
        for _ in range(20):
            phi = rng.uniform(0.05, 0.35, size=(2, 1))
            ej = rng.uniform(5e9, 30e9)
            part = JunctionParticipation(phi, np.array([ej]))
            modes = [FosterMode(1e-9, 1e-13), FosterMode(0.5e-9, 1e-13)]
            params = kerr_from_foster(modes, part)
            a1, a2 = -params.self_kerr_hz
            assert params.cross_kerr_hz[0, 1] == pytest.approx(
                2 * np.sqrt(a1 * a2), rel=1e-12)
            assert np.all(params.self_kerr_hz <= 0)
            assert params.cross_kerr_hz[0, 1] >= 0

    def test_zero_participation_mode(self):
        part = JunctionParticipation(np.array([[0.25], [0.0]]), np.array([12e9]))
        modes = [FosterMode(1e-9, 1e-13), FosterMode(0.5e-9, 1e-13)]
        params = kerr_from_foster(modes, part)
        assert params.self_kerr_hz[1] == 0.0
        assert params.cross_kerr_hz[0, 1] == 0.0

    def test_dimension_mismatch(self):
        part = JunctionParticipation(np.array([[0.3]]), np.array([10e9]))
        with pytest.raises(DimensionMismatchError):
            kerr_from_foster([FosterMode(1e-9, 1e-13), FosterMode(2e-9, 1e-13)], part)

    def test_participation_from_foster_uses_mode_impedance(self):
        mode = FosterMode(2e-9, 80e-15)
        part = participation_from_foster([mode], 15e9)
        assert part.phi_zpf[0, 0] == pytest.approx(mode.phi_zpf)

    def test_participation_warns_above_half(self):
        with pytest.warns(UserWarning, match="quartic"):
            JunctionParticipation(np.array([[0.6]]), np.array([10e9]))


class TestKerrParamsValidation:
    def test_rejects_asymmetric_cross_kerr(self):
        with pytest.raises(ValueError):
            KerrParams(np.array([5e9, 6e9]), np.array([-0.3e9, -0.3e9]),
                       np.array([[0.0, 1e6], [2e6, 0.0]]))

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(ValueError):
            KerrParams(np.array([5e9]), np.array([-0.3e9]), np.array([[1e6]]))


class TestTwoTransmonKerr:
    def test_uncoupled_limit(self, chip1):
        q1 = chip1.qubits[0].transmon()
        q2 = chip1.qubits[1].transmon()
        params = two_transmon_kerr(q1, q2, 0.0, (60e-15, 70e-15))
        assert params.exchange_g_hz == 0.0

    def test_design_coupling_reproduces_estimated_exchange(self, chip1):
        # design C12 = 5.11 fF with shunts back-solved from the charging
        # energies puts g within a few percent of the quoted 240 MHz estimate
        c12 = 5.11e-15
        q1f, q2f = chip1.qubits
        q1 = q1f.transmon(0.5)                      # 6.270 GHz
        q2 = q2f.transmon(0.0)                      # 6.348 GHz
        shunts = (capacitance_from_ec(q1f.ec_hz) - c12,
                  capacitance_from_ec(q2f.ec_hz) - c12)
        params = two_transmon_kerr(q1, q2, c12, shunts)
        assert params.exchange_g_hz == pytest.approx(240e6, rel=0.15)

    def test_swap_symmetry(self):
        q = make_transmon(18e9, 0.28e9)
        p12 = two_transmon_kerr(q, q, 5e-15, (60e-15, 60e-15))
        p21 = two_transmon_kerr(q, q, 5e-15, (60e-15, 60e-15))
        assert p12.exchange_g_hz == pytest.approx(p21.exchange_g_hz, rel=1e-14)

    def test_warns_on_large_coupling_fraction(self):
        q = make_transmon(18e9, 0.28e9)
        with pytest.warns(UserWarning, match="two-node"):
            two_transmon_kerr(q, q, 20e-15, (60e-15, 60e-15))

    def test_no_bare_cross_kerr_at_bilinear_order(self):
        q = make_transmon(18e9, 0.28e9)
        params = two_transmon_kerr(q, q, 5e-15, (60e-15, 60e-15))
        assert params.bare_cross_kerr_chi_hz == 0.0
