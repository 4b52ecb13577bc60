"""Circuit-level model: SQUID transmons, Foster networks and Kerr parameters.

The conversion chain is

    physical circuit  ->  (omega_m, alpha_m, chi_mn, g)  ->  KerrParams

where the left-hand side is either a pair of SQUID transmons with an explicit
coupling capacitance, or a Foster network (series of parallel LC(R) stages)
with junction participations.  All energies are stored as E/h in Hz.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .constants import capacitance_from_ec, phase_zpf_from_impedance
from .errors import ConvergenceError, DimensionMismatchError

TRANSMON_RATIO_WARN = 20.0      # warn below this E_J/E_C
PARTICIPATION_WARN = 0.5        # phi_zpf above this is no longer weakly anharmonic
COUPLING_FRACTION_WARN = 0.2    # C12 / shunt ratio above which the 2-node reduction degrades


@dataclass(frozen=True)
class SquidSpec:
    """Symmetric-ish dc SQUID: total Josephson energy, junction asymmetry, flux bias.

    ej_sum_hz is E_J,a + E_J,b (in Hz); asymmetry_d = (E_J,a - E_J,b) / (E_J,a + E_J,b).
    flux_phi0 is the applied flux in units of the flux quantum.
    """

    ej_sum_hz: float
    asymmetry_d: float = 0.0
    flux_phi0: float = 0.0

    def __post_init__(self):
        if not self.ej_sum_hz > 0:
            raise ValueError(f"ej_sum_hz must be positive, got {self.ej_sum_hz}")
        if not abs(self.asymmetry_d) < 1:
            raise ValueError(f"|asymmetry_d| must be < 1, got {self.asymmetry_d}")

    def at_flux(self, flux_phi0):
        return SquidSpec(self.ej_sum_hz, self.asymmetry_d, flux_phi0)


def effective_josephson_energy(squid):
    """Flux-dependent E_J of the SQUID, E_J_sum * sqrt(cos^2 + d^2 sin^2).

    Periodic in the flux quantum and even in flux; strictly positive whenever
    the asymmetry is nonzero.
    """
    phase = np.pi * squid.flux_phi0
    return squid.ej_sum_hz * np.sqrt(
        np.cos(phase) ** 2 + squid.asymmetry_d**2 * np.sin(phase) ** 2
    )


@dataclass(frozen=True)
class TransmonSpec:
    """A flux-tunable transmon: SQUID plus charging energy and truncation settings."""

    squid: SquidSpec
    ec_hz: float
    n_levels: int = 4
    charge_basis_cutoff: int = 30

    def __post_init__(self):
        if self.ec_hz <= 0:
            raise ValueError("ec_hz must be positive")
        if self.n_levels < 3:
            raise ValueError("n_levels must be >= 3 (smallest truncation showing ZZ)")
        if self.charge_basis_cutoff < 1:
            raise ValueError("charge_basis_cutoff must be positive")

    def at_flux(self, flux_phi0):
        return TransmonSpec(self.squid.at_flux(flux_phi0), self.ec_hz,
                            self.n_levels, self.charge_basis_cutoff)


@dataclass(frozen=True)
class TransmonSpectrum:
    omega01_hz: float
    anharmonicity_hz: float
    levels_hz: np.ndarray    # lowest n_levels eigenenergies, ground state at 0


def _charge_basis_levels(ej, ec, n_levels, cutoff):
    """Lowest eigenvalues of 4 E_C n^2 - E_J cos(phi) in the charge basis (ng = 0)."""
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    diag = 4.0 * ec * n**2
    off = -0.5 * ej * np.ones(2 * cutoff)
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))[0]
    return vals


def transmon_spectrum(spec, max_cutoff=400):
    """Diagonalize the transmon in the charge basis at the spec's flux bias.

    The cutoff is escalated until the lowest n_levels eigenvalues move by less
    than 1 kHz when the cutoff grows by 5; failing that up to max_cutoff raises
    ConvergenceError.  Returns omega01, the anharmonicity (omega12 - omega01,
    negative for transmons) and the level energies relative to the ground state.
    """
    ej = effective_josephson_energy(spec.squid)
    ratio = ej / spec.ec_hz
    if ratio < 1:
        raise ValueError(f"E_J/E_C = {ratio:.2f} < 1: not a transmon at this flux")
    if ratio < TRANSMON_RATIO_WARN:
        warnings.warn(
            f"E_J/E_C = {ratio:.1f} < {TRANSMON_RATIO_WARN:g}: outside the transmon regime",
            stacklevel=2,
        )
    cutoff = spec.charge_basis_cutoff
    while True:
        vals = _charge_basis_levels(ej, spec.ec_hz, spec.n_levels, cutoff)
        check = _charge_basis_levels(ej, spec.ec_hz, spec.n_levels, cutoff + 5)
        if np.max(np.abs(vals - check)) < 1e3:
            break
        if cutoff >= max_cutoff:
            raise ConvergenceError(
                f"charge-basis eigenvalues not stable at cutoff {cutoff} "
                f"(max {max_cutoff})"
            )
        cutoff = min(2 * cutoff, max_cutoff)
    levels = check - check[0]
    omega01 = levels[1]
    anharm = (levels[2] - levels[1]) - levels[1]
    return TransmonSpectrum(omega01, anharm, levels)


def transmon_omega01_asymptotic(ej_hz, ec_hz):
    """Leading-order transmon frequency sqrt(8 E_J E_C) - E_C (cross-check only)."""
    return np.sqrt(8.0 * ej_hz * ec_hz) - ec_hz


@dataclass(frozen=True)
class FosterMode:
    """One parallel LC(R) stage of a Foster-I network (R = inf when lossless)."""

    inductance_l: float
    capacitance_c: float
    resistance_r: float = np.inf

    def __post_init__(self):
        if self.inductance_l <= 0 or self.capacitance_c <= 0:
            raise ValueError("FosterMode requires positive L and C")
        if self.resistance_r <= 0:
            raise ValueError("FosterMode resistance must be positive (inf for lossless)")

    @property
    def omega_rad_s(self):
        return 1.0 / np.sqrt(self.inductance_l * self.capacitance_c)

    @property
    def freq_hz(self):
        return self.omega_rad_s / (2 * np.pi)

    @property
    def impedance_ohms(self):
        return np.sqrt(self.inductance_l / self.capacitance_c)

    @property
    def kappa_rad_s(self):
        if np.isinf(self.resistance_r):
            return 0.0
        return 1.0 / (self.resistance_r * self.capacitance_c)

    @property
    def phi_zpf(self):
        """Dimensionless zero-point phase amplitude of this mode at its own port."""
        return phase_zpf_from_impedance(self.impedance_ohms)


def foster_impedance(modes, omegas_rad_s):
    """Series impedance of the Foster network at the given angular frequencies."""
    s = 1j * np.asarray(omegas_rad_s, dtype=float)
    z = np.zeros_like(s, dtype=complex)
    for m in modes:
        y = 1.0 / (s * m.inductance_l) + s * m.capacitance_c
        if not np.isinf(m.resistance_r):
            y = y + 1.0 / m.resistance_r
        z = z + 1.0 / y
    return z


@dataclass(frozen=True)
class JunctionParticipation:
    """Zero-point phase amplitudes phi_zpf[m, j] of each mode m across junction j."""

    phi_zpf: np.ndarray
    ej_per_junction_hz: np.ndarray

    def __post_init__(self):
        phi = np.atleast_2d(np.asarray(self.phi_zpf, dtype=float))
        ej = np.atleast_1d(np.asarray(self.ej_per_junction_hz, dtype=float))
        object.__setattr__(self, "phi_zpf", phi)
        object.__setattr__(self, "ej_per_junction_hz", ej)
        if phi.shape[1] != ej.shape[0]:
            raise DimensionMismatchError(
                f"{phi.shape[1]} junction columns vs {ej.shape[0]} junction energies"
            )
        if np.any(phi < 0):
            raise ValueError("phi_zpf entries must be non-negative")
        if np.any(phi > PARTICIPATION_WARN):
            warnings.warn(
                f"phi_zpf above {PARTICIPATION_WARN}: quartic expansion is unreliable",
                stacklevel=2,
            )


def participation_from_foster(modes, ej_per_junction_hz):
    """One-port participation: every mode sees the single junction with its own phi_zpf."""
    phi = np.array([[m.phi_zpf] for m in modes])
    return JunctionParticipation(phi, np.atleast_1d(ej_per_junction_hz))


@dataclass(frozen=True)
class KerrParams:
    """Coefficients of the multimode Kerr Hamiltonian.

    mode_freqs_hz: omega_m / 2pi.  self_kerr_hz: alpha_m (signed, negative for
    transmon-like modes).  cross_kerr_hz: symmetric matrix chi_mn with zero
    diagonal (the -chi_mn n_m n_n coefficients).  exchange_g_hz: the two-mode
    flip-flop rate g.  bare_cross_kerr_chi_hz: an explicit extra -chi n_1 n_2
    term kept separate from the participation-derived cross-Kerr.
    """

    mode_freqs_hz: np.ndarray
    self_kerr_hz: np.ndarray
    cross_kerr_hz: np.ndarray
    exchange_g_hz: float = 0.0
    bare_cross_kerr_chi_hz: float = 0.0

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.mode_freqs_hz, dtype=float))
        kerr = np.atleast_1d(np.asarray(self.self_kerr_hz, dtype=float))
        chi = np.atleast_2d(np.asarray(self.cross_kerr_hz, dtype=float))
        object.__setattr__(self, "mode_freqs_hz", freqs)
        object.__setattr__(self, "self_kerr_hz", kerr)
        object.__setattr__(self, "cross_kerr_hz", chi)
        n = freqs.shape[0]
        if kerr.shape != (n,) or chi.shape != (n, n):
            raise DimensionMismatchError("KerrParams field shapes disagree")
        if not np.allclose(chi, chi.T, rtol=0, atol=1e-9 * (np.max(np.abs(chi)) + 1)):
            raise ValueError("cross_kerr_hz must be symmetric")
        if np.any(np.abs(np.diag(chi)) > 0):
            raise ValueError("cross_kerr_hz must have zero diagonal")

    @property
    def n_modes(self):
        return self.mode_freqs_hz.shape[0]

    def replace(self, **kw):
        data = {
            "mode_freqs_hz": self.mode_freqs_hz,
            "self_kerr_hz": self.self_kerr_hz,
            "cross_kerr_hz": self.cross_kerr_hz,
            "exchange_g_hz": self.exchange_g_hz,
            "bare_cross_kerr_chi_hz": self.bare_cross_kerr_chi_hz,
        }
        data.update(kw)
        return KerrParams(**data)


def kerr_from_foster(modes, participation):
    """Quartic-order Kerr coefficients from Foster modes and junction participations.

    alpha_m = -sum_j (E_J,j / 2) phi_mj^4 (stored signed negative), and
    chi_mn = sum_j E_J,j phi_mj^2 phi_nj^2, which for a single shared junction
    equals 2 sqrt(alpha_m alpha_n) exactly.
    """
    phi = participation.phi_zpf
    ej = participation.ej_per_junction_hz
    if phi.shape[0] != len(modes):
        raise DimensionMismatchError(
            f"{phi.shape[0]} participation rows vs {len(modes)} modes"
        )
    freqs = np.array([m.freq_hz for m in modes])
    phi2 = phi**2
    self_kerr = -0.5 * (phi2**2) @ ej
    chi = (phi2 * ej) @ phi2.T
    np.fill_diagonal(chi, 0.0)
    return KerrParams(freqs, self_kerr, chi)


@dataclass(frozen=True)
class Coupling:
    """Exchange coupling between the two qubit modes.

    Either a fixed rate g_hz, or a coupling capacitance c12_farads together
    with the two total node capacitances, in which case the rate follows the
    two-node circuit reduction g = C12 sqrt(w1 w2) / (2 sqrt(Csig1 Csig2)) and
    scales with the instantaneous qubit frequencies.
    """

    g_hz: float = None
    c12_farads: float = None
    csigma_farads: tuple = None

    def __post_init__(self):
        if (self.g_hz is None) == (self.c12_farads is None):
            raise ValueError("specify exactly one of g_hz or c12_farads")
        if self.c12_farads is not None and self.csigma_farads is None:
            raise ValueError("c12_farads requires csigma_farads=(C_sigma1, C_sigma2)")

    @classmethod
    def fixed(cls, g_hz):
        return cls(g_hz=g_hz)

    @classmethod
    def capacitive(cls, c12_farads, ec1_hz, ec2_hz):
        """Capacitive coupling with node capacitances implied by the charging energies."""
        cs = (capacitance_from_ec(ec1_hz), capacitance_from_ec(ec2_hz))
        return cls(c12_farads=c12_farads, csigma_farads=cs)

    def g_at(self, omega1_hz, omega2_hz):
        if self.g_hz is not None:
            return self.g_hz
        c1, c2 = self.csigma_farads
        return self.c12_farads / (2.0 * np.sqrt(c1 * c2)) * np.sqrt(omega1_hz * omega2_hz)


def two_transmon_kerr(q1, q2, coupling_capacitance, shunt_caps):
    """Kerr parameters of two capacitively coupled transmons.

    Frequencies and anharmonicities come from charge-basis diagonalization of
    each qubit; the exchange rate follows the two-node capacitive reduction
    with total node capacitances C_shunt,i + C12.  The coupling is kept to
    bilinear (charge-charge) order, so no bare cross-Kerr term is generated:
    quartic terms live entirely in the local junction cosines.
    """
    c12 = float(coupling_capacitance)
    cs1, cs2 = (float(shunt_caps[0]), float(shunt_caps[1]))
    if c12 < 0 or cs1 <= 0 or cs2 <= 0:
        raise ValueError("capacitances must be positive (c12 may be zero)")
    if c12 > COUPLING_FRACTION_WARN * min(cs1, cs2):
        warnings.warn(
            f"C12 exceeds {COUPLING_FRACTION_WARN:.0%} of a shunt capacitance: "
            "two-node reduction is only approximate",
            stacklevel=2,
        )
    s1 = transmon_spectrum(q1)
    s2 = transmon_spectrum(q2)
    csig1, csig2 = cs1 + c12, cs2 + c12
    g = c12 / (2.0 * np.sqrt(csig1 * csig2)) * np.sqrt(s1.omega01_hz * s2.omega01_hz)
    return KerrParams(
        mode_freqs_hz=np.array([s1.omega01_hz, s2.omega01_hz]),
        self_kerr_hz=np.array([s1.anharmonicity_hz, s2.anharmonicity_hz]),
        cross_kerr_hz=np.zeros((2, 2)),
        exchange_g_hz=g,
        bare_cross_kerr_chi_hz=0.0,
    )
