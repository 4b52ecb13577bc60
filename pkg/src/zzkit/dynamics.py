"""Driven two-qubit dynamics: pulses, frames, solvers and protocols.

Everything here lives in the two-qubit computational space with basis order
|00>, |01>, |10>, |11> (qubit 1 is the left label).  A system is described by
its two neighbor-in-ground transition frequencies, the ZZ strength zeta
(E11 - E10 - E01 + E00) and optional transverse couplings:

    E00 = 0,  E01 = w2,  E10 = w1,  E11 = w1 + w2 + zeta.

Drives enter the lab frame as Omega_i(t) sin(2 pi f_d t + phi) sigma_y; in
the frame co-rotating with the carriers the rotating-wave approximation turns
them into Omega_i(t)/2 on the transverse axis, and driving each qubit at its
dressed transition leaves exactly zeta |11><11| plus the drives.  Closed
evolution uses an adaptive Runge-Kutta integrator split at every pulse edge
(so isolated pulses are never stepped over); drive-free stretches of open
evolution use the exact exponential of the static Liouvillian.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import curve_fit

from .errors import (
    FitError,
    PositivityError,
    ResolutionError,
    StiffnessError,
    StochasticityError,
    UnsupportedError,
)
from .spectrum import conditional_frequencies

TWO_PI = 2.0 * np.pi

BASIS_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1))

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SM = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|
_SZ = np.diag([1.0, -1.0]).astype(complex)
_I2 = np.eye(2, dtype=complex)

SX1, SX2 = np.kron(_SX, _I2), np.kron(_I2, _SX)
SY1, SY2 = np.kron(_SY, _I2), np.kron(_I2, _SY)
SM1, SM2 = np.kron(_SM, _I2), np.kron(_I2, _SM)
SZ1, SZ2 = np.kron(_SZ, _I2), np.kron(_I2, _SZ)
N1 = np.diag([0.0, 0.0, 1.0, 1.0]).astype(complex)
N2 = np.diag([0.0, 1.0, 0.0, 1.0]).astype(complex)
P11 = np.diag([0.0, 0.0, 0.0, 1.0]).astype(complex)
FLIP_FLOP = np.zeros((4, 4), dtype=complex)
FLIP_FLOP[2, 1] = 1.0              # |10><01|
DOUBLE_FLIP = np.zeros((4, 4), dtype=complex)
DOUBLE_FLIP[3, 0] = 1.0            # |11><00|

RTOL_DEFAULT = 1e-9
ATOL_DEFAULT = 1e-12
NORM_DRIFT_TOL = 1e-6
STEPS_PER_CARRIER_PERIOD = 40


@dataclass(frozen=True)
class PulseSpec:
    """A shaped drive pulse on one qubit.

    amplitude is the peak Rabi rate in Hz (cycles); the rotation angle of a
    resonant pulse is 2 pi times the envelope area, so a pi pulse has area 1/2.
    The envelope vanishes identically outside [start_time, start_time+duration].
    """

    shape: str
    amplitude_hz: float
    duration_s: float
    carrier_hz: float
    phase_rad: float = 0.0
    start_time_s: float = 0.0
    gaussian_sigma_s: float = None
    target_qubit: int = 1

    def __post_init__(self):
        if self.shape not in ("rectangular", "truncated_cosine", "gaussian"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if self.amplitude_hz < 0:
            raise ValueError("amplitude_hz must be non-negative")
        if self.target_qubit not in (1, 2):
            raise ValueError("target_qubit must be 1 or 2")
        if self.shape == "gaussian" and not self.gaussian_sigma_s:
            raise ValueError("gaussian pulses need gaussian_sigma_s")

    @property
    def end_time_s(self):
        return self.start_time_s + self.duration_s

    def envelope(self, t):
        """Instantaneous Rabi rate in Hz; accepts scalars or arrays."""
        t = np.asarray(t, dtype=float)
        tau = t - self.start_time_s
        inside = (tau >= 0.0) & (tau <= self.duration_s)
        if self.shape == "rectangular":
            shape = np.ones_like(tau)
        elif self.shape == "truncated_cosine":
            shape = 0.5 * (1.0 - np.cos(TWO_PI * tau / self.duration_s))
        else:
            shape = np.exp(-0.5 * ((tau - 0.5 * self.duration_s) / self.gaussian_sigma_s) ** 2)
        out = np.where(inside, self.amplitude_hz * shape, 0.0)
        return out if out.ndim else float(out)

    def area(self):
        """Envelope area in cycles (integral of the Hz Rabi rate over time)."""
        if self.shape == "rectangular":
            return self.amplitude_hz * self.duration_s
        if self.shape == "truncated_cosine":
            return self.amplitude_hz * self.duration_s / 2.0
        from scipy.special import erf
        s, half = self.gaussian_sigma_s, 0.5 * self.duration_s
        return self.amplitude_hz * s * np.sqrt(2 * np.pi) * erf(half / (s * np.sqrt(2)))

    def shift(self, dt):
        return _replace_pulse(self, start_time_s=self.start_time_s + dt)


def _replace_pulse(p, **kw):
    data = dict(shape=p.shape, amplitude_hz=p.amplitude_hz, duration_s=p.duration_s,
                carrier_hz=p.carrier_hz, phase_rad=p.phase_rad,
                start_time_s=p.start_time_s, gaussian_sigma_s=p.gaussian_sigma_s,
                target_qubit=p.target_qubit)
    data.update(kw)
    return PulseSpec(**data)


def calibrated_pulse(shape, duration_s, carrier_hz, rotation_cycles=0.5,
                     target_qubit=1, start_time_s=0.0, phase_rad=0.0,
                     gaussian_sigma_s=None):
    """Pulse with its amplitude set so the envelope area equals rotation_cycles.

    rotation_cycles = 1/2 is a pi pulse, 1/4 a pi/2 pulse.  For gaussian
    shapes the truncated-tail area is inverted numerically via erf.
    """
    probe = PulseSpec(shape, 1.0, duration_s, carrier_hz, phase_rad, start_time_s,
                      gaussian_sigma_s, target_qubit)
    return _replace_pulse(probe, amplitude_hz=rotation_cycles / probe.area())


def pi_pulse(shape, duration_s, carrier_hz, **kw):
    return calibrated_pulse(shape, duration_s, carrier_hz, rotation_cycles=0.5, **kw)


@dataclass(frozen=True)
class DissipationSpec:
    """Per-qubit relaxation (T1) and optional total coherence (T2) times."""

    t1_s: tuple
    t2_s: tuple = None

    def __post_init__(self):
        if len(self.t1_s) != 2 or any(t <= 0 for t in self.t1_s):
            raise ValueError("t1_s must hold two positive times")
        if self.t2_s is not None:
            if len(self.t2_s) != 2:
                raise ValueError("t2_s must hold two times")
            for t2, t1 in zip(self.t2_s, self.t1_s):
                if t2 is not None and t2 > 2 * t1 + 1e-30:
                    raise ValueError("t2 must not exceed 2 t1")

    def collapse_operators(self):
        """Lowering and pure-dephasing collapse operators (angular rates inside)."""
        ops = []
        for t1, sm in zip(self.t1_s, (SM1, SM2)):
            if np.isfinite(t1):
                ops.append(np.sqrt(1.0 / t1) * sm)
        if self.t2_s is not None:
            for t1, t2, sz in zip(self.t1_s, self.t2_s, (SZ1, SZ2)):
                if t2 is None or not np.isfinite(t2):
                    continue
                gamma_phi = 1.0 / t2 - 1.0 / (2.0 * t1)
                if gamma_phi < -1e-12:
                    raise ValueError("negative pure dephasing rate")
                if gamma_phi > 0:
                    ops.append(np.sqrt(gamma_phi / 2.0) * sz)
        return ops


@dataclass(frozen=True)
class TwoQubitSystem:
    """Effective two-qubit model used by the time-domain protocols.

    omega1_hz and omega2_hz are the 0->1 transitions with the partner in its
    ground state; zeta shifts |11>.  jxx/jyy are the XX and YY coefficients
    (each J/2 for a pure exchange J).
    """

    omega1_hz: float
    omega2_hz: float
    zeta_hz: float
    jxx_hz: float = 0.0
    jyy_hz: float = 0.0

    @classmethod
    def from_pauli_decomposition(cls, decomp):
        """Transition data from a beta decomposition (sign convention agnostic)."""
        w1_0, _, w2_0, _ = conditional_frequencies(decomp)
        return cls(abs(w1_0), abs(w2_0), decomp.zeta_hz,
                   decomp.beta_hz[2], decomp.beta_hz[3])

    @classmethod
    def from_labeled_spectrum(cls, spectrum, j_hz=0.0):
        e = spectrum.energies
        return cls(
            e[(1, 0)] - e[(0, 0)],
            e[(0, 1)] - e[(0, 0)],
            e[(1, 1)] - e[(1, 0)] - e[(0, 1)] + e[(0, 0)],
            j_hz / 2.0, j_hz / 2.0,
        )

    def energies(self):
        return np.array([0.0, self.omega2_hz, self.omega1_hz,
                         self.omega1_hz + self.omega2_hz + self.zeta_hz])

    def conditional_transition(self, qubit, spectator_excited):
        base = self.omega1_hz if qubit == 1 else self.omega2_hz
        return base + (self.zeta_hz if spectator_excited else 0.0)

    def static_lab_matrix(self):
        h = np.diag(self.energies()).astype(complex)
        h += (self.jxx_hz + self.jyy_hz) * (FLIP_FLOP + FLIP_FLOP.conj().T)
        h += (self.jxx_hz - self.jyy_hz) * (DOUBLE_FLIP + DOUBLE_FLIP.conj().T)
        return h


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """Hamiltonian callable (angular units) plus the bookkeeping the solver needs."""

    func: object                # t -> (dim, dim) complex ndarray in rad/s
    dim: int
    breakpoints: tuple          # times where the envelope support changes
    active_intervals: tuple     # (start, end) windows in which drives are on
    always_time_dependent: bool = False
    max_step_s: float = None

    def matrix(self, t):
        return self.func(t)

    def is_static_on(self, a, b):
        if self.always_time_dependent:
            return False
        return not any(s < b - 1e-18 and e > a + 1e-18 for s, e in self.active_intervals)


def _pulse_terms(pulses):
    edges, intervals = [], []
    for p in pulses:
        edges.extend([p.start_time_s, p.end_time_s])
        intervals.append((p.start_time_s, p.end_time_s))
    return tuple(sorted(set(edges))), tuple(intervals)


def lab_hamiltonian(system, pulses):
    """Full lab-frame Hamiltonian: static part plus sin-carrier sigma_y drives.

    Each evaluation is Hermitian by construction; the solver is told to take
    at least STEPS_PER_CARRIER_PERIOD steps per carrier period.
    """
    h0 = TWO_PI * system.static_lab_matrix()
    ops = {1: SY1, 2: SY2}
    edges, intervals = _pulse_terms(pulses)
    carriers = [p.carrier_hz for p in pulses] or [system.omega1_hz]

    def func(t):
        h = h0.copy()
        for p in pulses:
            amp = p.envelope(t)
            if amp:
                h = h + (TWO_PI * amp
                         * np.sin(TWO_PI * p.carrier_hz * t + p.phase_rad)
                         * ops[p.target_qubit])
        return h

    return TimeDependentHamiltonian(
        func, 4, edges, intervals,
        max_step_s=1.0 / (STEPS_PER_CARRIER_PERIOD * max(carriers)),
    )


def rotating_frame_transform(system, pulses, frame_freqs_hz=None, rwa=True,
                             include_exchange=True):
    """Hamiltonian in the frame co-rotating with the drive carriers.

    The frame rotates each qubit at frame_freqs_hz (default: the carrier of
    that qubit's pulses, or its own transition when undriven).  Under the RWA
    the sigma_y sin-drive becomes Omega/2 on a fixed transverse axis (the
    2 omega_d terms are dropped); the axis gauge is chosen so a zero-phase
    pulse maps to +Omega/2 sigma_x, which differs from the raw sin -> RWA
    result only by a sigma_z conjugation that populations never see.  The
    excitation-conserving part of any XX+YY coupling is kept exactly as a
    difference-frequency term; its double-excitation part rotates at the
    carrier sum and is dropped with the RWA.  Asking for rwa=False here is
    unsupported: full counter-rotating dynamics belongs to the lab-frame path.
    """
    if not rwa:
        raise UnsupportedError("rwa=False requires lab-frame integration")
    if frame_freqs_hz is None:
        f = [None, None]
        for p in pulses:
            q = p.target_qubit - 1
            if f[q] is not None and not np.isclose(f[q], p.carrier_hz):
                raise UnsupportedError(
                    "pulses on one qubit carry different carriers; "
                    "pass frame_freqs_hz explicitly"
                )
            f[q] = p.carrier_hz
        frame_freqs_hz = (
            f[0] if f[0] is not None else system.omega1_hz,
            f[1] if f[1] is not None else system.omega2_hz,
        )
    f1, f2 = frame_freqs_hz

    e = system.energies()
    diag = TWO_PI * np.diag(
        e - f1 * np.diag(N1).real - f2 * np.diag(N2).real).astype(complex)
    edges, intervals = _pulse_terms(pulses)
    ops = {}
    for p in pulses:
        sm = SM1 if p.target_qubit == 1 else SM2
        # sin(w t + phi) sigma_y --RWA--> (1/2)(e^{i phi} sigma_- + h.c.) in this frame
        ops[id(p)] = sm * np.exp(1j * p.phase_rad)

    jpm = system.jxx_hz + system.jyy_hz          # coefficient of |10><01| + h.c.
    exchange_on = include_exchange and abs(jpm) > 0
    delta_d = f1 - f2

    def func(t):
        h = diag.copy()
        for p in pulses:
            amp = p.envelope(t)
            if amp:
                term = 0.5 * amp * ops[id(p)]
                h = h + TWO_PI * (term + term.conj().T)
        if exchange_on:
            term = jpm * np.exp(1j * TWO_PI * delta_d * t) * FLIP_FLOP
            h = h + TWO_PI * (term + term.conj().T)
        return h

    return TimeDependentHamiltonian(
        func, 4, edges, intervals,
        always_time_dependent=exchange_on and abs(delta_d) > 0,
        max_step_s=None if not exchange_on or delta_d == 0
        else 1.0 / (STEPS_PER_CARRIER_PERIOD * abs(delta_d)),
    )


def rotate_sigma_y(gamma_rad):
    """exp(i g sz) sy exp(-i g sz) = cos(2g) sy + sin(2g) sx (identity helper)."""
    return np.cos(2 * gamma_rad) * _SY + np.sin(2 * gamma_rad) * _SX


@dataclass(frozen=True)
class ProtocolSpec:
    """Timed pulse sequence with a frame choice and readout instants.

    delay_s > 0 means the qubit-2 pulse starts before the qubit-1 pulse.
    """

    pulses: tuple
    total_time_s: float
    frame: str = "rotating"
    delay_s: float = 0.0
    readout_times_s: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.frame not in ("lab", "rotating", "blockade_effective"):
            raise ValueError(f"unknown frame {self.frame!r}")
        ro = self.readout_times_s
        ro = (self.total_time_s,) if ro is None else tuple(ro)
        for t in ro:
            if not 0 <= t <= self.total_time_s + 1e-15:
                raise ValueError("readout times must fall inside [0, total_time]")
        object.__setattr__(self, "readout_times_s", ro)


@dataclass
class SimulationResult:
    """Time grid, per-label populations and (optionally) retained states."""

    times_s: np.ndarray
    populations: dict
    states: np.ndarray = None
    norm_drift: float = 0.0

    def p_excited(self, qubit):
        if qubit == 1:
            return self.populations[(1, 0)] + self.populations[(1, 1)]
        return self.populations[(0, 1)] + self.populations[(1, 1)]

    def at_time(self, t):
        k = int(np.argmin(np.abs(self.times_s - t)))
        return {lab: float(p[k]) for lab, p in self.populations.items()}


def _segments(t0, t1, breakpoints):
    pts = sorted({float(t0), float(t1), *(float(b) for b in breakpoints if t0 < b < t1)})
    return list(zip(pts[:-1], pts[1:]))


def _integrate_closed_segment(ham, psi, a, b, grid_pts, rtol, atol):
    def rhs(t, y):
        return (-1j * (ham.matrix(t) @ y.view(complex))).view(float)

    kw = dict(rtol=rtol, atol=atol, method="DOP853", dense_output=bool(len(grid_pts)))
    if ham.max_step_s and not ham.is_static_on(a, b):
        kw["max_step"] = ham.max_step_s
    elif not ham.is_static_on(a, b):
        kw["max_step"] = max((b - a) / 8.0, 1e-15)
    sol = solve_ivp(rhs, (a, b), psi.view(float), **kw)
    if not sol.success:
        raise StiffnessError(f"integration failed on [{a:.3e}, {b:.3e}]: {sol.message}")
    samples = [sol.sol(t).view(complex).copy() for t in grid_pts] if len(grid_pts) else []
    return sol.y[:, -1].view(complex).copy(), samples


def evolve_schrodinger(ham, psi0, grid_s, rtol=RTOL_DEFAULT, atol=ATOL_DEFAULT,
                       keep_states=False):
    """Integrate the Schrodinger equation on [grid[0], grid[-1]].

    The time axis is split at every envelope edge so that isolated pulses are
    always sampled; drive-free segments are propagated with the exact matrix
    exponential when the Hamiltonian is static there.  A norm drift beyond
    1e-6 triggers one retry with 100x tighter tolerances before raising
    StiffnessError.
    """
    grid = np.asarray(grid_s, dtype=float)
    if grid.ndim != 1 or len(grid) < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid_s must be strictly increasing")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise ValueError("psi0 must be normalized")

    def run(rt, at):
        psi = psi0.copy()
        out = np.empty((len(grid), ham.dim), dtype=complex)
        out[0] = psi0
        for a, b in _segments(grid[0], grid[-1], ham.breakpoints):
            mask = (grid > a + 1e-18) & (grid <= b + 1e-18)
            inside = grid[mask]
            idx = np.nonzero(mask)[0]
            if ham.is_static_on(a, b):
                evals, evecs = np.linalg.eigh(ham.matrix(0.5 * (a + b)))
                coeff = evecs.conj().T @ psi
                for k, t in zip(idx, inside):
                    out[k] = evecs @ (np.exp(-1j * evals * (t - a)) * coeff)
                psi = evecs @ (np.exp(-1j * evals * (b - a)) * coeff)
            else:
                psi, samples = _integrate_closed_segment(ham, psi, a, b, inside, rt, at)
                for k, s in zip(idx, samples):
                    out[k] = s
        return psi, out

    psi_end, states = run(rtol, atol)
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    if drift > NORM_DRIFT_TOL:
        psi_end, states = run(rtol * 1e-2, atol * 1e-2)
        drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
        if drift > NORM_DRIFT_TOL:
            raise StiffnessError(f"norm drift {drift:.2e} exceeds {NORM_DRIFT_TOL:g}")
    pops = {lab: np.abs(states[:, k]) ** 2 for k, lab in enumerate(BASIS_LABELS)}
    return SimulationResult(grid, pops, states if keep_states else None, drift)


def _liouvillian(h_angular, c_ops):
    """Vectorized Lindblad generator for drho/dt = L rho (row-major flattening)."""
    n = h_angular.shape[0]
    ident = np.eye(n)
    lv = -1j * (np.kron(h_angular, ident) - np.kron(ident, h_angular.T))
    for c in c_ops:
        cd_c = c.conj().T @ c
        lv += (np.kron(c, c.conj())
               - 0.5 * (np.kron(cd_c, ident) + np.kron(ident, cd_c.T)))
    return lv


def evolve_lindblad(ham, rho0, dissipation, grid_s, rtol=RTOL_DEFAULT,
                    atol=ATOL_DEFAULT, keep_states=False):
    """Master-equation evolution with per-qubit relaxation and pure dephasing.

    Uses the same pulse-edge segmentation as the closed solver; on drive-free
    segments the propagator is the exact exponential of the static Liouvillian,
    which makes microsecond-scale free decays cheap.  Trace is monitored to
    1e-6 and the state is checked for negative eigenvalues below -1e-8.
    """
    grid = np.asarray(grid_s, dtype=float)
    if grid.ndim != 1 or len(grid) < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid_s must be strictly increasing")
    rho0 = np.asarray(rho0, dtype=complex)
    n = ham.dim
    if rho0.shape != (n, n):
        raise ValueError(f"rho0 must be {n}x{n}")
    if abs(np.trace(rho0).real - 1.0) > 1e-9 or np.min(np.linalg.eigvalsh(rho0)) < -1e-9:
        raise ValueError("rho0 must be a unit-trace positive-semidefinite matrix")
    c_ops = dissipation.collapse_operators() if dissipation is not None else []

    def rhs(t, y):
        rho = y.view(complex).reshape(n, n)
        h = ham.matrix(t)
        drho = -1j * (h @ rho - rho @ h)
        for c in c_ops:
            cd = c.conj().T
            drho += c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c)
        return drho.reshape(-1).view(float)

    rho = rho0.copy()
    out = np.empty((len(grid), n, n), dtype=complex)
    out[0] = rho0
    for a, b in _segments(grid[0], grid[-1], ham.breakpoints):
        mask = (grid > a + 1e-18) & (grid <= b + 1e-18)
        inside, idx = grid[mask], np.nonzero(mask)[0]
        if ham.is_static_on(a, b):
            lv = _liouvillian(ham.matrix(0.5 * (a + b)), c_ops)
            vec = rho.reshape(-1)
            for k, t in zip(idx, inside):
                out[k] = (expm(lv * (t - a)) @ vec).reshape(n, n)
            rho = (expm(lv * (b - a)) @ vec).reshape(n, n)
        else:
            kw = dict(rtol=rtol, atol=atol, method="DOP853", dense_output=bool(len(inside)))
            if ham.max_step_s:
                kw["max_step"] = ham.max_step_s
            else:
                kw["max_step"] = max((b - a) / 8.0, 1e-15)
            sol = solve_ivp(rhs, (a, b), rho.reshape(-1).view(float), **kw)
            if not sol.success:
                raise StiffnessError(f"master equation failed on [{a:.3e}, {b:.3e}]")
            for k, t in zip(idx, inside):
                out[k] = sol.sol(t).view(complex).reshape(n, n)
            rho = sol.y[:, -1].view(complex).reshape(n, n).copy()

    traces = np.einsum("tii->t", out).real
    drift = float(np.max(np.abs(traces - 1.0)))
    if drift > NORM_DRIFT_TOL:
        raise StiffnessError(f"trace drift {drift:.2e} exceeds {NORM_DRIFT_TOL:g}")
    min_eig = float(min(np.min(np.linalg.eigvalsh(0.5 * (r + r.conj().T))) for r in out))
    if min_eig < -1e-8:
        raise PositivityError(f"density matrix eigenvalue dropped to {min_eig:.2e}")
    pops = {lab: out[:, k, k].real for k, lab in enumerate(BASIS_LABELS)}
    return SimulationResult(grid, pops, out if keep_states else None, drift)


def make_blockade_protocol(system, pulse_length_s, delay_s,
                           shape="truncated_cosine", frame="rotating",
                           carrier_convention="dressed", pad_s=2e-9,
                           gaussian_sigma_s=None, readout_pad_s=0.0):
    """Two pi pulses with the standard blockade timing.

    delay_s = t_start(Q1 pulse) - t_start(Q2 pulse): positive delay excites
    qubit 2 first.  carrier_convention "dressed" drives each qubit's
    neighbor-in-ground transition; "shifted" drives the neighbor-excited lines
    (the alternative frame choice, kept for cross-checks).
    """
    if carrier_convention == "dressed":
        f1 = system.conditional_transition(1, False)
        f2 = system.conditional_transition(2, False)
    elif carrier_convention == "shifted":
        f1 = system.conditional_transition(1, True)
        f2 = system.conditional_transition(2, True)
    else:
        raise ValueError(f"unknown carrier convention {carrier_convention!r}")
    t1 = max(delay_s, 0.0)
    t2 = max(-delay_s, 0.0)
    p1 = pi_pulse(shape, pulse_length_s, f1, target_qubit=1, start_time_s=t1,
                  gaussian_sigma_s=gaussian_sigma_s)
    p2 = pi_pulse(shape, pulse_length_s, f2, target_qubit=2, start_time_s=t2,
                  gaussian_sigma_s=gaussian_sigma_s)
    total = max(p1.end_time_s, p2.end_time_s) + pad_s + readout_pad_s
    return ProtocolSpec((p1, p2), total, frame, delay_s, (total,))


def build_protocol_hamiltonian(system, protocol, include_exchange=True):
    if protocol.frame == "lab":
        return lab_hamiltonian(system, protocol.pulses)
    if protocol.frame == "blockade_effective":
        freqs = (system.omega1_hz, system.omega2_hz)
        return rotating_frame_transform(system, protocol.pulses, freqs,
                                        include_exchange=False)
    return rotating_frame_transform(system, protocol.pulses,
                                    include_exchange=include_exchange)


def run_blockade_protocol(system, protocol, dissipation=None, n_grid=121,
                          include_exchange=True, rtol=RTOL_DEFAULT, atol=ATOL_DEFAULT):
    """Simulate the two-pulse blockade sequence and return populations in time.

    Closed-system propagation unless a DissipationSpec is given.  Populations
    are basis-state probabilities; SimulationResult.p_excited(q) reduces them
    per qubit.  The final grid point is the readout instant.
    """
    ham = build_protocol_hamiltonian(system, protocol, include_exchange)
    grid = np.unique(np.concatenate([
        np.linspace(0.0, protocol.total_time_s, n_grid),
        np.asarray(protocol.readout_times_s, dtype=float),
    ]))
    if dissipation is None:
        psi0 = np.zeros(4, dtype=complex)
        psi0[0] = 1.0
        return evolve_schrodinger(ham, psi0, grid, rtol=rtol, atol=atol)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0
    return evolve_lindblad(ham, rho0, dissipation, grid, rtol=rtol, atol=atol)


def pulse_spectral_power(pulse, center_offset_hz, window_hz, max_points=2**23):
    """Fraction of the drive power inside a spectral window around the carrier.

    Computes |FFT of the complex baseband envelope|^2, integrates it over
    [offset - window/2, offset + window/2] and normalizes by the total power.
    The FFT grid is refined until the bin spacing is at most window/20; if
    that needs more than max_points samples the record is declared too short.
    """
    if window_hz <= 0:
        raise ValueError("window_hz must be positive")
    # resolve the offset band, but never chase a window far past the envelope
    # bandwidth: beyond ~1000/T the pulse carries < 2e-4 of its power, and a
    # window wider than the sampled band simply captures everything
    span = abs(center_offset_hz) + 0.5 * window_hz
    f_needed = min(max(span, 4.0 / pulse.duration_s), 1000.0 / pulse.duration_s)
    dt = min(pulse.duration_s / 256.0, 1.0 / (16.0 * f_needed))
    t_record = max(4.0 * pulse.duration_s, 20.0 / window_hz)
    n = int(2 ** np.ceil(np.log2(t_record / dt)))
    if n > max_points:
        raise ResolutionError(
            f"need {n} samples for resolution {window_hz / 20:.3g} Hz "
            f"(cap {max_points})"
        )
    t = np.arange(n) * dt
    env = pulse.envelope(t + pulse.start_time_s) * np.exp(1j * pulse.phase_rad)
    spec = np.abs(np.fft.fft(env)) ** 2
    freqs = np.fft.fftfreq(n, dt)
    sel = (freqs >= center_offset_hz - window_hz / 2.0) & (
        freqs <= center_offset_hz + window_hz / 2.0)
    total = float(np.sum(spec))
    if total == 0.0:
        raise ValueError("pulse has zero power")
    return float(np.sum(spec[sel]) / total)


def _fit_fringe(times, signal, min_contrast=0.1):
    """Frequency of a cosine fringe: FFT seed plus nonlinear refinement."""
    times = np.asarray(times, dtype=float)
    signal = np.asarray(signal, dtype=float)
    dt = times[1] - times[0]
    centered = signal - np.mean(signal)
    spec = np.abs(np.fft.rfft(centered))
    freqs = np.fft.rfftfreq(len(times), dt)
    k = int(np.argmax(spec[1:]) + 1)
    f0 = freqs[k]

    def model(t, a, f, phi, c):
        return a * np.cos(TWO_PI * f * t + phi) + c

    a0 = float(np.max(np.abs(centered))) or 0.5
    try:
        popt, _ = curve_fit(model, times, signal, p0=[a0, f0, 0.0, float(np.mean(signal))],
                            maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"fringe fit did not converge: {exc}") from exc
    amp, freq = popt[0], abs(popt[1])
    if 2.0 * abs(amp) < min_contrast:
        raise FitError(f"fringe contrast {2 * abs(amp):.3f} below {min_contrast}")
    return freq, popt


def _half_pi_propagator(system, drive_freq_hz, pulse_length_s):
    """Propagator of a rectangular pi/2 pulse on qubit 1 in the drive frame."""
    pulse = calibrated_pulse("rectangular", pulse_length_s, drive_freq_hz,
                             rotation_cycles=0.25, target_qubit=1)
    ham = rotating_frame_transform(
        TwoQubitSystem(system.omega1_hz, system.omega2_hz, system.zeta_hz),
        (pulse,), (drive_freq_hz, system.omega2_hz), include_exchange=False)
    h = ham.matrix(0.5 * pulse_length_s)   # rectangular drive: static during pulse
    return expm(-1j * h * pulse_length_s)


def run_conditional_ramsey(system, spectator_state, free_time_grid_s,
                           drive_offset_hz=None, pulse_length_s=2e-9):
    """Fringe frequency of a pi/2 - wait - pi/2 sequence on qubit 1.

    The drive sits drive_offset_hz below the spectator-in-ground transition
    (default 1.5 |zeta| + 5 MHz so both conditional fringes stay on the same
    side); the fitted fringe frequency is |transition - drive|.  The qubit-2
    exchange terms are dropped (dispersive operation).  Run with spectator 0
    and 1 and subtract to read off zeta.
    """
    if spectator_state not in (0, 1):
        raise ValueError("spectator_state must be 0 or 1")
    if drive_offset_hz is None:
        drive_offset_hz = 1.5 * abs(system.zeta_hz) + 5e6
    f_drive = system.omega1_hz - drive_offset_hz
    u_half = _half_pi_propagator(system, f_drive, pulse_length_s)

    psi0 = np.zeros(4, dtype=complex)
    psi0[1 if spectator_state else 0] = 1.0
    psi1 = u_half @ psi0

    # free evolution is diagonal in this frame (exchange dropped)
    energies = system.energies() - f_drive * np.diag(N1).real \
        - system.omega2_hz * np.diag(N2).real
    grid = np.asarray(free_time_grid_s, dtype=float)
    phases = np.exp(-1j * TWO_PI * np.outer(grid, energies))
    states = (phases * psi1[None, :]) @ u_half.T
    p1 = np.abs(states[:, 2]) ** 2 + np.abs(states[:, 3]) ** 2
    freq, _ = _fit_fringe(grid, p1)
    return freq


def run_echo_conditional_phase(system, spectator_flip_time_s, total_free_time_s,
                               drive_offset_hz=0.0, samples_per_period=40):
    """Conditional phase accumulated over a free window with a spectator flip.

    Both spectator branches are propagated through pi/2 - free(t_flip) - X2 -
    free(rest); the qubit-1 coherence phase is tracked on a dense grid, and
    the branch difference is returned in radians.  Without a flip this equals
    2 pi zeta tau; a flip exactly at tau/2 echoes the ZZ phase away.
    """
    tau = float(total_free_time_s)
    t_flip = spectator_flip_time_s
    if t_flip is not None and not (0.0 <= t_flip <= tau):
        raise ValueError("flip time must lie inside the free window")
    f_drive = system.omega1_hz - drive_offset_hz
    x2 = np.kron(_I2, _SX)

    rate = max(abs(system.zeta_hz), abs(drive_offset_hz), 1.0)
    n_pts = max(int(samples_per_period * rate * tau), 32)
    energies = system.energies() - f_drive * np.diag(N1).real \
        - system.omega2_hz * np.diag(N2).real

    def branch_phase(spectator_state):
        u_half = _half_pi_propagator(system, f_drive, 2e-9)
        psi0 = np.zeros(4, dtype=complex)
        psi0[1 if spectator_state else 0] = 1.0
        psi = u_half @ psi0
        grid = np.linspace(0.0, tau, n_pts)
        segs = list(zip(grid[:-1], grid[1:]))
        phase_samples = []
        flipped = False

        def coherence(vec):
            # qubit-1 coherence <0|rho_1|1>, whose phase advances at +w1|spectator
            return vec[0] * np.conj(vec[2]) + vec[1] * np.conj(vec[3])

        phase_samples.append(np.angle(coherence(psi)))
        for a, b in segs:
            if t_flip is not None and not flipped and a <= t_flip <= b:
                psi = np.exp(-1j * TWO_PI * energies * (t_flip - a)) * psi
                psi = x2 @ psi
                psi = np.exp(-1j * TWO_PI * energies * (b - t_flip)) * psi
                flipped = True
            else:
                psi = np.exp(-1j * TWO_PI * energies * (b - a)) * psi
            phase_samples.append(np.angle(coherence(psi)))
        unwrapped = np.unwrap(np.array(phase_samples))
        return unwrapped[-1] - unwrapped[0]

    return branch_phase(1) - branch_phase(0)


def apply_readout_matrix(populations, fidelity_matrix):
    """Compose true populations with a row-stochastic readout confusion matrix.

    Element (i, j) is the probability of preparing state i and measuring j.
    Accepts a 2-vector with a 2x2 matrix (single qubit) or a 4-vector with a
    4x4 matrix (joint readout); the output is renormalized.
    """
    p = np.asarray(populations, dtype=float)
    m = np.asarray(fidelity_matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or p.shape != (m.shape[0],):
        raise ValueError("populations and fidelity matrix shapes disagree")
    if np.any(m < -1e-12) or np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-9:
        raise StochasticityError("fidelity matrix rows must be probabilities summing to 1")
    out = p @ m
    return out / out.sum()


def readout_matrix_for_qubit(result, qubit, fidelity_matrix):
    """Measured excited-state population of one qubit through a 2x2 confusion matrix."""
    pe = result.p_excited(qubit)
    pe = np.atleast_1d(pe)
    out = np.array([apply_readout_matrix(np.array([1.0 - x, x]), fidelity_matrix)[1]
                    for x in pe])
    return out if out.size > 1 else float(out[0])
