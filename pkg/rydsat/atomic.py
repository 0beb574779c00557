# Copyright (C) 2025 The rydsat developers
# 
# Redistribution and use in source and binary forms, with or without
# modification, are permitted provided that the following conditions 
# are met:
# 
# 1. Redistributions of source code must retain the above copyright notice,
#    this list of conditions and the following disclaimer.
# 
# 2. Redistributions in binary form must reproduce the above copyright
#    notice, this list of conditions and the following disclaimer in the
#    documentation and/or other materials provided with the distribution.
# 
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS"
# AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE
# IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE
# ARE DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS BE
# LIABLE FOR ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR
# CONSEQUENTIAL DAMAGES (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF
# SUBSTITUTE GOODS OR SERVICES; LOSS OF USE, DATA, OR PROFITS; OR BUSINESS
# INTERRUPTION) HOWEVER CAUSED AND ON ANY THEORY OF LIABILITY, WHETHER IN
# CONTRACT, STRICT LIABILITY, OR TORT (INCLUDING NEGLIGENCE OR OTHERWISE)
# ARISING IN ANY WAY OUT OF THE USE OF THIS SOFTWARE, EVEN IF ADVISED OF THE
# POSSIBILITY OF SUCH DAMAGE.

# Four-level ladder model of a Rydberg-atom microwave receiver.
#
# The atoms are driven along the ladder |1> -> |2> -> |3> -> |4> by a probe
# laser (|1>-|2>), a coupling laser (|2>-|3>) and a microwave field that
# couples the two Rydberg states (|3>-|4>). The Hamiltonian is taken in the
# rotating-wave approximation and the state evolves under a Lindblad master
# equation with spontaneous decay down the ladder plus optional dephasing.
#
# Everything inside this module is in angular units (rad/s); spectra are
# reported against detunings in Hz. Density matrices are vectorised in
# row-major order, so that vec(A rho B) = (A kron B^T) vec(rho).
#
# See also:
#   https://qutip.org/docs/latest/guide/dynamics/dynamics-master.html
#   "Rydberg atom electrometry", standard weak-probe EIT lineshape for a
#   cascade system (continued-fraction form of rho_21)

from dataclasses import dataclass, replace
from enum        import Enum
from typing      import Callable, List, Optional, Sequence, Tuple

import logging
import math

import numpy as np
import scipy.constants
import scipy.integrate
import scipy.signal

from numpy.polynomial.hermite import hermgauss

from rydsat.errors import InvalidParameter, NonpositiveInput, InvalidDensityMatrix, SingularLiouvillian, StepSizeUnderflow, SolverError

log = logging.getLogger("rydsat")

# =================================================================================================================================
# Constants:

TWO_PI              = 2.0 * math.pi
N_LEVELS            = 4

# Cs 6P3/2 natural linewidth, and Rydberg-scale decay for the upper two states:
DEFAULT_GAMMA       = (TWO_PI * 5.2e6, TWO_PI * 1.0e3, TWO_PI * 1.0e3)

PROBE_WAVELENGTH    = 852.357e-9    # m, Cs 6S1/2 -> 6P3/2
COUPLING_WAVELENGTH = 509.236e-9    # m, Cs 6P3/2 -> 57D5/2
CS133_MASS          = 132.905451961 * scipy.constants.atomic_mass

HERMITIAN_TOL       = 1e-12
TRACE_TOL           = 1e-10
EIGENVALUE_TOL      = 1e-10
TRACE_DRIFT         = 1e-9
MAX_CONDITION       = 1e12
BATCH_SIZE          = 2048

_RHO21              = 4             # index of rho[1, 0] in vec(rho)
_TRACE_ROW          = np.eye(N_LEVELS).reshape(N_LEVELS * N_LEVELS)

# =================================================================================================================================
# Types:

@dataclass(frozen=True)
class LadderSystem:
    """
    The four-level ladder. Detunings and Rabi frequencies are in rad/s.

    `gamma` holds the population decay rates (Gamma_21, Gamma_32, Gamma_43).
    `gamma_deph` lists extra pure dephasing as (i, j, rate) entries, where
    i != j are 1-based level labels; the coherences rho_ij and rho_ji both
    decay at `rate`.
    """
    delta_p    : float = 0.0
    delta_c    : float = 0.0
    delta_mw   : float = 0.0
    omega_p    : float = 0.0
    omega_c    : float = 0.0
    omega_mw   : float = 0.0
    gamma      : Tuple[float, float, float] = DEFAULT_GAMMA
    gamma_deph : Tuple[Tuple[int, int, float], ...] = ()

    def __post_init__(self) -> None:
        for name in ["delta_p", "delta_c", "delta_mw", "omega_p", "omega_c", "omega_mw"]:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameter(F"LadderSystem: {name} is not finite")
        for name in ["omega_p", "omega_c", "omega_mw"]:
            if getattr(self, name) < 0.0:
                raise InvalidParameter(F"LadderSystem: {name} must be >= 0")
        if len(self.gamma) != N_LEVELS - 1:
            raise InvalidParameter(F"LadderSystem: gamma needs {N_LEVELS - 1} decay rates, got {len(self.gamma)}")
        for rate in self.gamma:
            if not math.isfinite(rate) or rate < 0.0:
                raise InvalidParameter("LadderSystem: decay rates must be finite and >= 0")
        pairs = set()
        for (i, j, rate) in self.gamma_deph:
            if i == j or not 1 <= i <= N_LEVELS or not 1 <= j <= N_LEVELS:
                raise InvalidParameter(F"LadderSystem: no coherence between levels {i} and {j}")
            if not math.isfinite(rate) or rate < 0.0:
                raise InvalidParameter(F"LadderSystem: dephasing of rho_{i}{j} must be finite and >= 0")
            pair = (min(i, j), max(i, j))
            if pair in pairs:
                raise InvalidParameter(F"LadderSystem: dephasing of rho_{i}{j} given twice")
            pairs.add(pair)


    def max_rate(self) -> float:
        rates = [*self.gamma, self.omega_p, self.omega_c, self.omega_mw]
        rates.extend(rate for (_, _, rate) in self.gamma_deph)
        return max(rates)


    def dephasing(self, i: int, j: int) -> float:
        for (a, b, rate) in self.gamma_deph:
            if {a, b} == {i, j}:
                return rate
        return 0.0



@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    A 4x4 density matrix. Construction checks that rho is Hermitian, has
    unit trace, and is positive semi-definite to within numerical tolerance.
    """
    rho : np.ndarray

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (N_LEVELS, N_LEVELS):
            raise InvalidDensityMatrix(F"DensityMatrix: shape {rho.shape} is not {N_LEVELS}x{N_LEVELS}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise InvalidDensityMatrix("DensityMatrix: not Hermitian")
        if abs(np.trace(rho) - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrix(F"DensityMatrix: trace {np.trace(rho).real:.12f} is not 1")
        pops = np.diag(rho).real
        if np.any(pops < -EIGENVALUE_TOL) or np.any(pops > 1.0 + EIGENVALUE_TOL):
            raise InvalidDensityMatrix("DensityMatrix: population outside [0, 1]")
        if np.min(np.linalg.eigvalsh(rho)) < -EIGENVALUE_TOL:
            raise InvalidDensityMatrix("DensityMatrix: not positive semi-definite")
        object.__setattr__(self, "rho", rho)


    @classmethod
    def pure(cls, level: int) -> "DensityMatrix":
        if not 1 <= level <= N_LEVELS:
            raise InvalidParameter(F"DensityMatrix.pure: no level {level}")
        rho = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
        rho[level - 1, level - 1] = 1.0
        return cls(rho)


    def populations(self) -> np.ndarray:
        return np.diag(self.rho).real.copy()


    def coherence(self, i: int, j: int) -> complex:
        return complex(self.rho[i - 1, j - 1])



class AxisKind(Enum):
    COUPLING_DETUNING  = "coupling-detuning"
    BASEBAND_FREQUENCY = "baseband-frequency"


@dataclass(frozen=True, eq=False)
class Spectrum:
    axis_kind : AxisKind
    x         : np.ndarray                  # Hz
    y         : np.ndarray                  # transmission, or power in dB
    rbw       : Optional[float] = None      # Hz, baseband spectra only
    unit      : str = "transmission"

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
            raise InvalidParameter(F"Spectrum: x and y must be 1-D of equal length ({x.shape} vs {y.shape})")
        if len(x) == 0:
            raise InvalidParameter("Spectrum: no samples")
        if np.any(np.diff(x) <= 0.0):
            raise InvalidParameter("Spectrum: x must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


    def __len__(self) -> int:
        return len(self.x)



@dataclass(frozen=True)
class Peak:
    x          : float
    y          : float
    prominence : float


@dataclass(frozen=True)
class EvolveOptions:
    method   : str   = "Radau"   # any scipy.integrate.solve_ivp method
    rtol     : float = 1e-10
    atol     : float = 1e-12
    min_step : float = 0.0       # s, floor on the integrator step; 0 disables

# =================================================================================================================================
# Private helper functions:

def _rate_scale(sys: LadderSystem, *detunings: float) -> float:
    scale = max([sys.max_rate(), abs(sys.delta_p), abs(sys.delta_c), abs(sys.delta_mw)] + [abs(d) for d in detunings])
    return scale if scale > 0.0 else 1.0


def _collapse_operators(sys: LadderSystem) -> List[np.ndarray]:
    ops = []
    for (lower, rate) in enumerate(sys.gamma):
        if rate > 0.0:
            op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
            op[lower, lower + 1] = math.sqrt(rate)
            ops.append(op)
    return ops


def _rhs(sys: LadderSystem, rho: np.ndarray) -> np.ndarray:
    h    = build_hamiltonian(sys)
    drho = -1j * (h @ rho - rho @ h)
    for op in _collapse_operators(sys):
        op_dag = op.conj().T
        n_op   = op_dag @ op
        drho  += op @ rho @ op_dag - 0.5 * (n_op @ rho + rho @ n_op)
    for (i, j, rate) in sys.gamma_deph:
        drho[i - 1, j - 1] -= rate * rho[i - 1, j - 1]
        drho[j - 1, i - 1] -= rate * rho[j - 1, i - 1]
    return drho


def _superoperator(h: np.ndarray) -> np.ndarray:
    eye = np.eye(N_LEVELS)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def _detuning_generators() -> Tuple[np.ndarray, np.ndarray]:
    # The detunings only enter the diagonal of H, so their generators are
    # diagonal superoperators; return just the diagonals.
    ones = np.ones(N_LEVELS)
    dp   = np.array([0.0, -1.0, -1.0, -1.0])
    dc   = np.array([0.0,  0.0, -1.0, -1.0])
    return (-1j * (np.kron(dp, ones) - np.kron(ones, dp)),
            -1j * (np.kron(dc, ones) - np.kron(ones, dc)))


def _microwave_generator() -> np.ndarray:
    h = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    h[2, 3] = h[3, 2] = 0.5
    return _superoperator(h)


def _solve_steady(sup: np.ndarray, scale: float) -> np.ndarray:
    """
    Solve L vec(rho) = 0 with the first row replaced by the trace condition.
    `sup` may carry leading batch dimensions; returns vec(rho) per batch entry.
    """
    a = sup / scale
    a[..., 0, :] = _TRACE_ROW
    b = np.zeros(a.shape[:-1], dtype=complex)
    b[..., 0] = 1.0
    cond = np.linalg.cond(a.reshape(-1, N_LEVELS * N_LEVELS, N_LEVELS * N_LEVELS)[0])
    if not math.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularLiouvillian(F"_solve_steady: Liouvillian has no unique steady state (cond={cond:.3e})")
    try:
        vec = np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError as err:
        raise SingularLiouvillian(F"_solve_steady: {err}") from err
    if not np.all(np.isfinite(vec)):
        raise SingularLiouvillian("_solve_steady: non-finite solution")
    return vec


def _tidy(rho: np.ndarray) -> np.ndarray:
    rho   = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    if abs(trace - 1.0) > TRACE_DRIFT:
        log.debug(F"_tidy: renormalising trace drift {trace - 1.0:.3e}")
    return rho / trace


def _real_block(sup: np.ndarray) -> np.ndarray:
    return np.block([[sup.real, -sup.imag], [sup.imag, sup.real]])


def _integrate(block_at: Callable[[float], np.ndarray], rho: np.ndarray, t0: float, t1: float, options: EvolveOptions) -> np.ndarray:
    n  = N_LEVELS * N_LEVELS
    v0 = rho.reshape(n)
    y0 = np.concatenate([v0.real, v0.imag])

    def fun(t: float, y: np.ndarray) -> np.ndarray:
        return block_at(t) @ y

    def jac(t: float, y: np.ndarray) -> np.ndarray:
        return block_at(t)

    extra = {"jac": jac} if options.method in ["Radau", "BDF", "LSODA"] else {}
    sol = scipy.integrate.solve_ivp(fun, (t0, t1), y0, method=options.method, max_step=t1 - t0,
                                    rtol=options.rtol, atol=options.atol, **extra)
    if sol.status < 0:
        raise StepSizeUnderflow(F"_integrate: {sol.message}")
    if options.min_step > 0.0 and len(sol.t) > 2:
        smallest = float(np.min(np.diff(sol.t)[:-1]))
        if smallest < options.min_step:
            raise StepSizeUnderflow(F"_integrate: step {smallest:.3e} s is below the floor {options.min_step:.3e} s")
    y = sol.y[:, -1]
    return _tidy((y[:n] + 1j * y[n:]).reshape(N_LEVELS, N_LEVELS))


def _two_level_absorption(sys: LadderSystem, delta_p: np.ndarray) -> np.ndarray:
    # -Im rho_21 of the probe transition alone, including saturation.
    gamma21 = sys.gamma[0]
    if gamma21 <= 0.0:
        return np.zeros_like(delta_p)
    gperp = 0.5 * gamma21 + sys.dephasing(1, 2)
    lorentz = gperp / (gperp ** 2 + delta_p ** 2)
    sat     = sys.omega_p ** 2 * lorentz / gamma21
    return 0.5 * sys.omega_p * lorentz / (1.0 + sat)


def _absorption_batch(sys: LadderSystem, delta_p: np.ndarray, delta_c: np.ndarray) -> np.ndarray:
    if max(sys.gamma) <= 0.0:
        raise SingularLiouvillian("_absorption_batch: all decay rates are zero")
    base   = liouvillian(replace(sys, delta_p=0.0, delta_c=0.0))
    gp, gc = _detuning_generators()
    scale  = _rate_scale(sys, float(np.max(np.abs(delta_p))), float(np.max(np.abs(delta_c))))
    diag   = np.arange(N_LEVELS * N_LEVELS)
    out    = np.empty(len(delta_p))
    for start in range(0, len(delta_p), BATCH_SIZE):
        dp  = delta_p[start:start + BATCH_SIZE]
        dc  = delta_c[start:start + BATCH_SIZE]
        sup = np.repeat(base[None, :, :], len(dp), axis=0)
        sup[:, diag, diag] += dp[:, None] * gp[None, :] + dc[:, None] * gc[None, :]
        out[start:start + BATCH_SIZE] = -_solve_steady(sup, scale)[:, _RHO21].imag
    return out

# =================================================================================================================================
# Hamiltonian, master equation, and solvers:

def build_hamiltonian(sys: LadderSystem) -> np.ndarray:
    """
    H/hbar in rad/s for the rotating-frame ladder.
    """
    h = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    h[1, 1] = -sys.delta_p
    h[2, 2] = -(sys.delta_p + sys.delta_c)
    h[3, 3] = -(sys.delta_p + sys.delta_c + sys.delta_mw)
    h[0, 1] = h[1, 0] = 0.5 * sys.omega_p
    h[1, 2] = h[2, 1] = 0.5 * sys.omega_c
    h[2, 3] = h[3, 2] = 0.5 * sys.omega_mw
    return h


def lindblad_rhs(sys: LadderSystem, rho: DensityMatrix) -> np.ndarray:
    return _rhs(sys, rho.rho)


def liouvillian(sys: LadderSystem) -> np.ndarray:
    """
    The 16x16 superoperator L with d vec(rho)/dt = L vec(rho).
    """
    eye = np.eye(N_LEVELS)
    sup = _superoperator(build_hamiltonian(sys))
    for op in _collapse_operators(sys):
        n_op = op.conj().T @ op
        sup += np.kron(op, op.conj()) - 0.5 * (np.kron(n_op, eye) + np.kron(eye, n_op.T))
    for (i, j, rate) in sys.gamma_deph:
        for (a, b) in [(i - 1, j - 1), (j - 1, i - 1)]:
            k = a * N_LEVELS + b
            sup[k, k] -= rate
    return sup


def steady_state(sys: LadderSystem) -> DensityMatrix:
    if max(sys.gamma) <= 0.0:
        raise SingularLiouvillian("steady_state: all decay rates are zero")
    vec = _solve_steady(liouvillian(sys), _rate_scale(sys))
    rho = _tidy(vec.reshape(N_LEVELS, N_LEVELS))
    residual = float(np.max(np.abs(_rhs(sys, rho))))
    if residual > 1e-9 * sys.max_rate():
        raise SingularLiouvillian(F"steady_state: residual {residual:.3e} exceeds tolerance")
    log.debug(F"steady_state: residual {residual:.3e}")
    return DensityMatrix(rho)


def evolve(sys: LadderSystem, rho0: DensityMatrix, duration: float, dt_max: float, options: EvolveOptions = EvolveOptions()) -> DensityMatrix:
    """
    Integrate the master equation for `duration` seconds. The state is made
    Hermitian and renormalised after every interval of at most `dt_max`.
    """
    if not math.isfinite(duration) or duration < 0.0:
        raise InvalidParameter(F"evolve: duration must be >= 0, got {duration}")
    if not math.isfinite(dt_max) or dt_max <= 0.0:
        raise InvalidParameter(F"evolve: dt_max must be > 0, got {dt_max}")
    if duration == 0.0:
        return DensityMatrix(rho0.rho.copy())
    block = _real_block(liouvillian(sys))
    steps = max(1, math.ceil(duration / dt_max - 1e-9))
    dt    = duration / steps
    rho   = rho0.rho
    for n in range(steps):
        rho = _integrate(lambda t: block, rho, n * dt, (n + 1) * dt, options)
    return DensityMatrix(rho)


def evolve_driven(sys: LadderSystem, rho0: DensityMatrix, omega_mw_of_t: Callable[[float], float], t_eval: Sequence[float],
                  options: EvolveOptions = EvolveOptions()) -> List[DensityMatrix]:
    """
    Integrate with a time-dependent microwave Rabi frequency, ignoring
    sys.omega_mw. The first entry of `t_eval` is the time at which the state
    equals rho0; one state is returned per entry.
    """
    times = np.asarray(t_eval, dtype=float)
    if len(times) == 0 or np.any(np.diff(times) <= 0.0):
        raise InvalidParameter("evolve_driven: t_eval must be non-empty and strictly increasing")
    base  = _real_block(liouvillian(replace(sys, omega_mw=0.0)))
    drive = _real_block(_microwave_generator())
    rho   = rho0.rho
    states = [DensityMatrix(rho.copy())]
    for (t0, t1) in zip(times[:-1], times[1:]):
        rho = _integrate(lambda t: base + omega_mw_of_t(t) * drive, rho, float(t0), float(t1), options)
        states.append(DensityMatrix(rho))
    return states


def relax(sys: LadderSystem, rho0: DensityMatrix, tol: float = 1e-10, chunk: Optional[float] = None,
          max_duration: Optional[float] = None, options: EvolveOptions = EvolveOptions()) -> DensityMatrix:
    """
    Evolve until max|drho/dt| <= tol * sys.max_rate().
    """
    slowest = min([rate for rate in sys.gamma if rate > 0.0], default=0.0)
    if slowest <= 0.0:
        raise SingularLiouvillian("relax: all decay rates are zero")
    chunk        = chunk if chunk is not None else 10.0 / slowest
    max_duration = max_duration if max_duration is not None else 1e4 / slowest
    rho     = rho0
    elapsed = 0.0
    while float(np.max(np.abs(lindblad_rhs(sys, rho)))) > tol * sys.max_rate():
        if elapsed >= max_duration:
            raise SolverError(F"relax: no steady state reached after {elapsed:.3e} s")
        rho      = evolve(sys, rho, chunk, chunk, options)
        elapsed += chunk
    log.debug(F"relax: settled after {elapsed:.3e} s")
    return rho


def weak_probe_coherence(sys: LadderSystem) -> complex:
    """
    Analytic rho_21 to first order in the probe Rabi frequency, with the
    ground state fully populated.
    """
    g21 = 0.5 * sys.gamma[0] + sys.dephasing(1, 2)
    g31 = 0.5 * sys.gamma[1] + sys.dephasing(1, 3)
    g41 = 0.5 * sys.gamma[2] + sys.dephasing(1, 4)
    d2  = sys.delta_p + sys.delta_c
    d3  = d2 + sys.delta_mw
    den3 = np.complex128(g41 - 1j * d3)
    den2 = g31 - 1j * d2 + 0.25 * sys.omega_mw ** 2 / den3
    den1 = g21 - 1j * sys.delta_p + 0.25 * sys.omega_c ** 2 / den2
    return complex(-0.5j * sys.omega_p / den1)


def rabi_frequency(power: float, waist: float, dipole_moment: float) -> float:
    """
    Rabi frequency (rad/s) at the centre of a Gaussian beam of the given power
    (W) and 1/e^2 intensity radius (m), for a transition dipole moment in C m.
    """
    if power <= 0.0 or waist <= 0.0 or dipole_moment <= 0.0:
        raise NonpositiveInput("rabi_frequency: power, waist and dipole moment must be > 0")
    intensity = 2.0 * power / (math.pi * waist ** 2)
    e_field   = math.sqrt(2.0 * intensity / (scipy.constants.c * scipy.constants.epsilon_0))
    return dipole_moment * e_field / scipy.constants.hbar

# =================================================================================================================================
# Doppler averaging:

class Quadrature(Enum):
    TRAPEZOID = "trapezoid"
    HERMITE   = "hermite"


@dataclass(frozen=True, eq=False)
class DopplerAverage:
    """
    A one-dimensional Maxwell-Boltzmann average over atomic velocity classes.
    A class moving at v sees the probe detuning shifted by -k_probe v and the
    coupling detuning shifted by +coupling_shift v; coupling_shift is +k_c for
    counter-propagating beams and -k_c for co-propagating beams.
    """
    system         : LadderSystem
    temperature    : float          # K
    velocities     : np.ndarray     # m/s
    weights        : np.ndarray
    k_probe        : float          # rad/m
    coupling_shift : float          # rad/m

    def eit_spectrum(self, delta_c_range: Tuple[float, float], n_points: int) -> Spectrum:
        return eit_spectrum(self.system, delta_c_range, n_points, doppler=self)


def doppler_average(sys_template: LadderSystem,
                    temperature: float,
                    wavelengths: Tuple[float, float] = (PROBE_WAVELENGTH, COUPLING_WAVELENGTH),
                    n_velocity: int = 201,
                    counter_propagating: bool = True,
                    mass: float = CS133_MASS,
                    quadrature: Quadrature = Quadrature.TRAPEZOID,
                    span: float = 4.0) -> DopplerAverage:
    if not temperature > 0.0:
        raise NonpositiveInput(F"doppler_average: temperature must be > 0, got {temperature}")
    if n_velocity < 11 or n_velocity % 2 == 0:
        raise InvalidParameter(F"doppler_average: n_velocity must be odd and >= 11, got {n_velocity}")
    if min(wavelengths) <= 0.0 or mass <= 0.0 or span <= 0.0:
        raise NonpositiveInput("doppler_average: wavelengths, mass and span must be > 0")
    sigma = math.sqrt(scipy.constants.k * temperature / mass)
    if quadrature == Quadrature.HERMITE:
        nodes, weights = hermgauss(n_velocity)
        velocities = math.sqrt(2.0) * sigma * nodes
        weights    = weights / math.sqrt(math.pi)
    else:
        velocities = np.linspace(-span * sigma, span * sigma, n_velocity)
        weights    = np.exp(-0.5 * (velocities / sigma) ** 2)
        weights[0]  *= 0.5
        weights[-1] *= 0.5
    weights = weights / np.sum(weights)
    k_p = TWO_PI / wavelengths[0]
    k_c = TWO_PI / wavelengths[1]
    log.debug(F"doppler_average: T={temperature} K, sigma_v={sigma:.4g} m/s, {n_velocity} classes ({quadrature.value})")
    return DopplerAverage(sys_template, temperature, velocities, weights, k_p, k_c if counter_propagating else -k_c)

# =================================================================================================================================
# Probe transmission and EIT spectra:

@dataclass(frozen=True)
class TransmissionScale:
    """
    Affine map from probe absorption (-Im rho_21) to the transmission proxy:
    0 with the coupling laser off, 1 at the field-free two-photon resonance.
    """
    background : float
    span       : float

    def transmission(self, absorption: np.ndarray) -> np.ndarray:
        return (self.background - np.asarray(absorption)) / self.span


def probe_absorption(sys: LadderSystem, delta_c_values: Sequence[float], doppler: Optional[DopplerAverage] = None) -> np.ndarray:
    """
    Steady-state -Im rho_21 at each coupling detuning (rad/s), optionally
    averaged over the velocity classes of `doppler`.
    """
    delta_c = np.asarray(delta_c_values, dtype=float)
    if doppler is None:
        return _absorption_batch(sys, np.full(len(delta_c), sys.delta_p), delta_c)
    delta_p = sys.delta_p - doppler.k_probe * doppler.velocities
    out = np.empty(len(delta_c))
    for (n, value) in enumerate(delta_c):
        shifted = value + doppler.coupling_shift * doppler.velocities
        out[n]  = float(np.dot(doppler.weights, _absorption_batch(sys, delta_p, shifted)))
    return out


def transmission_scale(sys: LadderSystem, doppler: Optional[DopplerAverage] = None) -> TransmissionScale:
    if sys.omega_p <= 0.0:
        raise InvalidParameter("transmission_scale: omega_p must be > 0 to define a probe transmission")
    if doppler is None:
        background = float(_two_level_absorption(sys, np.array([sys.delta_p]))[0])
    else:
        background = float(np.dot(doppler.weights, _two_level_absorption(sys, sys.delta_p - doppler.k_probe * doppler.velocities)))
    peak = float(probe_absorption(replace(sys, omega_mw=0.0), [-sys.delta_p], doppler)[0])
    span = background - peak
    if span <= 1e-9 * background:
        log.warning(F"transmission_scale: no transparency at the two-photon resonance (background {background:.4g}, peak {peak:.4g}); scaling by the background")
        span = background
    return TransmissionScale(background, span)


def probe_transmission(sys: LadderSystem, delta_c_values: Sequence[float], doppler: Optional[DopplerAverage] = None) -> np.ndarray:
    scale = transmission_scale(sys, doppler)
    return scale.transmission(probe_absorption(sys, delta_c_values, doppler))


def eit_spectrum(sys_template: LadderSystem, delta_c_range: Tuple[float, float], n_points: int,
                 doppler: Optional[DopplerAverage] = None) -> Spectrum:
    """
    Sweep the coupling detuning over `delta_c_range` (Hz) and return the probe
    transmission proxy, normalised so the field-free EIT peak is 1.
    """
    (lo, hi) = delta_c_range
    if n_points < 3:
        raise InvalidParameter(F"eit_spectrum: need at least 3 points, got {n_points}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InvalidParameter(F"eit_spectrum: invalid detuning range ({lo}, {hi})")
    x = np.linspace(lo, hi, n_points)
    y = probe_transmission(sys_template, TWO_PI * x, doppler)
    log.debug(F"eit_spectrum: {n_points} points over [{lo:.4g}, {hi:.4g}] Hz{' with Doppler average' if doppler else ''}")
    return Spectrum(AxisKind.COUPLING_DETUNING, x, y)

# =================================================================================================================================
# Peaks:

def _refine_peak(x: np.ndarray, y: np.ndarray, i: int) -> Tuple[float, float]:
    if i == 0 or i == len(y) - 1:
        return float(x[i]), float(y[i])
    u0, u2 = x[i - 1] - x[i], x[i + 1] - x[i]
    r0, r2 = y[i - 1] - y[i], y[i + 1] - y[i]
    det = u0 * u2 * (u0 - u2)
    a   = (r0 * u2 - r2 * u0) / det
    b   = (r2 * u0 * u0 - r0 * u2 * u2) / det
    if a >= 0.0:
        return float(x[i]), float(y[i])
    u = min(max(-b / (2.0 * a), u0), u2)
    return float(x[i] + u), float(y[i] + a * u * u + b * u)


def find_spectrum_peaks(spec: Spectrum, rel_prominence: float = 0.05) -> List[Peak]:
    """
    Local maxima whose prominence is at least `rel_prominence` of the y-span,
    most prominent first; equal prominences are ordered by lower x.
    """
    span = float(np.max(spec.y) - np.min(spec.y))
    if span <= 0.0:
        return []
    index, props = scipy.signal.find_peaks(spec.y, prominence=rel_prominence * span)
    peaks = []
    for (i, prominence) in zip(index, props["prominences"]):
        (x, y) = _refine_peak(spec.x, spec.y, int(i))
        peaks.append(Peak(x, y, float(prominence)))
    peaks.sort(key=lambda p: (-p.prominence, p.x))
    return peaks


def linewidth(spec: Spectrum, rel_prominence: float = 0.05) -> float:
    """
    Full width at half prominence of the most prominent peak, in x units.
    """
    span = float(np.max(spec.y) - np.min(spec.y))
    if span <= 0.0:
        raise InvalidParameter("linewidth: spectrum is flat")
    index, props = scipy.signal.find_peaks(spec.y, prominence=rel_prominence * span)
    if len(index) == 0:
        raise InvalidParameter("linewidth: spectrum has no peak")
    best = int(index[np.argmax(props["prominences"])])
    _, _, left, right = scipy.signal.peak_widths(spec.y, [best], rel_height=0.5)
    samples = np.arange(len(spec.x))
    return float(np.interp(right[0], samples, spec.x) - np.interp(left[0], samples, spec.x))

# =================================================================================================================================
# vim: set tw=0 ai:
