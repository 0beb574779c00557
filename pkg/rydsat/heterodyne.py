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

# Superheterodyne readout. A strong local microwave E_loc and a weak signal
# E_sig cos(2 pi f t + phase) add at the atoms; for a weak signal the probe
# transmission follows the total field, so the signal appears as a beat at
# the offset frequency f in the photodetector output. This module builds
# those time series, maps them through the atomic response, and measures
# their spectra the way a swept spectrum analyser with a given resolution
# bandwidth would.

from dataclasses import dataclass, replace
from enum        import Enum
from typing      import Callable, List, Optional, Tuple, Union

import logging
import math

import numpy as np
import scipy.constants
import scipy.interpolate
import scipy.signal

from rydsat.atomic import LadderSystem, Spectrum, AxisKind, EvolveOptions, DopplerAverage
from rydsat.atomic import probe_absorption, transmission_scale, steady_state, evolve_driven
from rydsat.errors import InvalidParameter, NonpositiveInput, AliasingRejected, RbwTooFine, RbwTooCoarse, EmptyBand, WrongKind

log = logging.getLogger("rydsat")

EDGE_GUARD         = 1e-9       # cycles; a sample exactly on a keying edge counts as after it
MIN_BEAT_PERIODS   = 10
MAX_DIRECT_SECONDS = 1e-3

# =================================================================================================================================
# Types:

class ToneKind(Enum):
    BEACON           = "beacon"
    SQUARE_MODULATED = "square-modulated"


class Polarity(Enum):
    UNIPOLAR = "unipolar"       # keyed between 0 and 1
    BIPOLAR  = "bipolar"        # keyed between -1 and 1


@dataclass(frozen=True)
class ToneSpec:
    kind         : ToneKind
    offset       : float                        # Hz, beat frequency against the local field
    amplitude    : float                        # V/m
    phase        : float    = 0.0               # rad
    mod_rate     : float    = 0.0               # Hz, square-wave fundamental
    bandwidth    : float    = 0.0               # Hz, occupied bandwidth (metadata)
    duty         : float    = 0.5
    polarity     : Polarity = Polarity.UNIPOLAR
    harmonic_cap : int      = 5

    def __post_init__(self) -> None:
        if not self.amplitude >= 0.0:
            raise InvalidParameter(F"ToneSpec: amplitude must be >= 0, got {self.amplitude}")
        if not self.offset >= 0.0:
            raise InvalidParameter(F"ToneSpec: offset must be >= 0, got {self.offset}")
        if self.kind == ToneKind.SQUARE_MODULATED and not self.mod_rate > 0.0:
            raise InvalidParameter("ToneSpec: a square-modulated tone needs mod_rate > 0")
        if not 0.0 < self.duty < 1.0:
            raise InvalidParameter(F"ToneSpec: duty {self.duty} outside (0, 1)")
        if self.harmonic_cap < 1:
            raise InvalidParameter(F"ToneSpec: harmonic cap must be >= 1, got {self.harmonic_cap}")


    def envelope(self, t: np.ndarray) -> np.ndarray:
        if self.kind == ToneKind.BEACON:
            return np.ones_like(t)
        on = np.mod(self.mod_rate * t + EDGE_GUARD, 1.0) < self.duty
        if self.polarity == Polarity.BIPOLAR:
            return np.where(on, 1.0, -1.0)
        return on.astype(float)


    def highest_frequency(self) -> float:
        if self.kind == ToneKind.SQUARE_MODULATED:
            return self.offset + self.harmonic_cap * self.mod_rate
        return self.offset



@dataclass(frozen=True, eq=False)
class BasebandTrace:
    sample_rate : float         # Hz
    samples     : np.ndarray    # transmission
    duration    : float         # s

    def __post_init__(self) -> None:
        if not self.sample_rate > 0.0 or not self.duration > 0.0:
            raise InvalidParameter("BasebandTrace: sample rate and duration must be > 0")
        samples = np.asarray(self.samples, dtype=float)
        if len(samples) != round(self.sample_rate * self.duration):
            raise InvalidParameter(F"BasebandTrace: {len(samples)} samples for {self.duration} s at {self.sample_rate} Hz")
        object.__setattr__(self, "samples", samples)


    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate



@dataclass(frozen=True)
class SnrMeasurement:
    signal_power : float        # dB, relative to the spectrum reference
    noise_floor  : float        # dB, relative to the spectrum reference
    snr          : float        # dB
    rbw          : float        # Hz

    def __post_init__(self) -> None:
        assert abs(self.snr - (self.signal_power - self.noise_floor)) <= 1e-9 * max(1.0, abs(self.snr))



@dataclass(frozen=True)
class AtomicResponse:
    """
    Transmission linearised about the local-field operating point:
    T(E) = transmission + slope * (E - e_loc).
    """
    e_loc        : float        # V/m
    slope        : float        # transmission per V/m
    transmission : float

    def __call__(self, e_field: np.ndarray) -> np.ndarray:
        return self.transmission + self.slope * (np.asarray(e_field) - self.e_loc)

    @classmethod
    def identity(cls, e_loc: float) -> "AtomicResponse":
        return cls(e_loc, 1.0, e_loc)



@dataclass(frozen=True, eq=False)
class QuasistaticResponse:
    """
    Steady-state transmission versus total field, interpolated over
    [e_min, e_max]. Follows the field adiabatically, including the
    curvature that the linear response drops.
    """
    e_loc        : float
    slope        : float
    transmission : float
    e_min        : float
    e_max        : float
    spline       : scipy.interpolate.CubicSpline

    def __call__(self, e_field: np.ndarray) -> np.ndarray:
        e_field = np.asarray(e_field, dtype=float)
        if np.min(e_field) < self.e_min or np.max(e_field) > self.e_max:
            raise InvalidParameter(F"QuasistaticResponse: field outside the tabulated range [{self.e_min:.4g}, {self.e_max:.4g}] V/m")
        return self.spline(e_field)


Response = Union[AtomicResponse, QuasistaticResponse]

# =================================================================================================================================
# Private helper functions:

def _transmission_at(sys: LadderSystem, doppler: Optional[DopplerAverage]) -> Callable[[float], float]:
    scale = transmission_scale(sys, doppler)

    def transmission(omega_mw: float) -> float:
        absorption = probe_absorption(replace(sys, omega_mw=omega_mw), [sys.delta_c], doppler)
        return float(scale.transmission(absorption)[0])

    return transmission


def _check_sampling(tone: ToneSpec, sample_rate: float, duration: float) -> None:
    if not sample_rate > 0.0 or not duration > 0.0:
        raise InvalidParameter("_check_sampling: sample rate and duration must be > 0")
    highest = tone.highest_frequency()
    if sample_rate <= 2.0 * highest:
        raise AliasingRejected(F"_check_sampling: {sample_rate:g} Hz sampling cannot represent content up to {highest:g} Hz")
    if duration * tone.offset < MIN_BEAT_PERIODS:
        raise InvalidParameter(F"_check_sampling: {duration:g} s holds fewer than {MIN_BEAT_PERIODS} beat periods at {tone.offset:g} Hz")

# =================================================================================================================================
# Tones and traces:

def mod_rate_for_bandwidth(bandwidth: float) -> float:
    """
    Square-wave fundamental whose main lobe (carrier plus the first
    sideband pair) occupies `bandwidth`.
    """
    if not bandwidth > 0.0:
        raise NonpositiveInput(F"mod_rate_for_bandwidth: bandwidth must be > 0, got {bandwidth}")
    return bandwidth / 2.0


def total_field(e_loc: float, tone: ToneSpec, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    if not e_loc > 0.0:
        raise NonpositiveInput(F"total_field: local field must be > 0, got {e_loc}")
    times = np.asarray(t, dtype=float)
    e_tot = e_loc + tone.amplitude * tone.envelope(times) * np.cos(2.0 * math.pi * tone.offset * times + tone.phase)
    if e_tot.ndim == 0:
        return float(e_tot)
    return e_tot


def atomic_response(sys: LadderSystem, dipole_moment: float, e_loc: float, rel_step: float = 1e-3,
                    doppler: Optional[DopplerAverage] = None) -> AtomicResponse:
    """
    Small-signal slope dT/dE at the local-field operating point. The central
    difference in the microwave Rabi frequency is evaluated at steps h, h/2
    and h/4 and Richardson-extrapolated.
    """
    if not dipole_moment > 0.0 or not e_loc > 0.0:
        raise NonpositiveInput("atomic_response: dipole moment and local field must be > 0")
    rabi_per_field = dipole_moment / scipy.constants.hbar
    omega0 = rabi_per_field * e_loc
    t_at   = _transmission_at(sys, doppler)
    diffs  = []
    for step in [rel_step * omega0, 0.5 * rel_step * omega0, 0.25 * rel_step * omega0]:
        diffs.append((t_at(omega0 + step) - t_at(omega0 - step)) / (2.0 * step))
    first  = (4.0 * diffs[1] - diffs[0]) / 3.0
    second = (4.0 * diffs[2] - diffs[1]) / 3.0
    slope  = (16.0 * second - first) / 15.0
    log.debug(F"atomic_response: dT/dOmega = {slope:.6e} s/rad (Richardson spread {abs(second - first):.2e})")
    if abs(slope) * omega0 < 1e-9:
        log.warning(F"atomic_response: transmission is flat at Omega_MW = {omega0:.4g} rad/s; the beat will vanish")
    return AtomicResponse(e_loc, slope * rabi_per_field, t_at(omega0))


def quasistatic_response(sys: LadderSystem, dipole_moment: float, e_loc: float, e_span: float, n_grid: int = 65,
                         doppler: Optional[DopplerAverage] = None) -> QuasistaticResponse:
    if not dipole_moment > 0.0 or not e_loc > 0.0 or not e_span > 0.0:
        raise NonpositiveInput("quasistatic_response: dipole moment, local field and span must be > 0")
    if n_grid < 5:
        raise InvalidParameter(F"quasistatic_response: need at least 5 grid points, got {n_grid}")
    e_min = e_loc - 1.05 * e_span
    e_max = e_loc + 1.05 * e_span
    if e_min <= 0.0:
        raise InvalidParameter(F"quasistatic_response: span {e_span:.4g} V/m reaches zero field from {e_loc:.4g} V/m")
    rabi_per_field = dipole_moment / scipy.constants.hbar
    t_at   = _transmission_at(sys, doppler)
    grid   = np.linspace(e_min, e_max, n_grid)
    spline = scipy.interpolate.CubicSpline(grid, [t_at(rabi_per_field * e) for e in grid])
    return QuasistaticResponse(e_loc, float(spline(e_loc, 1)), float(spline(e_loc)), e_min, e_max, spline)


def synthesize_trace(e_loc: float, tone: ToneSpec, sample_rate: float, duration: float, noise_rms: float = 0.0,
                     seed: int = 0, response: Optional[Response] = None) -> BasebandTrace:
    """
    Photodetector output for the local field plus `tone`. The transmission is
    response(E_tot) plus white Gaussian field noise of rms `noise_rms` (V/m)
    scaled by the response slope. Without a response the transducer is the
    identity, so the trace is E_tot itself.
    """
    _check_sampling(tone, sample_rate, duration)
    if not noise_rms >= 0.0:
        raise InvalidParameter(F"synthesize_trace: noise rms must be >= 0, got {noise_rms}")
    if response is None:
        response = AtomicResponse.identity(e_loc)
    n_samples = round(sample_rate * duration)
    times     = np.arange(n_samples) / sample_rate
    samples   = response(total_field(e_loc, tone, times))
    if noise_rms > 0.0:
        rng      = np.random.default_rng(seed)
        samples  = samples + response.slope * noise_rms * rng.standard_normal(n_samples)
    log.debug(F"synthesize_trace: {n_samples} samples at {sample_rate:g} Hz, tone {tone.kind.value} at {tone.offset:g} Hz")
    return BasebandTrace(sample_rate, samples, duration)


def synthesize_trace_direct(sys: LadderSystem, dipole_moment: float, e_loc: float, tone: ToneSpec, sample_rate: float,
                            duration: float, options: EvolveOptions = EvolveOptions()) -> BasebandTrace:
    """
    Validation mode: integrate the master equation through the beat, sample
    by sample, starting from the steady state at t = 0. Limited to short
    traces.
    """
    _check_sampling(tone, sample_rate, duration)
    if duration > MAX_DIRECT_SECONDS:
        raise InvalidParameter(F"synthesize_trace_direct: {duration:g} s exceeds the {MAX_DIRECT_SECONDS:g} s limit")
    if not dipole_moment > 0.0:
        raise NonpositiveInput("synthesize_trace_direct: dipole moment must be > 0")
    rabi_per_field = dipole_moment / scipy.constants.hbar

    def omega_mw(t: float) -> float:
        return rabi_per_field * float(total_field(e_loc, tone, t))

    n_samples = round(sample_rate * duration)
    times     = np.arange(n_samples) / sample_rate
    rho0      = steady_state(replace(sys, omega_mw=omega_mw(0.0)))
    states    = evolve_driven(sys, rho0, omega_mw, times, options)
    scale     = transmission_scale(sys)
    samples   = scale.transmission(np.array([-state.coherence(2, 1).imag for state in states]))
    log.debug(F"synthesize_trace_direct: integrated {n_samples} samples")
    return BasebandTrace(sample_rate, samples, duration)


def tone_power(trace: BasebandTrace, freq: float) -> float:
    """
    Power A^2/2 of the component of `trace` at `freq`, from a single DFT bin.
    Exact when the trace holds a whole number of periods.
    """
    samples = trace.samples - np.mean(trace.samples)
    phasor  = np.exp(-2j * math.pi * freq * trace.times())
    amplitude = 2.0 * abs(np.dot(samples, phasor)) / len(samples)
    return 0.5 * amplitude ** 2

# =================================================================================================================================
# Spectra:

def hann_enbw(nperseg: int) -> float:
    """
    Equivalent noise bandwidth of a periodic Hann window, in bins.
    """
    if nperseg < 2:
        raise InvalidParameter(F"hann_enbw: need at least 2 samples per segment, got {nperseg}")
    window = scipy.signal.get_window("hann", nperseg)
    return float(nperseg * np.sum(window ** 2) / np.sum(window) ** 2)


def noise_rms_for_floor(e_floor: float, sample_rate: float, rbw: float) -> float:
    """
    White-noise rms (V/m) whose power in one estimator bin equals that of a
    tone of amplitude `e_floor`.
    """
    if not e_floor > 0.0 or not sample_rate > 0.0 or not rbw > 0.0:
        raise NonpositiveInput("noise_rms_for_floor: field, sample rate and RBW must be > 0")
    nperseg = int(round(sample_rate / rbw))
    if nperseg < 2:
        raise RbwTooCoarse(F"noise_rms_for_floor: {rbw:g} Hz RBW leaves fewer than 2 samples per segment at {sample_rate:g} Hz")
    return e_floor * math.sqrt(nperseg / (4.0 * hann_enbw(nperseg)))


def power_spectrum(trace: BasebandTrace, rbw: float, reference: float = 1.0) -> Spectrum:
    """
    Welch-averaged one-sided power spectrum in dB relative to `reference`,
    using Hann-windowed segments of sample_rate/rbw samples with 50% overlap.
    """
    if not rbw > 0.0 or not reference > 0.0:
        raise NonpositiveInput("power_spectrum: RBW and reference must be > 0")
    nperseg = int(round(trace.sample_rate / rbw))
    if nperseg < 2:
        raise RbwTooCoarse(F"power_spectrum: {rbw:g} Hz RBW leaves fewer than 2 samples per segment at {trace.sample_rate:g} Hz")
    if rbw * trace.duration < 1.0 - 1e-9 or nperseg > len(trace.samples):
        raise RbwTooFine(F"power_spectrum: {rbw:g} Hz RBW needs at least {1.0 / rbw:g} s of data, have {trace.duration:g} s")
    freqs, pxx = scipy.signal.welch(trace.samples, fs=trace.sample_rate, window="hann", nperseg=nperseg,
                                    noverlap=nperseg // 2, detrend="constant", scaling="spectrum")
    power = 10.0 * np.log10(np.maximum(pxx, np.finfo(float).tiny) / reference)
    log.debug(F"power_spectrum: {nperseg}-sample segments, {len(freqs)} bins")
    return Spectrum(AxisKind.BASEBAND_FREQUENCY, freqs, power, rbw=rbw, unit="dB")


def signal_band(tone: ToneSpec, rbw: float) -> Tuple[float, float]:
    half = max(0.5 * tone.bandwidth, 5.0 * rbw)
    return (tone.offset - half, tone.offset + half)


def _band_mask(spec: Spectrum, band: Tuple[float, float]) -> np.ndarray:
    (lo, hi) = band
    if lo > hi:
        raise InvalidParameter(F"_band_mask: band ({lo}, {hi}) is reversed")
    return (spec.x >= lo) & (spec.x <= hi)


def noise_floor(spec: Spectrum, exclude: Optional[Tuple[float, float]] = None) -> float:
    outside = np.ones(len(spec), dtype=bool) if exclude is None else ~_band_mask(spec, exclude)
    if not np.any(outside):
        raise EmptyBand("noise_floor: no bins outside the excluded band")
    return float(np.median(spec.y[outside]))


def measure_snr(spec: Spectrum, signal_band: Tuple[float, float]) -> SnrMeasurement:
    inside = _band_mask(spec, signal_band)
    if not np.any(inside):
        raise EmptyBand(F"measure_snr: no bins in the band {signal_band[0]:g} to {signal_band[1]:g} Hz")
    signal = float(np.max(spec.y[inside]))
    floor  = noise_floor(spec, signal_band)
    log.debug(F"measure_snr: signal {signal:.2f} dB, floor {floor:.2f} dB")
    return SnrMeasurement(signal, floor, signal - floor, spec.rbw if spec.rbw is not None else 0.0)


def square_mod_sidebands(tone: ToneSpec) -> List[Tuple[float, float]]:
    """
    Predicted sideband frequencies (Hz) and levels relative to the first
    sideband (dB) of a square-keyed tone: odd harmonics, falling as 1/n.
    """
    if tone.kind != ToneKind.SQUARE_MODULATED:
        raise WrongKind(F"square_mod_sidebands: a {tone.kind.value} tone has no modulation sidebands")
    sidebands = []
    for n in range(1, tone.harmonic_cap + 1, 2):
        level = -20.0 * math.log10(n)
        sidebands.append((tone.offset - n * tone.mod_rate, level))
        sidebands.append((tone.offset + n * tone.mod_rate, level))
    return sorted(sidebands)

# =================================================================================================================================
# vim: set tw=0 ai:
