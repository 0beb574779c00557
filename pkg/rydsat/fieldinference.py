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

# Field inference: turning measured spectra and calibration data into
# microwave field strengths, and summarising receiver sensitivity.

from dataclasses import dataclass, field
from typing      import List, Sequence, Tuple

import logging
import math

import numpy as np
import scipy.constants

from rydsat.atomic import Spectrum, find_spectrum_peaks
from rydsat.errors import NonpositiveInput, NoSplitting, InsufficientData, InvalidParameter

log = logging.getLogger("rydsat")

# Transition dipole moments are often quoted in atomic units:
EA0 = scipy.constants.e * scipy.constants.physical_constants["Bohr radius"][0]

# =================================================================================================================================
# Unit helpers:

def dbm_to_watts(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise NonpositiveInput(F"watts_to_dbm: power must be > 0, got {watts}")
    return 10.0 * math.log10(watts / 1e-3)


def v_per_m_to_nv_per_cm(value: float) -> float:
    return value * 1e9 / 1e2

# =================================================================================================================================
# Types:

@dataclass(frozen=True)
class FieldCalibration:
    """
    Fit of field strength against the square root of incident power,
    E = k sqrt(P), through the origin.
    """
    k         : float                   # V/m per sqrt(W)
    fit_r2    : float
    n_points  : int
    residuals : List[float] = field(default_factory=list)   # V/m

    def __post_init__(self) -> None:
        if not self.k > 0.0:
            raise InvalidParameter(F"FieldCalibration: k must be > 0, got {self.k}")
        if not 0.0 <= self.fit_r2 <= 1.0:
            raise InvalidParameter(F"FieldCalibration: R^2 {self.fit_r2} outside [0, 1]")
        if self.n_points < 2:
            raise InvalidParameter(F"FieldCalibration: need at least 2 points, got {self.n_points}")


    def field_strength(self, power_w: float) -> float:
        if power_w < 0.0:
            raise NonpositiveInput(F"FieldCalibration.field_strength: power must be >= 0, got {power_w}")
        return self.k * math.sqrt(power_w)


    def incident_power(self, field_v_per_m: float) -> float:
        return (field_v_per_m / self.k) ** 2



@dataclass(frozen=True)
class SensitivityReport:
    e_min                : float    # V/m
    rbw                  : float    # Hz
    sensitivity          : float    # V/m/sqrt(Hz)
    min_detectable_power : float    # dBm
    dynamic_range        : float    # dB

    def __post_init__(self) -> None:
        assert self.dynamic_range >= 0.0

    def __str__(self) -> str:
        return (F"Minimum field:  {v_per_m_to_nv_per_cm(self.e_min):.2f} nV/cm at {self.rbw:g} Hz RBW\n"
                F"Sensitivity:    {v_per_m_to_nv_per_cm(self.sensitivity):.2f} nV/cm/sqrt(Hz)\n"
                F"Minimum power:  {self.min_detectable_power:.1f} dBm\n"
                F"Dynamic range:  {self.dynamic_range:.1f} dB")

# =================================================================================================================================
# Autler-Townes inversion:

def field_from_splitting(delta_f: float, dipole_moment: float) -> float:
    """
    Field strength (V/m) from an Autler-Townes splitting `delta_f` (Hz) of a
    transition with dipole moment `dipole_moment` (C m): E = 2 pi hbar df / mu.
    """
    if not delta_f > 0.0:
        raise NonpositiveInput(F"field_from_splitting: splitting must be > 0, got {delta_f}")
    if not dipole_moment > 0.0:
        raise NonpositiveInput(F"field_from_splitting: dipole moment must be > 0, got {dipole_moment}")
    return 2.0 * math.pi * scipy.constants.hbar * delta_f / dipole_moment


def dipole_from_splitting(delta_f: float, field_v_per_m: float) -> float:
    """
    The inverse problem: the dipole moment (C m) that gives splitting
    `delta_f` (Hz) in a known field.
    """
    if not delta_f > 0.0 or not field_v_per_m > 0.0:
        raise NonpositiveInput("dipole_from_splitting: splitting and field must be > 0")
    return 2.0 * math.pi * scipy.constants.hbar * delta_f / field_v_per_m


def splitting_from_spectrum(spec: Spectrum, rel_prominence: float = 0.05) -> float:
    peaks = find_spectrum_peaks(spec, rel_prominence)
    if len(peaks) < 2:
        raise NoSplitting(F"splitting_from_spectrum: found {len(peaks)} peak(s) above {rel_prominence:.0%} prominence")
    first, second = peaks[0], peaks[1]
    log.debug(F"splitting_from_spectrum: peaks at {first.x:.6g} and {second.x:.6g}")
    return abs(first.x - second.x)

# =================================================================================================================================
# Calibration and sensitivity:

def fit_calibration(points: Sequence[Tuple[float, float]]) -> FieldCalibration:
    """
    Least-squares fit of E = k sqrt(P) to (P in W, E in V/m) points. R^2 is
    taken about zero, as is usual for a fit constrained through the origin.
    """
    if len(points) < 2:
        raise InsufficientData(F"fit_calibration: need at least 2 points, got {len(points)}")
    data = np.asarray(points, dtype=float)
    power, e_field = data[:, 0], data[:, 1]
    if np.any(power <= 0.0) or np.any(e_field <= 0.0):
        raise NonpositiveInput("fit_calibration: powers and fields must be > 0")
    root_p = np.sqrt(power)
    (k,), _, _, _ = np.linalg.lstsq(root_p[:, None], e_field, rcond=None)
    residuals = e_field - k * root_p
    r2 = 1.0 - float(np.sum(residuals ** 2)) / float(np.sum(e_field ** 2))
    log.debug(F"fit_calibration: k={k:.6g} V/m/sqrt(W), R^2={r2:.6f} over {len(points)} points")
    return FieldCalibration(float(k), min(max(r2, 0.0), 1.0), len(points), [float(r) for r in residuals])


def field_from_power_dbm(k: float, power_dbm: float) -> float:
    return k * math.sqrt(dbm_to_watts(power_dbm))


def detectable_field(k: float, noise_floor_dbm: float) -> float:
    """
    The field that corresponds to an incident power at the noise floor.
    """
    return field_from_power_dbm(k, noise_floor_dbm)


def sensitivity_report(e_min: float, rbw: float, noise_floor: float, max_linear_power: float) -> SensitivityReport:
    if not e_min > 0.0 or not rbw > 0.0:
        raise NonpositiveInput("sensitivity_report: e_min and rbw must be > 0")
    if not max_linear_power > noise_floor:
        raise NonpositiveInput(F"sensitivity_report: linear range top {max_linear_power} dBm is not above the floor {noise_floor} dBm")
    return SensitivityReport(e_min, rbw, e_min / math.sqrt(rbw), noise_floor, max_linear_power - noise_floor)


def receiver_comparison(atomic_snr: float, reference_snr: float) -> float:
    """
    Sensitivity gap (dB) between the atomic receiver and a conventional
    spectrum analyser fed from the same antenna.
    """
    return reference_snr - atomic_snr

# =================================================================================================================================
# vim: set tw=0 ai:
