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

import unittest
import math
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import scipy.constants

from rydsat.fieldinference import *
from rydsat.atomic         import LadderSystem, Spectrum, AxisKind, eit_spectrum
from rydsat.errors         import *

MHZ = 2.0 * math.pi * 1e6
K   = 169.27

# ==================================================================================================
# Unit tests:

class TestUnits(unittest.TestCase):
    def test_dbm(self) -> None:
        self.assertAlmostEqual(dbm_to_watts(0.0), 1e-3)
        self.assertAlmostEqual(dbm_to_watts(-30.0), 1e-6)
        self.assertAlmostEqual(watts_to_dbm(1.0), 30.0)
        with self.assertRaises(NonpositiveInput):
            watts_to_dbm(0.0)


    def test_nv_per_cm(self) -> None:
        self.assertAlmostEqual(v_per_m_to_nv_per_cm(2.1e-6), 21.0)



class TestSplitting(unittest.TestCase):
    dipole = 1500 * EA0

    def test_field_from_splitting(self) -> None:
        e_field = field_from_splitting(10e6, self.dipole)
        self.assertAlmostEqual(e_field, 2.0 * math.pi * scipy.constants.hbar * 10e6 / self.dipole)
        self.assertAlmostEqual(dipole_from_splitting(10e6, e_field) / self.dipole, 1.0, places=12)


    def test_linear_in_splitting(self) -> None:
        self.assertAlmostEqual(field_from_splitting(20e6, self.dipole) / field_from_splitting(10e6, self.dipole), 2.0)


    def test_nonpositive(self) -> None:
        with self.assertRaises(NonpositiveInput):
            field_from_splitting(0.0, self.dipole)
        with self.assertRaises(NonpositiveInput):
            field_from_splitting(1e6, -1.0)
        with self.assertRaises(NonpositiveInput):
            dipole_from_splitting(1e6, 0.0)


    def test_from_spectrum(self) -> None:
        spec = eit_spectrum(LadderSystem(omega_p=0.1 * MHZ, omega_c=2.0 * MHZ, omega_mw=10.0 * MHZ), (-20e6, 20e6), 1601)
        self.assertAlmostEqual(splitting_from_spectrum(spec) / 10e6, 1.0, delta=0.05)


    def test_two_gaussians(self) -> None:
        x    = np.linspace(-20e6, 20e6, 4001)
        y    = np.exp(-0.5 * ((x - 5e6) / 0.5e6) ** 2) + np.exp(-0.5 * ((x + 5e6) / 0.5e6) ** 2)
        base = splitting_from_spectrum(Spectrum(AxisKind.COUPLING_DETUNING, x, y))
        self.assertAlmostEqual(base, 10e6, delta=1e3)
        scaled  = splitting_from_spectrum(Spectrum(AxisKind.COUPLING_DETUNING, x, 3.7 * y))
        shifted = splitting_from_spectrum(Spectrum(AxisKind.COUPLING_DETUNING, x + 1.234e6, y))
        self.assertAlmostEqual(scaled, base, delta=1e-3)
        self.assertAlmostEqual(shifted, base, delta=1e-3)


    def test_no_splitting(self) -> None:
        spec = eit_spectrum(LadderSystem(omega_p=0.1 * MHZ, omega_c=2.0 * MHZ), (-10e6, 10e6), 201)
        with self.assertRaises(NoSplitting):
            splitting_from_spectrum(spec)



class TestCalibration(unittest.TestCase):
    powers = np.logspace(-8, -4, 12)

    def test_exact_fit(self) -> None:
        fit = fit_calibration([(p, K * math.sqrt(p)) for p in self.powers])
        self.assertAlmostEqual(fit.k / K, 1.0, delta=1e-10)
        self.assertAlmostEqual(fit.fit_r2, 1.0, places=12)
        self.assertEqual(fit.n_points, 12)
        self.assertEqual(len(fit.residuals), 12)


    def test_noisy_fit(self) -> None:
        for seed in range(100):
            rng = np.random.default_rng(seed)
            fit = fit_calibration([(p, K * math.sqrt(p) * (1.0 + 0.01 * rng.standard_normal())) for p in self.powers])
            self.assertAlmostEqual(fit.k / K, 1.0, delta=0.02)
            self.assertLess(fit.fit_r2, 1.0)


    def test_field_and_power(self) -> None:
        cal = FieldCalibration(K, 1.0, 2)
        self.assertAlmostEqual(cal.field_strength(1e-6), K * 1e-3)
        self.assertAlmostEqual(cal.incident_power(cal.field_strength(3e-7)), 3e-7)
        with self.assertRaises(NonpositiveInput):
            cal.field_strength(-1.0)


    def test_invalid(self) -> None:
        with self.assertRaises(InsufficientData):
            fit_calibration([(1e-6, 1e-3)])
        with self.assertRaises(NonpositiveInput):
            fit_calibration([(1e-6, 1e-3), (0.0, 0.0)])
        with self.assertRaises(InvalidParameter):
            FieldCalibration(-1.0, 1.0, 2)



class TestSensitivity(unittest.TestCase):
    def test_report(self) -> None:
        report = sensitivity_report(2.1e-6, 1.0, -128.0, -25.0)
        self.assertAlmostEqual(v_per_m_to_nv_per_cm(report.sensitivity), 21.0)
        self.assertEqual(report.dynamic_range, 103.0)
        self.assertEqual(report.min_detectable_power, -128.0)
        self.assertIn("21.00 nV/cm/sqrt(Hz)", str(report))


    def test_rbw_scaling(self) -> None:
        report = sensitivity_report(2.1e-6, 100.0, -128.0, -25.0)
        self.assertAlmostEqual(v_per_m_to_nv_per_cm(report.sensitivity), 2.1)
        self.assertAlmostEqual(v_per_m_to_nv_per_cm(sensitivity_report(2.1e-5, 100.0, -128.0, -25.0).sensitivity), 21.0)
        for rbw in [1.0, 10.0, 100.0]:
            full = sensitivity_report(2.1e-6, rbw, -128.0, -25.0).sensitivity
            half = sensitivity_report(2.1e-6, rbw / 2.0, -128.0, -25.0).sensitivity
            self.assertAlmostEqual(half / full, math.sqrt(2.0))


    def test_detectable_field(self) -> None:
        self.assertAlmostEqual(v_per_m_to_nv_per_cm(detectable_field(K, -128.0)), 21.3, delta=0.1)
        self.assertAlmostEqual(field_from_power_dbm(K, -27.0), K * math.sqrt(dbm_to_watts(-27.0)))


    def test_invalid(self) -> None:
        with self.assertRaises(NonpositiveInput):
            sensitivity_report(0.0, 1.0, -128.0, -25.0)
        with self.assertRaises(NonpositiveInput):
            sensitivity_report(2.1e-6, 1.0, -128.0, -130.0)


    def test_receiver_comparison(self) -> None:
        self.assertEqual(receiver_comparison(24.0, 42.0), 18.0)


if __name__ == '__main__':
    unittest.main()

# vim: set tw=0 ai:
