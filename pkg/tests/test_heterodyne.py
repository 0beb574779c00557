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

from rydsat.heterodyne     import *
from rydsat.atomic         import LadderSystem, Spectrum, AxisKind, EvolveOptions, transmission_scale, weak_probe_coherence
from rydsat.fieldinference import EA0, field_from_power_dbm, detectable_field
from rydsat.errors         import *

MHZ    = 2.0 * math.pi * 1e6
DIPOLE = 1500 * EA0

def beacon(amplitude: float, offset: float = 1e3, phase: float = 0.0) -> ToneSpec:
    return ToneSpec(ToneKind.BEACON, offset, amplitude, phase)


def level_at(spec: Spectrum, freq: float) -> float:
    return float(spec.y[int(np.argmin(np.abs(spec.x - freq)))])

# ==================================================================================================
# Unit tests:

class TestToneSpec(unittest.TestCase):
    def test_invalid(self) -> None:
        with self.assertRaises(InvalidParameter):
            ToneSpec(ToneKind.BEACON, 1e3, -1.0)
        with self.assertRaises(InvalidParameter):
            ToneSpec(ToneKind.BEACON, -1e3, 1.0)
        with self.assertRaises(InvalidParameter):
            ToneSpec(ToneKind.SQUARE_MODULATED, 1e3, 1.0)
        with self.assertRaises(InvalidParameter):
            ToneSpec(ToneKind.SQUARE_MODULATED, 1e3, 1.0, mod_rate=100.0, duty=1.0)


    def test_envelope(self) -> None:
        tone = ToneSpec(ToneKind.SQUARE_MODULATED, 1e4, 1.0, mod_rate=1e3)
        self.assertEqual(list(tone.envelope(np.array([0.0, 0.25e-3, 0.5e-3, 0.75e-3]))), [1.0, 1.0, 0.0, 0.0])
        bipolar = replace(tone, polarity=Polarity.BIPOLAR)
        self.assertEqual(list(bipolar.envelope(np.array([0.0, 0.75e-3]))), [1.0, -1.0])
        self.assertEqual(tone.highest_frequency(), 1.5e4)


    def test_mod_rate_for_bandwidth(self) -> None:
        self.assertEqual(mod_rate_for_bandwidth(15e3), 7.5e3)
        self.assertEqual(mod_rate_for_bandwidth(75e3), 37.5e3)
        with self.assertRaises(NonpositiveInput):
            mod_rate_for_bandwidth(0.0)



class TestTotalField(unittest.TestCase):
    def test_no_signal(self) -> None:
        t = np.linspace(0.0, 1e-2, 101)
        self.assertTrue(np.all(total_field(0.2, beacon(0.0), t) == 0.2))


    def test_time_zero(self) -> None:
        self.assertAlmostEqual(total_field(0.2, beacon(0.01), 0.0), 0.21)


    def test_period_average(self) -> None:
        t = np.arange(2000) / 2e5
        self.assertAlmostEqual(float(np.mean(total_field(0.2, beacon(0.01, offset=1e3, phase=0.3), t))), 0.2, delta=1e-9)


    def test_square_keying(self) -> None:
        tone = ToneSpec(ToneKind.SQUARE_MODULATED, 1e4, 0.01, mod_rate=1e3)
        self.assertAlmostEqual(total_field(0.2, tone, 0.0), 0.21)
        self.assertAlmostEqual(total_field(0.2, tone, 0.75e-3), 0.2)


    def test_nonpositive_local_field(self) -> None:
        with self.assertRaises(NonpositiveInput):
            total_field(0.0, beacon(0.01), 0.0)



class TestSynthesizeTrace(unittest.TestCase):
    def test_pure_tone(self) -> None:
        trace = synthesize_trace(0.2, beacon(0.01), 2e4, 0.1)
        self.assertEqual(len(trace.samples), 2000)
        self.assertTrue(np.allclose(trace.samples, total_field(0.2, beacon(0.01), trace.times()), atol=1e-15))
        dft = np.abs(np.fft.rfft(trace.samples - np.mean(trace.samples)))
        self.assertEqual(int(np.argmax(dft)), 100)


    def test_deterministic(self) -> None:
        first  = synthesize_trace(0.2, beacon(0.01), 2e4, 0.1, noise_rms=0.001, seed=5)
        second = synthesize_trace(0.2, beacon(0.01), 2e4, 0.1, noise_rms=0.001, seed=5)
        third  = synthesize_trace(0.2, beacon(0.01), 2e4, 0.1, noise_rms=0.001, seed=6)
        self.assertTrue(np.array_equal(first.samples, second.samples))
        self.assertFalse(np.array_equal(first.samples, third.samples))


    def test_aliasing(self) -> None:
        with self.assertRaises(AliasingRejected):
            synthesize_trace(0.2, beacon(0.01, offset=1e4), 2e4, 0.1)
        square = ToneSpec(ToneKind.SQUARE_MODULATED, 4e5, 0.01, mod_rate=1e5)
        with self.assertRaises(AliasingRejected):
            synthesize_trace(0.2, square, 1.5e6, 0.01)


    def test_too_short(self) -> None:
        with self.assertRaises(InvalidParameter):
            synthesize_trace(0.2, beacon(0.01, offset=1e3), 2e4, 0.005)


    def test_linear_response(self) -> None:
        response = AtomicResponse(0.2, -3.0, 0.6)
        trace    = synthesize_trace(0.2, beacon(0.01), 2e4, 0.1, response=response)
        expected = 0.6 - 3.0 * (total_field(0.2, beacon(0.01), trace.times()) - 0.2)
        self.assertTrue(np.allclose(trace.samples, expected, atol=1e-14))


    def test_trace_length(self) -> None:
        with self.assertRaises(InvalidParameter):
            BasebandTrace(1e3, np.zeros(10), 1.0)



class TestPowerSpectrum(unittest.TestCase):
    def test_tone_level(self) -> None:
        trace = synthesize_trace(0.2, beacon(0.01, offset=1e3), 2e4, 1.0)
        spec  = power_spectrum(trace, 10.0)
        self.assertEqual(spec.axis_kind, AxisKind.BASEBAND_FREQUENCY)
        self.assertEqual(spec.rbw, 10.0)
        self.assertEqual(spec.unit, "dB")
        expected = 10.0 * math.log10(0.01 ** 2 / 2.0)
        self.assertAlmostEqual(float(np.max(spec.y)), expected, delta=0.5)
        self.assertAlmostEqual(spec.x[int(np.argmax(spec.y))], 1e3)
        self.assertAlmostEqual(10.0 * math.log10(tone_power(trace, 1e3)), expected, delta=1e-6)


    def test_reference_level(self) -> None:
        trace = synthesize_trace(0.2, beacon(0.01, offset=1e3), 2e4, 1.0)
        self.assertAlmostEqual(float(np.max(power_spectrum(trace, 10.0).y)) - float(np.max(power_spectrum(trace, 10.0, reference=1e-3).y)), -30.0)


    def test_rbw_too_fine(self) -> None:
        trace = synthesize_trace(0.2, beacon(0.01, offset=1e3), 2e4, 0.1)
        with self.assertRaises(RbwTooFine):
            power_spectrum(trace, 5.0)


    def test_rbw_too_coarse(self) -> None:
        trace = synthesize_trace(0.2, beacon(0.01, offset=1e3), 2e4, 0.1)
        with self.assertRaises(RbwTooCoarse):
            power_spectrum(trace, 1e5)
        with self.assertRaises(DspError):
            power_spectrum(trace, 2e4)
        with self.assertRaises(RbwTooCoarse):
            noise_rms_for_floor(1e-3, 2e4, 1e5)


    def test_floor_scales_with_rbw(self) -> None:
        steps = []
        for seed in range(5):
            trace = synthesize_trace(1.0, beacon(0.0), 1e4, 10.0, noise_rms=1.0, seed=seed)
            steps.append(noise_floor(power_spectrum(trace, 100.0)) - noise_floor(power_spectrum(trace, 10.0)))
        self.assertAlmostEqual(float(np.mean(steps)), 10.0, delta=0.5)


    def test_floor_scales_with_noise(self) -> None:
        steps = []
        for seed in range(5):
            single = synthesize_trace(1.0, beacon(0.0), 1e4, 10.0, noise_rms=1.0, seed=seed)
            double = synthesize_trace(1.0, beacon(0.0), 1e4, 10.0, noise_rms=2.0, seed=seed + 100)
            steps.append(noise_floor(power_spectrum(double, 10.0)) - noise_floor(power_spectrum(single, 10.0)))
        self.assertAlmostEqual(float(np.mean(steps)), 6.02, delta=0.5)


    def test_parseval(self) -> None:
        trace   = synthesize_trace(1.0, beacon(0.0), 1e4, 10.0, noise_rms=1.0, seed=3)
        spec    = power_spectrum(trace, 10.0)
        total   = float(np.sum(10.0 ** (spec.y / 10.0))) / hann_enbw(1000)
        self.assertAlmostEqual(total / float(np.var(trace.samples)), 1.0, delta=0.01)


    def test_floor_matches_field(self) -> None:
        e_floor = 1e-3
        trace   = synthesize_trace(1.0, beacon(0.0), 2e4, 10.0, noise_rms=noise_rms_for_floor(e_floor, 2e4, 10.0), seed=11)
        self.assertAlmostEqual(noise_floor(power_spectrum(trace, 10.0)), 10.0 * math.log10(e_floor ** 2 / 2.0), delta=0.5)


    def test_hann_enbw(self) -> None:
        self.assertAlmostEqual(hann_enbw(1000), 1.5)
        with self.assertRaises(InvalidParameter):
            hann_enbw(0)



class TestMeasureSnr(unittest.TestCase):
    x = np.arange(1000.0)

    def test_spike(self) -> None:
        y    = np.full(1000, -80.0)
        y[500] = -56.0
        snr  = measure_snr(Spectrum(AxisKind.BASEBAND_FREQUENCY, self.x, y, rbw=1.0, unit="dB"), (490.0, 510.0))
        self.assertAlmostEqual(snr.snr, 24.0, delta=0.5)
        self.assertEqual(snr.signal_power - snr.noise_floor, snr.snr)
        self.assertEqual(snr.rbw, 1.0)


    def test_buried_spike(self) -> None:
        y    = np.random.default_rng(1).normal(-80.0, 1.0, size=1000)
        y[495:506] = -90.0
        y[500] = -85.0
        snr  = measure_snr(Spectrum(AxisKind.BASEBAND_FREQUENCY, self.x, y, rbw=1.0, unit="dB"), (495.0, 505.0))
        self.assertLessEqual(snr.snr, 0.0)


    def test_empty_band(self) -> None:
        spec = Spectrum(AxisKind.BASEBAND_FREQUENCY, self.x, np.zeros(1000), rbw=1.0, unit="dB")
        with self.assertRaises(EmptyBand):
            measure_snr(spec, (2000.0, 3000.0))
        with self.assertRaises(EmptyBand):
            measure_snr(spec, (-1.0, 1000.0))


    def test_signal_band(self) -> None:
        self.assertEqual(signal_band(beacon(0.01, offset=2e3), 1.0), (1995.0, 2005.0))
        tone = ToneSpec(ToneKind.SQUARE_MODULATED, 4e5, 0.01, mod_rate=7.5e3, bandwidth=15e3)
        self.assertEqual(signal_band(tone, 10.0), (392.5e3, 407.5e3))



class TestSidebands(unittest.TestCase):
    def test_predicted(self) -> None:
        tone      = ToneSpec(ToneKind.SQUARE_MODULATED, 1e4, 0.01, mod_rate=1e3)
        sidebands = square_mod_sidebands(tone)
        self.assertEqual([f for (f, _) in sidebands], [5e3, 7e3, 9e3, 11e3, 13e3, 15e3])
        levels = [round(level, 2) for (_, level) in sidebands]
        self.assertEqual(levels, [-13.98, -9.54, 0.0, 0.0, -9.54, -13.98])


    def test_beacon(self) -> None:
        with self.assertRaises(WrongKind):
            square_mod_sidebands(beacon(0.01))


    def test_synthesized_sidebands(self) -> None:
        tone  = ToneSpec(ToneKind.SQUARE_MODULATED, 4e5, 0.01, mod_rate=7.5e3, bandwidth=15e3)
        spec  = power_spectrum(synthesize_trace(0.2, tone, 1.5e6, 0.2), 10.0)
        first = {side: level_at(spec, 4e5 + side * 7.5e3) for side in [-1, 1]}
        for (freq, level) in square_mod_sidebands(tone):
            index = int(np.argmin(np.abs(spec.x - freq)))
            local = int(np.argmax(spec.y[index - 1:index + 2])) + index - 1
            self.assertLessEqual(abs(local - index), 1)
            side  = -1 if freq < 4e5 else 1
            self.assertAlmostEqual(spec.y[index] - first[side], level, delta=1.0)


    def test_carrier_level(self) -> None:
        tone = ToneSpec(ToneKind.SQUARE_MODULATED, 4e5, 0.01, mod_rate=7.5e3)
        spec = power_spectrum(synthesize_trace(0.2, tone, 1.5e6, 0.2), 10.0)
        self.assertAlmostEqual(level_at(spec, 4e5), 10.0 * math.log10((0.5 * 0.01) ** 2 / 2.0), delta=0.5)



class TestBeat(unittest.TestCase):
    def test_phase_independent(self) -> None:
        levels = []
        for phase in [0.0, 1.0, 2.5]:
            spec = power_spectrum(synthesize_trace(0.2, beacon(0.01, phase=phase), 2e4, 1.0), 10.0)
            self.assertAlmostEqual(spec.x[int(np.argmax(spec.y))], 1e3)
            levels.append(float(np.max(spec.y)))
        self.assertAlmostEqual(max(levels) - min(levels), 0.0, delta=0.01)


    def test_beacon_budget_snr(self) -> None:
        # 47 dBm, -195.22 dB path loss, 48.53 dB effective antenna gain, -128 dBm floor at 1 Hz.
        k       = 169.27
        e_sig   = field_from_power_dbm(k, -99.69)
        e_floor = detectable_field(k, -128.0)
        trace   = synthesize_trace(field_from_power_dbm(k, -27.0), beacon(e_sig, offset=2e3), 2e4, 16.0,
                                   noise_rms=noise_rms_for_floor(e_floor, 2e4, 1.0), seed=1)
        snr     = measure_snr(power_spectrum(trace, 1.0), signal_band(beacon(e_sig, offset=2e3), 1.0))
        self.assertAlmostEqual(snr.snr, 28.31, delta=3.0)



class TestAtomicResponse(unittest.TestCase):
    ladder = LadderSystem(omega_p=0.01 * MHZ, omega_c=2.0 * MHZ, delta_c=0.6 * MHZ)
    e_loc  = 2.0 * MHZ * scipy.constants.hbar / DIPOLE

    def test_identity(self) -> None:
        response = AtomicResponse.identity(0.2)
        self.assertEqual(response(0.25), 0.25)
        self.assertEqual(response.slope, 1.0)


    def test_matches_analytic_slope(self) -> None:
        response = atomic_response(self.ladder, DIPOLE, self.e_loc)
        ladder   = replace(self.ladder, omega_mw=DIPOLE * self.e_loc / scipy.constants.hbar)
        rho21    = weak_probe_coherence(ladder)
        den3     = 0.5 * ladder.gamma[2] - 1j * ladder.delta_c
        den2     = 0.5 * ladder.gamma[1] - 1j * ladder.delta_c + 0.25 * ladder.omega_mw ** 2 / den3
        den1     = 0.5 * ladder.gamma[0] + 0.25 * ladder.omega_c ** 2 / den2
        d_den1   = -0.25 * ladder.omega_c ** 2 / den2 ** 2 * (0.5 * ladder.omega_mw / den3)
        d_rho21  = 0.5j * ladder.omega_p / den1 ** 2 * d_den1
        self.assertAlmostEqual(rho21, -0.5j * ladder.omega_p / den1)
        slope    = d_rho21.imag / transmission_scale(self.ladder).span * DIPOLE / scipy.constants.hbar
        self.assertAlmostEqual(response.slope / slope, 1.0, delta=0.05)


    def test_operating_point(self) -> None:
        response = atomic_response(self.ladder, DIPOLE, self.e_loc)
        self.assertAlmostEqual(response(self.e_loc), response.transmission)
        self.assertGreater(response.transmission, 0.0)
        self.assertLess(response.transmission, 1.0)


    def test_weak_signal_linearity(self) -> None:
        normalised = []
        for ratio in [1e-2, 1e-3, 1e-4]:
            e_sig    = ratio * self.e_loc
            response = quasistatic_response(self.ladder, DIPOLE, self.e_loc, e_sig)
            spec     = power_spectrum(synthesize_trace(self.e_loc, beacon(e_sig), 2e4, 0.1, response=response), 10.0)
            normalised.append(level_at(spec, 1e3) - 20.0 * math.log10(e_sig))
        self.assertLess(max(normalised) - min(normalised), 0.2)


    def test_quasistatic_range(self) -> None:
        response = quasistatic_response(self.ladder, DIPOLE, self.e_loc, 0.01 * self.e_loc)
        with self.assertRaises(InvalidParameter):
            response(np.array([1.1 * self.e_loc]))
        with self.assertRaises(InvalidParameter):
            quasistatic_response(self.ladder, DIPOLE, self.e_loc, self.e_loc)


    def test_direct_integration_agrees(self) -> None:
        ladder   = replace(self.ladder, omega_p=0.1 * MHZ)
        tone     = beacon(0.01 * self.e_loc, offset=1e4)
        linear   = synthesize_trace(self.e_loc, tone, 2e5, 1e-3, response=atomic_response(ladder, DIPOLE, self.e_loc))
        direct   = synthesize_trace_direct(ladder, DIPOLE, self.e_loc, tone, 2e5, 1e-3, EvolveOptions(rtol=1e-9, atol=1e-13))
        self.assertEqual(len(direct.samples), 200)
        ratio_db = 10.0 * math.log10(tone_power(direct, 1e4) / tone_power(linear, 1e4))
        self.assertLess(abs(ratio_db), 1.0)


    def test_direct_duration_limit(self) -> None:
        with self.assertRaises(InvalidParameter):
            synthesize_trace_direct(self.ladder, DIPOLE, self.e_loc, beacon(0.001, offset=1e4), 2e5, 2e-3)


if __name__ == '__main__':
    unittest.main()

# vim: set tw=0 ai:
