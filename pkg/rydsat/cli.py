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

# The rydsat command line. Each subcommand loads a scenario, runs one
# experiment, and writes a CSV of the resulting curve (when there is one)
# and a JSON run summary:
#
#   rydsat eit-spectrum   at_resonant
#   rydsat at-infer       at_resonant
#   rydsat calibrate      at_resonant
#   rydsat heterodyne     beacon_geo
#   rydsat link-budget    beacon_geo
#   rydsat beacon-sim     beacon_geo
#   rydsat modulated-sim  modulated_15khz
#
# The exit status is 0 on success, 2 for usage, parse and validation errors,
# 3 for solver errors, 4 for signal processing errors, and 5 for I/O errors.

from dataclasses import replace
from pathlib     import Path
from typing      import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import argparse
import json
import logging
import math
import os
import sys

import numpy as np
import pandas as pd
import scipy.constants

from rydsat.atomic         import Spectrum, eit_spectrum, find_spectrum_peaks, linewidth
from rydsat.errors         import RydsatError, InvalidParameter, OutputError, WrongKind
from rydsat.fieldinference import EA0, fit_calibration, field_from_splitting, splitting_from_spectrum, detectable_field
from rydsat.fieldinference import sensitivity_report, receiver_comparison, v_per_m_to_nv_per_cm
from rydsat.heterodyne     import Response, ToneKind, SnrMeasurement, atomic_response, quasistatic_response
from rydsat.heterodyne     import synthesize_trace, power_spectrum, measure_snr, signal_band, square_mod_sidebands
from rydsat.linkbudget     import LinkBudget
from rydsat.scenario       import Scenario, load_scenario, scenario_to_text, build_budget, build_doppler

log = logging.getLogger("rydsat")

SUMMARY_VERSION = 1

# =================================================================================================================================
# Output files:

def write_csv(path: Path, axis: str, unit: str, rbw: Optional[float], x: Sequence[float], y: Sequence[float]) -> None:
    """
    Write x,y rows under a self-describing header line:
        # axis=<kind> unit=<y unit> rbw=<Hz or none>
    """
    frame = pd.DataFrame({"x": np.asarray(x, dtype=float), "y": np.asarray(y, dtype=float)})
    try:
        with open(path, "w", encoding="utf-8", newline="") as outf:
            outf.write(F"# axis={axis} unit={unit} rbw={'none' if rbw is None else F'{rbw:g}'}\n")
            frame.to_csv(outf, index=False, float_format="%.12g", lineterminator="\n")
    except OSError as err:
        raise OutputError(F"write_csv: cannot write {path}: {err.strerror}") from err


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _plain(item) for (key, item) in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_summary(path: Path, summary: Dict[str, Any]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as outf:
            outf.write(json.dumps(_plain(summary), indent=2, allow_nan=False))
            outf.write("\n")
    except OSError as err:
        raise OutputError(F"write_summary: cannot write {path}: {err.strerror}") from err

# =================================================================================================================================
# Private helper functions:

def _ledger_rows(budget: LinkBudget) -> List[Dict[str, Any]]:
    return [{"term": label, "gain_db": gain, "power_dbm": power} for (label, gain, power) in budget.ledger()]


def _snr_fields(snr: SnrMeasurement) -> Dict[str, Any]:
    return {"signal_power_db": snr.signal_power, "noise_floor_db": snr.noise_floor, "measured_snr": snr.snr, "rbw": snr.rbw}


def _level_at(spec: Spectrum, freq: float) -> float:
    return float(spec.y[int(np.argmin(np.abs(spec.x - freq)))])


def log_level(name: str) -> int:
    """
    Numeric logging level for a level name such as "debug". Unknown names
    fall back to INFO with a warning.
    """
    level = logging.getLevelName(name.strip().upper())
    if not isinstance(level, int):
        log.warning(F"log_level: unknown log level {name!r}, using INFO")
        return logging.INFO
    return level

# =================================================================================================================================
# The runner:

class Runner:
    """
    Runs commands against one scenario and writes their artifacts. Output goes
    to `output_dir`, else the scenario's [output] directory, else
    $RYDSAT_OUTPUT_DIR, else the current directory.
    """
    def __init__(self, scenario: Scenario, output_dir: Optional[str] = None, stem: Optional[str] = None,
                 stdout: Optional[TextIO] = None) -> None:
        logging.basicConfig(level=log_level(os.environ.get("RYDSAT_LOGLEVEL", "INFO")))
        self.log      = logging.getLogger("rydsat")
        self.scenario = scenario
        self.stdout   = stdout if stdout is not None else sys.stdout
        output        = scenario.settings.output
        self.output_dir = Path(output_dir or output.directory or os.environ.get("RYDSAT_OUTPUT_DIR", "") or ".")
        self.stem       = stem or output.stem or scenario.name
        self.commands   = {
            "eit-spectrum"  : self.eit_spectrum,
            "at-infer"      : self.at_infer,
            "calibrate"     : self.calibrate,
            "heterodyne"    : self.heterodyne,
            "link-budget"   : self.link_budget,
            "beacon-sim"    : self.beacon_sim,
            "modulated-sim" : self.modulated_sim,
        } # type: Dict[str, Callable[[], Dict[str, Any]]]
        self._curve     = None # type: Optional[Tuple[str, str, Optional[float], np.ndarray, np.ndarray]]


    def run(self, command: str) -> List[Path]:
        if command not in self.commands:
            raise InvalidParameter(F"Runner.run: unknown command {command}")
        self._curve = None
        results     = self.commands[command]()
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise OutputError(F"Runner.run: cannot create {self.output_dir}: {err.strerror}") from err
        written  = []
        csv_name = None
        if self._curve is not None:
            (axis, unit, rbw, x, y) = self._curve
            csv_name = F"{self.stem}_{command}.csv"
            write_csv(self.output_dir / csv_name, axis, unit, rbw, x, y)
            written.append(self.output_dir / csv_name)
        summary = {
            "version"     : SUMMARY_VERSION,
            "command"     : command,
            "scenario"    : self.scenario.name,
            "assumptions" : self.scenario.assumptions(),
            "inputs"      : scenario_to_text(self.scenario),
            "results"     : results,
            "csv"         : csv_name,
        }
        write_summary(self.output_dir / F"{self.stem}_{command}.json", summary)
        written.append(self.output_dir / F"{self.stem}_{command}.json")
        for path in written:
            self.log.info(F"Runner.run: wrote {path}")
        return written


    def _spectrum_curve(self, spec: Spectrum) -> None:
        self._curve = (spec.axis_kind.value, spec.unit, spec.rbw, spec.x, spec.y)


    def _sweep(self) -> Spectrum:
        s = self.scenario
        return eit_spectrum(s.system, s.detuning_range(), s.settings.spectrum.n_points, build_doppler(s))


    def _response(self) -> Optional[Response]:
        s   = self.scenario
        het = s.settings.heterodyne
        if het.response == "identity":
            return None
        if het.response == "quasistatic":
            return quasistatic_response(s.system, s.dipole_moment, s.e_loc, s.tone.amplitude, doppler=build_doppler(s))
        return atomic_response(s.system, s.dipole_moment, s.e_loc, het.rel_step, build_doppler(s))


    def _beat(self) -> Tuple[Dict[str, Any], Spectrum, SnrMeasurement]:
        s        = self.scenario
        het      = s.settings.heterodyne
        rbw      = s.settings.budget.rbw
        response = self._response()
        trace    = synthesize_trace(s.e_loc, s.tone, het.sample_rate, het.duration, s.noise_rms, het.seed, response)
        spec     = power_spectrum(trace, rbw)
        snr      = measure_snr(spec, signal_band(s.tone, rbw))
        self.log.info(F"Runner: measured SNR {snr.snr:.2f} dB at {rbw:g} Hz RBW")
        self._spectrum_curve(spec)
        fields = {
            "e_loc"       : s.e_loc,
            "e_sig"       : s.tone.amplitude,
            "noise_rms"   : s.noise_rms,
            "response"    : het.response,
            "slope"       : response.slope if response is not None else 1.0,
            "n_samples"   : len(trace.samples),
            "sample_rate" : trace.sample_rate,
        }
        fields.update(_snr_fields(snr))
        return fields, spec, snr


    def _budget(self) -> LinkBudget:
        budget = build_budget(self.scenario)
        print(budget, file=self.stdout)
        return budget

    # -----------------------------------------------------------------------------------------------------------------------------
    # Commands:

    def eit_spectrum(self) -> Dict[str, Any]:
        spec  = self._sweep()
        peaks = find_spectrum_peaks(spec, self.scenario.settings.spectrum.rel_prominence)
        try:
            width = linewidth(spec)  # type: Optional[float]
        except InvalidParameter:
            width = None
        self._spectrum_curve(spec)
        return {
            "n_points"  : len(spec),
            "doppler"   : self.scenario.settings.atomic.temperature > 0.0,
            "peaks"     : [{"detuning_hz": p.x, "transmission": p.y, "prominence": p.prominence} for p in peaks],
            "linewidth" : width,
        }


    def at_infer(self) -> Dict[str, Any]:
        s         = self.scenario
        spec      = self._sweep()
        splitting = splitting_from_spectrum(spec, s.settings.spectrum.rel_prominence)
        delta_mw  = s.settings.atomic.delta_mw
        rabi      = math.sqrt(max(splitting ** 2 - delta_mw ** 2, 0.0))
        e_field   = field_from_splitting(rabi, s.dipole_moment)
        expected  = s.system.omega_mw * scipy.constants.hbar / s.dipole_moment
        self._spectrum_curve(spec)
        self.log.info(F"Runner.at_infer: splitting {splitting / 1e6:.4f} MHz, field {v_per_m_to_nv_per_cm(e_field):.4g} nV/cm")
        return {
            "splitting_hz"       : splitting,
            "rabi_hz"            : rabi,
            "field_v_per_m"      : e_field,
            "field_nv_per_cm"    : v_per_m_to_nv_per_cm(e_field),
            "configured_field"   : expected,
            "relative_error"     : (e_field - expected) / expected if expected > 0.0 else None,
            "dipole_moment_ea0"  : s.dipole_moment / EA0,
        }


    def calibrate(self) -> Dict[str, Any]:
        s        = self.scenario
        cal      = s.settings.calibration
        doppler  = build_doppler(s)
        rng      = np.random.default_rng(cal.seed)
        delta_mw = s.settings.atomic.delta_mw
        points   = []
        for power in s.calibration_powers():
            omega_mw  = s.dipole_moment * cal.k * math.sqrt(power) / scipy.constants.hbar
            spec      = eit_spectrum(replace(s.system, omega_mw=omega_mw), s.detuning_range(), s.settings.spectrum.n_points, doppler)
            splitting = splitting_from_spectrum(spec, s.settings.spectrum.rel_prominence)
            e_field   = field_from_splitting(math.sqrt(max(splitting ** 2 - delta_mw ** 2, 0.0)), s.dipole_moment)
            e_field  *= 1.0 + cal.noise * rng.standard_normal()
            self.log.debug(F"Runner.calibrate: P={power:.4g} W -> splitting {splitting:.6g} Hz, E={e_field:.6g} V/m")
            points.append((power, e_field))
        fit      = fit_calibration(points)
        floor    = s.settings.budget.noise_floor
        rbw      = s.settings.budget.rbw
        report   = sensitivity_report(detectable_field(fit.k, floor), rbw, floor, cal.max_linear_power)
        self.log.info(F"Runner.calibrate: k = {fit.k:.4f} V/m/sqrt(W), R^2 = {fit.fit_r2:.6f}")
        print(report, file=self.stdout)
        self._curve = ("sqrt-power", "V/m", None, np.sqrt([p for (p, _) in points]), np.array([e for (_, e) in points]))
        return {
            "k"                     : fit.k,
            "configured_k"          : cal.k,
            "fit_r2"                : fit.fit_r2,
            "n_points"              : fit.n_points,
            "residuals"             : fit.residuals,
            "e_min_nv_per_cm"       : v_per_m_to_nv_per_cm(report.e_min),
            "sensitivity_nv_per_cm" : v_per_m_to_nv_per_cm(report.sensitivity),
            "rbw"                   : report.rbw,
            "dynamic_range"         : report.dynamic_range,
        }


    def heterodyne(self) -> Dict[str, Any]:
        (fields, _, _) = self._beat()
        return fields


    def link_budget(self) -> Dict[str, Any]:
        budget = self._budget()
        return {
            "ledger"        : _ledger_rows(budget),
            "ground_level"  : budget.checkpoint("path loss"),
            "rx_power"      : budget.rx_power,
            "noise_floor"   : budget.noise_floor,
            "rbw"           : budget.rbw,
            "predicted_snr" : budget.predicted_snr,
        }


    def beacon_sim(self) -> Dict[str, Any]:
        s = self.scenario
        if s.tone.kind != ToneKind.BEACON:
            raise WrongKind(F"Runner.beacon_sim: scenario {s.name} has a {s.tone.kind.value} tone")
        results = self.link_budget()
        (fields, _, snr) = self._beat()
        results.update(fields)
        results["snr_error"] = snr.snr - results["predicted_snr"]
        reported  = s.reported_snr()
        reference = s.reference_snr()
        results["reported_snr"]    = reported
        results["reference_snr"]   = reference
        results["sensitivity_gap"] = receiver_comparison(reported, reference) if reported is not None and reference is not None else None
        results["e_min_nv_per_cm"] = v_per_m_to_nv_per_cm(detectable_field(s.settings.calibration.k, s.settings.budget.noise_floor))
        return results


    def modulated_sim(self) -> Dict[str, Any]:
        s         = self.scenario
        predicted = square_mod_sidebands(s.tone)
        results   = self.link_budget()
        (fields, spec, snr) = self._beat()
        results.update(fields)
        results["snr_error"]    = snr.snr - results["predicted_snr"]
        results["reported_snr"] = s.reported_snr()
        sidebands = []
        for (freq, level) in predicted:
            if not spec.x[0] <= freq <= spec.x[-1]:
                continue
            first = s.tone.offset + (s.tone.mod_rate if freq > s.tone.offset else -s.tone.mod_rate)
            sidebands.append({"frequency"    : freq,
                              "predicted_db" : level,
                              "measured_db"  : _level_at(spec, freq) - _level_at(spec, first)})
        results["carrier_db"] = _level_at(spec, s.tone.offset)
        results["sidebands"]  = sidebands
        return results

# =================================================================================================================================
# Entry points:

COMMANDS = ["eit-spectrum", "at-infer", "calibrate", "heterodyne", "link-budget", "beacon-sim", "modulated-sim"]


def _argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydsat", description="Rydberg atom satellite receiver simulator")
    parser.add_argument("command", choices=COMMANDS, help="experiment to run")
    parser.add_argument("scenario", help="scenario file, or the name of a bundled scenario")
    parser.add_argument("-o", "--output-dir", default=None, help="directory for the CSV and JSON artifacts")
    parser.add_argument("--stem", default=None, help="file name stem for the artifacts (default: the scenario name)")
    return parser


def run_command(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Run one command line and return its exit status. Never raises
    SystemExit.
    """
    try:
        args = _argument_parser().parse_args(argv)
    except SystemExit as exit:
        return exit.code if isinstance(exit.code, int) else 2
    try:
        runner = Runner(load_scenario(args.scenario), args.output_dir, args.stem, stdout)
        runner.run(args.command)
    except RydsatError as err:
        log.error(F"run_command: {args.command}: {err}")
        return err.exit_code
    except OSError as err:
        log.error(F"run_command: {args.command}: {err}")
        return OutputError.exit_code
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

# =================================================================================================================================
# vim: set tw=0 ai:
