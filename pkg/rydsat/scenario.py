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

# Scenario documents. A scenario is a flat, sectioned key = value file:
#
#   [scenario]     name, description, flagged assumptions
#   [atomic]       ladder parameters in Hz, dipole moment, Doppler model
#   [spectrum]     coupling-detuning sweep
#   [calibration]  k coefficient and the powers for a synthetic calibration
#   [heterodyne]   local field, sampling, noise, atomic response model
#   [tone]         the signal tone
#   [budget]       satellite link budget and comparison figures
#   [output]       artifact directory and file stem
#
# README.md documents every key. Values are converted to the internal units
# (rad/s, C m, V/m) exactly once, in parse_scenario().

from dataclasses import dataclass, fields, replace, MISSING
from pathlib     import Path
from typing      import Any, Dict, List, Optional, Tuple, Type, Union

import configparser
import logging
import math
import re

from pavlova         import Pavlova
from pavlova.parsers import GenericParser

from rydsat.atomic         import LadderSystem, DopplerAverage, TWO_PI, PROBE_WAVELENGTH, COUPLING_WAVELENGTH, DEFAULT_GAMMA
from rydsat.atomic         import Quadrature, doppler_average
from rydsat.errors         import ScenarioError, ParseError, ValidationError, InvalidParameter
from rydsat.fieldinference import EA0, dbm_to_watts, field_from_power_dbm, detectable_field, dipole_from_splitting
from rydsat.heterodyne     import ToneSpec, ToneKind, Polarity, mod_rate_for_bandwidth, noise_rms_for_floor
from rydsat.linkbudget     import AntennaSpec, BudgetTerm, CavitySpec, LinkBudget
from rydsat.linkbudget     import wavelength, path_loss, compose_budget, cavity_circulated_power

log = logging.getLogger("rydsat")

BUNDLED_SCENARIOS = Path(__file__).parent / "scenarios"
SCENARIO_SUFFIX   = ".scenario"

# =================================================================================================================================
# Document sections, in file units:

@dataclass(frozen=True)
class ScenarioSection:
    name        : str = "unnamed"
    description : str = ""
    assumptions : str = ""          # comma-separated section.key names whose values are assumed, not measured


@dataclass(frozen=True)
class AtomicSection:
    omega_p               : float                   # Hz, required
    omega_c               : float                   # Hz, required
    omega_mw              : float                   # Hz, required
    dipole_moment         : float = 0.0             # in dipole_unit; required unless a calibration splitting is given
    dipole_unit           : str   = "ea0"           # ea0 or Cm
    calibration_splitting : float = 0.0             # Hz
    calibration_field     : float = 0.0             # V/m
    delta_p               : float = 0.0             # Hz
    delta_c               : float = 0.0             # Hz
    delta_mw              : float = 0.0             # Hz
    gamma_21              : float = DEFAULT_GAMMA[0] / TWO_PI
    gamma_32              : float = DEFAULT_GAMMA[1] / TWO_PI
    gamma_43              : float = DEFAULT_GAMMA[2] / TWO_PI
    dephasing             : str   = ""              # "i-j: Hz" entries separated by commas
    temperature           : float = 0.0             # K; 0 means stationary atoms
    geometry              : str   = "counter"       # counter or co
    n_velocity            : int   = 201
    quadrature            : str   = "trapezoid"     # trapezoid or hermite
    probe_wavelength      : float = PROBE_WAVELENGTH
    coupling_wavelength   : float = COUPLING_WAVELENGTH


@dataclass(frozen=True)
class SpectrumSection:
    detuning_min   : float = -20e6                  # Hz
    detuning_max   : float = 20e6                   # Hz
    n_points       : int   = 801
    rel_prominence : float = 0.05


@dataclass(frozen=True)
class CalibrationSection:
    k                : float = 169.27               # V/m per sqrt(W)
    powers           : str   = ""                   # W, comma-separated
    noise            : float = 0.0                  # relative rms noise on the inferred fields
    seed             : int   = 0
    max_linear_power : float = -25.0                # dBm, top of the linear response


@dataclass(frozen=True)
class HeterodyneSection:
    local_power  : float = -27.0                    # dBm, converted through the calibration k
    local_field  : float = 0.0                      # V/m; overrides local_power when > 0
    sample_rate  : float = 20e3                     # Hz
    duration     : float = 1.0                      # s
    seed         : int   = 0
    noise_source : str   = "rms"                    # rms or floor
    noise_rms    : float = 0.0                      # V/m
    response     : str   = "linear"                 # linear, quasistatic or identity
    rel_step     : float = 1e-3


@dataclass(frozen=True)
class ToneSection:
    kind         : str   = "beacon"                 # beacon or square-modulated
    source       : str   = "amplitude"              # amplitude or budget
    offset       : float = 2e3                      # Hz
    amplitude    : float = 0.0                      # V/m
    phase        : float = 0.0                      # rad
    mod_rate     : float = 0.0                      # Hz; 0 derives it from bandwidth
    bandwidth    : float = 0.0                      # Hz
    duty         : float = 0.5
    polarity     : str   = "unipolar"
    harmonic_cap : int   = 5


@dataclass(frozen=True)
class BudgetSection:
    tx_power            : float = 47.0              # dBm
    frequency           : float = 3.8e9             # Hz
    distance            : float = 36000e3           # m
    diameter            : float = 16.0              # m
    aperture_efficiency : float = 0.7
    cable_loss          : float = -3.0              # dB
    polarization_loss   : float = -3.0              # dB
    lna_gain            : float = 0.0               # dB; 0 leaves the LNA out of the ledger
    cavity_q            : float = 0.0               # 0 leaves the cavity out of the ledger
    noise_floor         : float = -128.0            # dBm at rbw
    rbw                 : float = 1.0               # Hz
    reported_snr        : str   = ""                # dB, measured comparison figure
    reference_snr       : str   = ""                # dB, conventional analyser comparison figure


@dataclass(frozen=True)
class OutputSection:
    directory : str = ""
    stem      : str = ""


@dataclass(frozen=True)
class Settings:
    scenario    : ScenarioSection
    atomic      : AtomicSection
    spectrum    : SpectrumSection
    calibration : CalibrationSection
    heterodyne  : HeterodyneSection
    tone        : ToneSection
    budget      : BudgetSection
    output      : OutputSection


SECTIONS = {f.name: f.type for f in fields(Settings)} # type: Dict[str, Type[Any]]

# =================================================================================================================================
# The parsed scenario:

@dataclass(frozen=True)
class Scenario:
    """
    A validated scenario: the document as written, plus the quantities derived
    from it in internal units.
    """
    settings      : Settings
    system        : LadderSystem
    dipole_moment : float                       # C m
    e_loc         : float                       # V/m
    noise_rms     : float                       # V/m
    tone          : ToneSpec
    antenna       : AntennaSpec
    cavity        : Optional[CavitySpec]
    terms         : Tuple[BudgetTerm, ...]

    @property
    def name(self) -> str:
        return self.settings.scenario.name


    def assumptions(self) -> List[str]:
        return [item.strip() for item in self.settings.scenario.assumptions.split(",") if item.strip() != ""]


    def detuning_range(self) -> Tuple[float, float]:
        return (self.settings.spectrum.detuning_min, self.settings.spectrum.detuning_max)


    def calibration_powers(self) -> List[float]:
        return _float_list(self.settings.calibration.powers)


    def reported_snr(self) -> Optional[float]:
        return _optional_float(self.settings.budget.reported_snr)


    def reference_snr(self) -> Optional[float]:
        return _optional_float(self.settings.budget.reference_snr)

# =================================================================================================================================
# Private helper functions:

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE     = re.compile(r"^([^\s=:#;\[][^=:]*?)\s*[=:]")


def _float_list(text: str) -> List[float]:
    return [float(item) for item in text.split(",") if item.strip() != ""]


def _optional_float(text: str) -> Optional[float]:
    return None if text.strip() == "" else float(text)


def _line_numbers(text: str) -> Dict[Tuple[str, str], int]:
    """
    Map (section, key) to the 1-based line on which the key is set, for
    diagnostics. Section headers are recorded under the key "".
    """
    lines   = {} # type: Dict[Tuple[str, str], int]
    section = ""
    for (n, line) in enumerate(text.splitlines(), start=1):
        match = _SECTION_RE.match(line)
        if match:
            section = match.group(1).strip()
            lines.setdefault((section, ""), n)
            continue
        match = _KEY_RE.match(line)
        if match and section != "":
            lines.setdefault((section, match.group(1).strip().lower()), n)
    return lines


def _read_document(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"), default_section="\x00")
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as err:
        raise ParseError("key outside any section", err.lineno) from err
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as err:
        raise ParseError(err.message.split(": ", 1)[-1], err.lineno or 0) from err
    except configparser.ParsingError as err:
        line = err.errors[0][0] if len(err.errors) > 0 else 0
        raise ParseError("malformed line", line) from err
    return parser


def _coerce(section: str, key: str, ftype: Type[Any], text: str, line: int) -> None:
    if ftype is str:
        return
    try:
        value = ftype(text)
    except ValueError:
        raise ParseError(F"{section}.{key}: {text!r} is not a valid {ftype.__name__}", line) from None
    if isinstance(value, float) and not math.isfinite(value):
        raise ParseError(F"{section}.{key}: {text!r} is not finite", line)


def _section_mapping(parser: configparser.ConfigParser, lines: Dict[Tuple[str, str], int]) -> Tuple[Dict[str, Dict[str, Any]], List[str]]:
    for section in parser.sections():
        if section not in SECTIONS:
            raise ValidationError(F"line {lines.get((section, ''), 0)}: unknown section [{section}]", [section])
    mapping = {}  # type: Dict[str, Dict[str, Any]]
    missing = []  # type: List[str]
    for (section, section_type) in SECTIONS.items():
        given  = dict(parser.items(section)) if parser.has_section(section) else {}
        known  = {f.name: f for f in fields(section_type)}
        for key in given:
            if key not in known:
                raise ValidationError(F"line {lines.get((section, key), 0)}: unknown key {section}.{key}", [F"{section}.{key}"])
        values = {} # type: Dict[str, Any]
        for (name, fld) in known.items():
            if name in given:
                _coerce(section, name, fld.type, given[name], lines.get((section, name), 0))
                values[name] = given[name]
            elif fld.default is not MISSING:
                values[name] = fld.default
            else:
                missing.append(F"{section}.{name}")
        mapping[section] = values
    return mapping, missing


def _pavlova() -> Pavlova:
    pavlova = Pavlova()
    pavlova.register_parser(float, GenericParser(pavlova, float))
    pavlova.register_parser(int,   GenericParser(pavlova, int))
    return pavlova


def _check(settings: Settings) -> None:
    problems = [] # type: List[str]

    def require(condition: bool, name: str) -> None:
        if not condition:
            problems.append(name)

    atomic = settings.atomic
    for name in ["omega_p", "omega_c", "omega_mw", "gamma_21", "gamma_32", "gamma_43", "dipole_moment",
                 "calibration_splitting", "calibration_field", "temperature"]:
        require(getattr(atomic, name) >= 0.0, F"atomic.{name}")
    require(atomic.dipole_unit in ["ea0", "Cm"], "atomic.dipole_unit")
    require(atomic.geometry in ["counter", "co"], "atomic.geometry")
    require(atomic.quadrature in [q.value for q in Quadrature], "atomic.quadrature")
    require(atomic.probe_wavelength > 0.0 and atomic.coupling_wavelength > 0.0, "atomic.probe_wavelength")
    require(atomic.n_velocity >= 11 and atomic.n_velocity % 2 == 1, "atomic.n_velocity")
    require(settings.spectrum.detuning_min < settings.spectrum.detuning_max, "spectrum.detuning_max")
    require(settings.spectrum.n_points >= 3, "spectrum.n_points")
    require(0.0 < settings.spectrum.rel_prominence < 1.0, "spectrum.rel_prominence")
    require(settings.calibration.k > 0.0, "calibration.k")
    require(settings.calibration.noise >= 0.0, "calibration.noise")
    het = settings.heterodyne
    require(het.local_field >= 0.0, "heterodyne.local_field")
    require(het.sample_rate > 0.0, "heterodyne.sample_rate")
    require(het.duration > 0.0, "heterodyne.duration")
    require(het.noise_source in ["rms", "floor"], "heterodyne.noise_source")
    require(het.noise_rms >= 0.0, "heterodyne.noise_rms")
    require(het.response in ["linear", "quasistatic", "identity"], "heterodyne.response")
    require(0.0 < het.rel_step < 0.1, "heterodyne.rel_step")
    tone = settings.tone
    require(tone.kind in [k.value for k in ToneKind], "tone.kind")
    require(tone.source in ["amplitude", "budget"], "tone.source")
    require(tone.polarity in [p.value for p in Polarity], "tone.polarity")
    require(tone.bandwidth >= 0.0 and tone.mod_rate >= 0.0, "tone.mod_rate")
    budget = settings.budget
    require(budget.frequency > 0.0, "budget.frequency")
    require(budget.distance > 0.0, "budget.distance")
    require(budget.diameter > 0.0, "budget.diameter")
    require(budget.cavity_q == 0.0 or budget.cavity_q >= 1.0, "budget.cavity_q")
    require(0.0 < budget.rbw < het.sample_rate / 2.0, "budget.rbw")
    for name in ["reported_snr", "reference_snr"]:
        try:
            _optional_float(getattr(budget, name))
        except ValueError:
            problems.append(F"budget.{name}")
    try:
        powers = _float_list(settings.calibration.powers)
        require(all(p > 0.0 for p in powers), "calibration.powers")
    except ValueError:
        problems.append("calibration.powers")
    if len(problems) > 0:
        raise ValidationError(F"invalid values for {', '.join(problems)}", problems)


def _dephasing(text: str) -> Tuple[Tuple[int, int, float], ...]:
    entries = []
    for item in text.split(","):
        if item.strip() == "":
            continue
        try:
            (pair, rate) = item.split(":")
            (i, j)       = pair.split("-")
            entries.append((int(i), int(j), TWO_PI * float(rate)))
        except ValueError:
            raise ValidationError(F"atomic.dephasing: cannot read {item.strip()!r}, expected i-j: rate", ["atomic.dephasing"]) from None
    return tuple(entries)


def _budget_terms(budget: BudgetSection, antenna: AntennaSpec, cavity: Optional[CavitySpec]) -> Tuple[BudgetTerm, ...]:
    terms = [BudgetTerm("path loss", path_loss(budget.frequency / 1e6, budget.distance / 1e3))]
    terms.extend(antenna.ledger_terms(wavelength(budget.frequency)))
    if budget.lna_gain != 0.0:
        terms.append(BudgetTerm("LNA gain", budget.lna_gain))
    if cavity is not None:
        terms.append(BudgetTerm(F"cavity {cavity.mode}", cavity_circulated_power(0.0, cavity)))
    return tuple(terms)


def _derive(settings: Settings) -> Scenario:
    atomic = settings.atomic
    system = LadderSystem(delta_p  = TWO_PI * atomic.delta_p,
                          delta_c  = TWO_PI * atomic.delta_c,
                          delta_mw = TWO_PI * atomic.delta_mw,
                          omega_p  = TWO_PI * atomic.omega_p,
                          omega_c  = TWO_PI * atomic.omega_c,
                          omega_mw = TWO_PI * atomic.omega_mw,
                          gamma    = (TWO_PI * atomic.gamma_21, TWO_PI * atomic.gamma_32, TWO_PI * atomic.gamma_43),
                          gamma_deph = _dephasing(atomic.dephasing))
    if atomic.dipole_moment > 0.0:
        dipole = atomic.dipole_moment * (EA0 if atomic.dipole_unit == "ea0" else 1.0)
    elif atomic.calibration_splitting > 0.0 and atomic.calibration_field > 0.0:
        dipole = dipole_from_splitting(atomic.calibration_splitting, atomic.calibration_field)
        log.debug(F"_derive: dipole moment {dipole / EA0:.1f} e a0 from the calibration splitting")
    else:
        raise ValidationError("missing required field atomic.dipole_moment", ["atomic.dipole_moment"])

    budget  = settings.budget
    antenna = AntennaSpec(budget.diameter, budget.aperture_efficiency,
                          tuple(BudgetTerm(label, loss) for (label, loss) in [("cable loss", budget.cable_loss),
                                                                             ("polarization loss", budget.polarization_loss)] if loss != 0.0))
    cavity  = CavitySpec(budget.cavity_q) if budget.cavity_q >= 1.0 else None
    terms   = _budget_terms(budget, antenna, cavity)

    k   = settings.calibration.k
    het = settings.heterodyne
    e_loc = het.local_field if het.local_field > 0.0 else field_from_power_dbm(k, het.local_power)
    if het.noise_source == "floor":
        noise_rms = noise_rms_for_floor(detectable_field(k, budget.noise_floor), het.sample_rate, budget.rbw)
    else:
        noise_rms = het.noise_rms

    tone_cfg = settings.tone
    kind     = ToneKind(tone_cfg.kind)
    if tone_cfg.source == "budget":
        amplitude = k * math.sqrt(dbm_to_watts(budget.tx_power + math.fsum(t.gain_db for t in terms)))
    else:
        amplitude = tone_cfg.amplitude
    mod_rate = tone_cfg.mod_rate
    if kind == ToneKind.SQUARE_MODULATED and mod_rate == 0.0 and tone_cfg.bandwidth > 0.0:
        mod_rate = mod_rate_for_bandwidth(tone_cfg.bandwidth)
    tone = ToneSpec(kind, tone_cfg.offset, amplitude, tone_cfg.phase, mod_rate, tone_cfg.bandwidth,
                    tone_cfg.duty, Polarity(tone_cfg.polarity), tone_cfg.harmonic_cap)
    return Scenario(settings, system, dipole, e_loc, noise_rms, tone, antenna, cavity, terms)

# =================================================================================================================================
# Parsing and serialisation:

def parse_scenario(text: str) -> Scenario:
    """
    Parse and validate a scenario document. Raises ParseError for text that
    is not a well-formed document, and ValidationError for missing required
    fields, unknown keys, and values that violate an invariant.
    """
    lines   = _line_numbers(text)
    parser  = _read_document(text)
    mapping, missing = _section_mapping(parser, lines)
    atomic = mapping["atomic"]
    if float(atomic["dipole_moment"]) == 0.0 and (float(atomic["calibration_splitting"]) == 0.0 or float(atomic["calibration_field"]) == 0.0):
        missing.append("atomic.dipole_moment")
    if len(missing) > 0:
        raise ValidationError(F"missing required fields: {', '.join(missing)}", missing)
    settings = _pavlova().from_mapping(mapping, Settings)
    _check(settings)
    try:
        scenario = _derive(settings)
    except ScenarioError:
        raise
    except InvalidParameter as err:
        raise ValidationError(str(err)) from err
    log.debug(F"parse_scenario: {scenario.name}")
    return scenario


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value).replace("\n", "\n    ")


def scenario_to_text(scenario: Union[Scenario, Settings]) -> str:
    """
    The document form of a scenario, with every key written out. Parsing the
    result gives back an equal Scenario.
    """
    settings = scenario.settings if isinstance(scenario, Scenario) else scenario
    out = []
    for section in SECTIONS:
        values = getattr(settings, section)
        out.append(F"[{section}]")
        for fld in fields(values):
            out.append(F"{fld.name} = {_format_value(getattr(values, fld.name))}".rstrip())
        out.append("")
    return "\n".join(out)


def load_scenario(path_or_name: Union[str, Path]) -> Scenario:
    """
    Read a scenario from a file, or by the name of a bundled scenario, with
    or without the .scenario suffix.
    """
    path = Path(path_or_name)
    if not path.is_file():
        bundled = BUNDLED_SCENARIOS / path.name
        if bundled.suffix != SCENARIO_SUFFIX:
            bundled = bundled.with_name(bundled.name + SCENARIO_SUFFIX)
        if not bundled.is_file():
            raise ScenarioError(F"load_scenario: no scenario file or bundled scenario named {str(path_or_name)!r}")
        path = bundled
    log.debug(F"load_scenario: reading {path}")
    return parse_scenario(path.read_text(encoding="utf-8"))


def bundled_scenarios() -> List[str]:
    return sorted(p.stem for p in BUNDLED_SCENARIOS.glob("*" + SCENARIO_SUFFIX))

# =================================================================================================================================
# Building model objects:

def build_doppler(scenario: Scenario) -> Optional[DopplerAverage]:
    atomic = scenario.settings.atomic
    if atomic.temperature <= 0.0:
        return None
    return doppler_average(scenario.system, atomic.temperature,
                           wavelengths         = (atomic.probe_wavelength, atomic.coupling_wavelength),
                           n_velocity          = atomic.n_velocity,
                           counter_propagating = atomic.geometry == "counter",
                           quadrature          = Quadrature(atomic.quadrature))


def build_budget(scenario: Scenario) -> LinkBudget:
    budget = scenario.settings.budget
    return compose_budget(budget.tx_power, scenario.terms, budget.noise_floor, budget.rbw)

# =================================================================================================================================
# vim: set tw=0 ai:
