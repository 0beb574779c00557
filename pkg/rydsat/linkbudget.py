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

# Satellite-to-atom link budget. Powers are in dBm and gains/losses in dB;
# losses are carried as negative gains so that every term simply adds.
#
# See also:
#   ITU-R P.525 "Calculation of free-space attenuation"

from dataclasses import dataclass
from typing      import List, Optional, Sequence, Tuple, Union

import logging
import math

import pandas as pd
import scipy.constants

from rydsat.errors import NonpositiveInput, InvalidParameter

log = logging.getLogger("rydsat")

# =================================================================================================================================
# Types:

@dataclass(frozen=True)
class BudgetTerm:
    label   : str
    gain_db : float                 # negative for a loss

    def __post_init__(self) -> None:
        if not math.isfinite(self.gain_db):
            raise InvalidParameter(F"BudgetTerm: {self.label} is not finite")


@dataclass(frozen=True)
class AntennaSpec:
    diameter            : float                      # m
    aperture_efficiency : float = 0.7
    fixed_losses        : Tuple[BudgetTerm, ...] = ()

    def __post_init__(self) -> None:
        if not self.diameter > 0.0:
            raise NonpositiveInput(F"AntennaSpec: diameter must be > 0, got {self.diameter}")
        if not 0.0 < self.aperture_efficiency <= 1.0:
            raise InvalidParameter(F"AntennaSpec: aperture efficiency {self.aperture_efficiency} outside (0, 1]")


    def raw_gain(self, wavelength: float) -> float:
        if not wavelength > 0.0:
            raise NonpositiveInput(F"AntennaSpec.raw_gain: wavelength must be > 0, got {wavelength}")
        return 10.0 * math.log10(self.aperture_efficiency * (math.pi * self.diameter / wavelength) ** 2)


    def ledger_terms(self, wavelength: float) -> List[BudgetTerm]:
        return [BudgetTerm("antenna gain", self.raw_gain(wavelength))] + list(self.fixed_losses)


@dataclass(frozen=True)
class CavitySpec:
    q_factor : float
    mode     : str = "TE101"

    def __post_init__(self) -> None:
        if not self.q_factor >= 1.0:
            raise InvalidParameter(F"CavitySpec: Q must be >= 1, got {self.q_factor}")


@dataclass(frozen=True)
class LinkBudget:
    tx_power      : float                         # dBm
    terms         : List[BudgetTerm]
    rx_power      : float                         # dBm
    noise_floor   : float                         # dBm at `rbw`
    predicted_snr : float                         # dB
    rbw           : Optional[float] = None        # Hz

    def checkpoint(self, label: str) -> float:
        """
        Power (dBm) after the named term has been applied.
        """
        for (n, term) in enumerate(self.terms):
            if term.label == label:
                return self.tx_power + math.fsum(t.gain_db for t in self.terms[:n + 1])
        raise KeyError(F"LinkBudget.checkpoint: no term labelled {label!r}")


    def ledger(self) -> List[Tuple[str, float, float]]:
        rows = [("transmit power", 0.0, self.tx_power)]
        for term in self.terms:
            rows.append((term.label, term.gain_db, self.checkpoint(term.label)))
        return rows


    def ledger_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.ledger(), columns=["term", "gain_db", "power_dbm"])


    def __str__(self) -> str:
        table = self.ledger_frame().to_string(index=False, float_format=lambda v: F"{v:.2f}")
        return (F"{table}\n"
                F"Noise floor:   {self.noise_floor:.2f} dBm{'' if self.rbw is None else F' at {self.rbw:g} Hz RBW'}\n"
                F"Predicted SNR: {self.predicted_snr:.2f} dB")

# =================================================================================================================================
# Budget terms:

def wavelength(freq_hz: float) -> float:
    if not freq_hz > 0.0:
        raise NonpositiveInput(F"wavelength: frequency must be > 0, got {freq_hz}")
    return scipy.constants.c / freq_hz


def path_loss(freq: float, distance: float) -> float:
    """
    Free-space path loss (negative, dB) for frequency in MHz and distance
    in km.
    """
    if not freq > 0.0 or not distance > 0.0:
        raise NonpositiveInput(F"path_loss: frequency and distance must be > 0, got {freq} MHz, {distance} km")
    return -32.5 - 20.0 * math.log10(freq) - 20.0 * math.log10(distance)


def antenna_gain(spec: AntennaSpec, wavelength: float) -> float:
    """
    Effective parabolic antenna gain (dB), after the fixed losses.
    """
    return spec.raw_gain(wavelength) + math.fsum(loss.gain_db for loss in spec.fixed_losses)


def cavity_circulated_power(p_in: float, cavity: CavitySpec) -> float:
    return p_in + 10.0 * math.log10(cavity.q_factor)


def compose_budget(tx_power: float, terms: Sequence[Union[BudgetTerm, Tuple[str, float]]], noise_floor: float, rbw: Optional[float] = None) -> LinkBudget:
    ledger   = [term if isinstance(term, BudgetTerm) else BudgetTerm(term[0], float(term[1])) for term in terms]
    labels   = [term.label for term in ledger]
    if len(set(labels)) != len(labels):
        raise InvalidParameter(F"compose_budget: duplicate term labels in {labels}")
    rx_power = tx_power + math.fsum(term.gain_db for term in ledger)
    budget   = LinkBudget(tx_power, ledger, rx_power, noise_floor, rx_power - noise_floor, rbw)
    for (label, gain, power) in budget.ledger():
        log.info(F"compose_budget: {label:<20} {gain:+8.2f} dB  -> {power:8.2f} dBm")
    log.info(F"compose_budget: predicted SNR {budget.predicted_snr:.2f} dB against {noise_floor:.2f} dBm")
    return budget

# =================================================================================================================================
# vim: set tw=0 ai:
