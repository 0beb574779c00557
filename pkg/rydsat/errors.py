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

from typing import Sequence

# Exceptions raised by the rydsat modules. Each carries the process exit
# code that rydsat.cli.run_command returns when it escapes a command.

# =================================================================================================================================

class RydsatError(Exception):
    exit_code : int = 1


class ScenarioError(RydsatError):
    exit_code = 2


class ParseError(ScenarioError):
    """
    The scenario document is not well-formed. `line` is the 1-based line
    number of the offending text, when one is known.
    """
    def __init__(self, message: str, line: int = 0) -> None:
        self.line = line
        if line > 0:
            message = F"line {line}: {message}"
        super().__init__(message)


class ValidationError(ScenarioError, ValueError):
    """
    The scenario parsed, but a field is missing or violates an invariant.
    `fields` names the offending fields as `section.key`.
    """
    def __init__(self, message: str, fields: Sequence[str] = ()) -> None:
        self.fields = list(fields)
        super().__init__(message)


class InvalidParameter(RydsatError, ValueError):
    exit_code = 2


class NonpositiveInput(InvalidParameter):
    pass

# ---------------------------------------------------------------------------------------------------------------------------------
# Solver and inference failures:

class SolverError(RydsatError):
    exit_code = 3


class InvalidDensityMatrix(SolverError, ValueError):
    pass


class SingularLiouvillian(SolverError):
    pass


class StepSizeUnderflow(SolverError):
    pass


class NoSplitting(SolverError):
    pass


class InsufficientData(SolverError):
    pass

# ---------------------------------------------------------------------------------------------------------------------------------
# Signal processing failures:

class DspError(RydsatError):
    exit_code = 4


class AliasingRejected(DspError):
    pass


class RbwTooFine(DspError):
    pass


class RbwTooCoarse(DspError):
    pass


class EmptyBand(DspError):
    pass


class WrongKind(DspError):
    pass

# ---------------------------------------------------------------------------------------------------------------------------------

class OutputError(RydsatError):
    exit_code = 5

# =================================================================================================================================
# vim: set tw=0 ai:
