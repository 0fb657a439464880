"""
Exception classes used by qnslab.

qnslab exceptions extend C{RuntimeError} or other appropriate sub-classes.  These will be
thrown if there is not a more appropriate error class already provided by builtins (bad
arguments, for example, raise plain C{ValueError}).
"""
__authors__ = ['qnslab contributors']
__copyright__ = "Copyright 2026 qnslab contributors"
__license__ = """Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License."""


class ConfigError(RuntimeError):
    """
    Represents an error in the configuration of an experiment.
    """


class FormatError(ValueError):
    """
    Represents a malformed QNSF1/QNST1 field or trajectory document.
    """


class GridMismatch(ValueError):
    """
    Raised when fields, trajectories or meshes that must share a grid (or a time mesh) do not.
    """


class NumericalGuard(ArithmeticError):
    """
    Base class for the numerical guards: a computation produced something that must not be
    reported as a result.
    """


class DivergenceError(NumericalGuard):
    """
    The Picard iteration (or the cross-check time stepper) left its admissible range.

    @ivar iteration: The iteration (or step) at which the guard tripped.
    @type iteration: C{int}
    """

    def __init__(self, message, iteration=None):
        super(DivergenceError, self).__init__(message)
        self.iteration = iteration


class InconsistencyError(NumericalGuard):
    """
    A measured inequality has a vanishing right-hand side but a non-vanishing left-hand side,
    or an oracle cannot honour its accuracy contract.
    """
