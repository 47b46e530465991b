# Copyright 2026 The spintomo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Continuous-measurement tomography of alkali hyperfine spins."""

from ._core import (
    Config,
    ConfigError,
    Error,
    IoError,
    Model,
    NumericalError,
    beta_coefficients,
    build_model,
    default_config,
    fidelity,
    load_config,
    magic_detuning_hz,
    make_state,
    parse_config,
    reconstruct,
    sample_state,
    simulate,
    squeezed_cat_state,
)

__all__ = [
    "Config",
    "ConfigError",
    "Error",
    "IoError",
    "Model",
    "NumericalError",
    "beta_coefficients",
    "build_model",
    "default_config",
    "fidelity",
    "load_config",
    "magic_detuning_hz",
    "make_state",
    "parse_config",
    "reconstruct",
    "sample_state",
    "simulate",
    "squeezed_cat_state",
]
