"""Exact small-scale simulation of quantum cloning games.

Dense linear algebra over Hilbert spaces of dimension at most a few thousand:
game constructions with exact win probabilities, adversary strategies and a
see-saw optimizer, Jordan-block machinery and value estimation,
Goldreich-Levin extraction, small quantum random oracles, and checkers for the
quantitative inequalities that tie these together.
"""

__version__ = "0.1.0"

from .qcore import (
    Channel,
    DensityMatrix,
    Operator,
    Povm,
    StateVector,
    apply_channel,
    herm_eig,
    measure_povm,
    operator_norm,
    partial_trace,
    random_projector,
    random_state,
    random_unitary,
    tensor,
)

__all__ = [
    "__version__",
    "Channel",
    "DensityMatrix",
    "Operator",
    "Povm",
    "StateVector",
    "apply_channel",
    "herm_eig",
    "measure_povm",
    "operator_norm",
    "partial_trace",
    "random_projector",
    "random_state",
    "random_unitary",
    "tensor",
]
