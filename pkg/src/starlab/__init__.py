"""starlab: a numerical laboratory for the star-Ricci flow.

Evolves Riemannian metrics under dg/dt = -2 S*(g, phi), where S* is the
half-trace star-Ricci tensor built from the Riemann tensor and a fixed
(1,1)-tensor phi, and verifies the defining identities, soliton
constructions, and entropy-functional evolution formulas against
independent finite-difference and quadrature oracles.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    InsufficientJet,
    IoError,
    NonPositiveDefinite,
    NotNormalized,
    PositivityLost,
    RefusedOverwrite,
    ShapeMismatch,
    StarlabError,
    StepRejected,
)
