"""zkdamper: numerical laboratory for the delayed, damped ZK equation on a square.

Simulates the 2D KdV-type equation with localized damping and delayed
anti-damping, evaluates the closed-form stability constants, and verifies the
energy-decay, dissipativity, and observability claims at desk scale.
"""

__version__ = "0.1.0"

from .certificate import (
    InfeasibleError,
    MuCertInputs,
    PhysicalParams,
    StabilityCertificate,
    ZkCertInputs,
    certify_mu,
    certify_zk,
)
from .fields import CoefficientSpec, Grid2D, ScalarField

__all__ = [
    "CoefficientSpec",
    "Grid2D",
    "InfeasibleError",
    "MuCertInputs",
    "PhysicalParams",
    "ScalarField",
    "StabilityCertificate",
    "ZkCertInputs",
    "certify_mu",
    "certify_zk",
]
