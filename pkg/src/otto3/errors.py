"""Exception types shared across the package."""

from __future__ import annotations


class Otto3Error(Exception):
    """Base class for all package-specific errors."""


class PhysicalityError(Otto3Error, ValueError):
    """A matrix fails the requirements for a valid covariance matrix."""


class SymplecticityError(Otto3Error, ValueError):
    """A propagator matrix does not preserve the symplectic form."""


class DegenerateRampError(Otto3Error, ValueError):
    """Ramp endpoints too close for the frequency-sweep solution."""


class PhaseOrderError(Otto3Error, RuntimeError):
    """An engine stroke was requested out of cycle order."""


class EnergyBalanceError(Otto3Error, RuntimeError):
    """Per-cycle bookkeeping violated the first law beyond tolerance."""


class IntegrationError(Otto3Error, RuntimeError):
    """Numerical integration failed or missed its accuracy target."""


class ConvergenceError(Otto3Error, RuntimeError):
    """An iterative computation exhausted its budget before converging."""


class ConfigError(Otto3Error, ValueError):
    """A run configuration is malformed or inconsistent."""
