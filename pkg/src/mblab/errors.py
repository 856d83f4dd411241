"""Shared exception types mapped to process exit codes by the CLI."""


class ManifestError(ValueError):
    """Invalid run configuration (exit code 2)."""


class NumericalError(RuntimeError):
    """NaN/Inf contamination, CFL violation, or quadrature failure (exit code 3)."""
