"""Spectral Galerkin solver for a density-dependent incompressible
magnetofluid with Hall coupling.

The heavy lifting lives in the compiled extension ``hallmhd._core``; this
package re-exports its operations.  Grid fields are C-contiguous float64
arrays of shape ``(M, M, M)`` (scalar) or ``(3, M, M, M)`` (vector) on the
uniform periodic grid of the box ``[0, L)^3``.
"""

from hallmhd._core import (
    ConfigError,
    NumericalError,
    beltrami_field,
    cancellation_residuals,
    canonical_config,
    divergence_residual,
    level_set_histogram,
    mode_count,
    project_field,
    read_snapshot,
    run_config,
    smooth_density,
    synthesize_field,
    version,
    write_snapshot,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "NumericalError",
    "beltrami_field",
    "cancellation_residuals",
    "canonical_config",
    "divergence_residual",
    "level_set_histogram",
    "mode_count",
    "project_field",
    "read_snapshot",
    "run_config",
    "smooth_density",
    "synthesize_field",
    "version",
    "write_snapshot",
]
