"""cellforge: axis-aligned CSG cell decomposition, build-sequence dataset
generation, and geometry-correctness metrics for script-based completions."""

__version__ = "0.1.0"

from ._kernels import active_backend

__all__ = ["active_backend", "__version__"]
