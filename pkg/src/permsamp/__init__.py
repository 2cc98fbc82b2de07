"""Classical boson-sampling toolkit: permanents, samplers, verification and runtime models."""

import os

# numba probes TBB first and warns when the installed one is too old; OpenMP
# is always available and deterministic enough for our fixed-block sums
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

__version__ = "0.1.0"
