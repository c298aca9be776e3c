"""Scoring-kernel selection: compiled extension when built, else pure Python.

The choice happens once at import. ``backend_name()`` reports which one is
active; ``get_kernel("python")`` / ``get_kernel("c")`` give explicit access
for equivalence tests and benchmarks.
"""

from kgqa import _scoring_py
from kgqa.errors import ConfigError

try:
    from kgqa import _scoring_c

    HAVE_NATIVE = True
except ImportError:
    _scoring_c = None
    HAVE_NATIVE = False

_DEFAULT = "c" if HAVE_NATIVE else "python"


def backend_name() -> str:
    return _DEFAULT


def get_kernel(backend: str | None = None):
    """Return the accumulate_term kernel for ``backend`` (None = default)."""
    name = backend or _DEFAULT
    if name == "python":
        return _scoring_py.accumulate_term
    if name == "c":
        if not HAVE_NATIVE:
            raise ConfigError("compiled scoring kernel is not available")
        return _scoring_c.accumulate_term
    raise ConfigError(f"unknown scoring backend {name!r} (expected 'python' or 'c')")
