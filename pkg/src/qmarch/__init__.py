"""Quantum time-marching toolkit for the explicit heat equation.

The top level lazily re-exports the experiment entry points; the circuit
and operator layers live in the submodules.  Lazy so that importing the
package does not load numpy before the command line has had a chance to
export its thread caps.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "BackendComparison": "march",
    "DivergenceError": "march",
    "ExperimentConfig": "march",
    "FieldSnapshot": "march",
    "TraceRecord": "march",
    "classical_run": "march",
    "compare_backends": "march",
    "quantum_run": "march",
    "steady_state_oracle": "march",
    "BoundaryType": "operators",
    "MarchingSpec": "operators",
    "StabilityError": "operators",
}

__all__ = ["__version__", *sorted(_EXPORTS)]


def __getattr__(name: str):
    if name in _EXPORTS:
        return getattr(import_module(f".{_EXPORTS[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted({*globals(), *_EXPORTS})
