"""Kernel backend selection.

The statevector kernels exist twice: a Cython extension compiled at install
time and a pure-numpy twin with identical semantics.  The compiled module is
preferred when present.  Set HAMSTERWHEEL_KERNELS=python to force the
fallback, or HAMSTERWHEEL_KERNELS=compiled to fail loudly if the extension
did not build.  Results are deterministic for a fixed backend; the two
backends agree to floating-point accuracy but not bit for bit.
"""

import os

_ENV_VAR = "HAMSTERWHEEL_KERNELS"
_choice = os.environ.get(_ENV_VAR, "auto").lower()

if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(
        f"{_ENV_VAR} must be 'auto', 'compiled' or 'python', not {_choice!r}"
    )

if _choice == "python":
    from . import _kernels_py as kernels

    COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _kernels_py as kernels

        COMPILED = False


def backend_name() -> str:
    return "compiled" if COMPILED else "python"
