"""Forward-evaluation kernels.

Two interchangeable implementations of ``forward_core``: a Cython extension
compiled at install time and a pure-numpy reference. One is selected at
import, controlled by the ``SPIDERDTN_KERNEL`` environment variable:

* ``auto`` (default): prefer the compiled kernel, fall back to the reference;
* ``compiled``: require the extension, raise ImportError if missing;
* ``python``: always use the reference.

Each backend is deterministic run to run on the same build; the two backends
agree to near machine precision but not necessarily bit for bit, since their
accumulation orders differ.
"""

from __future__ import annotations

import os

from . import reference


def _load_compiled():
    from . import _compiled

    return _compiled


_choice = os.environ.get("SPIDERDTN_KERNEL", "auto").strip().lower()
if _choice == "python":
    _impl = reference
    BACKEND = "python"
elif _choice == "compiled":
    _impl = _load_compiled()
    BACKEND = "compiled"
elif _choice == "auto":
    try:
        _impl = _load_compiled()
        BACKEND = "compiled"
    except ImportError:
        _impl = reference
        BACKEND = "python"
else:
    raise ValueError(
        f"SPIDERDTN_KERNEL must be 'auto', 'compiled' or 'python', got {_choice!r}"
    )

forward_core = _impl.forward_core


def available_backends() -> dict[str, object]:
    """Map of backend name to its ``forward_core`` callable, for tests and
    benchmarks. Includes 'compiled' only when the extension imports."""
    table = {"python": reference.forward_core}
    try:
        table["compiled"] = _load_compiled().forward_core
    except ImportError:
        pass
    return table
