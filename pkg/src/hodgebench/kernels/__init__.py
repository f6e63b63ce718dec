"""Kernel backend selection.

The hot numerical loops (CSR matrix-vector product, sparse LDLt numeric
factorization and triangular solves) exist twice: a compiled Cython core
(`_ckern`) and a numpy fallback (`pykern`) with identical signatures.  The
backend is picked once at import time:

* ``HODGE_KERNELS=python``   force the numpy fallback,
* ``HODGE_KERNELS=compiled`` require the extension (ImportError if missing),
* unset / ``auto``           use the extension when importable.

``hodge-bench kernels`` benchmarks the two backends against each other.
"""

import os

from . import pykern

_choice = os.environ.get("HODGE_KERNELS", "auto").strip().lower()

if _choice == "python":
    impl = pykern
elif _choice == "compiled":
    from . import _ckern as impl
elif _choice in ("", "auto"):
    try:
        from . import _ckern as impl
    except ImportError:
        impl = pykern
else:
    raise ValueError(f"HODGE_KERNELS must be auto, python or compiled, got {_choice!r}")

BACKEND = impl.BACKEND

csr_matvec = impl.csr_matvec
ldlt_symbolic = impl.ldlt_symbolic
ldlt_numeric = impl.ldlt_numeric
ldlt_solve = impl.ldlt_solve
