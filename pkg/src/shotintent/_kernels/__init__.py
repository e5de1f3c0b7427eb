"""Hot numerical kernels: compiled fast path with a pure-numpy fallback.

The compiled extension is preferred when importable; set SHOTINTENT_PURE_PY=1
to force the numpy backend (useful for debugging and benchmarking).
"""
import os

from . import _reference

if os.environ.get("SHOTINTENT_PURE_PY"):
    _impl = _reference
    BACKEND = "reference"
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]

        BACKEND = "fast"
    except ImportError:
        _impl = _reference
        BACKEND = "reference"

conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward

__all__ = [
    "BACKEND",
    "conv1d_forward",
    "conv1d_backward",
    "lstm_forward",
    "lstm_backward",
]
