"""FFT helpers with a process-wide worker cap (PLAB_THREADS)."""

import os

from scipy import fft as _sfft


def fft_workers() -> int:
    cap = os.environ.get("PLAB_THREADS", "")
    ncpu = os.cpu_count() or 1
    if cap:
        return max(1, min(int(cap), ncpu))
    return max(1, min(ncpu, 8))


def fftn(a, axes=None):
    return _sfft.fftn(a, axes=axes, workers=fft_workers())


def ifftn(a, axes=None):
    return _sfft.ifftn(a, axes=axes, workers=fft_workers())


def rfftn(a, axes=None):
    return _sfft.rfftn(a, axes=axes, workers=fft_workers())


def irfftn(a, s, axes=None):
    return _sfft.irfftn(a, s=s, axes=axes, workers=fft_workers())
