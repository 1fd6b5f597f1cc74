#
# Copyright (c) 2026 lidar-iris contributors
#
# Permission to use, copy, modify, and distribute this software for any
# purpose with or without fee is hereby granted, provided that the above
# copyright notice and this permission notice appear in all copies.
#
# THE SOFTWARE IS PROVIDED "AS IS" AND THE AUTHOR DISCLAIMS ALL WARRANTIES
# WITH REGARD TO THIS SOFTWARE INCLUDING ALL IMPLIED WARRANTIES OF
# MERCHANTABILITY AND FITNESS. IN NO EVENT SHALL THE AUTHOR BE LIABLE FOR
# ANY SPECIAL, DIRECT, INDIRECT, OR CONSEQUENTIAL DAMAGES OR ANY DAMAGES
# WHATSOEVER RESULTING FROM LOSS OF USE, DATA OR PROFITS, WHETHER IN AN
# ACTION OF CONTRACT, NEGLIGENCE OR OTHER TORTIOUS ACTION, ARISING OUT OF
# OR IN CONNECTION WITH THE USE OR PERFORMANCE OF THIS SOFTWARE.
#

"""Cyclic translation between LiDAR-Iris images

Phase correlation: the inverse transform of the unit-magnitude cross
power spectrum of two images that differ by a cyclic shift is a delta
at that shift.  Columns of an iris image are azimuth bins, so the
column component of the shift is the yaw between the two scans.

Images are real, so spectra are kept as real-input (half) transforms;
the correlation surface is the real inverse of the half spectrum,
which equals the real part of the full complex inverse.
"""

from collections import namedtuple
import logging

import numpy as np

from . import DEBUG1, DEBUG2, DEBUG3

# cross spectrum entries at or below this fraction of the largest
# magnitude are treated as zero
_zero_tol = 1e-12

_log = logging.getLogger(__name__).log


class SpectralError(Exception):
    pass


class ShiftEstimate(namedtuple('ShiftEstimate', ['dx', 'dy', 'peak'])):
    pass


def spectrum(image):
    """Half spectrum of a real 2-D image."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise SpectralError('expect 2-D image, got shape %s' % (image.shape,))
    return np.fft.rfft2(image)


def cross_power(fa, fb):
    """B * conj(A) / |B * conj(A)| with zero-magnitude entries set to 0."""
    c = fb * np.conj(fa)
    mag = np.abs(c)
    top = mag.max(axis=(-2, -1), keepdims=True)
    zero = mag <= _zero_tol * top
    mag[zero] = 1.0
    c /= mag
    c[zero] = 0
    return c


def correlate_spectra(fa, fbs, shape):
    """Peak of the phase correlation of one spectrum against a stack.

    fa is the half spectrum of an image of the given (rows, cols)
    shape, fbs a (n, rows, cols // 2 + 1) stack.  Returns dx, dy and
    peak arrays of length n; ties go to the lowest row, then the lowest
    column.
    """
    rows, cols = shape
    surface = np.fft.irfft2(cross_power(fa[np.newaxis], fbs), s=shape)
    flat = surface.reshape(surface.shape[0], rows * cols)
    idx = np.argmax(flat, axis=1)
    peak = flat[np.arange(flat.shape[0]), idx]
    dy, dx = np.divmod(idx, cols)
    return dx, dy, peak


def phase_correlate(a, b):
    """Cyclic (dx, dy) such that b is a rolled by dy rows, dx columns."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise SpectralError('image dimensions differ: %s != %s' %
                            (a.shape, b.shape))

    dx, dy, peak = correlate_spectra(spectrum(a), spectrum(b)[np.newaxis],
                                     a.shape)
    estimate = ShiftEstimate(int(dx[0]), int(dy[0]), float(peak[0]))
    _log(DEBUG3, 'phase_correlate: %s', estimate)

    return estimate
