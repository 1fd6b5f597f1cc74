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

"""LoG-Gabor binary features

The liris.gabor module builds a bank of 1-D log-Gabor filters,

  G(f) = exp(-(log(f / f0))**2 / (2 * (log(sigma / f0))**2)),

defined in the frequency domain with G(0) = 0, filters each row of a
LiDAR-Iris image circularly with the analytic (one-sided) response of
every filter and keeps the sign of the real and imaginary outputs as
bits.  Filter n has wavelength base_wavelength * multiplier**n and a
constant sigma / f0 ratio so every filter has the same shape.
"""

from collections import namedtuple
import functools
import logging

import numpy as np

from . import DEBUG1, DEBUG2, DEBUG3

PLANES = ('real', 'imag')

_word = np.dtype('<u8')

# responses within this fraction of the image's largest pixel value
# of zero binarize as ties (to 0)
_tie_tol = 1e-10

_log = logging.getLogger(__name__).log


class GaborError(Exception):
    pass


class GaborConfig(namedtuple('GaborConfig',
                             ['num_filters', 'base_wavelength',
                              'wavelength_multiplier', 'sigma_on_f'])):
    def __new__(cls, num_filters=4, base_wavelength=18.0,
                wavelength_multiplier=2.0, sigma_on_f=0.5):
        if (isinstance(num_filters, bool) or
                not isinstance(num_filters, (int, np.integer)) or
                num_filters < 1):
            raise GaborError('num_filters must be an integer >= 1: %s' %
                             num_filters)
        try:
            base_wavelength = float(base_wavelength)
            wavelength_multiplier = float(wavelength_multiplier)
            sigma_on_f = float(sigma_on_f)
        except (TypeError, ValueError) as e:
            raise GaborError('invalid filter parameter: %s' % e)
        if not base_wavelength >= 2:
            raise GaborError('base_wavelength must be >= 2: %s' %
                             base_wavelength)
        if not wavelength_multiplier > 1:
            raise GaborError('wavelength_multiplier must be > 1: %s' %
                             wavelength_multiplier)
        if not 0 < sigma_on_f < 1:
            raise GaborError('sigma_on_f must be in (0, 1): %s' % sigma_on_f)

        return super().__new__(cls, int(num_filters), base_wavelength,
                               wavelength_multiplier, sigma_on_f)

    def center_frequencies(self):
        n = np.arange(self.num_filters)
        return 1.0 / (self.base_wavelength * self.wavelength_multiplier ** n)


def analytic_mask(n):
    """Weights that keep DC, double positive frequencies and drop
    negative ones (the Nyquist bin of an even length is kept as is)."""
    mask = np.zeros(n)
    mask[0] = 1.0
    if n % 2 == 0:
        mask[1:n // 2] = 2.0
        mask[n // 2] = 1.0
    else:
        mask[1:(n + 1) // 2] = 2.0
    return mask


class LogGaborBank:
    """Frequency responses of the filters sampled at f = k / cols."""

    def __init__(self, config, cols):
        self.config = config
        self.cols = cols

        if not cols >= 2 * config.base_wavelength:
            raise GaborError('cols (%d) must be >= 2 * base_wavelength (%g)' %
                             (cols, config.base_wavelength))

        f = np.arange(cols) / cols
        f0 = config.center_frequencies()[:, np.newaxis]
        with np.errstate(divide='ignore'):
            x = np.log(f[np.newaxis, 1:] / f0)
        filters = np.zeros((config.num_filters, cols))
        filters[:, 1:] = np.exp(-x ** 2 /
                                (2 * np.log(config.sigma_on_f) ** 2))

        self.filters = filters
        self.center_frequencies = f0.ravel()
        self.analytic = filters * analytic_mask(cols)
        self.filters.setflags(write=False)
        self.analytic.setflags(write=False)

    def __len__(self):
        return self.config.num_filters

    def __repr__(self):
        return 'LogGaborBank(%s, cols=%d)' % (self.config, self.cols)


@functools.lru_cache(maxsize=16)
def build_filter_bank(config=None, cols=360):
    if config is None:
        config = GaborConfig()
    bank = LogGaborBank(config, cols)
    _log(DEBUG1, 'filter bank: %d filters, cols %d, f0 %s', len(bank), cols,
         ' '.join('%.5f' % x for x in bank.center_frequencies))
    return bank


def filter_row(row, response):
    """Circular convolution of a row with the analytic version of a
    real frequency response; returns (real, imag)."""
    row = np.asarray(row, dtype=np.float64)
    response = np.asarray(response, dtype=np.float64)
    if row.ndim != 1 or row.shape != response.shape:
        raise GaborError('row and response lengths differ: %s != %s' %
                         (row.shape, response.shape))

    out = np.fft.ifft(np.fft.fft(row) * response * analytic_mask(row.size))
    return out.real, out.imag


class BinaryFeatureMap:
    """Bits indexed [filter][plane][row][col].

    Stored bit-packed per column: ``words[c]`` holds the
    filters * 2 * rows bits of column c, LSB first, in little-endian
    64-bit words zero-padded at the end, so a cyclic column shift is a
    roll of whole rows of words.
    """

    def __init__(self, bits):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 4 or bits.shape[1] != len(PLANES):
            raise GaborError('expect (filters, 2, rows, cols) bits, got %s' %
                             (bits.shape,))
        self.dims = tuple(int(x) for x in bits.shape)

        per_col = bits.reshape(-1, self.dims[3]).T
        nbytes = 8 * ((per_col.shape[1] + 63) // 64)
        packed = np.zeros((per_col.shape[0], nbytes), dtype=np.uint8)
        x = np.packbits(per_col, axis=1, bitorder='little')
        packed[:, :x.shape[1]] = x
        self._set_words(packed.view(_word))

    @classmethod
    def _from_words(cls, words, dims):
        self = cls.__new__(cls)
        self.dims = tuple(dims)
        self._set_words(words)
        return self

    def _set_words(self, words):
        words = np.ascontiguousarray(words)
        words.setflags(write=False)
        self.words = words

    @classmethod
    def from_bytes(cls, data, dims):
        """Inverse of to_bytes()."""
        dims = tuple(int(x) for x in dims)
        nbits = int(np.prod(dims))
        if len(data) != (nbits + 7) // 8:
            raise GaborError('expected %d bytes for %s, got %d' %
                             ((nbits + 7) // 8, dims, len(data)))
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8),
                             count=nbits, bitorder='little')
        return cls(bits.reshape(dims))

    @property
    def nbits(self):
        return int(np.prod(self.dims))

    def bits(self):
        filters, planes, rows, cols = self.dims
        x = np.unpackbits(self.words.view(np.uint8), axis=1,
                          count=filters * planes * rows, bitorder='little')
        return x.T.reshape(self.dims).astype(bool)

    def to_bytes(self):
        """Bits in [filter][plane][row][col] order, LSB first."""
        return np.packbits(self.bits().ravel(), bitorder='little').tobytes()

    def shift(self, s):
        """Map rolled by s columns: result[..., c] = self[..., c - s]."""
        return self._from_words(np.roll(self.words, s, axis=0), self.dims)

    def __eq__(self, other):
        if not isinstance(other, BinaryFeatureMap):
            return NotImplemented
        return (self.dims == other.dims and
                np.array_equal(self.words, other.words))

    def __repr__(self):
        return 'BinaryFeatureMap(dims=%s)' % (self.dims,)


def extract_binary_features(iris, bank):
    iris = np.asarray(iris)
    if iris.ndim != 2:
        raise GaborError('expect 2-D iris image, got shape %s' % (iris.shape,))
    rows, cols = iris.shape
    if cols != bank.cols:
        raise GaborError('iris cols (%d) != filter bank cols (%d)' %
                         (cols, bank.cols))

    x = iris.astype(np.float64)
    spectra = np.fft.fft(x, axis=1)
    responses = np.fft.ifft(spectra[np.newaxis, :, :] *
                            bank.analytic[:, np.newaxis, :], axis=-1)

    tol = _tie_tol * max(1.0, float(np.abs(x).max(initial=0.0)))
    bits = np.empty((len(bank), len(PLANES), rows, cols), dtype=bool)
    np.greater(responses.real, tol, out=bits[:, 0])
    np.greater(responses.imag, tol, out=bits[:, 1])

    return BinaryFeatureMap(bits)
