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

"""Rotation-invariant matching and the keyframe database

The liris.matcher module compares frames the way a loop detector
needs to: the yaw between two scans is estimated by phase correlation
of their LiDAR-Iris images, the second frame's binary feature map is
rotated back by that many columns, and the distance is the smallest
normalized Hamming distance found within a small window of columns
around the estimate.

DescriptorDatabase keeps keyframe descriptors in insertion order,
answers loop queries by linear scan and reads and writes the LIRIS1
database file:

  magic      b'LIRIS1\\0'
  header     u32 count, rows, cols, num_filters (little-endian)
  per frame  u64 frame_id, rows * cols iris bytes (row-major),
             feature bits LSB first in [filter][plane][row][col]
             order, padded to a byte boundary
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging
import os
import struct
import threading

import numpy as np

from . import DEBUG1, DEBUG2, DEBUG3
from .gabor import PLANES, BinaryFeatureMap, GaborError, GaborConfig, \
    build_filter_bank, extract_binary_features
from .spectral import correlate_spectra, spectrum

MAGIC = b'LIRIS1\0'
_header = struct.Struct('<4I')
_frame_id = struct.Struct('<Q')

# candidates compared per vectorized batch
_chunk_size = 64

_m1 = np.uint64(0x5555555555555555)
_m2 = np.uint64(0x3333333333333333)
_m4 = np.uint64(0x0f0f0f0f0f0f0f0f)
_h01 = np.uint64(0x0101010101010101)

_log = logging.getLogger(__name__).log


def _popcount(x):
    """Set bits of each 64-bit word."""
    x = x - ((x >> np.uint64(1)) & _m1)
    x = (x & _m2) + ((x >> np.uint64(2)) & _m2)
    x = (x + (x >> np.uint64(4))) & _m4
    return (x * _h01) >> np.uint64(56)


class MatcherError(Exception):
    pass


class DatabaseFormatError(MatcherError):
    pass


class MatchResult(namedtuple('MatchResult',
                             ['distance', 'shift', 'candidate_id'])):
    pass


class FrameDescriptor:
    def __init__(self, frame_id, iris, features):
        iris = np.ascontiguousarray(iris, dtype=np.uint8)
        if iris.ndim != 2:
            raise MatcherError('frame %s: iris must be 2-D, got %s' %
                               (frame_id, iris.shape))
        if tuple(features.dims[2:]) != iris.shape:
            raise MatcherError('frame %s: features %s do not fit iris %s' %
                               (frame_id, features.dims, iris.shape))
        iris.setflags(write=False)

        self.frame_id = int(frame_id)
        self.iris = iris
        self.features = features
        self._spectrum = None

    @property
    def spectrum(self):
        if self._spectrum is None:
            self._spectrum = spectrum(self.iris)
        return self._spectrum

    @property
    def shape(self):
        return self.iris.shape

    def __eq__(self, other):
        if not isinstance(other, FrameDescriptor):
            return NotImplemented
        return (self.frame_id == other.frame_id and
                np.array_equal(self.iris, other.iris) and
                self.features == other.features)

    def __repr__(self):
        return 'FrameDescriptor(%d, %s)' % (self.frame_id, self.features)


def describe(frame_id, iris, gabor_config=None):
    """FrameDescriptor of an iris image with features extracted."""
    bank = build_filter_bank(gabor_config or GaborConfig(),
                             np.shape(iris)[1])
    return FrameDescriptor(frame_id, iris,
                           extract_binary_features(iris, bank))


def hamming(a, b):
    if a.dims != b.dims:
        raise MatcherError('feature dimensions differ: %s != %s' %
                           (a.dims, b.dims))
    diff = _popcount(np.bitwise_xor(a.words, b.words)).sum()
    return int(diff) / a.nbits


def _check_dims(p, q):
    if p.features.dims != q.features.dims:
        raise MatcherError('frames %d and %d: dimensions differ: %s != %s' %
                           (p.frame_id, q.frame_id, p.features.dims,
                            q.features.dims))


def _match_chunk(p, chunk, window):
    """MatchResults of p against a list of same-size descriptors."""
    rows, cols = p.shape
    dx, _, _ = correlate_spectra(p.spectrum,
                                 np.stack([q.spectrum for q in chunk]),
                                 (rows, cols))
    words = np.stack([q.features.words for q in chunk])

    offsets = np.arange(-window, window + 1)
    shifts = (dx[np.newaxis, :] + offsets[:, np.newaxis]) % cols
    c = np.arange(cols)

    counts = np.empty(shifts.shape, dtype=np.int64)
    for k in range(offsets.size):
        # aligned[n, c] = q_n[(c + s_n) % cols]
        idx = (c[np.newaxis, :] + shifts[k][:, np.newaxis]) % cols
        aligned = np.take_along_axis(words, idx[:, :, np.newaxis], axis=1)
        x = np.bitwise_xor(aligned, p.features.words[np.newaxis])
        counts[k] = _popcount(x).sum(axis=(1, 2))

    # fewest differing bits, then nearest the estimate, then smaller s
    key = (counts * ((window + 1) * cols) +
           np.abs(offsets)[:, np.newaxis] * cols + shifts)
    best = np.argmin(key, axis=0)

    nbits = p.features.nbits
    return [MatchResult(int(counts[best[i], i]) / nbits,
                        int(shifts[best[i], i]), chunk[i].frame_id)
            for i in range(len(chunk))]


def match_many(p, candidates, window=2, threads=None):
    """match_pair(p, q) for every q of candidates, in order."""
    if window < 0:
        raise MatcherError('window must be >= 0: %s' % window)
    candidates = list(candidates)
    for q in candidates:
        _check_dims(p, q)
    if not candidates:
        return []

    chunks = [candidates[i:i + _chunk_size]
              for i in range(0, len(candidates), _chunk_size)]
    if threads is None or threads <= 1 or len(chunks) == 1:
        results = [_match_chunk(p, x, window) for x in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(
                lambda x: _match_chunk(p, x, window), chunks))

    return [r for x in results for r in x]


def match_pair(p, q, window=2):
    """Distance of q to p after undoing the yaw between them.

    shift is the column rotation s for which q rolled back by s
    columns best matches p; for q a rotated by +s columns it is s.
    """
    _check_dims(p, q)
    return match_many(p, [q], window)[0]


class DescriptorDatabase:
    """Keyframe descriptors with strictly increasing frame ids.

    append() may be called from one writer while other threads query.
    """

    def __init__(self, descriptors=None):
        self._log = logging.getLogger(__name__).log
        self._lock = threading.Lock()
        self._frames = []
        for x in descriptors or []:
            self.append(x)

    def __len__(self):
        return len(self._frames)

    def __iter__(self):
        return iter(self._snapshot())

    def __getitem__(self, i):
        with self._lock:
            return self._frames[i]

    def _snapshot(self):
        with self._lock:
            return list(self._frames)

    @property
    def frame_ids(self):
        return [x.frame_id for x in self._snapshot()]

    @property
    def dims(self):
        with self._lock:
            if not self._frames:
                return None
            return self._frames[0].features.dims

    def append(self, descriptor):
        with self._lock:
            if self._frames:
                last = self._frames[-1]
                if descriptor.frame_id <= last.frame_id:
                    raise MatcherError('frame_id %d not greater than %d' %
                                       (descriptor.frame_id, last.frame_id))
                _check_dims(last, descriptor)
            self._frames.append(descriptor)

        self._log(DEBUG3, 'append: frame %d (%d frames)',
                  descriptor.frame_id, len(self._frames))

    def query(self, probe, exclude_recent=30, window=2, threads=None):
        """Best MatchResult among all but the exclude_recent newest
        frames, or None when no frame is eligible."""
        if exclude_recent < 0:
            raise MatcherError('exclude_recent must be >= 0: %s' %
                               exclude_recent)
        frames = self._snapshot()
        if frames and probe.frame_id <= frames[-1].frame_id:
            raise MatcherError('probe frame_id %d not greater than %d' %
                               (probe.frame_id, frames[-1].frame_id))

        eligible = frames[:max(0, len(frames) - exclude_recent)]
        if not eligible:
            self._log(DEBUG2, 'query %d: no eligible frames', probe.frame_id)
            return None

        results = match_many(probe, eligible, window, threads)
        # min() keeps the first, oldest, of equal distances
        best = min(results, key=lambda x: x.distance)
        self._log(DEBUG2, 'query %d: %s', probe.frame_id, best)

        return best

    def save(self, path):
        frames = self._snapshot()
        if frames:
            num_filters, _, rows, cols = frames[0].features.dims
        else:
            num_filters, rows, cols = 0, 0, 0

        tmp = path + '.tmp'
        try:
            with open(tmp, 'wb') as f:
                f.write(MAGIC)
                f.write(_header.pack(len(frames), rows, cols, num_filters))
                for x in frames:
                    f.write(_frame_id.pack(x.frame_id))
                    f.write(x.iris.tobytes())
                    f.write(x.features.to_bytes())
            os.replace(tmp, path)
        except OSError as e:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise MatcherError('%s: %s' % (path, e))

        self._log(DEBUG1, '%s: saved %d frames', path, len(frames))

    @classmethod
    def load(cls, path):
        try:
            with open(path, 'rb') as f:
                data = f.read()
        except OSError as e:
            raise MatcherError('%s: %s' % (path, e))

        if data[:len(MAGIC)] != MAGIC:
            raise DatabaseFormatError('%s: not a LIRIS1 database' % path)
        offset = len(MAGIC)
        if len(data) < offset + _header.size:
            raise DatabaseFormatError('%s: truncated header' % path)
        count, rows, cols, num_filters = _header.unpack_from(data, offset)
        offset += _header.size

        dims = (num_filters, len(PLANES), rows, cols)
        if count and not (rows and cols and num_filters):
            raise DatabaseFormatError('%s: invalid dimensions %s' %
                                      (path, dims))
        iris_size = rows * cols
        feature_size = (int(np.prod(dims)) + 7) // 8
        record_size = _frame_id.size + iris_size + feature_size
        if len(data) != offset + count * record_size:
            raise DatabaseFormatError(
                '%s: size %d does not match %d frames of %d bytes' %
                (path, len(data), count, record_size))

        db = cls()
        for i in range(count):
            frame_id, = _frame_id.unpack_from(data, offset)
            offset += _frame_id.size
            iris = np.frombuffer(data, dtype=np.uint8, count=iris_size,
                                 offset=offset).reshape(rows, cols)
            offset += iris_size
            try:
                features = BinaryFeatureMap.from_bytes(
                    data[offset:offset + feature_size], dims)
                db.append(FrameDescriptor(frame_id, iris, features))
            except (GaborError, MatcherError) as e:
                raise DatabaseFormatError('%s: frame %d: %s' %
                                          (path, i, e))
            offset += feature_size

        db._log(DEBUG1, '%s: loaded %d frames %s', path, count, dims)

        return db


def query(db, probe, exclude_recent=30, window=2, threads=None):
    return db.query(probe, exclude_recent, window, threads)
