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

"""LiDAR-Iris image generation

The liris.iris module projects a point cloud to its bird's-eye view,
bins it into radial x angular cells around the sensor and codes each
cell as one byte: bit m is set when any point of the cell falls in
the m-th of eight equal height slices of [y_low, y_high].  Row i is a
radius band, column j an azimuth band, so a yaw rotation of the
sensor becomes a cyclic column shift of the image.
"""

from collections import namedtuple
import logging

import numpy as np

from . import DEBUG1, DEBUG2, DEBUG3
from .pointcloud import PROFILES, DEFAULT_PROFILE, SensorProfile

CODE_BITS = 8

_log = logging.getLogger(__name__).log


class IrisError(Exception):
    pass


def _count(x):
    if isinstance(x, bool):
        return False
    try:
        return int(x) == x and x >= 1
    except (TypeError, ValueError):
        return False


class IrisConfig(namedtuple('IrisConfig',
                            ['radial_bins', 'angular_bins', 'max_range',
                             'profile'])):
    def __new__(cls, radial_bins=80, angular_bins=360, max_range=80.0,
                profile=None):
        if profile is None:
            profile = PROFILES[DEFAULT_PROFILE]
        if not isinstance(profile, SensorProfile):
            raise IrisError('profile must be a SensorProfile: %r' % profile)

        for name, x in [('radial_bins', radial_bins),
                        ('angular_bins', angular_bins)]:
            if not _count(x):
                raise IrisError('%s must be an integer >= 1: %s' % (name, x))
        try:
            max_range = float(max_range)
        except (TypeError, ValueError):
            raise IrisError('invalid max_range: %s' % max_range)
        if not max_range > 0:
            raise IrisError('max_range must be > 0: %s' % max_range)

        return super().__new__(cls, int(radial_bins), int(angular_bins),
                               max_range, profile)

    @property
    def shape(self):
        return self.radial_bins, self.angular_bins


def _height_slices(heights, profile):
    h = np.clip(heights, profile.y_low, profile.y_high)
    x = CODE_BITS * (h - profile.y_low) / (profile.y_high - profile.y_low)
    return np.clip(np.floor(x).astype(np.int64), 0, CODE_BITS - 1)


def encode_bin(heights, profile):
    """Height-occupancy code of one cell, lowest slice = LSB."""
    heights = np.asarray(heights, dtype=np.float64).ravel()
    code = 0
    for m in np.unique(_height_slices(heights, profile)):
        code |= 1 << int(m)
    return code


def generate_iris(cloud, config=None):
    """Return the (radial_bins, angular_bins) uint8 LiDAR-Iris image."""
    if config is None:
        config = IrisConfig()
    rows, cols = config.shape
    image = np.zeros((rows, cols), dtype=np.uint8)
    if len(cloud) == 0:
        return image

    i, j, k = config.profile.axes
    points = cloud.points.astype(np.float64)
    u, v, h = points[:, i], points[:, j], points[:, k]

    r = np.hypot(u, v)
    keep = r < config.max_range
    if not keep.all():
        _log(DEBUG3, 'generate_iris: %d points beyond %gm',
             keep.size - np.count_nonzero(keep), config.max_range)
        u, v, h, r = u[keep], v[keep], h[keep], r[keep]

    theta = np.mod(np.degrees(np.arctan2(v, u)), 360.0)
    row = np.minimum(np.floor(r * rows / config.max_range).astype(np.int64),
                     rows - 1)
    col = np.floor(theta * cols / 360.0).astype(np.int64) % cols
    bits = np.left_shift(1, _height_slices(h, config.profile)).astype(np.uint8)

    np.bitwise_or.at(image, (row, col), bits)

    return image
