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

"""Synthetic worlds and loop trajectories

The liris.synth module generates flat worlds of upright cylindrical
obstacles, casts one ray per angular bin from a z-up sensor pose and
samples every first hit at the centers of the height slices below the
obstacle top.  Rays leave the sensor at bin-center azimuths, so two
poses at one position whose yaws differ by a whole number of bins see
the same hits in cyclically shifted columns.

loop_trajectory() drives along a gently winding path and then
revisits part of it, half in the original direction and half in the
opposite one, which gives known loop closures.
"""

from collections import namedtuple
import logging
import math
import os

import numpy as np

from . import DEBUG1, DEBUG2, DEBUG3
from .evaluate import GroundTruth
from .iris import CODE_BITS, IrisConfig
from .pointcloud import PointCloud, Pose, write_kitti_bin, \
    write_kitti_poses

DENSITY = 1 / 400.0
MIN_RADIUS = 0.5
MAX_RADIUS = 3.0
REFLECTANCE = 0.5
# path shape: y = amplitude * sin(2 pi x / period)
_path_amplitude = 5.0
_path_period = 80.0

_log = logging.getLogger(__name__).log


class SynthError(Exception):
    pass


class Obstacle(namedtuple('Obstacle', ['x', 'y', 'radius', 'height'])):
    pass


class SyntheticWorld(namedtuple('SyntheticWorld',
                                ['seed', 'obstacles', 'extent', 'profile'])):
    """Obstacles inside the square [-extent, extent]^2; heights are
    obstacle tops relative to the sensor plane."""

    def as_arrays(self):
        if not self.obstacles:
            return np.zeros((0, 4))
        return np.array(self.obstacles, dtype=np.float64)


def generate_world(seed, extent=200.0, density=DENSITY, profile=None):
    if not extent > 0:
        raise SynthError('extent must be > 0: %s' % extent)
    if density < 0:
        raise SynthError('density must be >= 0: %s' % density)
    if profile is None:
        profile = IrisConfig().profile

    rng = np.random.default_rng(seed)
    n = int(round(density * (2 * extent) ** 2))
    xy = rng.uniform(-extent, extent, size=(n, 2))
    radius = rng.uniform(MIN_RADIUS, MAX_RADIUS, size=n)
    # at least the lowest slice center lies below every top
    slice_height = (profile.y_high - profile.y_low) / CODE_BITS
    height = rng.uniform(profile.y_low + slice_height, profile.y_high,
                         size=n)

    obstacles = tuple(Obstacle(float(x), float(y), float(r), float(h))
                      for (x, y), r, h in zip(xy, radius, height))
    _log(DEBUG1, 'world %s: %d obstacles, extent %gm', seed, n, extent)

    return SyntheticWorld(seed, obstacles, float(extent), profile)


def _yaw(pose):
    r = pose.rotation
    return math.degrees(math.atan2(r[1, 0], r[0, 0]))


def scan_from(world, pose, config=None, jitter=0.0, seed=0):
    """First-hit scan of world from a z-up pose, in the sensor frame.

    Without jitter each hit is moved to the center of its radial bin.
    jitter is the half-width in degrees of a uniform perturbation of
    the ray azimuths, drawn from seed.
    """
    if config is None:
        config = IrisConfig()
    px, py, pz = pose.translation
    if max(abs(px), abs(py)) > world.extent:
        raise SynthError('pose (%g, %g) outside world extent %g' %
                         (px, py, world.extent))

    rows, cols = config.shape
    theta = (np.arange(cols) + 0.5) * 360.0 / cols
    if jitter:
        rng = np.random.default_rng(seed)
        theta = theta + rng.uniform(-jitter, jitter, size=cols)
    phi = np.radians(theta + _yaw(pose))
    d = np.stack((np.cos(phi), np.sin(phi)), axis=1)

    obstacles = world.as_arrays()
    f = obstacles[:, :2] - (px, py)
    reach = np.hypot(f[:, 0], f[:, 1]) - obstacles[:, 2]
    # obstacles containing the sensor are not seen
    obstacles = obstacles[(reach < config.max_range) & (reach > 0)]
    if obstacles.shape[0] == 0:
        return PointCloud()

    # |o + t d - c|^2 = r^2 with o the sensor, first root t > 0
    f = (px, py) - obstacles[:, :2]
    b = d @ f.T
    c = (f ** 2).sum(axis=1) - obstacles[:, 2] ** 2
    disc = b ** 2 - c[np.newaxis, :]
    with np.errstate(invalid='ignore'):
        t = -b - np.sqrt(disc)
    t[(disc < 0) | ~(t > 0)] = np.inf

    hit = np.argmin(t, axis=1)
    r = t[np.arange(cols), hit]
    seen = r < config.max_range
    if not jitter:
        step = config.max_range / rows
        r = (np.floor(r[seen] / step) + 0.5) * step
    else:
        r = r[seen]
    angle = np.radians(theta[seen])
    top = obstacles[hit[seen], 3] - pz

    profile = config.profile
    slice_height = (profile.y_high - profile.y_low) / CODE_BITS
    levels = profile.y_low + (np.arange(CODE_BITS) + 0.5) * slice_height
    ray, level = np.nonzero(levels[np.newaxis, :] <= top[:, np.newaxis])

    points = np.empty((ray.size, 4))
    points[:, 0] = r[ray] * np.cos(angle[ray])
    points[:, 1] = r[ray] * np.sin(angle[ray])
    points[:, 2] = levels[level]
    points[:, 3] = REFLECTANCE
    cloud = PointCloud(points)
    _log(DEBUG3, 'scan at (%g, %g, %g deg): %d rays hit, %d points',
         px, py, _yaw(pose), np.count_nonzero(seen), len(cloud))

    return cloud


def _base_path(n, spacing):
    s = np.arange(n) * spacing
    x = s - s[-1] / 2
    k = 2 * math.pi / _path_period
    y = _path_amplitude * np.sin(k * s)
    yaw = np.degrees(np.arctan(_path_amplitude * k * np.cos(k * s)))
    return x, y, yaw


def loop_trajectory(world, length, revisit_fraction, spacing=1.0,
                    position_noise=0.0, yaw_noise=0.0, seed=0,
                    loop_radius=4.0):
    """Poses and GroundTruth of a path whose last revisit_fraction of
    keyframes re-traverse the start of the path.

    The first half (rounded up) of the revisits drives base keyframes
    0, 1, ... again in the same direction; the rest drives the
    following base keyframes backwards with yaw turned by 180 degrees.
    Revisit positions get gaussian noise of position_noise meters and
    yaw_noise degrees.
    """
    if length < 2:
        raise SynthError('length must be >= 2: %s' % length)
    if not 0 <= revisit_fraction <= 0.5:
        raise SynthError('revisit_fraction must be in [0, 0.5]: %s' %
                         revisit_fraction)
    if not spacing > 0:
        raise SynthError('spacing must be > 0: %s' % spacing)

    revisits = int(round(length * revisit_fraction))
    n = length - revisits
    same = (revisits + 1) // 2
    opposite = revisits // 2
    if (n - 1) * spacing / 2 > world.extent:
        raise SynthError('path of %gm does not fit in extent %gm' %
                         ((n - 1) * spacing, world.extent))

    x, y, yaw = _base_path(n, spacing)
    poses = [Pose.from_yaw(x[i], y[i], yaw[i]) for i in range(n)]

    rng = np.random.default_rng(seed)
    order = [(i, 0.0) for i in range(same)] + \
        [(i, 180.0) for i in reversed(range(same, same + opposite))]
    for i, turn in order:
        dx, dy = rng.normal(0.0, position_noise, size=2) \
            if position_noise else (0.0, 0.0)
        dyaw = rng.normal(0.0, yaw_noise) if yaw_noise else 0.0
        px = min(max(x[i] + dx, -world.extent), world.extent)
        py = min(max(y[i] + dy, -world.extent), world.extent)
        poses.append(Pose.from_yaw(px, py, yaw[i] + turn + dyaw))

    _log(DEBUG1, 'trajectory: %d keyframes, %d same and %d opposite '
         'direction revisits', length, same, opposite)

    return poses, GroundTruth.from_poses(poses, loop_radius, 'x')


def export_sequence(out_dir, world, poses, config=None, jitter=0.0, seed=0):
    """Write poses as KITTI-layout velodyne/NNNNNN.bin scans and
    poses.txt; scan i uses jitter seed seed + i."""
    velodyne = os.path.join(out_dir, 'velodyne')
    try:
        os.makedirs(velodyne, exist_ok=True)
    except OSError as e:
        raise SynthError('%s: %s' % (velodyne, e))

    paths = []
    for i, pose in enumerate(poses):
        path = os.path.join(velodyne, '%06d.bin' % i)
        write_kitti_bin(path, scan_from(world, pose, config, jitter,
                                        seed + i))
        paths.append(path)
    write_kitti_poses(os.path.join(out_dir, 'poses.txt'), poses)

    _log(DEBUG1, '%s: exported %d frames', out_dir, len(paths))

    return paths
