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

"""LiDAR frames and poses

The liris.pointcloud module reads KITTI odometry velodyne scans
(``NNNNNN.bin``, little-endian float32 x, y, z, reflectance records)
and ``poses.txt`` ground truth (12 values per line, row-major 3x4
[R|t]), writes both layouts back, and selects keyframes by travelled
distance.
"""

from collections import namedtuple
import logging
import math
import os
import re

import numpy as np

from . import DEBUG1, DEBUG2, DEBUG3

_record_size = 16
_record_dtype = np.dtype('<f4')
_pose_tokens = 12
_ortho_tol = 1e-6
_frame_regexp = r'^(\d+)\.bin$'

AXES = {'x': 0, 'y': 1, 'z': 2}

_log = logging.getLogger(__name__).log


class PointCloudError(Exception):
    pass


class PointCloudFormatError(PointCloudError):
    pass


class PointCloud:
    """One LiDAR frame.

    ``points`` is a read-only (n, 4) float32 array of x, y, z and
    reflectance.  Records with any non-finite value are dropped on
    construction and counted in ``dropped``.
    """

    def __init__(self, points=None, dropped=0):
        if points is None:
            points = np.zeros((0, 4), dtype=np.float32)
        points = np.asarray(points, dtype=np.float32)
        if points.shape == (4,):
            points = points.reshape(1, 4)
        if points.ndim != 2 or points.shape[1] != 4:
            raise PointCloudError('points must be (n, 4), got %s' %
                                  (points.shape,))

        finite = np.isfinite(points).all(axis=1)
        bad = int(points.shape[0] - np.count_nonzero(finite))
        if bad:
            points = points[finite]
        points = np.ascontiguousarray(points)
        points.setflags(write=False)

        self.points = points
        self.dropped = dropped + bad

    @classmethod
    def from_xyz(cls, xyz, reflectance=0.0):
        xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
        points = np.empty((xyz.shape[0], 4), dtype=np.float32)
        points[:, :3] = xyz
        points[:, 3] = reflectance
        return cls(points)

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return (self.points.shape == other.points.shape and
                self.points.tobytes() == other.points.tobytes())

    def __repr__(self):
        return 'PointCloud(%d points, %d dropped)' % (len(self), self.dropped)

    @property
    def xyz(self):
        return self.points[:, :3]

    @property
    def reflectance(self):
        return self.points[:, 3]

    def transform(self, rotation, translation=(0.0, 0.0, 0.0)):
        """Return p' = R p + t for every point, reflectance kept."""
        rotation = np.asarray(rotation, dtype=np.float64)
        translation = np.asarray(translation, dtype=np.float64)
        xyz = self.xyz.astype(np.float64) @ rotation.T + translation
        points = np.empty_like(self.points)
        points[:, :3] = xyz
        points[:, 3] = self.points[:, 3]
        return PointCloud(points)


def rotation_about(axis, degrees):
    """Right-handed rotation matrix about a coordinate axis."""
    if axis not in AXES:
        raise PointCloudError('invalid axis: %s' % axis)
    a = math.radians(degrees)
    c, s = math.cos(a), math.sin(a)
    i = AXES[axis]
    j, k = (i + 1) % 3, (i + 2) % 3
    r = np.eye(3)
    r[j, j] = c
    r[j, k] = -s
    r[k, j] = s
    r[k, k] = c
    return r


class Pose(namedtuple('Pose', ['rotation', 'translation'])):
    """Rigid pose: 3x3 rotation and translation in meters."""

    def __new__(cls, rotation, translation):
        rotation = np.array(rotation, dtype=np.float64).reshape(3, 3)
        translation = np.array(translation, dtype=np.float64).reshape(3)
        if not (np.isfinite(rotation).all() and
                np.isfinite(translation).all()):
            raise PointCloudError('pose has non-finite values')
        x = np.abs(rotation.T @ rotation - np.eye(3)).max()
        if x > _ortho_tol:
            raise PointCloudError('rotation not orthonormal (%.3g)' % x)
        det = np.linalg.det(rotation)
        if abs(det - 1.0) > _ortho_tol:
            raise PointCloudError('rotation determinant %.9f != 1' % det)
        rotation.setflags(write=False)
        translation.setflags(write=False)
        return super().__new__(cls, rotation, translation)

    @classmethod
    def from_yaw(cls, x, y, yaw, z=0.0):
        """Pose in a z-up frame, yaw in degrees."""
        return cls(rotation_about('z', yaw), (x, y, z))

    def matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def distance(self, other):
        return float(np.linalg.norm(self.translation - other.translation))


class SensorProfile(namedtuple('SensorProfile',
                               ['name', 'y_low', 'y_high', 'height_axis'])):
    """Encoded height envelope of a sensor.

    y_low and y_high are chosen offline from the mount height and the
    channel pitch range; only they enter computation.
    """

    def __new__(cls, name, y_low, y_high, height_axis='z'):
        try:
            y_low = float(y_low)
            y_high = float(y_high)
        except (TypeError, ValueError):
            raise PointCloudError('%s: invalid height range: %s, %s' %
                                  (name, y_low, y_high))
        if not y_low < y_high:
            raise PointCloudError('%s: y_low (%g) must be < y_high (%g)' %
                                  (name, y_low, y_high))
        if height_axis not in AXES:
            raise PointCloudError('%s: invalid height_axis: %s' %
                                  (name, height_axis))
        return super().__new__(cls, name, y_low, y_high, height_axis)

    @property
    def axes(self):
        """(first planar, second planar, vertical) coordinate indices,
        right-handed so azimuth runs counter-clockwise seen from above."""
        k = AXES[self.height_axis]
        return (k + 1) % 3, (k + 2) % 3, k


PROFILES = {
    'hdl64': SensorProfile('hdl64', -3.0, 5.0, 'z'),
    'vlp16': SensorProfile('vlp16', -2.0, 22.0, 'z'),
}
DEFAULT_PROFILE = 'hdl64'


def sensor_profile(name):
    try:
        return PROFILES[name]
    except KeyError:
        raise PointCloudError('unknown sensor profile: %s (%s)' %
                              (name, '|'.join(sorted(PROFILES))))


def read_kitti_bin(path):
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise PointCloudError('%s: %s' % (path, e))

    extra = len(data) % _record_size
    if extra:
        raise PointCloudFormatError('%s: truncated record at offset %d' %
                                    (path, len(data) - extra))

    points = np.frombuffer(data, dtype=_record_dtype).reshape(-1, 4)
    cloud = PointCloud(points)
    _log(DEBUG2, '%s: %d points, %d dropped', path, len(cloud),
         cloud.dropped)

    return cloud


def write_kitti_bin(path, cloud):
    data = np.ascontiguousarray(cloud.points, dtype=_record_dtype).tobytes()
    try:
        with open(path, 'wb') as f:
            f.write(data)
    except OSError as e:
        raise PointCloudError('%s: %s' % (path, e))


def read_kitti_poses(path):
    try:
        f = open(path, 'r')
    except OSError as e:
        raise PointCloudError('%s: %s' % (path, e))

    poses = []
    with f:
        for lineno, line in enumerate(f, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != _pose_tokens:
                raise PointCloudFormatError(
                    '%s: line %d: expected %d values, got %d' %
                    (path, lineno, _pose_tokens, len(tokens)))
            try:
                m = np.array([float(x) for x in tokens]).reshape(3, 4)
                poses.append(Pose(m[:, :3], m[:, 3]))
            except (ValueError, PointCloudError) as e:
                raise PointCloudFormatError('%s: line %d: %s' %
                                            (path, lineno, e))

    _log(DEBUG1, '%s: %d poses', path, len(poses))

    return poses


def write_kitti_poses(path, poses):
    lines = []
    for pose in poses:
        m = np.hstack((pose.rotation, pose.translation.reshape(3, 1)))
        lines.append(' '.join('%.12e' % x for x in m.ravel()))

    try:
        with open(path, 'w') as f:
            for line in lines:
                f.write(line + '\n')
    except OSError as e:
        raise PointCloudError('%s: %s' % (path, e))


def select_keyframes(poses, spacing=1.0):
    """Greedy keyframe indices: frame 0, then every frame at least
    spacing meters from the previous keyframe."""
    if not spacing > 0:
        raise PointCloudError('spacing must be > 0: %s' % spacing)
    if not poses:
        return []

    keyframes = [0]
    last = poses[0].translation
    for i in range(1, len(poses)):
        t = poses[i].translation
        if np.linalg.norm(t - last) >= spacing:
            keyframes.append(i)
            last = t

    _log(DEBUG1, 'keyframes: %d of %d (spacing %gm)',
         len(keyframes), len(poses), spacing)

    return keyframes


def sequence_frames(seq_dir):
    """(frame_id, path) for the numerically named .bin scans of a
    sequence directory, or of its velodyne/ subdirectory."""
    for d in [os.path.join(seq_dir, 'velodyne'), seq_dir]:
        if os.path.isdir(d):
            break
    else:
        raise PointCloudError('%s: not a directory' % seq_dir)

    frames = []
    for name in os.listdir(d):
        r = re.search(_frame_regexp, name)
        if r is not None:
            frames.append((int(r.group(1)), os.path.join(d, name)))
    frames.sort()

    _log(DEBUG1, '%s: %d frames', d, len(frames))

    return frames

