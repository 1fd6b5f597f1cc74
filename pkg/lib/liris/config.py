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

"""Validated run settings

RunConfig turns the merged lirisrc/flag values (strings, or already
typed values) into SensorProfile, IrisConfig and GaborConfig objects
and protocol parameters, rejecting every invalid value before a
command starts work.
"""

import logging
import os

from . import DEBUG1, DEBUG2, DEBUG3
from .gabor import GaborConfig, GaborError
from .iris import IrisConfig, IrisError
from .pointcloud import DEFAULT_PROFILE, PointCloudError, SensorProfile, \
    sensor_profile
from .rc import LirisRc

MAX_FILTERS = 8
THREADS_ENV = 'LIRIS_THREADS'

_defaults = {
    'profile': DEFAULT_PROFILE,
    'radial_bins': 80,
    'angular_bins': 360,
    'max_range': 80.0,
    'num_filters': 4,
    'base_wavelength': 18.0,
    'wavelength_multiplier': 2.0,
    'sigma_on_f': 0.5,
    'window': 2,
    'exclude_recent': 30,
    'loop_radius': 4.0,
    'spacing': None,
    'num_thresholds': 200,
    'threshold': None,
}

_types = {
    'profile': str,
    'y_low': float,
    'y_high': float,
    'height_axis': str,
    'radial_bins': int,
    'angular_bins': int,
    'max_range': float,
    'num_filters': int,
    'base_wavelength': float,
    'wavelength_multiplier': float,
    'sigma_on_f': float,
    'window': int,
    'exclude_recent': int,
    'loop_radius': float,
    'spacing': float,
    'num_thresholds': int,
    'threshold': float,
    'threads': int,
}


class RunConfigError(Exception):
    pass


def _convert(name, value):
    if name not in _types:
        raise RunConfigError('invalid varname: %s' % name)
    if value is None:
        return None
    kind = _types[name]
    try:
        if kind is int and isinstance(value, str):
            return int(value, 10)
        return kind(value)
    except (TypeError, ValueError):
        raise RunConfigError('%s: invalid %s value: %s' %
                             (name, kind.__name__, value))


class RunConfig:
    def __init__(self, values=None, environ=None):
        self._log = logging.getLogger(__name__).log
        if environ is None:
            environ = os.environ

        x = dict(_defaults)
        for k, v in (values or {}).items():
            x[k] = _convert(k, v)
        self.values = x

        try:
            profile = sensor_profile(x['profile'])
            if any(x.get(k) is not None
                   for k in ('y_low', 'y_high', 'height_axis')):
                profile = SensorProfile(
                    profile.name,
                    profile.y_low if x.get('y_low') is None else x['y_low'],
                    profile.y_high if x.get('y_high') is None else
                    x['y_high'],
                    x.get('height_axis') or profile.height_axis)
        except PointCloudError as e:
            raise RunConfigError(e)
        self.profile = profile

        try:
            self.iris = IrisConfig(x['radial_bins'], x['angular_bins'],
                                   x['max_range'], profile)
        except IrisError as e:
            raise RunConfigError(e)

        if not 1 <= x['num_filters'] <= MAX_FILTERS:
            raise RunConfigError('num_filters must be in 1..%d: %d' %
                                 (MAX_FILTERS, x['num_filters']))
        try:
            self.gabor = GaborConfig(x['num_filters'], x['base_wavelength'],
                                     x['wavelength_multiplier'],
                                     x['sigma_on_f'])
        except GaborError as e:
            raise RunConfigError(e)
        if self.iris.angular_bins < 2 * self.gabor.base_wavelength:
            raise RunConfigError('angular_bins (%d) must be >= 2 * '
                                 'base_wavelength (%g)' %
                                 (self.iris.angular_bins,
                                  self.gabor.base_wavelength))

        self.window = self.__minimum('window', 0)
        self.exclude_recent = self.__minimum('exclude_recent', 0)
        self.num_thresholds = self.__minimum('num_thresholds', 2)
        self.loop_radius = x['loop_radius']
        if not self.loop_radius > 0:
            raise RunConfigError('loop_radius must be > 0: %s' %
                                 self.loop_radius)
        self.spacing = x['spacing']
        if self.spacing is not None and not self.spacing > 0:
            raise RunConfigError('spacing must be > 0: %s' % self.spacing)
        self.threshold = x['threshold']
        if self.threshold is not None and not 0 <= self.threshold <= 1:
            raise RunConfigError('threshold must be in [0, 1]: %s' %
                                 self.threshold)

        self.threads = x.get('threads')
        if self.threads is None and environ.get(THREADS_ENV):
            self.threads = _convert('threads', environ[THREADS_ENV])
            self._log(DEBUG2, '%s=%d', THREADS_ENV, self.threads)
        if self.threads is None:
            self.threads = os.cpu_count() or 1
        if self.threads < 1:
            raise RunConfigError('threads must be >= 1: %d' % self.threads)

        self._log(DEBUG1, 'RunConfig: %s', self)

    def __minimum(self, name, low):
        x = self.values[name]
        if x < low:
            raise RunConfigError('%s must be >= %d: %d' % (name, low, x))
        return x

    @classmethod
    def load(cls, flags=None, tag=None, config_file=None, environ=None):
        """Merge flags over config_file and .lirisrc files, then
        validate."""
        rc = LirisRc(tag=tag, init_lirisrc=flags, config_file=config_file)
        return cls(rc.lirisrc, environ)

    def __repr__(self):
        return ('RunConfig(%s, %s, %s, window=%d, exclude_recent=%d, '
                'loop_radius=%g, spacing=%s, num_thresholds=%d, '
                'threshold=%s, threads=%d)' %
                (self.profile, self.iris, self.gabor, self.window,
                 self.exclude_recent, self.loop_radius, self.spacing,
                 self.num_thresholds, self.threshold, self.threads))
