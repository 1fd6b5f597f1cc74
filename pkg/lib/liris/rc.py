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

import sys
import os
import re
import pprint
import logging

from . import DEBUG1, DEBUG2, DEBUG3

_search_path = ['__init__()', '__config__()', '.', '~']
_filename = '.lirisrc'
VARNAMES = (
    'profile',
    'y_low',
    'y_high',
    'height_axis',
    'radial_bins',
    'angular_bins',
    'max_range',
    'num_filters',
    'base_wavelength',
    'wavelength_multiplier',
    'sigma_on_f',
    'window',
    'exclude_recent',
    'loop_radius',
    'spacing',
    'num_thresholds',
    'threshold',
    'threads',
)
_valid_varnames = set(VARNAMES)

_indent = 2


class LirisRcError(Exception):
    pass


class LirisRc:
    """Settings merged from constructor arguments, an explicit config
    file and .lirisrc in the current and home directories, earlier
    sources taking priority."""

    def __init__(self,
                 tag=None,
                 init_lirisrc=None,
                 config_file=None,
                 search_path=_search_path,
                 filename=_filename):
        self._log = logging.getLogger(__name__).log
        self.tag = tag
        self.init_lirisrc = init_lirisrc
        self.config_file = config_file
        self.search_path = search_path
        self.filename = filename
        self.lirisrc = {}

        if self.tag is not None:
            regexp = r'^[\w-]+$'
            if re.search(regexp, self.tag) is None:
                raise LirisRcError('tag must match regexp "%s"' % regexp)

        if self.init_lirisrc:
            x = set(self.init_lirisrc) - _valid_varnames
            if x:
                raise LirisRcError('invalid varname: %s' %
                                   ', '.join(sorted(x)))

        self.__parse_path()
        s = pprint.pformat(self.lirisrc, indent=_indent)
        self._log(DEBUG1, 'lirisrc: %s', s)

    def __parse_path(self):
        lirisrcs = []

        for basename in self.search_path:
            if basename == '__init__()':
                if self.init_lirisrc:
                    s = pprint.pformat(self.init_lirisrc, indent=_indent)
                    self._log(DEBUG2, '__parse_path: __init__(): %s', s)
                    lirisrcs.append(self.init_lirisrc)
            elif basename == '__config__()':
                if self.config_file is not None:
                    if not os.path.isfile(self.config_file):
                        raise LirisRcError('%s: no such file' %
                                           self.config_file)
                    d = self.__parse_file(self.config_file)
                    s = pprint.pformat(d, indent=_indent)
                    self._log(DEBUG2, '__parse_path: %s: %s',
                              self.config_file, s)
                    lirisrcs.append(d)
            else:
                path = os.path.expanduser(basename)  # ~, ~user
                path = os.path.expandvars(path)      # $FOO
                path = os.path.join(path, self.filename)
                d = self.__parse_file(path)
                if d:
                    s = pprint.pformat(d, indent=_indent)
                    self._log(DEBUG2, '__parse_path: %s: %s', path, s)
                    lirisrcs.append(d)

        if lirisrcs:
            self.__merge_lirisrcs(lirisrcs)

    def __parse_file(self, path):
        try:
            f = open(path, 'r')
        except IOError as msg:
            self._log(DEBUG3, 'open %s: %s', path, msg)
            return None

        lirisrc = {}
        with f:
            for line in f:
                line = line.rstrip('\r\n')
                if re.search(r'(^\s*#|^\s*$)', line):
                    continue
                if self.tag:
                    result = re.search(r'^\s*(\w+)%([\w-]+)\s*=\s*(.+?)\s*$',
                                       line)
                    if result is None or result.group(2) != self.tag:
                        continue
                else:
                    result = re.search(r'^\s*(\w+)\s*=\s*(.+?)\s*$', line)
                    if result is None:
                        continue
                if result.group(1) in _valid_varnames:
                    lirisrc[result.group(1)] = result.group(result.lastindex)
                else:
                    self._log(DEBUG1, '%s: ignoring unknown varname: %s',
                              path, result.group(1))

        return lirisrc

    def __merge_lirisrcs(self, lirisrcs):
        lirisrcs.reverse()
        s = pprint.pformat(lirisrcs, indent=_indent)
        self._log(DEBUG2, 'lirisrcs: %s', s)

        for lirisrc in lirisrcs:
            for key in lirisrc.keys():
                self.lirisrc[key] = lirisrc[key]


if __name__ == '__main__':
    # python rc.py [tag]
    import liris.rc

    tag = None
    if len(sys.argv) > 1 and sys.argv[1]:
        tag = sys.argv[1]

    try:
        rc = liris.rc.LirisRc(tag=tag)
    except LirisRcError as msg:
        print('liris.rc.LirisRc:', msg, file=sys.stderr)
        sys.exit(1)

    print('lirisrc:', pprint.pformat(rc.lirisrc, indent=_indent))
