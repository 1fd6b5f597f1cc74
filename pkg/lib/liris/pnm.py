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

"""Binary PGM (P5, maxval 255) images for inspection."""

import numpy as np

_magic = b'P5'
_maxval = 255


class PnmError(Exception):
    pass


def write_pgm(path, image):
    image = np.asarray(image)
    if image.ndim != 2:
        raise PnmError('expect 2-D image, got shape %s' % (image.shape,))
    if image.dtype != np.uint8:
        image = np.clip(np.rint(image), 0, _maxval).astype(np.uint8)

    rows, cols = image.shape
    header = b'%s\n%d %d\n%d\n' % (_magic, cols, rows, _maxval)
    try:
        with open(path, 'wb') as f:
            f.write(header)
            f.write(np.ascontiguousarray(image).tobytes())
    except OSError as e:
        raise PnmError('%s: %s' % (path, e))


def read_pgm(path):
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise PnmError('%s: %s' % (path, e))

    # magic, width, height, maxval; comments are not written by us
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos+1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos+1].isspace():
            pos += 1
        if start == pos:
            raise PnmError('%s: truncated header' % path)
        fields.append(data[start:pos])
    pos += 1

    if fields[0] != _magic:
        raise PnmError('%s: not a binary PGM' % path)
    try:
        cols, rows, maxval = (int(x) for x in fields[1:])
    except ValueError:
        raise PnmError('%s: invalid header' % path)
    if maxval != _maxval:
        raise PnmError('%s: maxval %d not supported' % (path, maxval))
    if len(data) - pos != rows * cols:
        raise PnmError('%s: expected %d pixels, got %d' %
                       (path, rows * cols, len(data) - pos))

    return np.frombuffer(data, dtype=np.uint8, offset=pos).reshape(rows, cols)
