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

"""LiDAR-Iris place recognition

liris.pointcloud   KITTI scans and poses, sensor profiles, keyframes
liris.iris         polar bird's-eye LiDAR-Iris images
liris.spectral     phase correlation of iris images
liris.gabor        LoG-Gabor filter bank and binary feature maps
liris.matcher      yaw-aligned Hamming matching, descriptor database
liris.evaluate     loop detection and place re-identification curves
liris.synth        synthetic worlds and looped trajectories
liris.config       validated run settings from liris.rc
liris.pnm          binary PGM images

Log levels DEBUG2 and DEBUG3 are finer than logging.DEBUG (DEBUG1).
"""

import logging

__version__ = '0.1.0'

DEBUG1 = logging.DEBUG
DEBUG2 = DEBUG1 - 1
DEBUG3 = DEBUG2 - 1

logging.addLevelName(DEBUG2, 'DEBUG2')
logging.addLevelName(DEBUG3, 'DEBUG3')
