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

"""Loop-closure evaluation

The liris.evaluate module scores descriptors against pose ground
truth:

  Protocol A  online loop detection.  Each keyframe queries all
              earlier keyframes except the exclude_recent most recent
              ones; a detection is correct when the returned
              candidate lies within loop_radius (strictly).
  Protocol B  place re-identification.  Every pair of keyframes is a
              positive when their positions are at most loop_radius
              apart; a pair is predicted positive when its descriptor
              distance is at most the threshold.

Both produce precision-recall curves over a sweep of distance
thresholds.  The module also computes affinity matrices and times
feature extraction plus matching per pair.
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import csv
import logging
from timeit import default_timer as timer

import numpy as np

from . import DEBUG1, DEBUG2, DEBUG3
from .gabor import GaborConfig, build_filter_bank, extract_binary_features
from .matcher import DescriptorDatabase, FrameDescriptor, match_many, \
    match_pair
from .pnm import write_pgm
from .pointcloud import AXES

NUM_THRESHOLDS = 200
DIRECTIONS = ('same', 'opposite')

_log = logging.getLogger(__name__).log


class EvaluateError(Exception):
    pass


class GroundTruth(namedtuple('GroundTruth',
                             ['positions', 'loop_radius', 'forwards'])):
    """Keyframe positions (n, 3) in meters and optional unit forward
    vectors (n, 3) for loop direction."""

    def __new__(cls, positions, loop_radius=4.0, forwards=None):
        positions = np.array(positions, dtype=np.float64).reshape(-1, 3)
        try:
            loop_radius = float(loop_radius)
        except (TypeError, ValueError):
            raise EvaluateError('invalid loop_radius: %s' % loop_radius)
        if not loop_radius > 0:
            raise EvaluateError('loop_radius must be > 0: %s' % loop_radius)
        if forwards is not None:
            forwards = np.array(forwards, dtype=np.float64).reshape(-1, 3)
            if forwards.shape != positions.shape:
                raise EvaluateError('%d forward vectors for %d positions' %
                                    (forwards.shape[0], positions.shape[0]))
            forwards.setflags(write=False)
        positions.setflags(write=False)
        return super().__new__(cls, positions, loop_radius, forwards)

    @classmethod
    def from_poses(cls, poses, loop_radius=4.0, forward_axis='z'):
        """forward_axis is the sensor axis pointing ahead: 'z' for
        KITTI camera poses, 'x' for z-up vehicle poses."""
        if forward_axis not in AXES:
            raise EvaluateError('invalid forward axis: %s' % forward_axis)
        k = AXES[forward_axis]
        positions = [x.translation for x in poses]
        forwards = [x.rotation[:, k] for x in poses]
        return cls(positions, loop_radius, forwards if poses else None)

    @property
    def size(self):
        return self.positions.shape[0]

    def distances_from(self, i, frames=None):
        """Euclidean distances from keyframe i to frames (default all)."""
        p = self.positions if frames is None else self.positions[frames]
        return np.linalg.norm(p - self.positions[i], axis=1)


class PRCurve(namedtuple('PRCurve', ['thresholds', 'precision', 'recall',
                                     'tp', 'fp', 'fn'])):
    def points(self):
        """(threshold, precision, recall, tp, fp, fn) rows."""
        for i in range(len(self.thresholds)):
            yield (float(self.thresholds[i]), float(self.precision[i]),
                   float(self.recall[i]), int(self.tp[i]), int(self.fp[i]),
                   int(self.fn[i]))

    def f1(self):
        p, r = self.precision, self.recall
        s = p + r
        return np.divide(2 * p * r, s, out=np.zeros_like(s), where=s > 0)

    def best_f1(self):
        """(f1, threshold, precision, recall) at the best F1, the
        smallest such threshold on ties."""
        if len(self.thresholds) == 0:
            raise EvaluateError('empty PR curve')
        f1 = self.f1()
        i = int(np.argmax(f1))
        return (float(f1[i]), float(self.thresholds[i]),
                float(self.precision[i]), float(self.recall[i]))


def _curve(thresholds, tp, fp, fn):
    tp = np.asarray(tp, dtype=np.int64)
    fp = np.asarray(fp, dtype=np.int64)
    fn = np.asarray(fn, dtype=np.int64)
    predicted = tp + fp
    actual = tp + fn
    precision = np.divide(tp, predicted, out=np.ones(tp.shape),
                          where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros(tp.shape), where=actual > 0)
    return PRCurve(np.asarray(thresholds, dtype=np.float64), precision,
                   recall, tp, fp, fn)


def default_thresholds(distances, num=NUM_THRESHOLDS):
    """num evenly spaced thresholds over the observed distance range."""
    d = np.asarray(distances, dtype=np.float64).ravel()
    d = d[np.isfinite(d)]
    if d.size == 0:
        return np.array([0.0, 1.0])
    return np.unique(np.linspace(d.min(), d.max(), num))


def _check_thresholds(thresholds):
    t = np.asarray(thresholds, dtype=np.float64).ravel()
    if t.size == 0 or np.any(np.diff(t) <= 0):
        raise EvaluateError('thresholds must be non-empty and strictly '
                            'increasing')
    return t


def _check_lengths(n, gt):
    if n != gt.size:
        raise EvaluateError('%d descriptors but %d ground truth positions' %
                            (n, gt.size))


def compute_affinity(descriptors, window=2, threads=None):
    """Symmetric matrix of match_pair distances: entry (j, i), i < j,
    is match_pair(descriptors[j], descriptors[i]) and is mirrored."""
    descriptors = list(descriptors)
    n = len(descriptors)
    if n < 1:
        raise EvaluateError('no descriptors')

    affinity = np.zeros((n, n))

    # newer frame against older, as in an online query
    def row(j):
        return [x.distance for x in
                match_many(descriptors[j], descriptors[:j], window)]

    if threads is None or threads <= 1:
        rows = map(row, range(1, n))
    else:
        executor = ThreadPoolExecutor(max_workers=threads)
        rows = executor.map(row, range(1, n))
    try:
        for j, x in enumerate(rows, 1):
            affinity[j, :j] = x
    finally:
        if threads is not None and threads > 1:
            executor.shutdown()

    affinity += affinity.T
    _log(DEBUG1, 'affinity: %d frames', n)

    return affinity


def ground_truth_affinity(gt):
    """n x n boolean matrix of pairs at most loop_radius apart."""
    n = gt.size
    positive = np.zeros((n, n), dtype=bool)
    for i in range(n):
        positive[i] = gt.distances_from(i) <= gt.loop_radius
    return positive


def pair_counts(gt):
    """(positive, negative) unordered pairs i < j under the inclusive
    loop_radius rule."""
    n = gt.size
    positive = 0
    for i in range(n - 1):
        positive += int(np.count_nonzero(
            gt.distances_from(i, slice(i + 1, None)) <= gt.loop_radius))
    return positive, n * (n - 1) // 2 - positive


LoopQuery = namedtuple('LoopQuery', ['frame', 'candidate', 'distance',
                                     'correct', 'gt_match'])
LoopQuery.__doc__ = '''\
One Protocol A query: best candidate, its descriptor distance, whether
the candidate is within loop_radius, and the nearest eligible
keyframe within loop_radius (None when the frame is no loop).'''


def _gt_match(gt, i, exclude_recent):
    end = i - exclude_recent
    if end <= 0:
        return None
    d = gt.distances_from(i, slice(0, end))
    j = int(np.argmin(d))
    return j if d[j] < gt.loop_radius else None


def protocol_a_ground_truth(gt, exclude_recent=30):
    """Per keyframe, the nearest eligible earlier keyframe strictly
    within loop_radius, or None."""
    if exclude_recent < 0:
        raise EvaluateError('exclude_recent must be >= 0: %s' %
                            exclude_recent)
    return [_gt_match(gt, i, exclude_recent) for i in range(gt.size)]


def protocol_a_loops(descriptors, gt, exclude_recent=30, window=2,
                     threads=None, affinity=None):
    """Run the Protocol A queries.

    With an affinity matrix the best candidate of keyframe i is the
    first minimum of affinity[i, :i - exclude_recent]; otherwise the
    descriptors are inserted in order into a DescriptorDatabase and
    queried online.  Frames with no eligible keyframe are skipped.
    """
    if affinity is not None:
        affinity = np.asarray(affinity, dtype=np.float64)
        if affinity.ndim != 2 or affinity.shape[0] != affinity.shape[1]:
            raise EvaluateError('affinity must be square, got %s' %
                                (affinity.shape,))
        n = affinity.shape[0]
    else:
        descriptors = list(descriptors)
        n = len(descriptors)
    _check_lengths(n, gt)
    matches = protocol_a_ground_truth(gt, exclude_recent)

    loops = []
    db = DescriptorDatabase()
    for i in range(n):
        end = i - exclude_recent
        if affinity is not None:
            if end > 0:
                j = int(np.argmin(affinity[i, :end]))
                loops.append((i, j, float(affinity[i, j])))
            continue

        if end > 0:
            r = db.query(descriptors[i], exclude_recent, window, threads)
            j = db.frame_ids.index(r.candidate_id)
            loops.append((i, j, r.distance))
        db.append(descriptors[i])

    results = []
    for i, j, distance in loops:
        correct = bool(gt.distances_from(i, [j])[0] < gt.loop_radius)
        results.append(LoopQuery(i, j, distance, correct, matches[i]))

    n_gt = sum(x is not None for x in matches)
    _log(DEBUG1, 'protocol A: %d frames, %d queries, %d true loops',
         n, len(results), n_gt)

    return results, n_gt


def protocol_a_curve(loops, n_gt, thresholds=None):
    if thresholds is None:
        thresholds = default_thresholds([x.distance for x in loops])
    thresholds = _check_thresholds(thresholds)

    distance = np.array([x.distance for x in loops], dtype=np.float64)
    correct = np.array([x.correct for x in loops], dtype=bool)
    predicted = distance[np.newaxis, :] <= thresholds[:, np.newaxis]
    tp = np.count_nonzero(predicted & correct, axis=1)
    fp = np.count_nonzero(predicted & ~correct, axis=1)

    return _curve(thresholds, tp, fp, n_gt - tp)


def protocol_a(descriptors, gt, exclude_recent=30, thresholds=None,
               window=2, threads=None, affinity=None):
    loops, n_gt = protocol_a_loops(descriptors, gt, exclude_recent, window,
                                   threads, affinity)
    return protocol_a_curve(loops, n_gt, thresholds)


def loop_direction(gt, i, j):
    """'same' or 'opposite' (headings more than 90 degrees apart)."""
    if gt.forwards is None:
        raise EvaluateError('ground truth has no headings')
    return 'opposite' if np.dot(gt.forwards[i], gt.forwards[j]) < 0 else \
        'same'


DirectionRecall = namedtuple('DirectionRecall', ['loops', 'detected',
                                                 'recall'])


def recall_by_direction(loops, gt, threshold):
    """Protocol A recall at one threshold restricted to true loops of
    each direction, keyed by 'same' and 'opposite'."""
    counts = {x: [0, 0] for x in DIRECTIONS}
    for x in loops:
        if x.gt_match is None:
            continue
        c = counts[loop_direction(gt, x.frame, x.gt_match)]
        c[0] += 1
        if x.correct and x.distance <= threshold:
            c[1] += 1

    return {k: DirectionRecall(n, tp, tp / n if n else 0.0)
            for k, (n, tp) in counts.items()}


def _pair_distances(affinity, gt):
    n = gt.size
    positive, negative = [], []
    for i in range(n - 1):
        label = gt.distances_from(i, slice(i + 1, None)) <= gt.loop_radius
        d = affinity[i, i + 1:]
        positive.append(d[label])
        negative.append(d[~label])
    if n < 2:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(positive), np.concatenate(negative)


def protocol_b(descriptors, gt, thresholds=None, window=2, threads=None,
               affinity=None):
    if affinity is None:
        affinity = compute_affinity(descriptors, window, threads)
    affinity = np.asarray(affinity, dtype=np.float64)
    _check_lengths(affinity.shape[0], gt)

    positive, negative = _pair_distances(affinity, gt)
    if thresholds is None:
        thresholds = default_thresholds(np.concatenate((positive, negative)))
    thresholds = _check_thresholds(thresholds)

    positive.sort()
    negative.sort()
    tp = np.searchsorted(positive, thresholds, side='right')
    fp = np.searchsorted(negative, thresholds, side='right')
    _log(DEBUG1, 'protocol B: %d positive, %d negative pairs',
         positive.size, negative.size)

    return _curve(thresholds, tp, fp, positive.size - tp)


class BenchmarkStats(namedtuple('BenchmarkStats',
                                ['mean', 'median', 'p95', 'samples',
                                 'pairs'])):
    pass


def benchmark_matching(descriptors, trials, gabor_config=None, window=2):
    """Seconds per pair for feature extraction from an existing iris
    image plus match_pair, probe = descriptors[t % n] in trial t,
    against every other descriptor.  Iris generation is not timed."""
    descriptors = list(descriptors)
    if len(descriptors) < 2:
        raise EvaluateError('need at least 2 descriptors, got %d' %
                            len(descriptors))
    if trials < 1:
        raise EvaluateError('trials must be >= 1: %s' % trials)

    config = gabor_config or GaborConfig()
    bank = build_filter_bank(config, descriptors[0].shape[1])

    samples, pairs = [], []
    n = len(descriptors)
    for t in range(trials):
        probe = descriptors[t % n]
        for q in descriptors:
            if q is probe:
                continue
            start = timer()
            candidate = FrameDescriptor(
                q.frame_id, q.iris, extract_binary_features(q.iris, bank))
            match_pair(probe, candidate, window)
            samples.append(timer() - start)
            pairs.append((probe.frame_id, q.frame_id))

    samples = np.array(samples)
    stats = BenchmarkStats(float(samples.mean()), float(np.median(samples)),
                           float(np.percentile(samples, 95)), samples, pairs)
    _log(DEBUG1, 'benchmark: %d pairs, mean %.6fs', len(pairs), stats.mean)

    return stats


def write_pr_csv(path, curve):
    with open(path, 'w', newline='') as f:
        w = csv.writer(f)
        w.writerow(['threshold', 'precision', 'recall', 'tp', 'fp', 'fn'])
        for t, p, r, tp, fp, fn in curve.points():
            w.writerow(['%.6f' % t, '%.6f' % p, '%.6f' % r, tp, fp, fn])


def write_affinity_csv(path, affinity):
    np.savetxt(path, affinity, fmt='%.6f', delimiter=',')


def write_affinity_pgm(path, affinity):
    """Distance x 255, so darker is more similar."""
    write_pgm(path, np.clip(np.asarray(affinity) * 255, 0, 255))


def write_ground_truth_pgm(path, positive):
    """Positive pairs black, others white."""
    write_pgm(path, np.where(positive, 0, 255).astype(np.uint8))


def write_timing_csv(path, stats):
    with open(path, 'w', newline='') as f:
        w = csv.writer(f)
        w.writerow(['probe_id', 'candidate_id', 'seconds'])
        for (p, q), s in zip(stats.pairs, stats.samples):
            w.writerow([p, q, '%.9f' % s])
