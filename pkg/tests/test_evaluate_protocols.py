import csv
import os
import sys
import unittest

import numpy as np

from . import liris_mixin

libpath = os.path.dirname(os.path.abspath(__file__))
sys.path[:0] = [os.path.join(libpath, os.pardir, 'lib')]
import liris.evaluate
import liris.pnm
from liris.evaluate import GroundTruth, compute_affinity, protocol_a, \
    protocol_b
from liris.matcher import describe, match_pair
from liris.pointcloud import Pose


def revisit_positions():
    # 60 m straight, then the first 20 m again
    x = list(range(60)) + list(range(20))
    return np.array([[v, 0.0, 0.0] for v in x])


def oracle_affinity(positions):
    d = np.linalg.norm(positions[:, np.newaxis] - positions[np.newaxis],
                       axis=2)
    return d / d.max()


class LirisEvaluateTest(liris_mixin.Mixin, unittest.TestCase):
    def test_01(self):
        rng = self.rng(50)
        iris = self.random_iris(rng)
        self.assertTrue(np.array_equal(
            compute_affinity([describe(0, iris)]), np.zeros((1, 1))))
        a = compute_affinity([describe(0, iris), describe(1, iris)])
        self.assertTrue(np.array_equal(a, np.zeros((2, 2))))
        with self.assertRaises(liris.evaluate.EvaluateError):
            compute_affinity([])

    def test_02(self):
        rng = self.rng(51)
        frames = [describe(i, self.random_iris(rng)) for i in range(8)]
        a = compute_affinity(frames)
        self.assertTrue(np.array_equal(a, a.T))
        self.assertTrue(np.all(np.diag(a) == 0))
        self.assertTrue(np.all((a >= 0) & (a <= 1)))
        off = a[np.triu_indices(8, 1)]
        self.assertLess(abs(off.mean() - 0.5), 0.1)

        self.assertTrue(np.array_equal(compute_affinity(frames, threads=3),
                                       a))

        order = rng.permutation(8)
        b = compute_affinity([frames[i] for i in order])
        self.assertTrue(np.array_equal(b, a[np.ix_(order, order)]))

    def test_03(self):
        positions = revisit_positions()
        gt = GroundTruth(positions)
        affinity = oracle_affinity(positions)
        curve = protocol_a(None, gt, affinity=affinity)

        self.assertEqual(curve.tp[-1] + curve.fn[-1], 20)
        self.assertEqual(curve.tp[-1] + curve.fp[-1], 80 - 31)
        self.assertTrue(np.all(np.diff(curve.thresholds) > 0))
        self.assertTrue(np.all(np.diff(curve.tp) >= 0))
        self.assertTrue(np.all(np.diff(curve.fp) >= 0))
        self.assertTrue(np.all(np.diff(curve.recall) >= 0))
        nearest_wrong = 31 / np.max(np.linalg.norm(
            positions[:, np.newaxis] - positions[np.newaxis], axis=2))
        below = curve.thresholds < nearest_wrong
        self.assertTrue(np.all(curve.precision[below] == 1.0))
        self.assertEqual(curve.recall[0], 1.0)
        self.assertEqual(curve.best_f1()[0], 1.0)

    def test_04(self):
        positions = revisit_positions()
        gt = GroundTruth(positions)
        loops, n_gt = liris.evaluate.protocol_a_loops(
            None, gt, exclude_recent=30, affinity=oracle_affinity(positions))
        self.assertEqual(n_gt, 20)
        self.assertEqual([x.frame for x in loops], list(range(31, 80)))
        for x in loops:
            if x.frame >= 60:
                self.assertEqual((x.candidate, x.distance, x.correct,
                                  x.gt_match), (x.frame - 60, 0.0, True,
                                                x.frame - 60))
            else:
                self.assertEqual((x.candidate, x.correct, x.gt_match),
                                 (x.frame - 31, False, None))

    def test_05(self):
        # no revisits: recall stays 0, false positives still count
        positions = np.array([[i * 2.0, 0, 0] for i in range(40)])
        gt = GroundTruth(positions)
        curve = protocol_a(None, gt, affinity=oracle_affinity(positions))
        self.assertTrue(np.all(curve.recall == 0))
        self.assertEqual(curve.fp[-1], 40 - 31)
        self.assertEqual(curve.best_f1()[0], 0.0)

        with self.assertRaises(liris.evaluate.EvaluateError):
            protocol_a(None, GroundTruth(positions[:10]),
                       affinity=oracle_affinity(positions))

    def test_06(self):
        gt = GroundTruth([[0, 0, 0], [3, 0, 0]])
        self.assertEqual(liris.evaluate.pair_counts(gt), (1, 0))

        rng = self.rng(52)
        iris = self.random_iris(rng)
        frames = [describe(i, iris) for i in range(5)]
        gt = GroundTruth([[0, 0, 0], [3, 0, 0], [10, 0, 0], [20, 0, 0],
                          [21, 0, 0]])
        curve = protocol_b(frames, gt)
        self.assertEqual(list(curve.thresholds), [0.0])
        self.assertEqual(curve.recall[0], 1.0)
        self.assertEqual(curve.precision[0], 2 / 10)
        self.assertEqual((curve.tp[0], curve.fp[0], curve.fn[0]), (2, 8, 0))

    def test_07(self):
        rng = self.rng(53)
        positions = rng.uniform(0, 30, size=(60, 3))
        gt = GroundTruth(positions, loop_radius=5.0)
        d = np.linalg.norm(positions[:, np.newaxis] - positions[np.newaxis],
                           axis=2)
        i, j = np.triu_indices(60, 1)
        positive = int(np.count_nonzero(d[i, j] <= 5.0))
        self.assertEqual(liris.evaluate.pair_counts(gt),
                         (positive, i.size - positive))
        self.assertTrue(np.array_equal(
            liris.evaluate.ground_truth_affinity(gt), d <= 5.0))

        affinity = oracle_affinity(positions)
        curve = protocol_b(None, gt, np.unique(affinity[i, j]),
                           affinity=affinity)
        self.assertTrue(np.all(curve.tp + curve.fn == positive))
        self.assertTrue(np.all(np.diff(curve.tp) >= 0))
        self.assertTrue(np.all(np.diff(curve.fp) >= 0))
        self.assertEqual(curve.best_f1()[0], 1.0)

        thresholds = [0.1, 0.2, 0.3]
        curve = protocol_b(None, gt, thresholds, affinity=affinity)
        for t, tp, fp in zip(thresholds, curve.tp, curve.fp):
            predicted = affinity[i, j] <= t
            self.assertEqual(tp, np.count_nonzero(predicted & (d[i, j] <= 5)))
            self.assertEqual(fp, np.count_nonzero(predicted & (d[i, j] > 5)))

        with self.assertRaises(liris.evaluate.EvaluateError):
            protocol_b(None, gt, [0.2, 0.1], affinity=affinity)

    def test_08(self):
        poses = [Pose.from_yaw(x, 0, 0) for x in range(50)]
        poses += [Pose.from_yaw(x, 0, 0) for x in range(5)]
        poses += [Pose.from_yaw(x, 0, 180) for x in reversed(range(5, 12))]
        gt = GroundTruth.from_poses(poses, forward_axis='x')
        self.assertEqual(liris.evaluate.loop_direction(gt, 50, 0), 'same')
        self.assertEqual(liris.evaluate.loop_direction(gt, 55, 11),
                         'opposite')

        loops, n_gt = liris.evaluate.protocol_a_loops(
            None, gt, affinity=oracle_affinity(gt.positions))
        self.assertEqual(n_gt, 12)
        by = liris.evaluate.recall_by_direction(loops, gt, 0.0)
        self.assertEqual(by['same'], (5, 5, 1.0))
        self.assertEqual(by['opposite'], (7, 7, 1.0))

        with self.assertRaises(liris.evaluate.EvaluateError):
            liris.evaluate.loop_direction(GroundTruth(gt.positions), 50, 0)

    def test_09(self):
        rng = self.rng(54)
        frames = [describe(i, self.random_iris(rng)) for i in range(3)]
        stats = liris.evaluate.benchmark_matching(frames[:2], 1)
        self.assertEqual(len(stats.samples), 1)
        self.assertEqual(stats.pairs, [(0, 1)])

        stats = liris.evaluate.benchmark_matching(frames, 4)
        self.assertEqual(len(stats.samples), 8)
        self.assertLessEqual(stats.median, stats.p95)
        self.assertTrue(np.all(stats.samples > 0))
        self.assertEqual(stats.pairs[6:], [(0, 1), (0, 2)])

        with self.assertRaises(liris.evaluate.EvaluateError):
            liris.evaluate.benchmark_matching(frames[:1], 1)
        with self.assertRaises(liris.evaluate.EvaluateError):
            liris.evaluate.benchmark_matching(frames, 0)

    def test_10(self):
        positions = revisit_positions()
        gt = GroundTruth(positions)
        affinity = oracle_affinity(positions)
        curve = protocol_a(None, gt, affinity=affinity)

        path = self.path('x.pr.csv')
        liris.evaluate.write_pr_csv(path, curve)
        with open(path, newline='') as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], ['threshold', 'precision', 'recall',
                                   'tp', 'fp', 'fn'])
        self.assertEqual(len(rows), len(curve.thresholds) + 1)

        path = self.path('x.affinity.pgm')
        liris.evaluate.write_affinity_pgm(path, affinity)
        image = liris.pnm.read_pgm(path)
        self.assertEqual(image.shape, (80, 80))
        self.assertTrue(np.array_equal(image, np.rint(affinity * 255)))

        path = self.path('x.gt.pgm')
        positive = liris.evaluate.ground_truth_affinity(gt)
        liris.evaluate.write_ground_truth_pgm(path, positive)
        self.assertTrue(np.array_equal(liris.pnm.read_pgm(path) == 0,
                                       positive))

        path = self.path('x.affinity.csv')
        liris.evaluate.write_affinity_csv(path, affinity)
        self.assertTrue(np.allclose(np.loadtxt(path, delimiter=','),
                                    affinity, atol=1e-6))

    def test_11(self):
        with self.assertRaises(liris.evaluate.EvaluateError):
            GroundTruth([[0, 0, 0]], loop_radius=0)
        curve = liris.evaluate._curve([0.1, 0.2], [0, 3], [0, 1], [4, 1])
        self.assertEqual(list(curve.precision), [1.0, 0.75])
        self.assertEqual(list(curve.recall), [0.0, 0.75])
        f1, t, p, r = curve.best_f1()
        self.assertEqual((t, p, r), (0.2, 0.75, 0.75))
        self.assertAlmostEqual(f1, 0.75)

    def test_12(self):
        # the affinity path and the online query rank candidates alike
        rng = self.rng(54)
        frames = [describe(i, self.random_iris(rng)) for i in range(24)]
        affinity = compute_affinity(frames)
        for i, j in [(1, 0), (9, 3), (23, 17), (23, 0)]:
            self.assertEqual(affinity[i, j],
                             match_pair(frames[i], frames[j]).distance)
            self.assertEqual(affinity[j, i], affinity[i, j])

        gt = GroundTruth(rng.uniform(0, 20, size=(24, 3)))
        online, n_gt = liris.evaluate.protocol_a_loops(frames, gt,
                                                       exclude_recent=5)
        offline, m_gt = liris.evaluate.protocol_a_loops(
            None, gt, exclude_recent=5, affinity=affinity)
        self.assertEqual(n_gt, m_gt)
        self.assertEqual(len(online), 24 - 6)
        self.assertEqual([(x.frame, x.candidate, x.distance) for x in online],
                         [(x.frame, x.candidate, x.distance) for x in offline])
