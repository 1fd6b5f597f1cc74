import os
import sys
import unittest

import numpy as np

from . import liris_mixin

libpath = os.path.dirname(os.path.abspath(__file__))
sys.path[:0] = [os.path.join(libpath, os.pardir, 'lib')]
import liris.pointcloud
from liris.pointcloud import Pose


class LirisPointCloudTest(liris_mixin.Mixin, unittest.TestCase):
    def test_01(self):
        rng = self.rng(1)
        points = rng.normal(0, 20, size=(1000, 4)).astype(np.float32)
        path = self.path('000000.bin')
        liris.pointcloud.write_kitti_bin(path,
                                         liris.pointcloud.PointCloud(points))
        self.assertEqual(os.path.getsize(path), 1000 * 16)

        cloud = liris.pointcloud.read_kitti_bin(path)
        self.assertEqual(len(cloud), 1000)
        self.assertEqual(cloud.dropped, 0)
        self.assertTrue(np.array_equal(cloud.points, points))

    def test_02(self):
        path = self.path('000001.bin')
        with open(path, 'wb') as f:
            f.write(b'\0' * 17)
        with self.assertRaises(liris.pointcloud.PointCloudFormatError) as e:
            liris.pointcloud.read_kitti_bin(path)
        self.assertIn(path, str(e.exception))
        self.assertIn('offset 16', str(e.exception))

    def test_03(self):
        points = np.array([[1, 2, 3, 0.5],
                           [np.nan, 0, 0, 0],
                           [4, 5, np.inf, 0],
                           [7, 8, 9, 0.1]], dtype=np.float32)
        path = self.path('000002.bin')
        with open(path, 'wb') as f:
            f.write(points.astype('<f4').tobytes())
        cloud = liris.pointcloud.read_kitti_bin(path)
        self.assertEqual(len(cloud), 2)
        self.assertEqual(cloud.dropped, 2)
        self.assertTrue(np.array_equal(cloud.xyz, [[1, 2, 3], [7, 8, 9]]))

    def test_04(self):
        path = self.path('empty.bin')
        open(path, 'wb').close()
        self.assertEqual(len(liris.pointcloud.read_kitti_bin(path)), 0)

        with self.assertRaises(liris.pointcloud.PointCloudError) as e:
            liris.pointcloud.read_kitti_bin(self.path('missing.bin'))
        self.assertNotIsInstance(e.exception,
                                 liris.pointcloud.PointCloudFormatError)

    def test_05(self):
        poses = [Pose.from_yaw(0, 0, 0), Pose.from_yaw(10.5, -2, 30),
                 Pose.from_yaw(-3, 4, 271, z=1.5)]
        path = self.path('poses.txt')
        liris.pointcloud.write_kitti_poses(path, poses)
        x = liris.pointcloud.read_kitti_poses(path)
        self.assertEqual(len(x), 3)
        for a, b in zip(poses, x):
            self.assertTrue(np.allclose(a.matrix(), b.matrix(), atol=1e-9))

    def test_06(self):
        path = self.path('poses.txt')
        with open(path, 'w') as f:
            f.write('1 0 0 0 0 1 0 0 0 0 1 0\n')
            f.write('1 0 0 0 0 1 0 0 0 0 1\n')
        with self.assertRaises(liris.pointcloud.PointCloudFormatError) as e:
            liris.pointcloud.read_kitti_poses(path)
        self.assertIn('line 2', str(e.exception))

        with open(path, 'w') as f:
            f.write('\n')
            f.write('2 0 0 0 0 1 0 0 0 0 1 0\n')
        with self.assertRaises(liris.pointcloud.PointCloudFormatError) as e:
            liris.pointcloud.read_kitti_poses(path)
        self.assertIn('line 2', str(e.exception))
        self.assertIn('orthonormal', str(e.exception))

    def test_07(self):
        r = Pose.from_yaw(0, 0, 90).rotation
        self.assertTrue(np.allclose(r @ [1, 0, 0], [0, 1, 0]))
        with self.assertRaises(liris.pointcloud.PointCloudError):
            Pose(np.diag([1, 1, -1]), [0, 0, 0])

        a = Pose.from_yaw(0, 0, 0)
        b = Pose.from_yaw(3, 4, 0)
        self.assertAlmostEqual(a.distance(b), 5.0)

    def test_08(self):
        poses = [Pose.from_yaw(x, 0, 0) for x in [0, 0.4, 1.0, 1.5, 2.2]]
        self.assertEqual(liris.pointcloud.select_keyframes(poses, 1.0),
                         [0, 2, 4])
        self.assertEqual(liris.pointcloud.select_keyframes([], 1.0), [])
        with self.assertRaises(liris.pointcloud.PointCloudError):
            liris.pointcloud.select_keyframes(poses, 0)

    def test_09(self):
        velodyne = self.path('velodyne')
        os.mkdir(velodyne)
        for name in ['000010.bin', '000002.bin', 'notes.txt', 'x.bin']:
            open(os.path.join(velodyne, name), 'wb').close()
        frames = liris.pointcloud.sequence_frames(self.tmpdir)
        self.assertEqual([x[0] for x in frames], [2, 10])
        self.assertEqual(frames[0][1], os.path.join(velodyne, '000002.bin'))

    def test_10(self):
        self.assertEqual(liris.pointcloud.sensor_profile('vlp16').y_high,
                         22.0)
        with self.assertRaises(liris.pointcloud.PointCloudError):
            liris.pointcloud.sensor_profile('hdl32')
        with self.assertRaises(liris.pointcloud.PointCloudError):
            liris.pointcloud.SensorProfile('bad', 5, -3)
        self.assertEqual(liris.pointcloud.PROFILES['hdl64'].axes, (0, 1, 2))
        self.assertEqual(
            liris.pointcloud.SensorProfile('cam', -3, 5, 'y').axes, (2, 0, 1))

    def test_11(self):
        PointCloud = liris.pointcloud.PointCloud
        x = PointCloud([1.0, 2.0, 3.0, 0.5])
        self.assertEqual(x.points.shape, (1, 4))
        self.assertEqual(len(PointCloud(np.zeros((0, 4)))), 0)
        for shape in [(3, 8), (8,), (2, 3), (2, 2, 4), (0,)]:
            with self.assertRaises(liris.pointcloud.PointCloudError,
                                   msg=str(shape)):
                PointCloud(np.zeros(shape))
