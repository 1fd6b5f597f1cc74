import os
import struct
import sys
import threading
import unittest

import numpy as np

from . import liris_mixin

libpath = os.path.dirname(os.path.abspath(__file__))
sys.path[:0] = [os.path.join(libpath, os.pardir, 'lib')]
import liris.matcher
from liris.gabor import GaborConfig
from liris.matcher import DescriptorDatabase, describe


class LirisDatabaseTest(liris_mixin.Mixin, unittest.TestCase):
    def frames(self, seed, n, ids=None, **kwargs):
        rng = self.rng(seed)
        if ids is None:
            ids = range(n)
        return [describe(i, self.random_iris(rng, **kwargs))
                for i in ids]

    def test_01(self):
        frames = self.frames(40, 3, ids=[4, 9, 10])
        db = DescriptorDatabase(frames)
        path = self.path('db.liris')
        db.save(path)

        with open(path, 'rb') as f:
            data = f.read()
        self.assertEqual(data[:7], b'LIRIS1\0')
        self.assertEqual(struct.unpack('<4I', data[7:23]), (3, 80, 360, 4))
        record = 8 + 80 * 360 + 230400 // 8
        self.assertEqual(len(data), 23 + 3 * record)
        self.assertEqual(struct.unpack('<Q', data[23:31]), (4,))
        self.assertEqual(data[31:31 + 80 * 360], frames[0].iris.tobytes())
        self.assertEqual(data[31 + 80 * 360:23 + record],
                         frames[0].features.to_bytes())

        x = DescriptorDatabase.load(path)
        self.assertEqual(x.frame_ids, [4, 9, 10])
        self.assertEqual(list(x), frames)

        again = self.path('again.liris')
        x.save(again)
        with open(again, 'rb') as f:
            self.assertEqual(f.read(), data)
        self.assertFalse(os.path.exists(again + '.tmp'))

    def test_02(self):
        # bit count not a multiple of 8 pads each frame
        frames = self.frames(41, 2, rows=3, cols=37)
        frames = [describe(x.frame_id, x.iris, GaborConfig(1, 18))
                  for x in frames]
        db = DescriptorDatabase(frames)
        path = self.path('odd.liris')
        db.save(path)
        self.assertEqual(os.path.getsize(path),
                         23 + 2 * (8 + 3 * 37 + (2 * 3 * 37 + 7) // 8))
        self.assertEqual(list(DescriptorDatabase.load(path)), frames)

    def test_03(self):
        path = self.path('empty.liris')
        DescriptorDatabase().save(path)
        self.assertEqual(os.path.getsize(path), 23)
        db = DescriptorDatabase.load(path)
        self.assertEqual(len(db), 0)
        self.assertIsNone(db.dims)

    def test_04(self):
        db = DescriptorDatabase(self.frames(42, 2))
        path = self.path('db.liris')
        db.save(path)
        with open(path, 'rb') as f:
            data = f.read()

        for name, bad in [('magic', b'LIRIS2\0' + data[7:]),
                          ('truncated', data[:-1]),
                          ('trailing', data + b'\0'),
                          ('header', data[:20])]:
            x = self.path(name)
            with open(x, 'wb') as f:
                f.write(bad)
            with self.assertRaises(liris.matcher.DatabaseFormatError) as e:
                DescriptorDatabase.load(x)
            self.assertIn(x, str(e.exception))

        # second frame id not increasing
        record = 8 + 80 * 360 + 230400 // 8
        bad = bytearray(data)
        bad[23 + record:31 + record] = struct.pack('<Q', 0)
        x = self.path('order')
        with open(x, 'wb') as f:
            f.write(bytes(bad))
        with self.assertRaises(liris.matcher.DatabaseFormatError):
            DescriptorDatabase.load(x)

        with self.assertRaises(liris.matcher.MatcherError):
            DescriptorDatabase.load(self.path('missing'))

    def test_05(self):
        frames = self.frames(43, 3)
        db = DescriptorDatabase(frames[:2])
        with self.assertRaises(liris.matcher.MatcherError):
            db.append(frames[1])
        with self.assertRaises(liris.matcher.MatcherError):
            db.append(self.frames(44, 1, ids=[5], cols=180)[0])
        db.append(frames[2])
        self.assertEqual(db.frame_ids, [0, 1, 2])

    def test_06(self):
        frames = self.frames(45, 60)
        db = DescriptorDatabase(frames[:40])
        results = []

        def writer():
            for x in frames[40:]:
                db.append(x)

        def reader():
            probe = describe(1000, frames[0].iris)
            for i in range(5):
                results.append(db.query(probe, exclude_recent=5))

        threads = [threading.Thread(target=writer)] + \
            [threading.Thread(target=reader) for _ in range(3)]
        for x in threads:
            x.start()
        for x in threads:
            x.join()

        self.assertEqual(len(db), 60)
        self.assertEqual(len(results), 15)
        for r in results:
            self.assertEqual((r.candidate_id, r.distance), (0, 0.0))

    def test_07(self):
        frames = self.frames(46, 3)
        db = DescriptorDatabase(frames)
        self.assertEqual(db[0].frame_id, 0)
        self.assertEqual(db[-1].frame_id, 2)
        self.assertEqual([x.frame_id for x in db[1:]], [1, 2])
        with self.assertRaises(IndexError):
            db[3]

        # indexing waits for a writer holding the database lock
        got = []
        reader = threading.Thread(target=lambda: got.append(db[-1]))
        with db._lock:
            reader.start()
            reader.join(0.2)
            self.assertTrue(reader.is_alive())
            self.assertEqual(got, [])
        reader.join()
        self.assertEqual(got[0].frame_id, 2)
