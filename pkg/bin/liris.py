#!/usr/bin/env python3

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
import signal
import getopt
import pprint
import logging
import types
from concurrent.futures import ThreadPoolExecutor

import numpy

libpath = os.path.dirname(os.path.abspath(__file__))
sys.path[:0] = [os.path.join(libpath, os.pardir, 'lib')]
import liris
import liris.config
import liris.evaluate
import liris.gabor
import liris.iris
import liris.matcher
import liris.pnm
import liris.pointcloud
import liris.rc
import liris.spectral
import liris.synth

EXIT_FAILURE = 1
EXIT_USAGE = 2

config_options = {
    '--profile': 'profile',
    '--y-low': 'y_low',
    '--y-high': 'y_high',
    '--height-axis': 'height_axis',
    '--radial-bins': 'radial_bins',
    '--angular-bins': 'angular_bins',
    '--max-range': 'max_range',
    '--filters': 'num_filters',
    '--base-wavelength': 'base_wavelength',
    '--multiplier': 'wavelength_multiplier',
    '--sigma-on-f': 'sigma_on_f',
    '--window': 'window',
    '--exclude': 'exclude_recent',
    '--loop-radius': 'loop_radius',
    '--spacing': 'spacing',
    '--thresholds': 'num_thresholds',
    '--threshold': 'threshold',
    '--threads': 'threads',
}

command_options = {
    'extract': ['--iris-dir', '--poses', '--poses-out'],
    'eval': ['--protocol', '--out', '--no-affinity', '--forward-axis'],
    'bench': ['--trials', '--out'],
    'synth': ['--length', '--revisit', '--seed', '--jitter', '--extent'],
}

command_args = {
    'extract': ['seq_dir', 'out_db'],
    'eval': ['db', 'poses'],
    'bench': ['db'],
    'synth': ['out_dir'],
}

# exceptions reported with EXIT_USAGE, others with EXIT_FAILURE
usage_errors = (
    liris.config.RunConfigError,
    liris.rc.LirisRcError,
    liris.pointcloud.PointCloudFormatError,
    liris.matcher.DatabaseFormatError,
)

runtime_errors = (
    liris.pointcloud.PointCloudError,
    liris.iris.IrisError,
    liris.spectral.SpectralError,
    liris.gabor.GaborError,
    liris.matcher.MatcherError,
    liris.evaluate.EvaluateError,
    liris.synth.SynthError,
    liris.pnm.PnmError,
    OSError,
)


class UsageError(Exception):
    pass


def main():
    try:
        signal.signal(signal.SIGPIPE, signal.SIG_DFL)
    except AttributeError:
        # Windows
        pass

    options = parse_opts()

    if options['debug']:
        logger = logging.getLogger()
        if options['debug'] == 3:
            logger.setLevel(liris.DEBUG3)
        elif options['debug'] == 2:
            logger.setLevel(liris.DEBUG2)
        elif options['debug'] == 1:
            logger.setLevel(liris.DEBUG1)

        log_format = '%(message)s'
        handler = logging.StreamHandler()
        formatter = logging.Formatter(log_format)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

        logger.log(liris.DEBUG3, 'Python %s', sys.version.replace('\n', ''))
        logger.log(liris.DEBUG3, 'numpy %s', numpy.__version__)
        logger.log(liris.DEBUG3, 'lidar-iris %s', liris.__version__)

    try:
        config = liris.config.RunConfig.load(
            flags=options['flags'], tag=options['tag'],
            config_file=options['config'])
    except (liris.config.RunConfigError, liris.rc.LirisRcError) as e:
        print_exception(e)
        sys.exit(EXIT_USAGE)

    commands = {
        'extract': cmd_extract,
        'eval': cmd_eval,
        'bench': cmd_bench,
        'synth': cmd_synth,
    }

    try:
        r = commands[options['command']](config, options, *options['args'])
    except UsageError as e:
        print(e, file=sys.stderr)
        sys.exit(EXIT_USAGE)
    except usage_errors as e:
        print_exception(e)
        sys.exit(EXIT_USAGE)
    except runtime_errors as e:
        print_exception(e)
        sys.exit(EXIT_FAILURE)

    print('%s (%.2f seconds)' % (r.summary, r.wall_time))

    sys.exit(0)


def print_exception(e):
    kind = type(e)
    if kind.__module__ == 'builtins':
        name = kind.__name__
    else:
        name = '%s.%s' % (kind.__module__, kind.__name__)
    print('%s: %s' % (name, e), file=sys.stderr)


def _wall_time(x):
    from functools import wraps
    from timeit import default_timer

    @wraps(x)
    def wrapper(*args, **kwargs):
        start = default_timer()
        r = x(*args, **kwargs)
        end = default_timer()

        secs = end-start
        r.wall_time = secs

        logging.getLogger(__name__).log(
            liris.DEBUG1, '%s: wall time %.2f seconds', x.__name__, secs)

        return r

    return wrapper


def _map(config, fn, items):
    if config.threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as executor:
            return list(executor.map(fn, items))
    return [fn(x) for x in items]


@_wall_time
def cmd_extract(config, options, seq_dir, out_db):
    frames = liris.pointcloud.sequence_frames(seq_dir)
    if not frames:
        raise liris.pointcloud.PointCloudError('%s: no .bin frames' %
                                               seq_dir)

    poses_path = options['poses']
    if poses_path is None:
        x = os.path.join(seq_dir, 'poses.txt')
        if os.path.isfile(x):
            poses_path = x
    if poses_path is None and (config.spacing is not None or
                               options['poses-out'] is not None):
        raise UsageError('--spacing and --poses-out need poses '
                         '(--poses or %s)' % os.path.join(seq_dir,
                                                         'poses.txt'))

    poses = None
    keyframes = list(range(len(frames)))
    if poses_path is not None:
        poses = liris.pointcloud.read_kitti_poses(poses_path)
        if len(poses) != len(frames):
            raise UsageError('%s: %d poses for %d frames' %
                             (poses_path, len(poses), len(frames)))
        if config.spacing is not None:
            keyframes = liris.pointcloud.select_keyframes(poses,
                                                          config.spacing)

    def describe(i):
        frame_id, path = frames[i]
        cloud = liris.pointcloud.read_kitti_bin(path)
        iris = liris.iris.generate_iris(cloud, config.iris)
        return liris.matcher.describe(frame_id, iris, config.gabor)

    db = liris.matcher.DescriptorDatabase(_map(config, describe, keyframes))

    if options['iris-dir'] is not None:
        os.makedirs(options['iris-dir'], exist_ok=True)
        for x in db:
            liris.pnm.write_pgm(os.path.join(options['iris-dir'],
                                             '%06d.pgm' % x.frame_id),
                                x.iris)
    db.save(out_db)
    if options['poses-out'] is not None:
        liris.pointcloud.write_kitti_poses(options['poses-out'],
                                           [poses[i] for i in keyframes])

    return types.SimpleNamespace(
        db=db,
        summary='extract: %d frames of %d' % (len(db), len(frames)))


def _prefix(options, db_path):
    if options['out'] is not None:
        return options['out']
    return os.path.splitext(db_path)[0]


@_wall_time
def cmd_eval(config, options, db_path, poses_path):
    db = liris.matcher.DescriptorDatabase.load(db_path)
    poses = liris.pointcloud.read_kitti_poses(poses_path)
    if len(db) != len(poses):
        raise UsageError('%s: %d frames but %s: %d poses' %
                         (db_path, len(db), poses_path, len(poses)))
    if not len(db):
        raise UsageError('%s: no frames' % db_path)

    descriptors = list(db)
    gt = liris.evaluate.GroundTruth.from_poses(poses, config.loop_radius,
                                               options['forward-axis'])
    prefix = _prefix(options, db_path)

    affinity = None
    if options['protocol'] == 'B' or not options['no-affinity']:
        affinity = liris.evaluate.compute_affinity(descriptors,
                                                   config.window,
                                                   config.threads)
        liris.evaluate.write_affinity_csv(prefix + '.affinity.csv',
                                          affinity)
        liris.evaluate.write_affinity_pgm(prefix + '.affinity.pgm',
                                          affinity)
        liris.evaluate.write_ground_truth_pgm(
            prefix + '.gt.pgm', liris.evaluate.ground_truth_affinity(gt))

    if options['protocol'] == 'A':
        loops, n_gt = liris.evaluate.protocol_a_loops(
            descriptors, gt, config.exclude_recent, config.window,
            config.threads, affinity)
        thresholds = liris.evaluate.default_thresholds(
            [x.distance for x in loops], config.num_thresholds)
        curve = liris.evaluate.protocol_a_curve(loops, n_gt, thresholds)
        f1, t, p, r = curve.best_f1()
        summary = ('protocol A: %d frames, %d queries, %d true loops, '
                   'best F1 %.4f at threshold %.6f (precision %.4f, '
                   'recall %.4f)' % (len(db), len(loops), n_gt, f1, t, p, r))
        at = t if config.threshold is None else config.threshold
        by = liris.evaluate.recall_by_direction(loops, gt, at)
        summary += ', at threshold %.6f: %s' % (at, ', '.join(
            '%s-direction recall %.4f (%d of %d)' %
            (k, x.recall, x.detected, x.loops) for k, x in by.items()))
    else:
        thresholds = liris.evaluate.default_thresholds(
            _upper(affinity), config.num_thresholds)
        curve = liris.evaluate.protocol_b(descriptors, gt, thresholds,
                                          affinity=affinity)
        positive, negative = liris.evaluate.pair_counts(gt)
        f1, t, p, r = curve.best_f1()
        summary = ('protocol B: %d frames, %d positive and %d negative '
                   'pairs (%d and %d ordered), best F1 %.4f at threshold '
                   '%.6f (precision %.4f, recall %.4f)' %
                   (len(db), positive, negative, 2 * positive,
                    2 * negative, f1, t, p, r))

    liris.evaluate.write_pr_csv(prefix + '.pr.csv', curve)

    return types.SimpleNamespace(curve=curve, summary=summary)


def _upper(affinity):
    return affinity[numpy.triu_indices(affinity.shape[0], 1)]


@_wall_time
def cmd_bench(config, options, db_path):
    db = liris.matcher.DescriptorDatabase.load(db_path)
    if len(db) < 2:
        raise UsageError('%s: need at least 2 frames, got %d' %
                         (db_path, len(db)))
    if db.dims[0] != config.gabor.num_filters:
        raise UsageError('%s: database has %d filters, config %d' %
                         (db_path, db.dims[0], config.gabor.num_filters))

    stats = liris.evaluate.benchmark_matching(list(db), options['trials'],
                                              config.gabor, config.window)
    path = options['out']
    if path is None:
        path = _prefix(options, db_path) + '.timing.csv'
    liris.evaluate.write_timing_csv(path, stats)

    return types.SimpleNamespace(
        stats=stats,
        summary='bench: %d pairs, mean %.6f, median %.6f, p95 %.6f '
        'seconds per pair' % (len(stats.samples), stats.mean, stats.median,
                              stats.p95))


@_wall_time
def cmd_synth(config, options, out_dir):
    world = liris.synth.generate_world(options['seed'], options['extent'],
                                       profile=config.profile)
    poses, gt = liris.synth.loop_trajectory(
        world, options['length'], options['revisit'],
        spacing=config.spacing or 1.0, seed=options['seed'],
        loop_radius=config.loop_radius)
    liris.synth.export_sequence(out_dir, world, poses, config.iris,
                                options['jitter'], options['seed'])
    positive, _ = liris.evaluate.pair_counts(gt)

    return types.SimpleNamespace(
        summary='synth: %d frames, %d obstacles, %d positive pairs' %
        (len(poses), len(world.obstacles), positive))


def _number(opt, arg, kind, ok):
    try:
        x = kind(arg)
    except ValueError:
        x = None
    if x is None or not ok(x):
        print('Invalid %s value: %s' % (opt, arg), file=sys.stderr)
        sys.exit(EXIT_USAGE)
    return x


def parse_opts():
    options = {
        'command': None,
        'args': [],
        'flags': {},
        'config': None,
        'iris-dir': None,
        'poses': None,
        'poses-out': None,
        'protocol': 'A',
        'out': None,
        'no-affinity': False,
        'forward-axis': 'z',
        'trials': 1,
        'length': 500,
        'revisit': 0.3,
        'seed': 0,
        'jitter': 0.0,
        'extent': 200.0,
        'debug': 0,
        'tag': None,
    }

    short_options = 'Dt:'
    long_options = ['version', 'help', 'config=', 'no-affinity'] + \
        [x[2:] + '=' for x in config_options] + \
        sorted(set(x[2:] + '=' for y in command_options.values() for x in y
                   if x != '--no-affinity'))

    try:
        opts, args = getopt.gnu_getopt(sys.argv[1:],
                                       short_options,
                                       long_options)
    except getopt.GetoptError as error:
        print(error, file=sys.stderr)
        sys.exit(EXIT_USAGE)

    given = []
    for opt, arg in opts:
        given.append(opt)
        if False:
            pass
        elif opt in config_options:
            options['flags'][config_options[opt]] = arg
        elif opt == '--config':
            options['config'] = arg
        elif opt == '--iris-dir':
            options['iris-dir'] = arg
        elif opt == '--poses':
            options['poses'] = arg
        elif opt == '--poses-out':
            options['poses-out'] = arg
        elif opt == '--protocol':
            if arg.upper() in ['A', 'B']:
                options['protocol'] = arg.upper()
            else:
                print('Invalid --protocol option:', arg, file=sys.stderr)
                sys.exit(EXIT_USAGE)
        elif opt == '--out':
            options['out'] = arg
        elif opt == '--no-affinity':
            options['no-affinity'] = True
        elif opt == '--forward-axis':
            if arg in liris.pointcloud.AXES:
                options['forward-axis'] = arg
            else:
                print('Invalid --forward-axis option:', arg,
                      file=sys.stderr)
                sys.exit(EXIT_USAGE)
        elif opt == '--trials':
            options['trials'] = _number(opt, arg, int, lambda x: x >= 1)
        elif opt == '--length':
            options['length'] = _number(opt, arg, int, lambda x: x >= 2)
        elif opt == '--revisit':
            options['revisit'] = _number(opt, arg, float,
                                         lambda x: 0 <= x <= 0.5)
        elif opt == '--seed':
            options['seed'] = _number(opt, arg, int, lambda x: x >= 0)
        elif opt == '--jitter':
            options['jitter'] = _number(opt, arg, float, lambda x: x >= 0)
        elif opt == '--extent':
            options['extent'] = _number(opt, arg, float, lambda x: x > 0)
        elif opt == '-D':
            if not options['debug'] < 3:
                print('Maximum debug level is 3', file=sys.stderr)
                sys.exit(EXIT_USAGE)
            options['debug'] += 1
        elif opt == '-t':
            if arg:
                options['tag'] = arg
        elif opt == '--version':
            print('lidar-iris', liris.__version__)
            sys.exit(0)
        elif opt == '--help':
            usage()
            sys.exit(0)
        else:
            assert False, 'unhandled option %s' % opt

    if not args:
        print('Missing command: %s' % '|'.join(command_args),
              file=sys.stderr)
        sys.exit(EXIT_USAGE)
    command = args.pop(0)
    if command not in command_args:
        print('Invalid command: %s' % command, file=sys.stderr)
        sys.exit(EXIT_USAGE)
    for opt in given:
        other = [x for x in command_options
                 if x != command and opt in command_options[x]]
        if other and opt not in command_options[command]:
            print('%s: option not valid for %s' % (opt, command),
                  file=sys.stderr)
            sys.exit(EXIT_USAGE)
    if len(args) != len(command_args[command]):
        print('Usage: %s %s %s' % (os.path.basename(sys.argv[0]), command,
                                   ' '.join(command_args[command])),
              file=sys.stderr)
        sys.exit(EXIT_USAGE)

    options['command'] = command
    options['args'] = args

    if options['debug'] > 2:
        s = pprint.pformat(options, indent=4)
        print(s, file=sys.stderr)

    return options


def usage():
    usage = '''%s [options] command [command options] args
  commands:
    extract seq_dir out_db    encode a KITTI sequence into a descriptor DB
      --iris-dir dir          also write LiDAR-Iris images as PGM
      --poses path            poses.txt (default seq_dir/poses.txt)
      --poses-out path        write the poses of the selected keyframes
    eval db poses             precision-recall of a descriptor DB
      --protocol A|B          online loop detection (A, default) or
                              pairwise place re-identification (B)
      --out prefix            output path prefix (default db name)
      --no-affinity           protocol A without the affinity matrix
      --forward-axis x|y|z    sensor axis pointing ahead (default z)
    bench db                  time feature extraction plus matching
      --trials n              probes to time (default 1)
      --out path              timing CSV (default db name.timing.csv)
    synth out_dir             export a synthetic looped sequence
      --length n              keyframes (default 500)
      --revisit fraction      revisited share, 0..0.5 (default 0.3)
      --seed n                random seed (default 0)
      --jitter degrees        ray azimuth jitter (default 0)
      --extent meters         world half-width (default 200)
  settings (also .lirisrc varnames):
    --profile name          sensor profile: hdl64|vlp16
    --y-low meters          lowest encoded height
    --y-high meters         highest encoded height
    --height-axis x|y|z     vertical axis of the point cloud
    --radial-bins n         iris rows (default 80)
    --angular-bins n        iris columns (default 360)
    --max-range meters      encoded radius (default 80)
    --filters n             LoG-Gabor filters, 1..8 (default 4)
    --base-wavelength px    first filter wavelength (default 18)
    --multiplier x          wavelength multiplier (default 2)
    --sigma-on-f x          filter bandwidth ratio (default 0.5)
    --window n              Hamming search columns around the
                            phase correlation shift (default 2)
    --exclude n             recent keyframes excluded (default 30)
    --loop-radius meters    ground truth loop radius (default 4)
    --spacing meters        keyframe spacing (extract, synth)
    --thresholds n          threshold sweep size (default 200)
    --threshold d           loop decision threshold in [0, 1]
    --threads n             worker threads (default LIRIS_THREADS
                            or all cores)
  options:
    -D                      enable debug (multiple up to -DDD)
    -t tag                  .lirisrc tagname
    --config path           settings file in .lirisrc format
    --version               display version
    --help                  display usage
'''
    print(usage % os.path.basename(sys.argv[0]), end='')


if __name__ == '__main__':
    main()
