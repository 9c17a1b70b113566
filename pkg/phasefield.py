#!/usr/bin/env python3
###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Phase field fracture benchmarks: run a YAML configuration and write steps.csv, curve.csv and
summary.json, validate a configuration, or dump the mesh it builds.

Exit status: 0 success, 1 solver failure (partial artifacts written), 2 configuration error.
"""
import json
import logging
import logging.config
import math
import os
import sys
import time
import traceback

from tabulate import tabulate

import benchmarks
import material
import mesh as meshlib
import parse_config
import parsecmd

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2

STEP_COLUMNS = ['step', 'load_factor', 'iterations', 'res_u', 'res_phi', 'reaction',
                'crack_surface']

msglogger = None


def config_pylogger(log_cfg_file, experiment_name, output_dir='logs'):
    """
    Configure the root logger from `log_cfg_file` with a log file in a timestamped directory
    under `output_dir`. The logger gets `logdir` and `log_filename` attributes.
    """
    timestr = time.strftime('%Y.%m.%d-%H%M%S')
    exp_full_name = timestr if experiment_name is None else experiment_name + '___' + timestr
    logdir = os.path.join(output_dir, exp_full_name)
    os.makedirs(logdir, exist_ok=True)
    log_filename = os.path.join(logdir, exp_full_name + '.log')
    if os.path.isfile(log_cfg_file):
        logging.config.fileConfig(log_cfg_file, defaults={'logfilename': log_filename},
                                  disable_existing_loggers=False)
    else:
        print(f'Could not find the logger configuration file ({log_cfg_file}) - using default '
              'logger configuration')
        logger = logging.getLogger()
        logger.setLevel(logging.INFO)
        for handler in (logging.StreamHandler(), logging.FileHandler(log_filename)):
            handler.setFormatter(logging.Formatter('%(asctime)s - %(message)s'))
            logger.addHandler(handler)

    logger = logging.getLogger()
    logger.logdir = logdir
    logger.log_filename = log_filename
    logger.info('Log file for this run: %s', os.path.realpath(log_filename))
    return logger


def _fmt(value):
    if isinstance(value, (bool, str)) or value is None:
        return str(value)
    return f'{value:.17g}'


def write_csv(path, columns, rows):
    """
    Header row, then one line per row with floats at 17 significant digits.
    """
    with open(path, mode='w', encoding='utf-8', newline='') as f:
        f.write(','.join(columns) + '\n')
        for row in rows:
            f.write(','.join(_fmt(v) for v in row) + '\n')


def write_steps(path, steps):
    """steps.csv from LoadStepRecords"""
    write_csv(path, STEP_COLUMNS,
              [(r.step, r.load_factor, r.iterations, r.res_u, r.res_phi, r.reaction,
                r.crack_surface) for r in steps])


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, 'item'):
        return _json_value(value.item())
    if isinstance(value, (list, tuple)):
        # summary.json stays flat: sequences become space separated text
        return ' '.join(v if isinstance(v, str) else json.dumps(v)
                        for v in map(_json_value, value))
    return value


def write_summary(path, record):
    """
    Flat summary.json: summary scalars plus the benchmark name, failure flag and inputs echo.
    """
    summary = {'benchmark': record.name, 'failed': record.failed}
    if record.message:
        summary['message'] = record.message.strip()
    summary.update({f'input.{k}': _json_value(v) for k, v in record.inputs.items()})
    summary.update({k: _json_value(v) for k, v in record.summary.items()})
    with open(path, mode='w', encoding='utf-8') as f:
        json.dump(summary, f, indent=2)
        f.write('\n')


def run_directory(cfg):
    """Artifact directory: output.directory / (output.name or benchmark name)"""
    return os.path.join(cfg.output['directory'], cfg.output['name'] or cfg.benchmark)


def write_artifacts(record, run_dir):
    """
    steps.csv, curve.csv and summary.json for `record` under `run_dir`.
    """
    os.makedirs(run_dir, exist_ok=True)
    write_steps(os.path.join(run_dir, 'steps.csv'), record.steps)
    write_csv(os.path.join(run_dir, 'curve.csv'), record.columns, record.curve)
    write_summary(os.path.join(run_dir, 'summary.json'), record)


def run(cfg, registry=None):
    """
    Execute the benchmark `cfg` selects and write its artifacts. Returns the exit status.
    """
    logger = logging.getLogger()
    registry = registry if registry is not None else benchmarks.discover()
    entry = registry[cfg.benchmark]
    run_dir = run_directory(cfg)
    os.makedirs(run_dir, exist_ok=True)
    with open(os.path.join(run_dir, 'config.yaml'), mode='w', encoding='utf-8') as f:
        cfg.dump(f)

    logger.info('Running %s (%s)', cfg.benchmark, material.model_variant(cfg.model['variant']))
    record = entry['run'](cfg)
    write_artifacts(record, run_dir)

    rows = [(k, v) for k, v in record.summary.items()]
    logger.info('Summary of %s:\n%s', record.name,
                tabulate(rows, headers=['Quantity', 'Value'], tablefmt='psql', floatfmt='.6g'))
    logger.info('Artifacts written to %s', os.path.realpath(run_dir))
    if record.failed:
        logger.error('Solver failure, partial results kept: %s', record.message.strip())
        return EXIT_SOLVER
    return EXIT_OK


def mesh_dump(cfg, output_dir, fmt='both', registry=None):
    """
    Write the mesh of `cfg` as mesh.txt and/or mesh.vtk. Returns the written paths.
    """
    registry = registry if registry is not None else benchmarks.discover()
    mesh = registry[cfg.benchmark]['mesh'](cfg)
    os.makedirs(output_dir, exist_ok=True)
    paths = []
    if fmt in ('text', 'both'):
        paths.append(os.path.join(output_dir, 'mesh.txt'))
        with open(paths[-1], mode='w', encoding='utf-8') as f:
            meshlib.dump_text(mesh, f)
    if fmt in ('vtk', 'both'):
        paths.append(os.path.join(output_dir, 'mesh.vtk'))
        with open(paths[-1], mode='w', encoding='utf-8') as f:
            meshlib.dump_vtk(mesh, f)
    logging.getLogger().info('%s: %d nodes, %d elements -> %s', mesh, mesh.n_nodes,
                             mesh.n_elements, ', '.join(paths))
    return paths


def main(argv=None):
    """
    Command line entry point; returns the exit status.
    """
    global msglogger  # pylint: disable=global-statement

    script_dir = os.path.dirname(os.path.abspath(__file__))
    registry = benchmarks.discover()
    args = parsecmd.get_parser(sorted(registry)).parse_args(argv)
    log_config = args.log_config if os.path.isabs(args.log_config) \
        else os.path.join(script_dir, args.log_config)

    try:
        cfg = parse_config.load(args.config, registry)
    except (parse_config.ConfigError, OSError) as exc:
        print(f'{args.config}: {exc}', file=sys.stderr)
        return EXIT_CONFIG

    if args.command == 'validate':
        sys.stdout.write(cfg.dump())
        return EXIT_OK

    if getattr(args, 'output_dir', None) is not None:
        cfg = cfg.updated('output.directory', args.output_dir, registry)
    if getattr(args, 'name', None) is not None:
        cfg = cfg.updated('output.name', args.name, registry)
    if getattr(args, 'verbose', False):
        cfg = cfg.updated('output.verbose', True, registry)

    msglogger = config_pylogger(log_config, cfg.output['name'] or cfg.benchmark,
                                os.path.join(cfg.output['directory'], 'logs'))
    try:
        if args.command == 'mesh-dump':
            mesh_dump(cfg, run_directory(cfg), args.format, registry)
            return EXIT_OK
        return run(cfg, registry)
    except (meshlib.MeshError, material.DomainError) as exc:
        msglogger.error('Invalid configuration: %s', exc)
        return EXIT_CONFIG


if __name__ == '__main__':
    status = EXIT_OK
    try:
        status = main()
    except KeyboardInterrupt:
        print("\n-- KeyboardInterrupt --")
    except Exception:
        if msglogger is not None:
            # Log the traceback to the file only; re-raising prints it on the console
            handlers_bak = msglogger.handlers
            msglogger.handlers = [h for h in msglogger.handlers
                                  if not isinstance(h, logging.StreamHandler)
                                  or isinstance(h, logging.FileHandler)]
            msglogger.error(traceback.format_exc())
            msglogger.handlers = handlers_bak
        raise
    finally:
        if msglogger is not None:
            msglogger.info('')
            msglogger.info('Log file for this run: %s', os.path.realpath(msglogger.log_filename))
    sys.exit(status)
