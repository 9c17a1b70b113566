###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Command line parser for the phase field fracture solver.
"""

import argparse

DUMP_FORMATS = ['text', 'vtk', 'both']


def get_parser(benchmark_names):
    """
    Return the argument parser
    """
    parser = argparse.ArgumentParser(description='Phase field fracture benchmarks (AT1 / AT2, '
                                                 'plane strain, Q8 elements)')
    parser.add_argument('--log-config', dest='log_config', default='logging.conf',
                        metavar='FILE', help='logging configuration (default: logging.conf)')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    run_args = subparsers.add_parser('run', help='run the benchmark a configuration selects ('
                                     + ' | '.join(benchmark_names) + ')')
    run_args.add_argument('config', metavar='CONFIG', help='YAML run configuration')
    run_args.add_argument('--out', '-o', dest='output_dir', default=None, metavar='DIR',
                          help='output directory (overrides output.directory)')
    run_args.add_argument('--name', '-n', metavar='NAME', default=None,
                          help='experiment name (overrides output.name)')
    run_args.add_argument('--verbose', '-v', action='store_true', default=False,
                          help='log every load step at INFO level')

    validate_args = subparsers.add_parser('validate', help='parse a configuration and print it '
                                          'with defaults filled')
    validate_args.add_argument('config', metavar='CONFIG', help='YAML run configuration')

    dump_args = subparsers.add_parser('mesh-dump', help='write the mesh a configuration builds')
    dump_args.add_argument('config', metavar='CONFIG', help='YAML run configuration')
    dump_args.add_argument('--out', '-o', dest='output_dir', default=None, metavar='DIR',
                           help='output directory (overrides output.directory)')
    dump_args.add_argument('--format', type=lambda s: s.lower(), choices=DUMP_FORMATS,
                           default='both', help='mesh file format: ' + ' | '.join(DUMP_FORMATS)
                           + ' (default: both)')
    return parser
