#!/usr/bin/env python3
###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Tests for the YAML run configuration, the benchmark registry and the command line
"""
import glob
import os

import pytest

import benchmarks
import material
import parse_config
import parsecmd
from parse_config import ConfigError

HERE = os.path.dirname(os.path.abspath(__file__))
SHIPPED = ('bl-*.yaml', 'dcb-*.yaml', 'sent-*.yaml', 'homogeneous-*.yaml', 'custom-*.yaml')


def config_error_path(text):
    '''
    Parse `text` expecting a ConfigError; returns its dotted path
    '''
    with pytest.raises(ConfigError) as info:
        parse_config.parse_config(text)
    return info.value.path


def test_registry():
    '''
    Every benchmark module contributes its entries
    '''
    registry = benchmarks.discover()
    for name in ('boundary_layer', 'boundary_layer_sweep', 'dcb', 'sent', 'homogeneous',
                 'custom'):
        assert name in registry
        assert callable(registry[name]['run'])
        assert callable(registry[name]['mesh'])
        assert registry[name]['module'].startswith('benchmarks.')


def test_minimal_boundary_layer():
    '''
    E and Gc are enough: ell follows from the default Lf / ell = 10
    '''
    cfg = parse_config.parse_config('benchmark: boundary_layer\n'
                                    'material: {E: 210000, Gc: 2.7}\n')
    assert cfg.benchmark == 'boundary_layer'
    m = cfg.material
    assert m['nu'] == 0.3
    assert m['Lf_over_ell'] == 10.
    assert m['ell'] == pytest.approx(2.7 * 0.91 / 210000. / 10.)
    assert cfg.model['variant'] == 'AT1'
    assert cfg.model['crack'] == 'phase_field'
    assert cfg.model['irreversibility'] == 'always'
    assert cfg.mesh['ell_over_h'] == 8.
    assert cfg.solver['scheme'] == 'bfgs_monolithic'
    assert cfg.solver['start_load'] == 0.5


def test_length_scale_from_ell():
    '''
    An explicit ell overrides the default ratio, which is derived again
    '''
    cfg = parse_config.parse_config('benchmark: Boundary-Layer\n'
                                    'material: {E: 1, Gc: 1, ell: 0.091}\n')
    assert cfg.benchmark == 'boundary_layer'
    assert cfg.material['Lf_over_ell'] == pytest.approx(10.)

    path = config_error_path('benchmark: boundary_layer\n'
                             'material: {E: 1, Gc: 1, ell: 0.091, Lf_over_ell: 5}\n')
    assert path == 'material.Lf_over_ell'

    cfg = parse_config.parse_config('benchmark: boundary_layer\n'
                                    'material: {E: 1, Gc: 1, ell: 0.091, Lf_over_ell: 10}\n')
    assert cfg.material['ell'] == 0.091


def test_round_trip():
    '''
    dump() then parse gives an equal configuration
    '''
    cfg = parse_config.parse_config('benchmark: dcb\n'
                                    'material: {E: 210000, Gc: 20, ell: 0.03, kappa: 1e-7}\n'
                                    'model: {variant: standard}\n')
    assert cfg.model['variant'] == 'AT2'
    again = parse_config.parse_config(cfg.dump())
    assert again == cfg
    assert again.mesh['refine_before'] is None
    assert repr(again) == "RunConfig('dcb')"


def test_updated():
    '''
    Re-validated copy with one key changed
    '''
    cfg = parse_config.parse_config('benchmark: boundary_layer\n'
                                    'material: {E: 1, Gc: 1, Lf_over_ell: 10}\n')
    finer = cfg.updated('mesh.ell_over_h', 12)
    assert finer.mesh['ell_over_h'] == 12.
    assert cfg.mesh['ell_over_h'] == 8.

    shorter = cfg.updated('material.Lf_over_ell', 1.)
    assert shorter.material['ell'] == pytest.approx(0.91)

    with pytest.raises(ConfigError):
        cfg.updated('solver', 1.)


def test_missing_and_unknown_keys():
    '''
    Error paths name the offending key
    '''
    assert config_error_path('benchmark: dcb\nmaterial: {Gc: 1, ell: 1}\n') == 'material.E'
    assert config_error_path('benchmark: dcb\nmaterial: {E: 1, Gc: 1, ell: 1, foo: 2}\n') \
        == 'material.foo'
    assert config_error_path('benchmark: dcb\nmaterial: {E: 1, Gc: 1, ell: 1}\n'
                             'plot: {dpi: 300}\n') == 'plot'
    assert config_error_path('benchmark: bending\n') == 'benchmark'
    assert config_error_path('material: {E: 1}\n') == 'benchmark'
    assert config_error_path('benchmark: dcb\nmaterial: [1, 2]\n') == 'material'
    assert config_error_path('benchmark: [dcb\n') == '<yaml>'


def test_invalid_values():
    '''
    Out of range numbers and unknown tags
    '''
    base = 'benchmark: dcb\nmaterial: {E: 1, Gc: %s, ell: 1}\n'
    assert config_error_path(base % '-1') == 'material.Gc'
    assert config_error_path(base % 'soft') == 'material.Gc'
    assert config_error_path(base % '1' + 'model: {variant: AT3}\n') == 'model.variant'
    assert config_error_path(base % '1' + 'model: {crack: drilled}\n') == 'model.crack'
    assert config_error_path(base % '1' + 'model: {irreversibility: thresholded, '
                             'threshold: 1.5}\n') == 'model.threshold'
    assert config_error_path(base % '1' + 'mesh: {ell_over_h: 0}\n') == 'mesh.ell_over_h'
    assert config_error_path(base % '1' + 'mesh: {quadrature: exact}\n') == 'mesh.quadrature'
    assert config_error_path(base % '1' + 'solver: {increment: 0}\n') == 'solver.increment'
    assert config_error_path(base % '1' + 'solver: {tolerance: -1}\n') == 'solver.tolerance'
    assert config_error_path(base % '1' + 'solver: {scheme: newton}\n') == 'solver.scheme'
    assert config_error_path(base % '1' + 'output: {verbose: sometimes}\n') == 'output.verbose'
    assert config_error_path(base % '1' + 'solver: {max_iterations: 2.5}\n') \
        == 'solver.max_iterations'


def test_coercion():
    '''
    Numeric strings are accepted, integers become floats where the default is a float
    '''
    cfg = parse_config.parse_config('benchmark: dcb\n'
                                    'material: {E: "2.1e5", Gc: 20, ell: 0.03, kappa: "1e-7"}\n'
                                    'output: {name: 42}\n')
    assert cfg.material['E'] == 210000.
    assert isinstance(cfg.material['Gc'], float)
    assert cfg.material['kappa'] == 1e-7
    assert cfg.output['name'] == '42'
    assert isinstance(cfg.solver['max_iterations'], int)


@pytest.mark.parametrize('pattern', SHIPPED)
def test_shipped_configs(pattern):
    '''
    Every configuration in the repository validates
    '''
    files = sorted(glob.glob(os.path.join(HERE, pattern)))
    assert files
    for f in files:
        cfg = parse_config.load(f)
        assert cfg.output['name'] == os.path.splitext(os.path.basename(f))[0]
        material.MaterialParams(cfg.material['E'], cfg.material['nu'], cfg.material['Gc'],
                                cfg.material['ell'], cfg.material['kappa'])


def test_command_line():
    '''
    Subcommands and their options
    '''
    parser = parsecmd.get_parser(['boundary_layer', 'dcb'])
    args = parser.parse_args(['run', 'dcb-at1.yaml', '--out', '/tmp/x', '-n', 'try', '-v'])
    assert args.command == 'run'
    assert args.output_dir == '/tmp/x'
    assert args.name == 'try'
    assert args.verbose
    assert args.log_config == 'logging.conf'

    args = parser.parse_args(['mesh-dump', 'dcb-at1.yaml', '--format', 'VTK'])
    assert args.format == 'vtk'
    args = parser.parse_args(['validate', 'dcb-at1.yaml'])
    assert args.command == 'validate'

    with pytest.raises(SystemExit):
        parser.parse_args(['mesh-dump', 'dcb-at1.yaml', '--format', 'stl'])
    with pytest.raises(SystemExit):
        parser.parse_args([])


if __name__ == "__main__":
    test_registry()
    test_minimal_boundary_layer()
    test_length_scale_from_ell()
    test_round_trip()
    test_updated()
    test_missing_and_unknown_keys()
    test_invalid_values()
    test_coercion()
    for p in SHIPPED:
        test_shipped_configs(p)
    test_command_line()
    print('\nSUCCESS!!')
