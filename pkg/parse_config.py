###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Parses the YAML run configuration (sections material, model, mesh, solver, output)
"""
import argparse
import copy
import logging

import yaml

import assembly
import material
import solver
import variants

msglogger = logging.getLogger()

REQUIRED = object()
SECTIONS = ('material', 'model', 'mesh', 'solver', 'output')
# Relative tolerance when both ell and Lf / ell are given
CONSISTENCY = 1e-9

COMMON = {
    'material': {'E': REQUIRED, 'nu': 0.3, 'Gc': REQUIRED, 'ell': None, 'kappa': 1e-7,
                 'Lf_over_ell': None},
    'model': {'variant': 'AT1', 'crack': 'phase_field', 'irreversibility': 'always',
              'threshold': assembly.THRESHOLD},
    'mesh': {'ell_over_h': 4., 'quadrature': 'reduced', 'growth': 1.2},
    'solver': {'scheme': 'bfgs_monolithic', 'tolerance': 1e-6, 'max_iterations': 200,
               'max_passes': 500, 'cutback': 0.5, 'min_increment': 1e-6, 'line_search': 10,
               'memory': 50, 'start_load': 0., 'increment': 0.02, 'max_load': 1.},
    'output': {'directory': 'out', 'verbose': False, 'name': None},
}
# Keys without a typed default
STRING_KEYS = ('output.name',)

TAGS = {
    'model.variant': variants.variant,
    'model.crack': variants.crack_mode,
    'model.irreversibility': variants.irreversibility,
    'solver.scheme': variants.scheme,
}


class ConfigError(ValueError):
    """
    Invalid run configuration; `path` is the dotted key at fault
    """
    def __init__(self, path, message):
        super().__init__(f'{path}: {message}')
        self.path = path


class RunConfig:
    """
    Validated run configuration: benchmark name plus one dict per section, defaults filled.
    """
    def __init__(self, benchmark, sections):
        self.benchmark = benchmark
        self.sections = sections

    def __getitem__(self, section):
        return self.sections[section]

    @property
    def material(self):
        """material section"""
        return self.sections['material']

    @property
    def model(self):
        """model section"""
        return self.sections['model']

    @property
    def mesh(self):
        """mesh section"""
        return self.sections['mesh']

    @property
    def solver(self):
        """solver section"""
        return self.sections['solver']

    @property
    def output(self):
        """output section"""
        return self.sections['output']

    def to_dict(self):
        """Plain nested dict, benchmark first"""
        d = {'benchmark': self.benchmark}
        d.update(copy.deepcopy(self.sections))
        return d

    def dump(self, stream=None):
        """
        Serialise to YAML; returns the text when `stream` is None.
        """
        return yaml.safe_dump(self.to_dict(), stream, sort_keys=False, default_flow_style=None)

    def updated(self, key, value, registry=None):
        """
        Re-validated copy with the dotted `key` set to `value`. Setting one of ell and
        Lf_over_ell lets the other be derived again.
        """
        d = self.to_dict()
        section, _, name = key.partition('.')
        if section not in d or not name:
            raise ConfigError(key, 'unknown key')
        d[section][name] = value
        if key == 'material.Lf_over_ell':
            d['material']['ell'] = None
        elif key == 'material.ell':
            d['material']['Lf_over_ell'] = None
        return parse_dict(d, registry)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f'RunConfig({self.benchmark!r})'


def _coerce(path, value, default):
    if value is None:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f'expected true or false, got {value!r}')
        return value
    if isinstance(default, (list, tuple)):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, f'expected a list, got {value!r}')
        return list(value)
    if isinstance(default, str) or path in STRING_KEYS:
        return str(value)
    if isinstance(value, bool):
        raise ConfigError(path, f'expected a number, got {value!r}')
    try:
        if isinstance(default, int):
            if float(value) != int(float(value)):
                raise ValueError
            return int(float(value))
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f'expected a number, got {value!r}') from exc


def _schema(entry):
    schema = copy.deepcopy(COMMON)
    for section, defaults in entry.get('defaults', {}).items():
        schema.setdefault(section, {}).update(defaults)
    return schema


def _fill(d, schema):
    sections, defaulted = {}, set()
    for section, defaults in schema.items():
        given = d.get(section)
        if given is None:
            given = {}
        if not isinstance(given, dict):
            raise ConfigError(section, 'expected a mapping')
        unknown = sorted(set(given) - set(defaults))
        if unknown:
            raise ConfigError(f'{section}.{unknown[0]}', 'unknown key')
        filled = {}
        for key, default in defaults.items():
            path = f'{section}.{key}'
            if key in given and not (given[key] is None and default is REQUIRED):
                filled[key] = _coerce(path, given[key], default)
            elif default is REQUIRED:
                raise ConfigError(path, 'missing required key')
            else:
                filled[key] = copy.deepcopy(default)
                defaulted.add(path)
        sections[section] = filled
    return sections, defaulted


def _length_scale(m, ell_defaulted, ratio_defaulted):
    """
    Derive ell or Lf / ell from the other and check them when both are given. A default
    Lf / ell gives way to an explicit ell and the other way round.
    """
    unit_ell = material.MaterialParams(m['E'], m['nu'], m['Gc'], 1., m['kappa'])
    lf = material.fracture_length(unit_ell)
    ell, ratio = m['ell'], m['Lf_over_ell']
    if ell is not None and ratio_defaulted:
        ratio = None
    elif ratio is not None and ell_defaulted:
        ell = None
    if ratio is not None and not ratio > 0.:
        raise ConfigError('material.Lf_over_ell', f'must be positive, got {ratio}')
    if ell is not None and not ell > 0.:
        raise ConfigError('material.ell', f'must be positive, got {ell}')
    if ell is None and ratio is None:
        raise ConfigError('material.ell', 'missing required key (or give material.Lf_over_ell)')
    if ell is None:
        m['ell'] = lf / ratio
    elif ratio is None:
        m['Lf_over_ell'] = lf / ell
    elif abs(lf / ell - ratio) > CONSISTENCY * ratio:
        raise ConfigError('material.Lf_over_ell',
                          f'{ratio} inconsistent with material.ell = {ell} (Lf / ell = '
                          f'{lf / ell:.17g})')


def _validate(sections, defaulted):
    m = sections['material']
    try:
        _length_scale(m, 'material.ell' in defaulted, 'material.Lf_over_ell' in defaulted)
        material.MaterialParams(m['E'], m['nu'], m['Gc'], m['ell'], m['kappa'])
    except material.DomainError as exc:
        raise ConfigError(str(exc).split(' ', 1)[0], str(exc)) from exc

    for path, convert in TAGS.items():
        section, key = path.split('.')
        try:
            sections[section][key] = convert(sections[section][key])
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(path, str(exc)) from exc

    try:
        assembly.IrreversibilityMode(sections['model']['irreversibility'],
                                     sections['model']['threshold'])
    except ValueError as exc:
        raise ConfigError('model.threshold', str(exc)) from exc

    mesh = sections['mesh']
    if not mesh['ell_over_h'] > 0.:
        raise ConfigError('mesh.ell_over_h', f'must be positive, got {mesh["ell_over_h"]}')
    if mesh['quadrature'] not in ('full', 'reduced'):
        raise ConfigError('mesh.quadrature', f'`{mesh["quadrature"]}` is not full | reduced')
    if not mesh['growth'] >= 1.:
        raise ConfigError('mesh.growth', f'must be at least 1, got {mesh["growth"]}')

    s = sections['solver']
    if not s['increment'] > 0.:
        raise ConfigError('solver.increment', f'must be positive, got {s["increment"]}')
    if not s['max_load'] >= s['start_load']:
        raise ConfigError('solver.max_load', 'must not be below solver.start_load')
    try:
        solver.SolverConfig(scheme=s['scheme'], tolerance=s['tolerance'],
                            max_iterations=s['max_iterations'], max_passes=s['max_passes'],
                            cutback=s['cutback'], min_increment=s['min_increment'],
                            line_search=s['line_search'], memory=s['memory'])
    except ValueError as exc:
        raise ConfigError(str(exc).split(' ', 1)[0], str(exc)) from exc


def parse_dict(d, registry=None):
    """
    Validate a nested dict and return a RunConfig with defaults filled.
    """
    if registry is None:
        import benchmarks  # pylint: disable=import-outside-toplevel
        registry = benchmarks.discover()

    if not isinstance(d, dict):
        raise ConfigError('benchmark', 'configuration must be a mapping')
    name = d.get('benchmark')
    if name is None:
        raise ConfigError('benchmark', 'missing required key')
    name = str(name).lower().replace('-', '_')
    if name not in registry:
        raise ConfigError('benchmark', f'`{name}` is not one of {" | ".join(sorted(registry))}')

    schema = _schema(registry[name])
    unknown = sorted(set(d) - set(schema) - {'benchmark'})
    if unknown:
        raise ConfigError(unknown[0], 'unknown section')
    sections, defaulted = _fill(d, schema)
    _validate(sections, defaulted)
    return RunConfig(name, sections)


def parse_config(text, registry=None):
    """
    Parse YAML `text` into a validated RunConfig.
    """
    try:
        d = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError('<yaml>', str(exc)) from exc
    return parse_dict(d, registry)


def load(config_file, registry=None):
    """
    Parse the YAML file `config_file`.
    """
    with open(config_file, mode='r', encoding='utf-8') as stream:
        cfg = parse_config(stream.read(), registry)
    msglogger.debug('Configuration %s:\n%s', config_file, cfg.dump())
    return cfg
