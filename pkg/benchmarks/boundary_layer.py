###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Boundary layer model: half disc around a crack tip whose outer rim follows the Williams K-field.
The load factor is K / K_ref with K_ref the plane-strain toughness, so G / Gc = (K / K_ref)^2.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

import assembly
import material
import mesh as meshlib
import postproc
import solver
from benchmarks import common, oracles

msglogger = logging.getLogger()

MIRROR = 2.
SWEEP_KEYS = ('mesh.ell_over_h', 'material.Lf_over_ell', 'model.irreversibility')


@dataclass
class BoundaryLayerConfig:
    """
    Material, model and crack options of a boundary layer run, plus the K program
    (load factors relative to K_ref).
    """
    params: material.MaterialParams
    model: str = 'AT1'
    crack: str = 'phase_field'
    ell_over_h: float = 8.
    irreversibility: assembly.IrreversibilityMode = assembly.ALWAYS
    start_load: float = 0.5
    increment: float = 0.02
    max_load: float = 1.6
    radius_over_ell: float = meshlib.RADIUS_FLOOR
    refine_half_width_over_ell: float = 3.
    refine_length_over_ell: float = 6.
    growth: float = 1.25
    quadrature: str = 'reduced'
    stop_after_initiation: bool = True
    solver_config: solver.SolverConfig = field(default_factory=solver.SolverConfig)

    @property
    def Lf_over_ell(self):
        """Fracture length over phase field length"""
        return material.fracture_length(self.params) / self.params.ell

    @classmethod
    def from_config(cls, cfg):
        """Build from a RunConfig"""
        s, m = cfg.solver, cfg.mesh
        return cls(params=common.material_params(cfg), model=cfg.model['variant'],
                   crack=cfg.model['crack'], ell_over_h=m['ell_over_h'],
                   irreversibility=common.irreversibility(cfg), start_load=s['start_load'],
                   increment=s['increment'], max_load=s['max_load'],
                   radius_over_ell=m['radius_over_ell'],
                   refine_half_width_over_ell=m['refine_half_width_over_ell'],
                   refine_length_over_ell=m['refine_length_over_ell'],
                   growth=m['growth'], quadrature=m['quadrature'],
                   stop_after_initiation=s['stop_after_initiation'],
                   solver_config=common.solver_config(cfg, []))

    def increments(self):
        """Jump from zero to the start load, then uniform steps"""
        steps = solver.uniform_increments(self.start_load, self.max_load, self.increment)
        return ([self.start_load] if self.start_load > 0. else []) + steps


def _typed(cfg):
    return cfg if isinstance(cfg, BoundaryLayerConfig) else BoundaryLayerConfig.from_config(cfg)


def boundary_layer_mesh(cfg):
    """
    Half disc mesh resolving ell with ell_over_h elements.
    """
    bl = _typed(cfg)
    ell = bl.params.ell
    spec = meshlib.MeshSpec('half_disc', ell / bl.ell_over_h, ell, bl.quadrature, bl.growth,
                            radius=bl.radius_over_ell * ell,
                            refine_half_width=bl.refine_half_width_over_ell * ell,
                            refine_length=bl.refine_length_over_ell * ell)
    return meshlib.build_mesh(spec)


def williams_program(mesh, params, crack, k_ref):
    """
    Dirichlet program: Williams displacements for K = load * k_ref on the outer rim, u_y = 0 on
    the ligament (and on the crack face when the crack is phase-field induced).
    """
    outer = mesh.node_sets['outer']
    x, y = mesh.nodes[outer, 0], np.abs(mesh.nodes[outer, 1])
    unit = np.array([oracles.williams_displacement(k_ref, params.E, params.nu, math.hypot(a, b),
                                                   math.atan2(b, a)) for a, b in zip(x, y)])
    sym = mesh.node_sets['bottom'] if crack == 'phase_field' else mesh.node_sets['symmetry']
    sym = np.setdiff1d(sym, outer)
    fixed = assembly.node_constraint(sym, 1, 0.)

    def constraints(load):
        return assembly.node_constraint(outer, 0, load * unit[:, 0]) \
            + assembly.node_constraint(outer, 1, load * unit[:, 1]) + fixed

    return solver.BoundaryProgram(constraints, ligament='ligament')


def run_boundary_layer(cfg, mesh=None):
    """
    Ramp K, record the crack extension 2 (A - A0) per step and the energy release rate at
    initiation (extension first exceeding ell).
    """
    bl = _typed(cfg)
    params, model = bl.params, material.model_variant(bl.model)
    mesh = mesh if mesh is not None else boundary_layer_mesh(bl)
    k_ref = material.toughness_K(params)

    record = common.BenchmarkRecord('boundary_layer',
                                    columns=['K_over_Kref', 'G_over_Gc',
                                             'crack_extension_over_ell'])
    record.inputs = {'variant': model.tag, 'crack': bl.crack, 'ell': params.ell,
                     'ell_over_h': bl.ell_over_h, 'Lf_over_ell': bl.Lf_over_ell,
                     'irreversibility': bl.irreversibility.tag}
    record.summary['element_count'] = mesh.n_elements
    msglogger.info('Boundary layer: %s, %s crack, ell/h = %g, Lf/ell = %g, %d elements',
                   model.tag, bl.crack, bl.ell_over_h, bl.Lf_over_ell, mesh.n_elements)

    rule = postproc.InitiationRule(mirror=MIRROR, load_to_G=lambda k: k**2 * params.Gc)

    def stop(records):
        return bl.stop_after_initiation \
            and postproc.detect_initiation(records, params, rule) is not postproc.NO_INITIATION

    program = williams_program(mesh, params, bl.crack, k_ref)
    config = dataclasses.replace(bl.solver_config, increments=bl.increments())
    state = assembly.initial_state(mesh, params, bl.crack)
    steps = common.run_program(record, mesh, params, model, program, config, state,
                               bl.irreversibility, stop=stop)

    extension = postproc.crack_extension(steps, MIRROR)
    record.curve = [(r.load_factor, r.load_factor**2, a / params.ell)
                    for r, a in zip(steps, extension)]

    initiation = postproc.detect_initiation(steps, params, rule)
    if initiation is postproc.NO_INITIATION:
        msglogger.warning('No crack initiation up to K / K_ref = %g',
                          steps[-1].load_factor if steps else 0.)
        record.summary['K_init_over_Kref'] = float('nan')
        record.summary['G_init_over_Gc'] = float('nan')
    else:
        k_init, g_init = initiation
        record.summary['K_init_over_Kref'] = k_init
        record.summary['G_init_over_Gc'] = g_init / params.Gc
    return record


def _vary(cfg, key, value):
    if not isinstance(cfg, BoundaryLayerConfig):
        return BoundaryLayerConfig.from_config(cfg.updated(key, value))
    if key == 'mesh.ell_over_h':
        return dataclasses.replace(cfg, ell_over_h=float(value))
    if key == 'material.Lf_over_ell':
        ell = material.fracture_length(cfg.params) / float(value)
        return dataclasses.replace(cfg, params=cfg.params.replace(ell=ell))
    return dataclasses.replace(cfg, irreversibility=assembly.IrreversibilityMode(
        str(value), cfg.irreversibility.threshold))


def run_sweep(cfg, key, values):
    """
    Re-run the boundary layer for every value of `key` (one of SWEEP_KEYS) and collect the
    energy release rate at initiation.
    """
    if key not in SWEEP_KEYS:
        raise ValueError(f'Cannot sweep over `{key}` ({" | ".join(SWEEP_KEYS)})')

    record = common.BenchmarkRecord('boundary_layer_sweep',
                                    columns=[key.split('.')[-1], 'G_init_over_Gc',
                                             'K_init_over_Kref'])
    record.inputs = {'sweep': key, 'values': list(values)}
    g_values: List[float] = []
    for value in values:
        msglogger.info('Sweep %s = %s', key, value)
        result = run_boundary_layer(_vary(cfg, key, value))
        record.steps.extend(result.steps)
        record.failed |= result.failed
        if result.failed:
            record.message += f'{key} = {value}: {result.message}\n'
        g = result.summary['G_init_over_Gc']
        g_values.append(g)
        record.curve.append((value, g, result.summary['K_init_over_Kref']))
        record.summary['runtime_s'] = record.summary.get('runtime_s', 0.) \
            + result.summary.get('runtime_s', 0.)

    finite = np.array([g for g in g_values if np.isfinite(g)])
    if len(finite) > 0:
        record.summary['G_init_over_Gc_min'] = float(finite.min())
        record.summary['G_init_over_Gc_max'] = float(finite.max())
        record.summary['G_init_over_Gc_spread'] = float((finite.max() - finite.min())
                                                        / finite.mean())
    return record


def run_configured_sweep(cfg):
    """Sweep driven by the `sweep` section of a RunConfig"""
    return run_sweep(cfg, cfg['sweep']['key'], cfg['sweep']['values'])


_DEFAULTS = {
    'material': {'Lf_over_ell': 10.},
    'model': {'crack': 'phase_field'},
    'mesh': {'ell_over_h': 8., 'growth': 1.25, 'radius_over_ell': meshlib.RADIUS_FLOOR,
             'refine_half_width_over_ell': 3., 'refine_length_over_ell': 6.},
    'solver': {'start_load': 0.5, 'increment': 0.02, 'max_load': 1.6,
               'stop_after_initiation': True},
}

benchmarks = [
    {
        'name': 'boundary_layer',
        'defaults': _DEFAULTS,
        'mesh': boundary_layer_mesh,
        'run': run_boundary_layer,
        'columns': ['K_over_Kref', 'G_over_Gc', 'crack_extension_over_ell'],
    },
    {
        'name': 'boundary_layer_sweep',
        'defaults': dict(_DEFAULTS, sweep={'key': 'mesh.ell_over_h',
                                           'values': [2., 4., 8., 12.]}),
        'mesh': boundary_layer_mesh,
        'run': run_configured_sweep,
        'columns': ['value', 'G_init_over_Gc', 'K_init_over_Kref'],
    },
]
