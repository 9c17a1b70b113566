###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Double cantilever beam, one arm above the crack plane. The loaded end x = 0 is opened by delta
with its rotation held; the ligament ahead of the crack is a symmetry plane.
"""
import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

import assembly
import material
import mesh as meshlib
import postproc
import solver
from benchmarks import common, oracles

msglogger = logging.getLogger()

MIRROR = 2.
# Growth beyond which the analytic curve is compared with the density measure
COMPARISON_GROWTH = 1.


@dataclass
class DcbConfig:
    """
    Beam geometry, material and model options, and the opening program (delta per step).
    """
    params: material.MaterialParams
    model: str = 'AT1'
    crack: str = 'phase_field'
    geometry: oracles.DcbGeometry = field(default_factory=oracles.DcbGeometry)
    ell_over_h: float = 4.
    refine_before: float = None
    refine_to: float = 16.
    band_height: float = None
    growth: float = 1.2
    quadrature: str = 'reduced'
    irreversibility: assembly.IrreversibilityMode = assembly.ALWAYS
    increment: float = 0.01
    max_load: float = 1.6
    solver_config: solver.SolverConfig = field(default_factory=solver.SolverConfig)

    @classmethod
    def from_config(cls, cfg):
        """Build from a RunConfig"""
        m, s = cfg.mesh, cfg.solver
        geometry = oracles.DcbGeometry(m['length'], m['height'], m['crack_length'],
                                       m['thickness'])
        return cls(params=common.material_params(cfg), model=cfg.model['variant'],
                   crack=cfg.model['crack'], geometry=geometry, ell_over_h=m['ell_over_h'],
                   refine_before=m['refine_before'], refine_to=m['refine_to'],
                   band_height=m['band_height'], growth=m['growth'], quadrature=m['quadrature'],
                   irreversibility=common.irreversibility(cfg), increment=s['increment'],
                   max_load=s['max_load'], solver_config=common.solver_config(cfg, []))


def _typed(cfg):
    return cfg if isinstance(cfg, DcbConfig) else DcbConfig.from_config(cfg)


def dcb_mesh(cfg):
    """
    Graded arm mesh: square elements of size ell / ell_over_h from refine_before ahead of the
    crack tip up to x = refine_to, over a band along the crack plane.
    """
    dcb = _typed(cfg)
    g, ell = dcb.geometry, dcb.params.ell
    spec = meshlib.MeshSpec('dcb_quarter', ell / dcb.ell_over_h, ell, dcb.quadrature, dcb.growth,
                            length=g.length, height=g.height, crack_length=g.crack_length,
                            refine_before=dcb.refine_before, refine_to=dcb.refine_to,
                            band_height=dcb.band_height)
    return meshlib.build_mesh(spec)


def opening_program(mesh, crack):
    """
    u_x = 0 and u_y = delta on the loaded end, u_y = 0 on the ligament (and the crack face for a
    phase-field induced crack).
    """
    load = mesh.node_sets['load']
    sym = mesh.node_sets['symmetry']
    if crack == 'phase_field':
        sym = np.union1d(sym, mesh.node_sets['crack_face'])
    fixed = assembly.node_constraint(load, 0, 0.) + assembly.node_constraint(sym, 1, 0.)

    def constraints(delta):
        return fixed + assembly.node_constraint(load, 1, delta)

    return solver.BoundaryProgram(constraints, reaction_set='load', reaction_component=1,
                                  ligament='ligament')


def run_dcb(cfg, mesh=None):
    """
    Ramp the opening and record the crack length by the density integral and by the phase field
    contour along the ligament, next to the analytic beam solution.
    """
    dcb = _typed(cfg)
    params, model, geometry = dcb.params, material.model_variant(dcb.model), dcb.geometry
    mesh = mesh if mesh is not None else dcb_mesh(dcb)
    a0 = geometry.crack_length

    record = common.BenchmarkRecord('dcb', columns=['delta', 'a_density', 'a_contour',
                                                    'a_analytic'])
    record.inputs = {'variant': model.tag, 'crack': dcb.crack, 'ell': params.ell,
                     'Lf_over_ell': material.fracture_length(params) / params.ell,
                     'length': geometry.length, 'height': geometry.height, 'crack_length': a0}
    record.summary['element_count'] = mesh.n_elements
    msglogger.info('DCB: %s, %s crack, ell = %g, %d elements', model.tag, dcb.crack, params.ell,
                   mesh.n_elements)

    contour = []
    config = dataclasses.replace(dcb.solver_config, increments=solver.uniform_increments(
        0., dcb.max_load, dcb.increment))
    state = assembly.initial_state(mesh, params, dcb.crack)
    common.run_program(record, mesh, params, model, opening_program(mesh, dcb.crack), config,
                       state, dcb.irreversibility,
                       on_step=lambda rec, s: contour.append(
                           postproc.crack_tip_position(s, mesh, 'ligament')))

    steps = record.steps
    extension = postproc.crack_extension(steps, MIRROR)
    for r, da, tip in zip(steps, extension, contour):
        record.curve.append((r.load_factor, a0 + da,
                             a0 if tip is postproc.CRACK_ABSENT else max(tip, a0),
                             oracles.dcb_crack_length(r.load_factor, geometry, params)))

    record.summary['critical_opening_analytic'] = oracles.dcb_critical_opening(a0, geometry,
                                                                               params)
    initiation = postproc.detect_initiation(steps, params,
                                            postproc.InitiationRule(mirror=MIRROR))
    record.summary['critical_opening'] = float('nan') if initiation is postproc.NO_INITIATION \
        else initiation[0]

    loaded = [r for r in steps if r.load_factor > 0. and r.reaction != 0.]
    if loaded:
        first = loaded[0]
        compliance = first.load_factor / (first.reaction / geometry.thickness)
        record.summary['compliance'] = compliance
        record.summary['compliance_analytic'] = oracles.dcb_compliance(a0, geometry, params)

    if record.curve:
        curve = np.array(record.curve)
        grown = curve[:, 3] - a0 >= COMPARISON_GROWTH
        record.summary['a_final_density'] = float(curve[-1, 1])
        record.summary['a_final_contour'] = float(curve[-1, 2])
        record.summary['a_final_analytic'] = float(curve[-1, 3])
        for name, column in (('density', 1), ('contour', 2)):
            error = float('nan')
            if np.any(grown):
                error = float(np.max(np.abs(curve[grown, column] - curve[grown, 3])
                                     / curve[grown, 3]))
            record.summary[f'max_relative_error_{name}'] = error
    return record


benchmarks = [
    {
        'name': 'dcb',
        'defaults': {
            'material': {'ell': 0.03},
            'model': {'crack': 'phase_field'},
            'mesh': {'ell_over_h': 4., 'length': 20., 'height': 0.9, 'crack_length': 10.,
                     'thickness': 1., 'refine_before': None, 'refine_to': 16.,
                     'band_height': None},
            'solver': {'increment': 0.01, 'max_load': 1.6},
        },
        'mesh': dcb_mesh,
        'run': run_dcb,
        'columns': ['delta', 'a_density', 'a_contour', 'a_analytic'],
    },
]
