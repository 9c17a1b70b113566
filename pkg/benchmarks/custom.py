###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Rectangular plate in tension, symmetric about y = 0, with an optional edge crack along the
symmetry plane. The load factor is the top edge displacement.
"""
import logging

import numpy as np

import assembly
import mesh as meshlib
import postproc
import solver
from benchmarks import common

msglogger = logging.getLogger()

MIRROR = 2.


def custom_mesh(cfg):
    """Uniform rectangle mesh of element size ell / ell_over_h"""
    m = cfg.mesh
    spec = meshlib.MeshSpec('rectangle', common.element_size(cfg), cfg.material['ell'],
                            m['quadrature'], m['growth'], width=m['width'], height=m['height'],
                            crack_length=m['crack_length'])
    return meshlib.build_mesh(spec)


def run_custom(cfg):
    """
    Top edge displacement program with u_y = 0 on the symmetry plane and u_x = 0 at the far
    corner of the ligament.
    """
    params, model = common.material_params(cfg), common.model_variant(cfg)
    crack = cfg.model['crack'] if cfg.mesh['crack_length'] > 0. else 'geometric'
    mesh = custom_mesh(cfg)

    sym = mesh.node_sets['bottom'] if crack == 'phase_field' else mesh.node_sets['symmetry']
    fixed = assembly.node_constraint(sym, 1, 0.) \
        + assembly.node_constraint(mesh.node_sets['pin'], 0, 0.)
    top = mesh.node_sets['top']

    def constraints(delta):
        return fixed + assembly.node_constraint(top, 1, delta)

    program = solver.BoundaryProgram(constraints, reaction_set='top', reaction_component=1,
                                     ligament='ligament', start=cfg.solver['start_load'])
    config = common.solver_config(cfg, common.load_increments(cfg))

    record = common.BenchmarkRecord('custom', columns=['delta', 'reaction', 'crack_extension'])
    record.inputs = {'variant': model.tag, 'crack': crack, 'width': cfg.mesh['width'],
                     'height': cfg.mesh['height'], 'crack_length': cfg.mesh['crack_length']}
    record.summary['element_count'] = mesh.n_elements

    state = assembly.initial_state(mesh, params, crack)
    steps = common.run_program(record, mesh, params, model, program, config, state,
                               common.irreversibility(cfg))
    extension = postproc.crack_extension(steps, MIRROR)
    record.curve = [(r.load_factor, r.reaction, a) for r, a in zip(steps, extension)]
    if steps:
        reactions = np.array([r.reaction for r in steps])
        record.summary['peak_reaction'] = float(reactions.max())
        record.summary['peak_delta'] = steps[int(np.argmax(reactions))].load_factor
        record.summary['crack_extension'] = float(extension[-1])
    return record


benchmarks = [
    {
        'name': 'custom',
        'defaults': {
            'mesh': {'width': 1., 'height': 1., 'crack_length': 0.},
            'solver': {'increment': 1e-3, 'max_load': 1e-2},
        },
        'mesh': custom_mesh,
        'run': run_custom,
        'columns': ['delta', 'reaction', 'crack_extension'],
    },
]
