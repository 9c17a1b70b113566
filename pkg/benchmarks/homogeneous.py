###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Single element under uniform uniaxial strain. Lateral displacements are held at zero, so the
closed-form 1D response applies with E replaced by the uniaxial-strain modulus C0_11.
"""
import logging

import numpy as np

import assembly
import material
import mesh as meshlib
import solver
from benchmarks import common

msglogger = logging.getLogger()


def homogeneous_mesh(cfg):
    """One square element of side `mesh.size`"""
    size = cfg.mesh['size']
    spec = meshlib.MeshSpec('rectangle', size, None, cfg.mesh['quadrature'], width=size,
                            height=size)
    return meshlib.build_mesh(spec)


def uniaxial_params(params):
    """Material whose 1D closed form matches the constrained element"""
    return params.replace(E=float(material.elasticity_tensor(params.E, params.nu)[0, 0]),
                          nu=0.)


def run_homogeneous(cfg):
    """
    Ramp the strain in multiples of the peak strain and compare the stress with the closed-form
    response.
    """
    params, model = common.material_params(cfg), common.model_variant(cfg)
    mesh = homogeneous_mesh(cfg)
    reference = uniaxial_params(params)
    eps_peak = material.peak_strain(reference, model)
    width = cfg.mesh['size']
    left, right = mesh.node_sets['left'], mesh.node_sets['right']
    fixed = assembly.node_constraint(left, 0, 0.) \
        + assembly.node_constraint(np.arange(mesh.n_nodes), 1, 0.)

    def constraints(load):
        return fixed + assembly.node_constraint(right, 0, load * eps_peak * width)

    program = solver.BoundaryProgram(constraints, reaction_set='right', reaction_component=0)
    config = common.solver_config(cfg, common.load_increments(cfg))

    record = common.BenchmarkRecord('homogeneous', columns=['epsilon', 'phi', 'sigma',
                                                            'sigma_analytic'])
    record.inputs = {'variant': model.tag, 'E_uniaxial': reference.E,
                     'peak_strain': float(eps_peak)}
    record.summary['element_count'] = mesh.n_elements

    phases = []
    common.run_program(record, mesh, params, model, program, config, None,
                       common.irreversibility(cfg),
                       on_step=lambda rec, state: phases.append(float(state.phi.mean())))

    for step, phi in zip(record.steps, phases):
        eps = step.load_factor * eps_peak
        sigma = step.reaction / width
        record.curve.append((eps, phi, sigma,
                             material.homogeneous_response(reference, model, eps).sigma))

    sigma_c = float(material.critical_stress(reference, model))
    record.summary['sigma_c'] = sigma_c
    record.summary['damage_onset_strain'] = float(material.damage_onset_strain(reference, model))
    if record.curve:
        peak = max(row[2] for row in record.curve)
        record.summary['peak_stress'] = peak
        record.summary['peak_stress_error'] = abs(peak - sigma_c) / sigma_c
    return record


benchmarks = [
    {
        'name': 'homogeneous',
        'defaults': {
            'material': {'ell': 1.},
            'mesh': {'size': 1.},
            'model': {'crack': 'geometric'},
            'solver': {'start_load': 0., 'increment': 0.025, 'max_load': 3.},
        },
        'mesh': homogeneous_mesh,
        'run': run_homogeneous,
        'columns': ['epsilon', 'phi', 'sigma', 'sigma_analytic'],
    },
]
