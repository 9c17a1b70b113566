###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Single edge notched tension: upper half of a 6W tall plate with a phase-field induced edge
crack, opened by a uniform top displacement. The failure stress is the peak reaction per unit
width, compared with the Griffith prediction and the phase field strength.
"""
import dataclasses
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

import assembly
import material
import mesh as meshlib
import solver
from benchmarks import common, oracles

msglogger = logging.getLogger()

CRACK_SIZES = [0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4]
# Fraction of the peak reaction below which the specimen is taken as broken
BROKEN = 0.5


@dataclass
class SentConfig:
    """
    Plate width W, half height, crack sizes a / W, and the top displacement program in units of
    the elastic opening at the strength, sigma_c * half_height / E'.
    """
    params: material.MaterialParams
    model: str = 'AT2'
    width: float = 1.
    height: float = 3.
    crack_sizes: List[float] = field(default_factory=lambda: list(CRACK_SIZES))
    ell_over_h: float = 4.
    band_height: float = None
    growth: float = 1.2
    quadrature: str = 'reduced'
    irreversibility: assembly.IrreversibilityMode = assembly.ALWAYS
    increment: float = 0.01
    max_load: float = 1.5
    solver_config: solver.SolverConfig = field(default_factory=solver.SolverConfig)

    @classmethod
    def from_config(cls, cfg):
        """Build from a RunConfig"""
        m, s = cfg.mesh, cfg.solver
        return cls(params=common.material_params(cfg), model=cfg.model['variant'],
                   width=m['width'], height=m['height'], crack_sizes=list(m['crack_sizes']),
                   ell_over_h=m['ell_over_h'], band_height=m['band_height'], growth=m['growth'],
                   quadrature=m['quadrature'], irreversibility=common.irreversibility(cfg),
                   increment=s['increment'], max_load=s['max_load'],
                   solver_config=common.solver_config(cfg, []))


def _typed(cfg):
    return cfg if isinstance(cfg, SentConfig) else SentConfig.from_config(cfg)


def sent_mesh(cfg, a_over_W=None):
    """
    Half plate mesh for crack size `a_over_W` (default: the first configured size).
    """
    sent = _typed(cfg)
    a_over_W = sent.crack_sizes[0] if a_over_W is None else a_over_W
    ell = sent.params.ell
    spec = meshlib.MeshSpec('sent_half', ell / sent.ell_over_h, ell, sent.quadrature, sent.growth,
                            width=sent.width, height=sent.height,
                            crack_length=a_over_W * sent.width, band_height=sent.band_height)
    return meshlib.build_mesh(spec)


def tension_program(mesh, unit_opening):
    """
    u_y = load * unit_opening on the top edge, u_y = 0 along the whole bottom edge and u_x = 0
    at the ligament end.
    """
    top = mesh.node_sets['top']
    fixed = assembly.node_constraint(mesh.node_sets['bottom'], 1, 0.) \
        + assembly.node_constraint(mesh.node_sets['pin'], 0, 0.)

    def constraints(load):
        return fixed + assembly.node_constraint(top, 1, load * unit_opening)

    return solver.BoundaryProgram(constraints, reaction_set='top', reaction_component=1,
                                  ligament='ligament')


def broken(records):
    """
    True once the reaction has dropped below BROKEN times its peak after passing the peak.
    """
    if len(records) < 2:
        return False
    reactions = np.array([r.reaction for r in records])
    k = int(np.argmax(reactions))
    return k < len(records) - 1 and reactions[-1] < BROKEN * reactions[k]


def failure_stress(records, width):
    """Peak reaction per unit width"""
    if not records:
        return float('nan')
    return max(r.reaction for r in records) / width


def run_sent(cfg):
    """
    One displacement-controlled run per crack size; a solver failure marks that size and the
    sweep continues.
    """
    sent = _typed(cfg)
    params, model = sent.params, material.model_variant(sent.model)
    sigma_c = float(material.critical_stress(params, model))
    unit_opening = sigma_c * sent.height / params.plane_strain_modulus
    config = dataclasses.replace(sent.solver_config, increments=solver.uniform_increments(
        0., sent.max_load, sent.increment))

    record = common.BenchmarkRecord('sent', columns=['a_over_W', 'sigma_f', 'sigma_griffith',
                                                     'sigma_c'])
    record.inputs = {'variant': model.tag, 'ell_over_W': params.ell / sent.width,
                     'ell_over_h': sent.ell_over_h, 'crack_sizes': list(sent.crack_sizes)}
    failed, elements = [], 0

    for a_over_W in sent.crack_sizes:
        mesh = sent_mesh(sent, a_over_W)
        elements += mesh.n_elements
        msglogger.info('SENT: %s, a/W = %g, %d elements', model.tag, a_over_W, mesh.n_elements)
        case = common.BenchmarkRecord(f'sent a/W={a_over_W:g}')
        state = assembly.initial_state(mesh, params, 'phase_field')
        steps = common.run_program(case, mesh, params, model,
                                   tension_program(mesh, unit_opening), config, state,
                                   sent.irreversibility, stop=broken)
        record.steps.extend(steps)
        record.summary['runtime_s'] = record.summary.get('runtime_s', 0.) \
            + case.summary['runtime_s']

        sigma_f = failure_stress(steps, sent.width)
        if case.failed:
            failed.append(a_over_W)
            record.message += f'a/W = {a_over_W:g}: {case.message}\n'
            if not broken(steps):
                sigma_f = float('nan')
        elif not broken(steps):
            msglogger.warning('a/W = %g did not break up to load factor %g', a_over_W,
                              sent.max_load)
        griffith = oracles.griffith_strength(a_over_W * sent.width, sent.width, params)
        record.curve.append((a_over_W, sigma_f, griffith, sigma_c))

    record.failed = bool(failed)
    record.summary['element_count'] = elements
    record.summary['sigma_c'] = sigma_c
    record.summary['transition_flaw_size'] = oracles.transition_flaw_size(params, model,
                                                                         sent.width)
    record.summary['transition_flaw_size_over_W'] = \
        record.summary['transition_flaw_size'] / sent.width
    record.summary['failed_count'] = len(failed)
    record.summary['failed_crack_sizes'] = ' '.join(f'{a:g}' for a in failed)
    return record


benchmarks = [
    {
        'name': 'sent',
        'defaults': {
            'material': {'ell': 0.03},
            'model': {'variant': 'AT2', 'crack': 'phase_field'},
            'mesh': {'ell_over_h': 4., 'width': 1., 'height': 3., 'band_height': None,
                     'crack_sizes': list(CRACK_SIZES)},
            'solver': {'increment': 0.01, 'max_load': 1.5},
        },
        'mesh': sent_mesh,
        'run': run_sent,
        'columns': ['a_over_W', 'sigma_f', 'sigma_griffith', 'sigma_c'],
    },
]
