###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Pieces shared by the benchmark drivers
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List

import assembly
import material
import solver

msglogger = logging.getLogger()


@dataclass
class BenchmarkRecord:
    """
    Inputs echo, measured and reference curves, per-step records and summary scalars.
    """
    name: str
    inputs: Dict = field(default_factory=dict)
    columns: List[str] = field(default_factory=list)
    curve: List = field(default_factory=list)
    steps: List = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    failed: bool = False
    message: str = ''


def material_params(cfg):
    """MaterialParams from the material section"""
    m = cfg.material
    return material.MaterialParams(m['E'], m['nu'], m['Gc'], m['ell'], m['kappa'])


def model_variant(cfg):
    """ModelVariant from the model section"""
    return material.model_variant(cfg.model['variant'])


def irreversibility(cfg):
    """IrreversibilityMode from the model section"""
    return assembly.IrreversibilityMode(cfg.model['irreversibility'], cfg.model['threshold'])


def element_size(cfg):
    """Refined-zone element size from ell / h"""
    return cfg.material['ell'] / cfg.mesh['ell_over_h']


def solver_config(cfg, increments):
    """SolverConfig from the solver and output sections"""
    s = cfg.solver
    return solver.SolverConfig(scheme=s['scheme'], tolerance=s['tolerance'],
                               max_iterations=s['max_iterations'], max_passes=s['max_passes'],
                               increments=increments, cutback=s['cutback'],
                               min_increment=s['min_increment'], line_search=s['line_search'],
                               memory=s['memory'], verbose=cfg.output['verbose'])


def load_increments(cfg, scale=1.):
    """
    Uniform increments from solver.start_load to solver.max_load, times `scale`.
    """
    s = cfg.solver
    return [scale * i for i in solver.uniform_increments(s['start_load'], s['max_load'],
                                                         s['increment'])]


def run_program(record, mesh, params, model, program, config, state, mode, **kwargs):
    """
    Run a load program, filling `record.steps`; solver failure marks the record instead of
    raising. Returns the records obtained.
    """
    start = time.time()
    try:
        steps = solver.run_load_program(mesh, params, model, program, config, state, mode,
                                        **kwargs)
    except solver.PartialResultsError as exc:
        msglogger.error('Load program aborted: %s', exc)
        steps = exc.records
        record.failed = True
        record.message = str(exc)
    record.steps.extend(steps)
    record.summary['runtime_s'] = record.summary.get('runtime_s', 0.) + time.time() - start
    return steps
