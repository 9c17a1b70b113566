###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Incremental load stepping: monolithic quasi-Newton (BFGS) solve of the coupled system with the
block-diagonal stiffness as initial matrix, and a staggered (alternate minimisation) scheme.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import List

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

import assembly
import postproc
import variants
from assembly import ALWAYS, Constraints, SolutionState

msglogger = logging.getLogger()

# Absolute residual floor in units of E h (u) and (Gc / ell) h^2 (phi) per sqrt(node)
RESIDUAL_FLOOR = 1e-12
SOLVE_TOLERANCE = 1e-10


class SolverError(RuntimeError):
    """
    Linear solve failure
    """


class NonConvergenceError(SolverError):
    """
    Iteration or pass cap exceeded within a load step
    """


class PartialResultsError(SolverError):
    """
    Load program aborted after the increment fell below the minimum; carries what was done.
    """
    def __init__(self, message, records, state):
        super().__init__(message)
        self.records = records
        self.state = state


@dataclass
class SolverConfig:
    """
    Nonlinear solver settings and the load program (list of load-factor increments).
    """
    scheme: str = 'bfgs_monolithic'
    tolerance: float = 1e-6
    max_iterations: int = 200
    max_passes: int = 500
    increments: List[float] = field(default_factory=list)
    cutback: float = 0.5
    min_increment: float = 1e-6
    line_search: int = 10
    memory: int = 50
    verbose: bool = False

    def __post_init__(self):
        self.scheme = variants.scheme(self.scheme)
        if not self.tolerance > 0.:
            raise ValueError(f'solver.tolerance must be positive, got {self.tolerance}')
        if self.max_iterations < 1 or self.max_passes < 1:
            raise ValueError('solver.max_iterations and solver.max_passes must be at least 1')
        if not 0. < self.cutback < 1.:
            raise ValueError(f'solver.cutback must lie in (0, 1), got {self.cutback}')
        if not self.min_increment > 0.:
            raise ValueError(f'solver.min_increment must be positive, got {self.min_increment}')
        self.increments = [float(i) for i in self.increments]
        if not np.all(np.isfinite(self.increments)):
            raise ValueError('solver increments must be finite')


@dataclass
class LoadStepRecord:
    """
    Summary of one accepted load step.
    """
    step: int
    load_factor: float
    iterations: int
    res_u: float
    res_phi: float
    reaction: float
    crack_surface: float
    max_phi_ligament: float
    elastic_energy: float = 0.
    fracture_energy: float = 0.


@dataclass
class StepStats:
    """Convergence data of a single step"""
    iterations: int
    res_u: float
    res_phi: float
    system: object = None


def uniform_increments(start, stop, step):
    """
    Increments taking the load factor from `start` to `stop` in steps of `step` (last one
    shortened if needed).
    """
    if step <= 0. or stop <= start:
        return []
    n = int(np.ceil((stop - start) / step - 1e-9))
    inc = [step] * n
    inc[-1] = stop - start - step * (n - 1)
    return inc


def factorize(K):
    """
    Sparse LU factorisation of `K`; returns a solve callable.
    """
    try:
        lu = spla.splu(sp.csc_matrix(K), permc_spec='COLAMD')
    except RuntimeError as exc:
        raise SolverError(f'Factorisation failed: {exc}') from exc
    return lu.solve


def sparse_solve(K, rhs, solve=None):
    """
    Solve `K x = rhs` by sparse direct factorisation (or the prefactorised `solve`).
    """
    rhs = np.asarray(rhs, dtype=float)
    x = (solve or factorize(K))(rhs)
    if not np.all(np.isfinite(x)):
        raise SolverError('Linear solve produced non-finite values')
    scale = np.linalg.norm(rhs)
    if scale > 0.:
        rel = np.linalg.norm(K @ x - rhs) / scale
        if rel > SOLVE_TOLERANCE:
            msglogger.warning('Linear solve relative residual %.3e', rel)
    return x


class Problem:
    """
    Mesh, material and model fixed over a load program; builds global systems for trial
    states against the last committed state.
    """
    def __init__(self, mesh, params, model, mode=ALWAYS):
        self.mesh = mesh
        self.params = params
        self.model = model
        self.mode = mode

    @property
    def n_u(self):
        """Number of displacement dofs"""
        return 2 * self.mesh.n_nodes

    def assemble(self, x, committed, constraints, stiffness=True):
        """
        Global system at coupled vector `x` with history from `committed`.
        """
        trial = SolutionState(x[:self.n_u], x[self.n_u:], committed.H)
        return assembly.assemble_global(self.mesh, trial, self.params, self.model, self.mode,
                                        constraints, stiffness, reference_phi=committed.phi)

    def commit(self, x, system):
        """
        Converged state: history and driving energy of the accepted system become permanent.
        """
        return SolutionState(x[:self.n_u].copy(), x[self.n_u:].copy(), system.H.copy(),
                             system.psi0.copy())

    def floor(self):
        """
        Absolute residual norms (u, phi) below which a step counts as converged whatever the
        reference norm.
        """
        area = self.mesh.area() / self.mesh.n_elements
        scale = RESIDUAL_FLOOR * np.sqrt(self.mesh.n_nodes)
        return (scale * self.params.E * np.sqrt(area),
                scale * self.params.Gc / self.params.ell * area)


def _active(phi, r_phi):
    """
    Nodes held at a bound with the residual pushing outwards.
    """
    return ((phi <= 0.) & (r_phi > 0.)) | ((phi >= 1.) & (r_phi < 0.))


def _free_residual(system, cmask, active):
    r = system.R.copy()
    r[cmask] = 0.
    r[len(system.R_u):][active] = 0.
    return r


def _norms(r, n_u):
    return float(np.linalg.norm(r[:n_u])), float(np.linalg.norm(r[n_u:]))


def _reference(ref, res, floor):
    """
    Reference norms are those of iteration 0; a block already in balance there takes its first
    norm above the absolute floor instead.
    """
    if ref is None:
        return res
    return tuple(f if f > fl else r for f, r, fl in zip(ref, res, floor))


def _converged(res, ref, floor, tolerance):
    """Both residual norms below tolerance times their reference or the absolute floor"""
    return all(r <= max(tolerance * f, fl) for r, f, fl in zip(res, ref, floor))


class _BlockSolve:
    """
    Inverse of the constrained block-diagonal tangent, used as initial BFGS matrix.
    """
    def __init__(self, system, fixed):
        n_u = system.K_uu.shape[0]
        fixed_u, fixed_p = np.nonzero(fixed[:n_u])[0], np.nonzero(fixed[n_u:])[0]
        k_uu, _ = assembly.eliminate(system.K_uu, np.zeros(n_u), fixed_u, 0.)
        k_pp, _ = assembly.eliminate(system.K_pp, np.zeros(len(fixed) - n_u), fixed_p, 0.)
        self.n_u = n_u
        self.fixed = fixed
        self.solve_u = factorize(k_uu)
        self.solve_p = factorize(k_pp)

    def __call__(self, r):
        r = np.where(self.fixed, 0., r)
        return np.concatenate([self.solve_u(r[:self.n_u]), self.solve_p(r[self.n_u:])])


def _two_loop(r, initial, history_s, history_y, history_rho):
    """
    L-BFGS two-loop recursion returning H r.
    """
    q = r.copy()
    alpha = []
    for s, y, rho in zip(reversed(history_s), reversed(history_y), reversed(history_rho)):
        a = rho * np.dot(s, q)
        alpha.append(a)
        q -= a * y
    d = initial(q)
    for s, y, rho, a in zip(history_s, history_y, history_rho, reversed(alpha)):
        beta = rho * np.dot(y, d)
        d += s * (a - beta)
    return d


def _start(state, problem, constraints):
    x = state.x
    x[constraints.dofs] = constraints.values
    x[problem.n_u:] = np.clip(x[problem.n_u:], 0., 1.)
    return x


def solve_step_bfgs(state, problem, constraints, config):
    """
    Monolithic quasi-Newton solve of one load step from the converged `state` to the
    Dirichlet data `constraints`. The first iteration is an elastic predictor; an increment that
    leaves the phase field untouched converges there. Returns the committed state and StepStats.
    """
    n_u = problem.n_u
    x = _start(state, problem, constraints)
    cmask = constraints.mask(len(x))
    system = problem.assemble(x, state, constraints)
    floor = problem.floor()
    ref = None

    history_s = deque(maxlen=config.memory)
    history_y = deque(maxlen=config.memory)
    history_rho = deque(maxlen=config.memory)
    initial = None
    active = None

    for iteration in range(config.max_iterations + 1):
        new_active = _active(x[n_u:], system.R_phi)
        r = _free_residual(system, cmask, new_active)
        res_u, res_p = _norms(r, n_u)
        if not np.isfinite(res_u + res_p):
            raise NonConvergenceError('Non-finite residual')
        ref = _reference(ref, (res_u, res_p), floor)
        if _converged((res_u, res_p), ref, floor, config.tolerance):
            return problem.commit(x, system), StepStats(iteration, res_u, res_p, system)
        if iteration == config.max_iterations:
            break

        if iteration == 0:
            # Elastic predictor: displacement solve with the phase field held at its start
            k, rhs = assembly.eliminate(system.K_uu, -system.R_u, np.nonzero(cmask[:n_u])[0], 0.)
            x = x.copy()
            x[:n_u] += sparse_solve(k, rhs)
            system = problem.assemble(x, state, constraints)
            continue

        if initial is None or not np.array_equal(new_active, active):
            if system.K_uu is None:
                system = problem.assemble(x, state, constraints)
            active = new_active
            fixed = cmask.copy()
            fixed[n_u:] |= active
            initial = _BlockSolve(system, fixed)
            history_s.clear()
            history_y.clear()
            history_rho.clear()

        d = -_two_loop(r, initial, history_s, history_y, history_rho)
        d[cmask] = 0.
        d[n_u:][active] = 0.

        step = 1.
        base = np.linalg.norm(r)
        for halving in range(config.line_search + 1):
            x_try = x + step * d
            x_try[n_u:] = np.clip(x_try[n_u:], 0., 1.)
            trial = problem.assemble(x_try, state, constraints, stiffness=False)
            r_try = _free_residual(trial, cmask, active)
            if np.linalg.norm(r_try) <= base or halving == config.line_search:
                break
            step *= 0.5

        s, y = x_try - x, r_try - r
        sy = np.dot(s, y)
        if sy > 1e-14 * np.linalg.norm(s) * np.linalg.norm(y):
            history_s.append(s)
            history_y.append(y)
            history_rho.append(1. / sy)
        else:
            history_s.clear()
            history_y.clear()
            history_rho.clear()
        x, system = x_try, trial

    raise NonConvergenceError(f'BFGS did not converge in {config.max_iterations} iterations '
                              f'(|R_u| {res_u:.3e}, |R_phi| {res_p:.3e})')


def bounded_phase_solve(K, R, phi, fixed=None, max_iterations=500):
    """
    Minimise the quadratic phase field functional with gradient `R` at `phi` and Hessian `K`
    subject to 0 <= phi <= 1 (primal-dual active set). `fixed` marks Dirichlet nodes.
    """
    fixed = np.zeros(len(phi), dtype=bool) if fixed is None else fixed
    b = K @ phi - R
    diag = K.diagonal()
    lower = (phi <= 0.) & (R > 0.) & ~fixed
    upper = (phi >= 1.) & (R < 0.) & ~fixed

    for _ in range(max_iterations):
        held = lower | upper | fixed
        values = np.where(upper, 1., np.where(lower, 0., phi))
        k, rhs = assembly.eliminate(K, b, np.nonzero(held)[0], values[held])
        new = sparse_solve(k, rhs)
        lam = K @ new - b
        new_lower = (lam > diag * new) & ~fixed
        new_upper = (lam + diag * (1. - new) < 0.) & ~fixed & ~new_lower
        if np.array_equal(new_lower, lower) and np.array_equal(new_upper, upper):
            return np.clip(new, 0., 1.)
        lower, upper = new_lower, new_upper

    raise NonConvergenceError('Phase field active set did not settle')


def solve_phase_subproblem(problem, u, committed, constraints=None):
    """
    Phase field minimiser for fixed displacement `u` and history from `committed`.
    """
    constraints = constraints if constraints is not None else Constraints()
    fixed = constraints.mask(len(u) + len(committed.phi))[problem.n_u:]
    phi = committed.phi.copy()
    phi[fixed] = constraints.values[constraints.dofs >= problem.n_u]
    system = problem.assemble(np.concatenate([u, phi]), committed, constraints)
    return bounded_phase_solve(system.K_pp, system.R_phi, phi, fixed)


def solve_step_staggered(state, problem, constraints, config):
    """
    Alternate exact solves of the displacement problem (phase field frozen) and the bounded
    phase field problem (displacement frozen) until both residuals and the phase field
    increment meet the tolerance.
    """
    n_u = problem.n_u
    x = _start(state, problem, constraints)
    cmask = constraints.mask(len(x))
    u_dofs = constraints.dofs[constraints.dofs < n_u]
    fixed_p = cmask[n_u:]
    system = problem.assemble(x, state, constraints)
    floor = problem.floor()
    ref = _reference(None, _norms(_free_residual(system, cmask, _active(x[n_u:], system.R_phi)),
                                  n_u), floor)

    for npass in range(1, config.max_passes + 1):
        k, rhs = assembly.eliminate(system.K_uu, -system.R_u, u_dofs, 0.)
        x[:n_u] += sparse_solve(k, rhs)
        system = problem.assemble(x, state, constraints)

        phi = bounded_phase_solve(system.K_pp, system.R_phi, x[n_u:], fixed_p)
        dphi = phi - x[n_u:]
        x[n_u:] = phi
        system = problem.assemble(x, state, constraints)

        res_u, res_p = _norms(_free_residual(system, cmask, _active(phi, system.R_phi)), n_u)
        if not np.isfinite(res_u + res_p):
            raise NonConvergenceError('Non-finite residual')
        ref = _reference(ref, (res_u, res_p), floor)
        increment = np.linalg.norm(dphi) / max(np.linalg.norm(phi), 1.)
        if _converged((res_u, res_p), ref, floor, config.tolerance) \
           and increment <= config.tolerance:
            return problem.commit(x, system), StepStats(npass, res_u, res_p, system)

    raise NonConvergenceError(f'Staggered scheme did not converge in {config.max_passes} passes '
                              f'(|R_u| {res_u:.3e}, |R_phi| {res_p:.3e})')


class BoundaryProgram:
    """
    Dirichlet data as a function of the load factor, plus the node sets used for reporting.
    """
    def __init__(self, constraints, reaction_set=None, reaction_component=1, ligament=None,
                 start=0.):
        self.constraints = constraints
        self.reaction_set = reaction_set
        self.reaction_component = reaction_component
        self.ligament = ligament
        self.start = float(start)


def _record(step, load, stats, state, problem, program):
    mesh, params, model = problem.mesh, problem.params, problem.model
    reaction = float('nan')
    if program.reaction_set is not None:
        reaction = postproc.reaction_force(stats.system, mesh.node_sets[program.reaction_set],
                                           program.reaction_component)
    max_phi = float('nan')
    if program.ligament is not None and len(mesh.node_sets[program.ligament]) > 0:
        max_phi = float(state.phi[mesh.node_sets[program.ligament]].max())
    area = postproc.crack_surface(state, mesh, params, model)
    return LoadStepRecord(step, float(load), stats.iterations, stats.res_u, stats.res_phi,
                          reaction, area, max_phi, assembly.elastic_energy(mesh, state, params),
                          params.Gc * area)


def run_load_program(mesh, params, model, program, config, state=None, mode=ALWAYS,
                     on_step=None, stop=None):
    """
    Solve the initial load then every increment of `config.increments`, cutting an increment
    back by `config.cutback` on non-convergence. `on_step(record, state)` is called for every
    accepted step; `stop(records)` returning True ends the program early.
    """
    problem = Problem(mesh, params, model, mode)
    solve = solve_step_bfgs if config.scheme == 'bfgs_monolithic' else solve_step_staggered
    state = state if state is not None else SolutionState.zeros(mesh)
    log = msglogger.info if config.verbose else msglogger.debug
    records = []

    def accept(new_state, stats, load):
        if mode.tag == 'always':
            assert np.all(new_state.H >= state.H), 'history field decreased'
        record = _record(len(records), load, stats, new_state, problem, program)
        records.append(record)
        log('Step %4d  load %-12.6g iterations %4d  |R_u| %.3e  |R_phi| %.3e  A %.6g',
            record.step, record.load_factor, record.iterations, record.res_u, record.res_phi,
            record.crack_surface)
        if on_step is not None:
            on_step(record, new_state)

    load = program.start
    try:
        new_state, stats = solve(state, problem, program.constraints(load), config)
    except SolverError as exc:
        raise PartialResultsError(f'Initial step failed: {exc}', records, state) from exc
    accept(new_state, stats, load)
    state = new_state

    for increment in config.increments:
        remaining, delta = increment, increment
        while abs(remaining) > 1e-12 * max(1., abs(increment)):
            if stop is not None and stop(records):
                return records
            delta = delta if abs(delta) <= abs(remaining) else remaining
            try:
                new_state, stats = solve(state, problem, program.constraints(load + delta),
                                         config)
            except SolverError as exc:
                delta *= config.cutback
                msglogger.info('Cutting back to increment %.6g at load %.6g (%s)', delta, load,
                               exc)
                if abs(delta) < config.min_increment:
                    raise PartialResultsError(f'Increment below {config.min_increment:g} at '
                                              f'load {load:.6g}', records, state) from exc
                continue
            load += delta
            remaining -= delta
            accept(new_state, stats, load)
            state = new_state
        if stop is not None and stop(records):
            break

    return records
