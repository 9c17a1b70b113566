#!/usr/bin/env python3
###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Tests for element and global residuals, tangents, history update and Dirichlet elimination
"""
import numpy as np
import pytest

import assembly
import material
import mesh as meshlib
import solver
from assembly import SolutionState


def patch(quadrature='reduced', width=1., height=0.5, h=0.25):
    '''
    Eight element rectangle
    '''
    spec = meshlib.MeshSpec('rectangle', h, None, quadrature, width=width, height=height)
    return meshlib.build_mesh(spec)


def params():
    '''
    Unit material with ell = 0.5
    '''
    return material.MaterialParams(1., 0.3, 1., 0.5)


def random_state(mesh, seed=0):
    '''
    Small random displacements, phase field in [0.2, 0.6] and a positive history
    '''
    rng = np.random.default_rng(seed)
    return SolutionState(0.01 * rng.standard_normal(2 * mesh.n_nodes),
                         rng.uniform(0.2, 0.6, mesh.n_nodes),
                         rng.uniform(0.1, 0.6, (mesh.n_elements, mesh.n_gauss)))


def central_difference(f, x, step=1e-6):
    '''
    Gradient of scalar f by central differences
    '''
    grad = np.zeros_like(x)
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        grad[i] = (f(xp) - f(xm)) / (2. * step)
    return grad


@pytest.mark.parametrize('model', ['AT1', 'AT2'])
def test_residual_is_energy_gradient(model):
    '''
    R_u is the gradient of the elastic energy, R_phi that of the history and fracture energies
    '''
    mesh, p = patch(), params()
    state = random_state(mesh)
    system = assembly.assemble_global(mesh, state, p, model, history=state.H)

    def elastic(u):
        return assembly.elastic_energy(mesh, SolutionState(u, state.phi, state.H), p)

    def phase(phi):
        return assembly.history_energy(mesh, phi, state.H, model) \
            + assembly.fracture_energy(mesh, phi, p, model)

    fd_u = central_difference(elastic, state.u)
    fd_phi = central_difference(phase, state.phi)
    assert np.linalg.norm(fd_u - system.R_u) < 1e-4 * np.linalg.norm(system.R_u)
    assert np.linalg.norm(fd_phi - system.R_phi) < 1e-4 * np.linalg.norm(system.R_phi)


@pytest.mark.parametrize('model', ['AT1', 'AT2'])
def test_element_stiffness_consistent(model):
    '''
    Residual change under a perturbation of one nodal value matches the stiffness column
    '''
    mesh, p = patch(), params()
    state = random_state(mesh, seed=3)
    k_uu, k_pp = assembly.element_stiffness(mesh, 5, state, p, model, history=state.H)
    r_u, r_phi = assembly.element_residuals(mesh, 5, state, p, model, history=state.H)
    step = 1e-7
    conn = mesh.elements[5]

    for local in (0, 7, 11):
        moved = state.copy()
        moved.u[mesh.udofs[5, local]] += step
        r_u1, _ = assembly.element_residuals(mesh, 5, moved, p, model, history=state.H)
        column = (r_u1 - r_u) / step
        assert np.linalg.norm(column - k_uu[:, local]) < 1e-4 * np.linalg.norm(k_uu[:, local])

    for local in (1, 4):
        moved = state.copy()
        moved.phi[conn[local]] += step
        _, r_phi1 = assembly.element_residuals(mesh, 5, moved, p, model, history=state.H)
        column = (r_phi1 - r_phi) / step
        assert np.linalg.norm(column - k_pp[:, local]) < 1e-4 * np.linalg.norm(k_pp[:, local])


def test_symmetry_and_positive_diagonal():
    '''
    Both blocks symmetric to machine precision, K_phiphi diagonal positive
    '''
    mesh, p = patch(), params()
    state = random_state(mesh)
    system = assembly.assemble_global(mesh, state, p, 'AT2', history=state.H)
    for k in (system.K_uu, system.K_pp):
        assert abs(k - k.T).max() <= 1e-14 * abs(k).max()
    assert np.all(system.K_pp.diagonal() > 0.)


def test_rigid_body_modes():
    '''
    Unconstrained K_uu has exactly three zero-energy modes
    '''
    mesh, p = patch('full'), params()
    system = assembly.assemble_global(mesh, SolutionState.zeros(mesh), p, 'AT2')
    eig = np.linalg.eigvalsh(system.K_uu.toarray())
    assert np.sum(np.abs(eig) < 1e-10 * eig.max()) == 3


@pytest.mark.parametrize('model', ['AT1', 'AT2'])
def test_phase_block_positive_definite(model):
    '''
    K_phiphi positive definite at phi = 0 under a positive history on a four element patch
    '''
    mesh, p = patch('full', width=0.5), params()
    assert mesh.n_elements == 4
    history = np.full((mesh.n_elements, mesh.n_gauss), 0.1)
    system = assembly.assemble_global(mesh, SolutionState.zeros(mesh), p, model,
                                      history=history)
    assert np.linalg.eigvalsh(system.K_pp.toarray()).min() > 0.


def test_phase_block_without_history():
    '''
    At H = 0 the AT2 phase block stays positive definite; the AT1 block is the gradient term
    alone, singular on constants only
    '''
    mesh, p = patch('full', width=0.5), params()
    at2 = assembly.assemble_global(mesh, SolutionState.zeros(mesh), p, 'AT2')
    assert np.linalg.eigvalsh(at2.K_pp.toarray()).min() > 0.
    at1 = assembly.assemble_global(mesh, SolutionState.zeros(mesh), p, 'AT1')
    eig = np.linalg.eigvalsh(at1.K_pp.toarray())
    assert np.sum(np.abs(eig) < 1e-10 * eig.max()) == 1
    assert np.allclose(at1.K_pp @ np.ones(mesh.n_nodes), 0., atol=1e-12)


def test_rigid_translation():
    '''
    Rigid translation: no displacement residual; the AT2 phase residual is zero at H = 0 and
    the AT1 one is the local dissipation pushing phi against its lower bound
    '''
    mesh, p = patch(), params()
    state = SolutionState.zeros(mesh)
    state.u[0::2] = 0.3
    state.u[1::2] = -0.1
    for model in ('AT1', 'AT2'):
        r_u, _ = assembly.element_residuals(mesh, 2, state, p, model)
        assert np.allclose(r_u, 0., atol=1e-14)
    _, r_at2 = assembly.element_residuals(mesh, 2, state, p, 'AT2')
    assert np.allclose(r_at2, 0., atol=1e-14)
    _, r_at1 = assembly.element_residuals(mesh, 2, state, p, 'AT1')
    local = p.Gc / (4. * material.AT1.cw * p.ell)
    assert np.allclose(r_at1, local * assembly.nodal_weights(mesh)[2])
    assert np.all(r_at1 > 0.)


def test_nodal_weights():
    '''
    Positive, summing to the element area; 1/36 of it per corner and 2/9 per midside on a
    rectangle
    '''
    for quadrature in ('reduced', 'full'):
        mesh = patch(quadrature)
        weights = assembly.nodal_weights(mesh)
        area = mesh.wdet.sum(axis=1)
        assert np.all(weights > 0.)
        assert np.allclose(weights.sum(axis=1), area)
        assert np.allclose(weights[:, :4], area[:, None] / 36.)
        assert np.allclose(weights[:, 4:], 2. * area[:, None] / 9.)


def test_at1_elastic_threshold():
    '''
    At phi = 0 the AT1 phase residual of a uniform history H is (local - 2 H) times the nodal
    weights: positive below the onset energy density, negative above it
    '''
    mesh, p = patch(), params()
    state = SolutionState.zeros(mesh)
    _, r_phi = assembly.element_residuals(mesh, 0, state, p, 'AT2')
    assert np.all(r_phi == 0.)

    local = p.Gc / (4. * material.AT1.cw * p.ell)
    onset = 0.5 * p.E * material.damage_onset_strain(p, 'AT1')**2
    assert local == pytest.approx(2. * onset)
    weights = assembly.nodal_weights(mesh)[0]
    for factor in (0.5, 1., 2.):
        history = np.full(state.H.shape, factor * onset)
        _, r_at1 = assembly.element_residuals(mesh, 0, state, p, 'AT1', history=history)
        assert np.allclose(r_at1, (1. - factor) * local * weights, atol=1e-14)
    assert np.all(r_at1 < 0.)


def test_fully_broken_stiffness():
    '''
    phi = 1 leaves the residual stiffness kappa K0
    '''
    mesh, p = patch(), params()
    intact = SolutionState.zeros(mesh)
    broken = SolutionState.zeros(mesh)
    broken.phi[:] = 1.
    k0, _ = assembly.element_stiffness(mesh, 4, intact, p, 'AT2')
    k1, _ = assembly.element_stiffness(mesh, 4, broken, p, 'AT2')
    assert np.allclose(k1 * (1. + p.kappa) / p.kappa, k0, rtol=1e-8, atol=1e-12 * abs(k0).max())


def test_uniaxial_strain_residual():
    '''
    Uniform strain: the residual is the traction resultant on the element faces
    '''
    mesh, p = patch(h=0.5, width=0.5, height=0.5), params()
    assert mesh.n_elements == 1
    eps = 1e-3
    state = SolutionState.zeros(mesh)
    state.u[0::2] = eps * mesh.nodes[:, 0]
    r_u, _ = assembly.element_residuals(mesh, 0, state, p, 'AT2')
    c = material.elasticity_tensor(p.E, p.nu)
    # Face x = 0.5 carries sigma_xx times the length, split 1/6, 4/6, 1/6 over the Q8 face
    sigma = (1. + p.kappa) * c[0, 0] * eps
    right = mesh.elements[0][[1, 5, 2]]
    local = [list(mesh.elements[0]).index(n) for n in right]
    assert np.allclose(r_u[[2 * i for i in local]], sigma * 0.5 * np.array([1., 4., 1.]) / 6.)
    assert r_u[0::2].sum() == pytest.approx(0., abs=1e-15)


def test_two_element_assembly():
    '''
    Global blocks equal the hand scatter-add of the element blocks
    '''
    mesh, p = patch(h=0.5, width=1., height=0.5), params()
    assert mesh.n_elements == 2
    state = random_state(mesh, seed=7)
    system = assembly.assemble_global(mesh, state, p, 'AT2', history=state.H)
    k_uu = np.zeros((2 * mesh.n_nodes, 2 * mesh.n_nodes))
    k_pp = np.zeros((mesh.n_nodes, mesh.n_nodes))
    r_phi = np.zeros(mesh.n_nodes)
    for e in range(2):
        ke_uu, ke_pp = assembly.element_stiffness(mesh, e, state, p, 'AT2', history=state.H)
        _, re_phi = assembly.element_residuals(mesh, e, state, p, 'AT2', history=state.H)
        k_uu[np.ix_(mesh.udofs[e], mesh.udofs[e])] += ke_uu
        k_pp[np.ix_(mesh.elements[e], mesh.elements[e])] += ke_pp
        r_phi[mesh.elements[e]] += re_phi
    assert np.allclose(system.K_uu.toarray(), k_uu)
    assert np.allclose(system.K_pp.toarray(), k_pp)
    assert np.allclose(system.R_phi, r_phi)
    # Shared face couples three nodes
    shared = np.intersect1d(mesh.elements[0], mesh.elements[1])
    assert len(shared) == 3


def test_update_history():
    '''
    Always: running maximum; thresholded: maximum only where phi reached the threshold
    '''
    state = SolutionState(np.zeros(2), np.zeros(1), np.zeros((1, 1)))
    state.H = assembly.update_history(np.array([[1.]]), state)
    assert assembly.update_history(np.array([[0.5]]), state)[0, 0] == 1.

    mode = assembly.IrreversibilityMode('thresholded', 0.95)
    assert assembly.update_history(np.array([[0.5]]), state, mode,
                                   np.array([[0.3]]))[0, 0] == 0.5
    assert assembly.update_history(np.array([[0.5]]), state, mode,
                                   np.array([[0.97]]))[0, 0] == 1.

    # Monotone driving energy: both modes agree
    for value in (1.5, 2., 3.):
        always = assembly.update_history(np.array([[value]]), state)
        thresholded = assembly.update_history(np.array([[value]]), state, mode,
                                              np.array([[0.1]]))
        assert always[0, 0] == thresholded[0, 0] == value
        state.H = always

    with pytest.raises(assembly.AssemblyError):
        assembly.update_history(np.array([[-1.]]), state)
    with pytest.raises(ValueError):
        assembly.IrreversibilityMode('thresholded', 0.)


def test_initial_phase_field_crack():
    '''
    Crack band: H = Hbig and phi = 1 on its nodes
    '''
    spec = meshlib.MeshSpec('rectangle', 0.25, None, width=1., height=0.5, crack_length=0.5)
    mesh, p = meshlib.build_mesh(spec), params()
    state = assembly.initial_state(mesh, p, 'phase_field')
    band = meshlib.crack_band(mesh)
    assert len(band) == 2
    assert np.all(state.H[band] == assembly.HBIG_FACTOR * p.Gc / p.ell)
    assert np.all(np.delete(state.H, band, axis=0) == 0.)
    assert np.all(state.phi[mesh.elements[band]] == 1.)
    assert np.all(assembly.initial_state(mesh, p).phi == 0.)


def test_non_finite_input():
    '''
    The element with a NaN is named in the error
    '''
    mesh, p = patch(), params()
    state = SolutionState.zeros(mesh)
    state.u[2 * mesh.elements[6, 0]] = np.nan
    with pytest.raises(assembly.AssemblyError, match='element'):
        assembly.assemble_global(mesh, state, p, 'AT2')
    with pytest.raises(assembly.AssemblyError, match='dimensions'):
        assembly.assemble_global(mesh, SolutionState.zeros(patch(h=0.5)), p, 'AT2')


def test_constraints():
    '''
    Duplicate equal constraints merge, conflicting ones raise
    '''
    c = assembly.node_constraint([0, 1], 1, 0.) + assembly.node_constraint([1, 2], 1, 0.)
    assert np.array_equal(c.dofs, [1, 3, 5])
    with pytest.raises(assembly.ConstraintError):
        assembly.node_constraint([0], 0, 0.) + assembly.node_constraint([0], 0, 1.)


def test_apply_dirichlet_no_constraints():
    '''
    Zero constraints leave the system unchanged
    '''
    mesh, p = patch(), params()
    state = random_state(mesh)
    system = assembly.assemble_global(mesh, state, p, 'AT2', history=state.H)
    k_uu, rhs_u, k_pp, rhs_p = assembly.apply_dirichlet(system, assembly.Constraints())
    assert abs(k_uu - system.K_uu).max() == 0.
    assert abs(k_pp - system.K_pp).max() == 0.
    assert np.array_equal(rhs_u, -system.R_u)
    assert np.array_equal(rhs_p, -system.R_phi)


def test_fully_constrained():
    '''
    Every displacement dof prescribed: the solve returns the prescribed values
    '''
    mesh, p = patch(), params()
    system = assembly.assemble_global(mesh, SolutionState.zeros(mesh), p, 'AT2')
    values = np.linspace(-1., 1., 2 * mesh.n_nodes)
    k_uu, rhs_u, _, _ = assembly.apply_dirichlet(
        system, assembly.Constraints(np.arange(2 * mesh.n_nodes), values))
    assert np.allclose(solver.sparse_solve(k_uu, rhs_u), values)


def test_cantilever_against_dense_solve():
    '''
    Clamped left edge, tip load: eliminated sparse solve equals the dense solve of the free block
    '''
    spec = meshlib.MeshSpec('rectangle', 0.25, None, width=2., height=0.5)
    mesh, p = meshlib.build_mesh(spec), params()
    system = assembly.assemble_global(mesh, SolutionState.zeros(mesh), p, 'AT2')
    left = mesh.node_sets['left']
    constraints = assembly.node_constraint(left, 0, 0.) + assembly.node_constraint(left, 1, 0.)
    f = np.zeros(2 * mesh.n_nodes)
    f[2 * mesh.node_sets['right'] + 1] = -1e-3
    system.R_u = -f

    k_uu, rhs_u, _, _ = assembly.apply_dirichlet(system, constraints)
    u = solver.sparse_solve(k_uu, rhs_u)

    free = ~constraints.mask(2 * mesh.n_nodes)
    dense = np.linalg.solve(system.K_uu.toarray()[np.ix_(free, free)], f[free])
    assert np.allclose(u[free], dense, rtol=1e-8, atol=1e-14)
    assert np.all(u[~free] == 0.)
    assert u[2 * mesh.node_sets['right'] + 1].mean() < 0.


def test_patch_test():
    '''
    Linear boundary displacements reproduce the linear field at every interior node
    '''
    spec = meshlib.MeshSpec('rectangle', 0.25, None, width=1., height=1.)
    mesh, p = meshlib.build_mesh(spec).rotated(0.2), params()
    exact = np.stack([1e-3 * mesh.nodes[:, 0] + 2e-4 * mesh.nodes[:, 1],
                      -5e-4 * mesh.nodes[:, 0] + 3e-4 * mesh.nodes[:, 1]], axis=1).ravel()
    edge = mesh.boundary_nodes()
    constraints = assembly.node_constraint(edge, 0, exact[2 * edge]) \
        + assembly.node_constraint(edge, 1, exact[2 * edge + 1])
    system = assembly.assemble_global(mesh, SolutionState.zeros(mesh), p, 'AT2')
    k_uu, rhs_u, _, _ = assembly.apply_dirichlet(system, constraints)
    u = solver.sparse_solve(k_uu, rhs_u)
    assert np.allclose(u, exact, rtol=0., atol=1e-12)


def test_energies():
    '''
    Uniform strain energy and crack surface of a fully broken strip
    '''
    mesh, p = patch(), params()
    state = SolutionState.zeros(mesh)
    eps = 1e-2
    state.u[1::2] = eps * mesh.nodes[:, 1]
    c = material.elasticity_tensor(p.E, p.nu)
    assert assembly.elastic_energy(mesh, state, p) == \
        pytest.approx((1. + p.kappa) * 0.5 * c[1, 1] * eps**2 * mesh.area())

    phi = np.ones(mesh.n_nodes)
    # AT2 density 1 / (2 ell) times the area for phi = 1
    assert assembly.fracture_energy(mesh, phi, p, 'AT2') == \
        pytest.approx(p.Gc * mesh.area() / (2. * p.ell))
    assert assembly.fracture_energy(mesh, phi, p, 'AT1') == \
        pytest.approx(3. * p.Gc * mesh.area() / (8. * p.ell))
    history = np.full(state.H.shape, 0.2)
    for model in ('AT1', 'AT2'):
        assert assembly.history_energy(mesh, np.zeros(mesh.n_nodes), history, model) == \
            pytest.approx(0.2 * mesh.area())
        assert assembly.history_energy(mesh, phi, history, model) == 0.


if __name__ == "__main__":
    test_residual_is_energy_gradient('AT1')
    test_residual_is_energy_gradient('AT2')
    test_element_stiffness_consistent('AT1')
    test_element_stiffness_consistent('AT2')
    test_symmetry_and_positive_diagonal()
    test_rigid_body_modes()
    test_phase_block_positive_definite('AT1')
    test_phase_block_positive_definite('AT2')
    test_phase_block_without_history()
    test_rigid_translation()
    test_nodal_weights()
    test_at1_elastic_threshold()
    test_fully_broken_stiffness()
    test_uniaxial_strain_residual()
    test_two_element_assembly()
    test_update_history()
    test_initial_phase_field_crack()
    test_non_finite_input()
    test_constraints()
    test_apply_dirichlet_no_constraints()
    test_fully_constrained()
    test_cantilever_against_dense_solve()
    test_patch_test()
    test_energies()
    print('\nSUCCESS!!')
