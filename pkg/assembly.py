###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Residuals and tangent blocks of the coupled displacement / phase field problem, history field
update and Dirichlet constraint handling.

Coupled dof vector layout: [u_x0, u_y0, u_x1, u_y1, ..., phi_0, phi_1, ...].
"""
import logging

import numpy as np
import scipy.sparse as sp

import material
import mesh as meshlib

msglogger = logging.getLogger()

# Stand-in for an infinite history value on a phase-field induced crack, in units of Gc / ell
HBIG_FACTOR = 1e6
THRESHOLD = 0.95


class AssemblyError(RuntimeError):
    """
    Inconsistent or non-finite input to an assembly routine
    """


class ConstraintError(ValueError):
    """
    Conflicting or invalid Dirichlet constraints
    """


class IrreversibilityMode:
    """
    History field policy: `always` keeps the running maximum of the driving energy everywhere,
    `thresholded` keeps it only where the phase field has reached `threshold`.
    """
    def __init__(self, tag='always', threshold=THRESHOLD):
        if tag not in ('always', 'thresholded'):
            raise ValueError(f'Unknown irreversibility mode `{tag}`')
        if not 0. < threshold <= 1.:
            raise ValueError(f'Irreversibility threshold {threshold} outside (0, 1]')
        self.tag = tag
        self.threshold = float(threshold)

    def __repr__(self):
        if self.tag == 'always':
            return 'IrreversibilityMode(always)'
        return f'IrreversibilityMode(thresholded, {self.threshold})'


ALWAYS = IrreversibilityMode('always')


class SolutionState:
    """
    Nodal displacements `u` (2n), nodal phase field `phi` (n), history `H` and driving energy
    `psi0` per Gauss point (elements x points).
    """
    def __init__(self, u, phi, H, psi0=None):
        self.u = np.asarray(u, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.H = np.asarray(H, dtype=float)
        self.psi0 = np.zeros_like(self.H) if psi0 is None else np.asarray(psi0, dtype=float)

    @classmethod
    def zeros(cls, mesh):
        """Unloaded, undamaged state"""
        return cls(np.zeros(2 * mesh.n_nodes), np.zeros(mesh.n_nodes),
                   np.zeros((mesh.n_elements, mesh.n_gauss)))

    def copy(self):
        """Deep copy"""
        return SolutionState(self.u.copy(), self.phi.copy(), self.H.copy(), self.psi0.copy())

    @property
    def x(self):
        """Coupled dof vector"""
        return np.concatenate([self.u, self.phi])


def initial_state(mesh, params, crack='geometric'):
    """
    Undamaged state, or for a phase-field induced crack: H = Hbig at every Gauss point of the
    crack band and phi = 1 on its nodes.
    """
    state = SolutionState.zeros(mesh)
    if crack == 'phase_field':
        band = meshlib.crack_band(mesh)
        if len(band) == 0:
            msglogger.warning('Phase-field crack requested but the mesh has no crack faces')
        state.H[band, :] = HBIG_FACTOR * params.Gc / params.ell
        state.phi[np.unique(mesh.elements[band])] = 1.
    return state


class Constraints:
    """
    Dirichlet constraint map over coupled dofs (sorted, unique).
    """
    def __init__(self, dofs=(), values=()):
        dofs = np.asarray(dofs, dtype=np.int64).ravel()
        values = np.broadcast_to(np.asarray(values, dtype=float), dofs.shape).copy()
        order = np.argsort(dofs, kind='stable')
        dofs, values = dofs[order], values[order]
        if len(dofs) > 1:
            same = dofs[1:] == dofs[:-1]
            clash = same & (values[1:] != values[:-1])
            if np.any(clash):
                dof = dofs[1:][clash][0]
                raise ConstraintError(f'Conflicting prescribed values for dof {dof}')
            keep = np.concatenate([[True], ~same])
            dofs, values = dofs[keep], values[keep]
        self.dofs = dofs
        self.values = values

    def __add__(self, other):
        return Constraints(np.concatenate([self.dofs, other.dofs]),
                           np.concatenate([self.values, other.values]))

    def __len__(self):
        return len(self.dofs)

    def mask(self, size):
        """Boolean mask of constrained dofs"""
        m = np.zeros(size, dtype=bool)
        m[self.dofs] = True
        return m


def node_constraint(node_ids, component, values):
    """
    Constrain displacement `component` (0 = x, 1 = y) of `node_ids` to `values`.
    """
    node_ids = np.asarray(node_ids, dtype=np.int64)
    return Constraints(2 * node_ids + component, np.broadcast_to(values, node_ids.shape))


def _check(mesh, state, elems):
    n, ne, ng = mesh.n_nodes, mesh.n_elements, mesh.n_gauss
    if state.u.shape != (2 * n,) or state.phi.shape != (n,) or state.H.shape != (ne, ng):
        raise AssemblyError(f'State dimensions u{state.u.shape} phi{state.phi.shape} '
                            f'H{state.H.shape} do not match mesh ({n} nodes, {ne} x {ng} '
                            'Gauss points)')
    conn = mesh.elements[elems]
    bad = ~(np.isfinite(state.u.reshape(-1, 2)[conn]).all(axis=(1, 2))
            & np.isfinite(state.phi[conn]).all(axis=1)
            & np.isfinite(state.H[elems]).all(axis=1))
    if np.any(bad):
        raise AssemblyError(f'Non-finite input in element {np.atleast_1d(elems)[bad][0]}')


def _fields(mesh, u, phi, elems):
    """
    Gauss point phase field, its gradient and engineering strain for the elements `elems`.
    """
    conn = mesh.elements[elems]
    dndx = mesh.dNdx[elems]
    phi_e = phi[conn]
    phi_gp = phi_e @ mesh.N.T
    grad = np.einsum('egid,ei->egd', dndx, phi_e)
    du = np.einsum('egid,eic->egcd', dndx, u.reshape(-1, 2)[conn])
    strain = np.stack([du[..., 0, 0], du[..., 1, 1], du[..., 0, 1] + du[..., 1, 0]], axis=-1)
    return phi_gp, grad, strain


def _bmatrix(dndx):
    b = np.zeros(dndx.shape[:-2] + (3, 16))
    b[..., 0, 0::2] = dndx[..., 0]
    b[..., 1, 1::2] = dndx[..., 1]
    b[..., 2, 0::2] = dndx[..., 1]
    b[..., 2, 1::2] = dndx[..., 0]
    return b


def driving_energy(mesh, u, params, elems=slice(None)):
    """
    Undamaged elastic energy density 0.5 eps : C0 : eps at every Gauss point.
    """
    _, _, strain = _fields(mesh, u, np.zeros(mesh.n_nodes), elems)
    c0 = material.elasticity_tensor(params.E, params.nu)
    return 0.5 * np.einsum('egk,kl,egl->eg', strain, c0, strain)


def gauss_phase(mesh, phi):
    """Phase field interpolated to all Gauss points"""
    return phi[mesh.elements] @ mesh.N.T


def update_history(psi0_new, state, mode=ALWAYS, phi_gauss=None):
    """
    New history field from the driving energy `psi0_new`. In thresholded mode the maximum is
    kept only where the Gauss point phase field `phi_gauss` of the last converged state has
    reached the threshold.
    """
    psi0_new = np.asarray(psi0_new, dtype=float)
    scale = max(1., float(np.max(np.abs(psi0_new), initial=0.)))
    if np.any(psi0_new < -1e-12 * scale):
        raise AssemblyError('Negative driving energy density')
    psi0_new = np.maximum(psi0_new, 0.)

    if mode.tag == 'always':
        return np.maximum(state.H, psi0_new)

    if phi_gauss is None:
        raise AssemblyError('Thresholded history update needs the Gauss point phase field')
    return np.where(phi_gauss >= mode.threshold, np.maximum(state.H, psi0_new), psi0_new)


def _nodal(wdet, N, H=None):
    # Element area spread over the nodes in proportion to the mass matrix diagonal; with `H`,
    # the history integrated with the same weighting
    n2 = N**2
    diag = wdet @ n2
    scale = wdet.sum(axis=1) / diag.sum(axis=1)
    weights = diag * scale[:, None]
    if H is None:
        return weights
    return weights, ((wdet * H) @ n2) * scale[:, None]


def nodal_weights(mesh):
    """
    Positive per-element nodal weights (n_elements x 8) summing to the element areas, used for
    the local terms of models with `nodal_local` set.
    """
    return _nodal(mesh.wdet, mesh.N)


def _element_arrays(mesh, state, params, model, H, elems=slice(None), stiffness=True):
    model = material.model_variant(model)
    c0 = material.elasticity_tensor(params.E, params.nu)
    phi_gp, grad, strain = _fields(mesh, state.u, state.phi, elems)
    dndx = mesh.dNdx[elems]
    wdet = mesh.wdet[elems]

    # Quadratic shape functions overshoot between nodes; constitutive functions see [0, 1]
    phi_c = np.clip(phi_gp, 0., 1.)
    g, dg, ddg = material.degradation(phi_c)
    local = params.Gc / (4. * model.cw * params.ell)
    nonlocal_ = params.Gc * params.ell / (2. * model.cw)

    if model.nodal_local:
        weights, h_n = _nodal(wdet, mesh.N, H)
        phi_n = np.clip(state.phi[mesh.elements[elems]], 0., 1.)
        _, dg_n, ddg_n = material.degradation(phi_n)
        _, dw_n, ddw_n, _ = material.local_dissipation(phi_n, model)
        r_local = dg_n * h_n + local * dw_n * weights
    else:
        _, dw, ddw, _ = material.local_dissipation(phi_c, model)
        r_local = np.einsum('eg,gi->ei', wdet * (dg * H + local * dw), mesh.N)

    b = _bmatrix(dndx)
    stress = strain @ c0
    c_u = (g + params.kappa) * wdet
    r_u = np.einsum('eg,egkj,egk->ej', c_u, b, stress, optimize=True)
    r_phi = r_local + np.einsum('eg,egid,egd->ei', nonlocal_ * wdet, dndx, grad, optimize=True)
    if not stiffness:
        return r_u, r_phi, None, None

    if model.nodal_local:
        k_local = (ddg_n * h_n + local * ddw_n * weights)[:, :, None] * np.eye(8)
    else:
        k_local = np.einsum('eg,gi,gj->eij', wdet * (ddg * H + local * ddw), mesh.N, mesh.N,
                            optimize=True)
    k_uu = np.einsum('eg,egki,kl,eglj->eij', c_u, b, c0, b, optimize=True)
    k_pp = k_local + np.einsum('eg,egid,egjd->eij', nonlocal_ * wdet, dndx, dndx, optimize=True)
    k_uu = 0.5 * (k_uu + k_uu.transpose(0, 2, 1))
    k_pp = 0.5 * (k_pp + k_pp.transpose(0, 2, 1))
    return r_u, r_phi, k_uu, k_pp


def trial_history(mesh, state, params, mode=ALWAYS, reference_phi=None):
    """
    Driving energy at `state.u` and the history field it would produce, without committing.
    `reference_phi` (nodal, default `state.phi`) decides the thresholded mode.
    """
    psi0 = driving_energy(mesh, state.u, params)
    phi_ref = state.phi if reference_phi is None else reference_phi
    return psi0, update_history(psi0, state, mode, gauss_phase(mesh, phi_ref))


def element_residuals(mesh, elem, state, params, model, mode=ALWAYS, history=None):
    """
    R_u (16) and R_phi (8) of element `elem`. `history` overrides the trial history field.
    """
    elems = np.atleast_1d(elem)
    _check(mesh, state, elems)
    if history is None:
        _, history = trial_history(mesh, state, params, mode)
    r_u, r_phi, _, _ = _element_arrays(mesh, state, params, model, history[elems], elems,
                                       stiffness=False)
    return r_u[0], r_phi[0]


def element_stiffness(mesh, elem, state, params, model, mode=ALWAYS, history=None):
    """
    K_uu (16 x 16) and K_phiphi (8 x 8) of element `elem`.
    """
    elems = np.atleast_1d(elem)
    _check(mesh, state, elems)
    if history is None:
        _, history = trial_history(mesh, state, params, mode)
    _, _, k_uu, k_pp = _element_arrays(mesh, state, params, model, history[elems], elems)
    return k_uu[0], k_pp[0]


class GlobalSystem:
    """
    Block-diagonal tangent (K_uu, K_phiphi), unconstrained residuals, the Gauss point driving
    energy and trial history used to build them, and the active constraint map.
    """
    def __init__(self, K_uu, K_pp, R_u, R_phi, psi0, H, constraints):
        self.K_uu = K_uu
        self.K_pp = K_pp
        self.R_u = R_u
        self.R_phi = R_phi
        self.psi0 = psi0
        self.H = H
        self.constraints = constraints

    @property
    def R(self):
        """Coupled residual"""
        return np.concatenate([self.R_u, self.R_phi])


def _scatter(dofs, blocks, size):
    rows = np.broadcast_to(dofs[:, :, None], blocks.shape)
    cols = np.broadcast_to(dofs[:, None, :], blocks.shape)
    return sp.coo_matrix((blocks.ravel(), (rows.ravel(), cols.ravel())),
                         shape=(size, size)).tocsr()


def assemble_global(mesh, state, params, model, mode=ALWAYS, constraints=None, stiffness=True,
                    reference_phi=None, history=None):
    """
    Scatter-add all element contributions. The phase field residual uses the trial history
    built from `state.H` (last committed value) and the driving energy at `state.u`.
    """
    _check(mesh, state, np.arange(mesh.n_elements))
    n = mesh.n_nodes
    if history is None:
        psi0, history = trial_history(mesh, state, params, mode, reference_phi)
        if mode.tag == 'always':
            assert np.all(history >= state.H), 'history decreased'
            assert np.allclose((history - state.H) * (psi0 - history), 0.), \
                'Kuhn-Tucker conditions violated'
    else:
        psi0 = state.psi0

    r_u_e, r_p_e, k_uu_e, k_pp_e = _element_arrays(mesh, state, params, model, history,
                                                   stiffness=stiffness)
    r_u = np.bincount(mesh.udofs.ravel(), weights=r_u_e.ravel(), minlength=2 * n)
    r_phi = np.bincount(mesh.elements.ravel(), weights=r_p_e.ravel(), minlength=n)

    k_uu = k_pp = None
    if stiffness:
        k_uu = _scatter(mesh.udofs, k_uu_e, 2 * n)
        k_pp = _scatter(mesh.elements, k_pp_e, n)

    return GlobalSystem(k_uu, k_pp, r_u, r_phi, psi0, history,
                        constraints if constraints is not None else Constraints())


def eliminate(K, rhs, dofs, values):
    """
    Symmetric elimination of `dofs` from `K x = rhs`: rows and columns zeroed, unit diagonal,
    right-hand side carried over to the free rows.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    if len(dofs) == 0:
        return K, np.array(rhs, dtype=float)
    if dofs.min() < 0 or dofs.max() >= K.shape[0]:
        raise ConstraintError(f'Constrained dof outside 0..{K.shape[0] - 1}')

    prescribed = np.zeros(K.shape[0])
    prescribed[dofs] = values
    free = np.ones(K.shape[0])
    free[dofs] = 0.
    rhs = np.asarray(rhs, dtype=float) - K @ prescribed
    rhs[dofs] = values
    d = sp.diags(free)
    return (d @ K @ d + sp.diags(1. - free)).tocsr(), rhs


def apply_dirichlet(system, constraints, state=None):
    """
    Constrained Newton-form systems K_uu du = -R_u and K_phiphi dphi = -R_phi. Constrained
    increments equal prescribed minus current values (`state`), or the prescribed values.
    Returns (K_uu, rhs_u, K_phiphi, rhs_phi).
    """
    n2 = len(system.R_u)
    x = np.zeros(n2 + len(system.R_phi)) if state is None else state.x
    inc = constraints.values - x[constraints.dofs]
    on_u = constraints.dofs < n2

    k_uu, rhs_u = eliminate(system.K_uu, -system.R_u, constraints.dofs[on_u], inc[on_u])
    k_pp, rhs_p = eliminate(system.K_pp, -system.R_phi, constraints.dofs[~on_u] - n2,
                            inc[~on_u])
    return k_uu, rhs_u, k_pp, rhs_p


def crack_density(mesh, phi, params, model):
    """
    Crack surface density (w + ell^2 |grad phi|^2) / (4 cw ell) at every Gauss point.
    """
    phi_gp = gauss_phase(mesh, phi)
    grad = np.einsum('egid,ei->egd', mesh.dNdx, phi[mesh.elements])
    w, _, _, cw = material.local_dissipation(np.clip(phi_gp, 0., 1.), model)
    return (w + params.ell**2 * np.sum(grad**2, axis=-1)) / (4. * cw * params.ell)


def elastic_energy(mesh, state, params):
    """
    Integral of (g + kappa) psi0 over the mesh.
    """
    g, _, _ = material.degradation(np.clip(gauss_phase(mesh, state.phi), 0., 1.))
    psi0 = driving_energy(mesh, state.u, params)
    return float(np.sum(mesh.wdet * (g + params.kappa) * psi0))


def history_energy(mesh, phi, H, model):
    """
    Integral of g(phi) H, integrated the way the phase field residual integrates it; its phase
    field gradient is the first term of R_phi.
    """
    if material.model_variant(model).nodal_local:
        _, h_n = _nodal(mesh.wdet, mesh.N, H)
        g, _, _ = material.degradation(np.clip(phi[mesh.elements], 0., 1.))
        return float(np.sum(g * h_n))
    g, _, _ = material.degradation(np.clip(gauss_phase(mesh, phi), 0., 1.))
    return float(np.sum(mesh.wdet * g * H))


def crack_area(mesh, phi, params, model):
    """
    Crack surface: the integral of the crack density, with the local part summed at the nodes
    for models with `nodal_local` set.
    """
    model = material.model_variant(model)
    if not model.nodal_local:
        return float(np.sum(mesh.wdet * crack_density(mesh, phi, params, model)))
    grad = np.einsum('egid,ei->egd', mesh.dNdx, phi[mesh.elements])
    w, _, _, cw = material.local_dissipation(np.clip(phi[mesh.elements], 0., 1.), model)
    local = np.sum(nodal_weights(mesh) * w) / params.ell
    gradient = params.ell * np.sum(mesh.wdet * np.sum(grad**2, axis=-1))
    return float((local + gradient) / (4. * cw))


def fracture_energy(mesh, phi, params, model):
    """
    Gc times the crack surface.
    """
    return params.Gc * crack_area(mesh, phi, params, model)
