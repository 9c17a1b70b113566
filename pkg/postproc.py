###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Crack measures, reaction forces and initiation detection on converged states
"""
import numpy as np

import assembly
import mesh as meshlib

CONTOUR_THRESHOLD = 0.95
# Returned by crack_tip_position and detect_initiation when nothing is found
CRACK_ABSENT = None
NO_INITIATION = None

# Parent coordinates along each face as functions of t in [-1, 1], walked counter-clockwise
_FACE_PARAM = (
    (lambda t: (t, -np.ones_like(t)), (1., 0.)),
    (lambda t: (np.ones_like(t), t), (0., 1.)),
    (lambda t: (-t, np.ones_like(t)), (-1., 0.)),
    (lambda t: (-np.ones_like(t), -t), (0., -1.)),
)


def crack_surface(state, mesh, params, model):
    """
    Integral of the crack surface density; crack length per unit thickness in 2D.
    """
    return assembly.crack_area(mesh, state.phi, params, model)


def crack_tip_position(state, mesh, ligament, threshold=CONTOUR_THRESHOLD):
    """
    Largest x along the `ligament` nodes (set name or ids) where the phase field reaches
    `threshold`, linearly interpolated towards the next node. CRACK_ABSENT if none does.
    """
    ids = mesh.node_sets[ligament] if isinstance(ligament, str) else np.asarray(ligament)
    if len(ids) == 0:
        return CRACK_ABSENT
    order = np.argsort(mesh.nodes[ids, 0], kind='stable')
    x = mesh.nodes[ids[order], 0]
    phi = state.phi[ids[order]]

    reached = np.nonzero(phi >= threshold)[0]
    if len(reached) == 0:
        return CRACK_ABSENT
    k = reached[-1]
    if k == len(x) - 1:
        return float(x[k])
    return float(x[k] + (phi[k] - threshold) / (phi[k] - phi[k + 1]) * (x[k + 1] - x[k]))


def reaction_force(system, node_ids, component=1):
    """
    Sum of the unconstrained displacement residual over the constrained dofs of `node_ids`
    in direction `component`.
    """
    dofs = 2 * np.asarray(node_ids, dtype=np.int64) + component
    dofs = dofs[np.isin(dofs, system.constraints.dofs)]
    if len(dofs) == 0:
        raise ValueError('Reaction requested on a node set without constrained dofs')
    return float(np.sum(system.R_u[dofs]))


def crack_extension(records, mirror=1.):
    """
    Crack extension (A - A0) of every record relative to the first, times `mirror` (2 for
    models cut along the crack plane).
    """
    area = np.array([r.crack_surface for r in records])
    if len(area) == 0:
        return area
    return mirror * (area - area[0])


class InitiationRule:
    """
    Crack initiation when the extension exceeds `threshold` (default ell). `load_to_G` maps a
    load factor to an energy release rate.
    """
    def __init__(self, threshold=None, mirror=1., load_to_G=None):
        self.threshold = threshold
        self.mirror = mirror
        self.load_to_G = load_to_G


def detect_initiation(records, params, rule=None):
    """
    First crossing of the initiation threshold, linearly interpolated between the bracketing
    steps. Returns (load factor, G) with G None when the rule has no `load_to_G`, or
    NO_INITIATION.
    """
    rule = rule or InitiationRule()
    threshold = rule.threshold if rule.threshold is not None else params.ell
    extension = crack_extension(records, rule.mirror)
    crossed = np.nonzero(extension > threshold)[0]
    if len(crossed) == 0:
        return NO_INITIATION

    k = crossed[0]
    if k == 0:
        load = records[0].load_factor
    else:
        a0, a1 = extension[k - 1], extension[k]
        l0, l1 = records[k - 1].load_factor, records[k].load_factor
        load = l0 + (threshold - a0) / (a1 - a0) * (l1 - l0)
    G = rule.load_to_G(load) if rule.load_to_G is not None else None
    return load, G


def boundary_normal_gradient(mesh, phi, edge_set, points=2):
    """
    Outward normal derivative of the phase field at the Gauss points of every face in
    `edge_set`. Returns the values and their line weights.
    """
    faces = mesh.edge_sets[edge_set]
    t, wt = np.polynomial.legendre.leggauss(points)
    values, weights = [], []
    for element, face in faces:
        param, (dxi, deta) = _FACE_PARAM[face]
        xi, eta = param(t)
        _, dn = meshlib.shape_functions(xi, eta)
        coords = mesh.nodes[mesh.elements[element]]
        jac = np.einsum('gia,ib->gab', dn, coords)
        dndx = np.einsum('gba,gia->gib', np.linalg.inv(jac), dn)
        grad = np.einsum('gib,i->gb', dndx, phi[mesh.elements[element]])
        tangent = dxi * jac[:, 0, :] + deta * jac[:, 1, :]
        length = np.linalg.norm(tangent, axis=1)
        normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / length[:, None]
        values.append(np.sum(grad * normal, axis=1))
        weights.append(wt * length)
    if not values:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(values), np.concatenate(weights)
