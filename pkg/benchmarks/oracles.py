###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Closed-form linear elastic fracture mechanics used as reference solutions
"""
import math
import warnings
from dataclasses import dataclass

from scipy.optimize import brentq

import material

SHEAR_COEFFICIENT = 5. / 6.


def williams_displacement(K, E, nu, r, theta):
    """
    Leading term of the Williams expansion for a mode I crack along the negative x axis
    (plane strain). Returns (u_x, u_y).
    """
    if r < 0.:
        raise ValueError(f'Negative radius {r}')
    amplitude = K / E * math.sqrt(r) * (1. + nu) / math.sqrt(2. * math.pi) \
        * (3. - 4. * nu - math.cos(theta))
    return amplitude * math.cos(theta / 2.), amplitude * math.sin(theta / 2.)


def irwin_G(K, E, nu):
    """
    Plane-strain energy release rate from the stress intensity factor.
    """
    return (1. - nu**2) * K**2 / E


def irwin_K(G, E, nu):
    """
    Inverse of irwin_G.
    """
    return math.sqrt(G * E / (1. - nu**2))


@dataclass
class DcbGeometry:
    """
    Double cantilever beam arm: `length` L, arm height H, initial crack a0, thickness B.
    """
    length: float = 20.
    height: float = 0.9
    crack_length: float = 10.
    thickness: float = 1.
    shear_coefficient: float = SHEAR_COEFFICIENT


def _dcb_moduli(params, geometry):
    e_bar = params.plane_strain_modulus
    return e_bar, e_bar / (geometry.shear_coefficient * params.shear_modulus)


def dcb_analytic_G(delta, a, geometry, params):
    """
    Energy release rate of the Timoshenko-beam DCB at opening `delta` and crack length `a`.
    """
    if a <= 0. or geometry.height <= 0.:
        raise ValueError('DCB crack length and height must be positive')
    e_bar, ratio = _dcb_moduli(params, geometry)
    aspect = (geometry.height / a)**2
    return 3. * e_bar * geometry.height**3 / a**4 * (1. + ratio / 3. * aspect) \
        / (1. + ratio * aspect)**2 * delta**2


def dcb_compliance(a, geometry, params):
    """
    Opening per unit load, bending plus shear.
    """
    e_bar, _ = _dcb_moduli(params, geometry)
    kappa_mu = geometry.shear_coefficient * params.shear_modulus
    b, h = geometry.thickness, geometry.height
    return a**3 / (e_bar * b * h**3) + a / (kappa_mu * b * h)


def dcb_critical_opening(a, geometry, params):
    """
    Opening at which the energy release rate reaches Gc for crack length `a`.
    """
    return math.sqrt(params.Gc / dcb_analytic_G(1., a, geometry, params))


def dcb_crack_length(delta, geometry, params):
    """
    Crack length in equilibrium at G = Gc for opening `delta`; the initial crack length while
    `delta` is below the critical opening.
    """
    a0 = geometry.crack_length
    if delta <= dcb_critical_opening(a0, geometry, params):
        return a0
    hi = 2. * a0
    while dcb_analytic_G(delta, hi, geometry, params) > params.Gc:
        hi *= 2.
    return brentq(lambda a: dcb_analytic_G(delta, a, geometry, params) - params.Gc, a0, hi,
                  xtol=1e-14 * a0, rtol=1e-14)


def sent_geometry_factor(a_over_W):
    """
    Geometry factor of a finite plate with an edge crack in tension.
    """
    r = float(a_over_W)
    if not 0. < r < 1.:
        raise ValueError(f'a/W = {r} outside (0, 1)')
    if r > 0.95:
        warnings.warn(f'Geometry factor diverges as a/W -> 1 (a/W = {r})')
    x = math.pi * r / 2.
    return math.sqrt(math.tan(x) / x) / math.cos(x) \
        * (0.752 + 2.02 * r + 0.37 * (1. - math.sin(x))**3)


def griffith_strength(a, W, params):
    """
    Remote stress at which an edge crack of length `a` in a plate of width `W` propagates.
    """
    return math.sqrt(params.E * params.Gc / (math.pi * a * (1. - params.nu**2))) \
        / sent_geometry_factor(a / W)


def transition_flaw_size(params, model, W):
    """
    Crack length at which the Griffith strength equals the phase field critical stress.
    """
    sigma_c = material.critical_stress(params, model)
    return brentq(lambda a: griffith_strength(a, W, params) - sigma_c, 1e-9 * W, 0.95 * W,
                  xtol=1e-14 * W)
