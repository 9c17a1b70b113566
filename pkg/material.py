###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Constitutive model: plane-strain elasticity, degradation and local dissipation functions for
the AT1 and AT2 phase field models, and the closed-form homogeneous (1D) response.
"""
from collections import namedtuple

import numpy as np

import variants

# Relative slack allowed on the admissible phase field interval before a DomainError
DOMAIN_TOLERANCE = 1e-12

HomogeneousPoint = namedtuple('HomogeneousPoint', ['epsilon', 'phi', 'sigma'])


class DomainError(ValueError):
    """
    Argument outside the admissible range of a constitutive function
    """


class MaterialParams:
    """
    Isotropic elastic-brittle material with phase field regularisation.
    `E` Young's modulus, `nu` Poisson's ratio, `Gc` toughness, `ell` phase field length scale,
    `kappa` residual stiffness.
    """
    def __init__(self, E, nu=0.3, Gc=1.0, ell=1.0, kappa=1e-7):
        self.E = float(E)
        self.nu = float(nu)
        self.Gc = float(Gc)
        self.ell = float(ell)
        self.kappa = float(kappa)

        for key, ok in (('E', self.E > 0.), ('nu', 0. <= self.nu < 0.5), ('Gc', self.Gc > 0.),
                        ('ell', self.ell > 0.), ('kappa', 0. < self.kappa < 1e-2)):
            if not ok:
                raise DomainError(f'material.{key} = {getattr(self, key)} is not admissible')

    @property
    def plane_strain_modulus(self):
        """E / (1 - nu^2)"""
        return self.E / (1. - self.nu**2)

    @property
    def shear_modulus(self):
        """E / (2 (1 + nu))"""
        return self.E / (2. * (1. + self.nu))

    def replace(self, **kwargs):
        """
        Return a copy with the given fields replaced.
        """
        fields = {'E': self.E, 'nu': self.nu, 'Gc': self.Gc, 'ell': self.ell,
                  'kappa': self.kappa}
        fields.update(kwargs)
        return MaterialParams(**fields)

    def __repr__(self):
        return (f'MaterialParams(E={self.E!r}, nu={self.nu!r}, Gc={self.Gc!r}, '
                f'ell={self.ell!r}, kappa={self.kappa!r})')

    def __eq__(self, other):
        return isinstance(other, MaterialParams) and repr(self) == repr(other)


class ModelVariant:
    """
    Phase field model variant base class
    """
    tag = None
    cw = None
    # local terms integrated with positive nodal weights instead of Gauss points
    nodal_local = False

    def dissipation(self, phi):
        """Return w, w', w''"""
        raise NotImplementedError

    def __str__(self):
        return self.tag

    def __eq__(self, other):
        return isinstance(other, ModelVariant) and self.tag == other.tag

    def __hash__(self):
        return hash(self.tag)


class AT1(ModelVariant):
    """
    Linear local dissipation w = phi. Elastic phase before damage onset. Its local terms are
    lumped at the nodes so that the lower bound on phi acts node by node.
    """
    tag = 'AT1'
    cw = 2. / 3.
    nodal_local = True

    def dissipation(self, phi):
        return phi, np.ones_like(phi), np.zeros_like(phi)


class AT2(ModelVariant):
    """
    Quadratic local dissipation w = phi^2 (standard model). Damage from the outset.
    """
    tag = 'AT2'
    cw = 0.5

    def dissipation(self, phi):
        return phi**2, 2. * phi, 2. * np.ones_like(phi)


def model_variant(name):
    """
    Return the ModelVariant instance for `name` (any spelling accepted by variants.variant).
    """
    if isinstance(name, ModelVariant):
        return name
    tag = variants.variant(name)
    return AT1() if tag == 'AT1' else AT2()


def _check_phase(phi):
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < -DOMAIN_TOLERANCE) or np.any(phi > 1. + DOMAIN_TOLERANCE) \
       or not np.all(np.isfinite(phi)):
        raise DomainError('phase field outside [0, 1]')
    return phi


def degradation(phi):
    """
    Quadratic degradation function g = (1 - phi)^2 and its first two derivatives.
    """
    phi = _check_phase(phi)
    return (1. - phi)**2, -2. * (1. - phi), 2. * np.ones_like(phi)


def local_dissipation(phi, m):
    """
    Local part of the crack density function for model `m`: returns w, w', w'' and the
    normalisation constant cw.
    """
    phi = _check_phase(phi)
    w, dw, ddw = model_variant(m).dissipation(phi)
    return w, dw, ddw, model_variant(m).cw


def elasticity_tensor(E, nu):
    """
    Plane-strain stiffness in Voigt notation (engineering shear strain).
    """
    if nu >= 0.5 - 1e-9:
        raise DomainError(f'plane-strain stiffness is singular for nu = {nu}')
    if E <= 0. or nu < 0.:
        raise DomainError(f'inadmissible elastic constants E = {E}, nu = {nu}')

    factor = E / ((1. + nu) * (1. - 2. * nu))
    return factor * np.array([[1. - nu, nu, 0.],
                              [nu, 1. - nu, 0.],
                              [0., 0., 0.5 * (1. - 2. * nu)]])


def critical_stress(p, m):
    """
    Peak stress of the homogeneous response. Uses E (not the plane-strain modulus).
    """
    if model_variant(m).tag == 'AT1':
        return np.sqrt(3. * p.E * p.Gc / (8. * p.ell))
    return 3. / 16. * np.sqrt(3. * p.E * p.Gc / p.ell)


def fracture_length(p):
    """
    Lf = Gc (1 - nu^2) / E
    """
    return p.Gc * (1. - p.nu**2) / p.E


def toughness_K(p):
    """
    Plane-strain fracture toughness sqrt(E Gc / (1 - nu^2)).
    """
    return np.sqrt(p.E * p.Gc / (1. - p.nu**2))


def damage_onset_strain(p, m):
    """
    Strain at which the homogeneous response leaves the linear elastic branch.
    """
    if model_variant(m).tag == 'AT1':
        return np.sqrt(3. * p.Gc / (8. * p.ell * p.E))
    return 0.


def peak_strain(p, m):
    """
    Strain at the peak of the homogeneous response.
    """
    if model_variant(m).tag == 'AT1':
        return damage_onset_strain(p, m)
    return np.sqrt(p.Gc / (3. * p.E * p.ell))


def homogeneous_response(p, m, epsilon):
    """
    Closed-form solution of the 1D problem with a uniform phase field at strain `epsilon`.
    """
    epsilon = float(epsilon)
    if epsilon < 0.:
        raise DomainError(f'homogeneous response needs a non-negative strain, got {epsilon}')

    stretch = p.E * epsilon**2 * p.ell
    if model_variant(m).tag == 'AT2':
        phi = stretch / (p.Gc + stretch)
    elif stretch > 0.:
        phi = max(0., 1. - 3. * p.Gc / (8. * stretch))
    else:
        phi = 0.

    return HomogeneousPoint(epsilon, phi, (1. - phi)**2 * p.E * epsilon)
