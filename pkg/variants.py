###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Model variant, crack mode and irreversibility mode tag conversion
"""
import argparse

SCHEMES = ('bfgs_monolithic', 'staggered')


def variant(astring):
    """
    Take a model variant name in any common spelling and return 'AT1' or 'AT2'.
    """
    s = str(astring).lower().replace('-', '').replace('_', '').replace(' ', '')

    if s.startswith('at'):
        s = s[2:]  # Strip 'AT' from variant name
    if s in ('pham', 'linear'):
        s = '1'
    elif s in ('standard', 'bourdin', 'quadratic'):
        s = '2'

    try:
        num = int(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f'{astring} is not a supported model variant') from exc
    if num not in (1, 2):
        raise argparse.ArgumentTypeError(f'{astring} is not a supported model variant')

    return f'AT{num}'


def crack_mode(astring):
    """
    Take an initial crack description and return 'geometric' or 'phase_field'.
    """
    s = str(astring).lower().replace('-', '_').replace(' ', '_')

    if s in ('geometric', 'geometry', 'discrete', 'duplicated_nodes'):
        return 'geometric'
    if s in ('phase_field', 'phasefield', 'pf', 'smeared'):
        return 'phase_field'

    raise argparse.ArgumentTypeError(f'{astring} is not a supported crack mode')


def irreversibility(astring):
    """
    Take a history-field mode name and return 'always' or 'thresholded'.
    """
    s = str(astring).lower().replace('-', '_')

    if s in ('always', 'standard', 'max'):
        return 'always'
    if s in ('thresholded', 'threshold', 'cracked_only'):
        return 'thresholded'

    raise argparse.ArgumentTypeError(f'{astring} is not a supported irreversibility mode')


def scheme(astring):
    """
    Take a solution scheme name and return its canonical tag.
    """
    s = str(astring).lower().replace('-', '_')

    if s in ('bfgs', 'monolithic', 'bfgs_monolithic', 'quasi_newton'):
        return 'bfgs_monolithic'
    if s in ('staggered', 'alternate_minimisation', 'alternate_minimization', 'am'):
        return 'staggered'

    raise argparse.ArgumentTypeError(f'{astring} is not a supported solution scheme')
