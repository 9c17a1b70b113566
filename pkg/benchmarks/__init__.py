###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Benchmark package. Every module may export a list `benchmarks` of registry entries:
    {'name': ..., 'defaults': {section: {key: value}}, 'mesh': fn(cfg), 'run': fn(cfg),
     'columns': [...]}
"""
import fnmatch
import os
from pydoc import locate


def discover():
    """
    Load the registry entries of all benchmark modules, sorted by file name.
    """
    supported = []
    package_dir = os.path.dirname(__file__)
    for _, _, files in sorted(os.walk(package_dir)):
        for name in sorted(files):
            if fnmatch.fnmatch(name, '*.py') and not name.startswith('_'):
                fn = 'benchmarks.' + name[:-3]
                m = locate(fn)
                try:
                    for i in m.benchmarks:
                        i['module'] = fn
                    supported += m.benchmarks
                except AttributeError:
                    # Skip files that don't have 'benchmarks'
                    pass
        break

    return {b['name']: b for b in supported}
