###################################################################################################
#
# Copyright (C) Phase Field Fracture Project Contributors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (see LICENSE.md)
#
###################################################################################################
"""
Structured meshes of 8-node serendipity quadrilaterals (Q8), shape functions, Gauss quadrature
and named boundary sets for the benchmark geometries.
"""
import logging
import math
import warnings

import numpy as np

msglogger = logging.getLogger()

# Parent coordinates, corners first then midsides, counter-clockwise
NODE_COORDS = np.array([[-1., -1.], [1., -1.], [1., 1.], [-1., 1.],
                        [0., -1.], [1., 0.], [0., 1.], [-1., 0.]])
# Faces as (corner, midside, corner), outward normal on the right when walking the face
FACES = np.array([[0, 4, 1], [1, 5, 2], [2, 6, 3], [3, 7, 0]])
# Same element with reversed orientation
_FLIP = np.array([0, 3, 2, 1, 7, 6, 5, 4])

GEOMETRIES = ('rectangle', 'half_disc', 'dcb_quarter', 'sent_half')
RADIUS_FLOOR = 1000.


class MeshError(ValueError):
    """
    Invalid mesh specification or degenerate mesh
    """


def shape_functions(xi, eta):
    """
    Q8 serendipity shape functions at parent coordinates (`xi`, `eta`).
    Returns N with shape (..., 8) and dN/d(xi, eta) with shape (..., 8, 2).
    """
    xi = np.asarray(xi, dtype=float)[..., None]
    eta = np.asarray(eta, dtype=float)[..., None]

    xc, yc = NODE_COORDS[:4, 0], NODE_COORDS[:4, 1]
    nc = 0.25 * (1. + xi * xc) * (1. + eta * yc) * (xi * xc + eta * yc - 1.)
    dnc_xi = 0.25 * xc * (1. + eta * yc) * (2. * xi * xc + eta * yc)
    dnc_eta = 0.25 * yc * (1. + xi * xc) * (xi * xc + 2. * eta * yc)

    # Midsides 4 and 6 sit at xi = 0, midsides 5 and 7 at eta = 0
    y46 = NODE_COORDS[[4, 6], 1]
    n46 = 0.5 * (1. - xi**2) * (1. + eta * y46)
    dn46_xi = -xi * (1. + eta * y46)
    dn46_eta = 0.5 * y46 * (1. - xi**2)
    x57 = NODE_COORDS[[5, 7], 0]
    n57 = 0.5 * (1. + xi * x57) * (1. - eta**2)
    dn57_xi = 0.5 * x57 * (1. - eta**2)
    dn57_eta = -eta * (1. + xi * x57)

    def order(corner, mid46, mid57):
        mid46, mid57 = np.broadcast_arrays(mid46, mid57)
        return np.concatenate([np.broadcast_to(corner, mid46.shape[:-1] + (4,)),
                               mid46[..., :1], mid57[..., :1],
                               mid46[..., 1:], mid57[..., 1:]], axis=-1)

    n = order(nc, n46, n57)
    dn = np.stack([order(dnc_xi, dn46_xi, dn57_xi), order(dnc_eta, dn46_eta, dn57_eta)],
                  axis=-1)
    return n, dn


class QuadratureRule:
    """
    Tensor-product Gauss-Legendre rule on the parent square
    """
    def __init__(self, kind='reduced'):
        if kind not in ('reduced', 'full'):
            raise MeshError(f'Unknown quadrature `{kind}` (reduced | full)')
        self.kind = kind
        order = 2 if kind == 'reduced' else 3
        x, w = np.polynomial.legendre.leggauss(order)
        # eta varies slowest
        self.points = np.array([[a, b] for b in x for a in x])
        self.weights = np.array([wa * wb for wb in w for wa in w])

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return f'QuadratureRule({self.kind!r})'


def quadrature(kind='reduced'):
    """
    Return the 2x2 (`reduced`) or 3x3 (`full`) Gauss rule.
    """
    return QuadratureRule(kind)


class Mesh:
    """
    Immutable Q8 mesh with per-Gauss-point geometry precomputed for assembly.
    """
    def __init__(self, nodes, elements, node_sets=None, edge_sets=None, quadrature='reduced',
                 geometry='rectangle', spec=None):
        self.nodes = np.ascontiguousarray(nodes, dtype=float)
        self.elements = np.ascontiguousarray(elements, dtype=np.int64)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise MeshError(f'nodes must be an (n, 2) array, got {self.nodes.shape}')
        if self.elements.ndim != 2 or self.elements.shape[1] != 8:
            raise MeshError(f'elements must be an (n, 8) array, got {self.elements.shape}')
        if self.elements.min() < 0 or self.elements.max() >= len(self.nodes):
            raise MeshError('element connectivity references missing nodes')

        self.geometry = geometry
        self.spec = spec
        self.quadrature = quadrature if isinstance(quadrature, QuadratureRule) \
            else QuadratureRule(quadrature)
        self.node_sets = {k: np.unique(np.asarray(v, dtype=np.int64))
                          for k, v in (node_sets or {}).items()}

        self.N, self.dN = shape_functions(self.quadrature.points[:, 0],
                                          self.quadrature.points[:, 1])
        coords = self.nodes[self.elements]
        jac = np.einsum('gia,eib->egab', self.dN, coords)
        self.detJ = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        bad = np.nonzero(np.any(self.detJ <= 0., axis=1))[0]
        if len(bad) > 0:
            raise MeshError(f'Non-positive Jacobian determinant in element {bad[0]}')
        self.dNdx = np.einsum('egba,gia->egib', np.linalg.inv(jac), self.dN)
        self.wdet = self.detJ * self.quadrature.weights

        self.edge_sets = {k: self._faces_in(v) for k, v in self.node_sets.items()}
        for k, v in (edge_sets or {}).items():
            self.edge_sets[k] = np.asarray(v, dtype=np.int64).reshape(-1, 2)

        # Dof maps: u dofs interleaved (2i, 2i+1), phase dof i
        self.udofs = np.stack([2 * self.elements, 2 * self.elements + 1], axis=-1) \
            .reshape(len(self.elements), 16)

        for a in (self.nodes, self.elements, self.detJ, self.dNdx, self.wdet, self.udofs):
            a.flags.writeable = False

    @property
    def n_nodes(self):
        """Number of nodes"""
        return len(self.nodes)

    @property
    def n_elements(self):
        """Number of elements"""
        return len(self.elements)

    @property
    def n_gauss(self):
        """Gauss points per element"""
        return len(self.quadrature)

    def area(self):
        """
        Sum of |J| times weights over all Gauss points.
        """
        return float(self.wdet.sum())

    def _faces_in(self, node_ids):
        inside = np.isin(self.elements[:, FACES], node_ids).all(axis=-1)
        element, face = np.nonzero(inside)
        return np.stack([element, face], axis=-1)

    def elements_on(self, edge_set):
        """
        Ids of elements owning at least one face of the named edge set.
        """
        return np.unique(self.edge_sets[edge_set][:, 0])

    def boundary_nodes(self):
        """
        Nodes on faces that belong to a single element.
        """
        corners = np.sort(self.elements[:, FACES[:, [0, 2]]].reshape(-1, 2), axis=1)
        _, inverse, counts = np.unique(corners, axis=0, return_inverse=True, return_counts=True)
        once = counts[np.asarray(inverse).ravel()] == 1
        return np.unique(self.elements[:, FACES].reshape(-1, 3)[once])

    def rotated(self, angle):
        """
        Copy of the mesh rotated rigidly by `angle` radians about the origin.
        """
        c, s = math.cos(angle), math.sin(angle)
        nodes = self.nodes @ np.array([[c, s], [-s, c]])
        return Mesh(nodes, self.elements, self.node_sets, self.edge_sets, self.quadrature,
                    self.geometry, self.spec)

    def __repr__(self):
        return (f'Mesh({self.geometry!r}, nodes={self.n_nodes}, elements={self.n_elements}, '
                f'quadrature={self.quadrature.kind!r})')


class MeshSpec:
    """
    Geometry tag, dimensions, refined-zone element size `h` and grading parameters.

    Dimension keys per geometry:
      rectangle    width, height, crack_length (edge crack along y = 0, optional)
      dcb_quarter  length, height, crack_length, refine_before, refine_to, band_height
      sent_half    width, height (half height), crack_length, band_height
      half_disc    radius, refine_half_width, refine_length
    """
    DEFAULTS = {
        'rectangle': {'width': 1., 'height': 1., 'crack_length': 0.},
        'dcb_quarter': {'length': 20., 'height': 0.9, 'crack_length': 10., 'refine_before': None,
                        'refine_to': None, 'band_height': None},
        'sent_half': {'width': 1., 'height': 3., 'crack_length': 0.1, 'band_height': None},
        'half_disc': {'radius': None, 'refine_half_width': None, 'refine_length': None},
    }

    def __init__(self, geometry, h, ell=None, quadrature='reduced', growth=1.2, **dims):
        if geometry not in GEOMETRIES:
            raise MeshError(f'Unknown geometry `{geometry}` ({" | ".join(GEOMETRIES)})')
        if not h > 0.:
            raise MeshError(f'mesh.h must be positive, got {h}')
        if not growth >= 1.:
            raise MeshError(f'mesh.growth must be at least 1, got {growth}')
        unknown = set(dims) - set(self.DEFAULTS[geometry])
        if unknown:
            raise MeshError(f'Unknown dimension(s) {sorted(unknown)} for geometry {geometry}')

        self.geometry = geometry
        self.h = float(h)
        self.ell = ell
        self.quadrature = quadrature
        self.growth = float(growth)
        self.dims = dict(self.DEFAULTS[geometry])
        self.dims.update({k: v for k, v in dims.items() if v is not None})

        if ell is not None and self.h > ell:
            warnings.warn(f'Element size h = {self.h:g} exceeds the phase field length scale '
                          f'ell = {ell:g}; the crack profile is under-resolved')

    def __getitem__(self, key):
        return self.dims[key]

    def __repr__(self):
        return f'MeshSpec({self.geometry!r}, h={self.h!r}, {self.dims!r})'


def _lattice(seeds):
    """
    Corner seeds (n + 1) to lattice positions (2n + 1) with midpoints inserted.
    """
    seeds = np.asarray(seeds, dtype=float)
    out = np.empty(2 * len(seeds) - 1)
    out[0::2] = seeds
    out[1::2] = 0.5 * (seeds[:-1] + seeds[1:])
    return out


def _uniform(x0, x1, h):
    n = max(1, int(round((x1 - x0) / h)))
    return np.linspace(x0, x1, n + 1)


def _graded(x0, x1, h0, ratio, fine_at_start=True):
    """
    Seeds from `x0` to `x1` whose element size starts at about `h0` on the fine side and grows
    geometrically by `ratio`.
    """
    length = x1 - x0
    if length <= h0 * (1. + 1e-9) or ratio == 1.:
        return _uniform(x0, x1, h0)
    n = int(math.ceil(math.log(1. + length * (ratio - 1.) / h0) / math.log(ratio)))
    sizes = h0 * ratio**np.arange(n)
    sizes *= length / sizes.sum()
    if not fine_at_start:
        sizes = sizes[::-1]
    seeds = x0 + np.concatenate([[0.], np.cumsum(sizes)])
    seeds[-1] = x1
    return seeds


def _join(*parts):
    parts = [p for p in parts if p is not None and len(p) > 1]
    return np.concatenate([parts[0]] + [p[1:] for p in parts[1:]])


def _block(xl, yl):
    """
    Q8 elements on a lattice of node positions `xl`, `yl` (each shape (2nx+1, 2ny+1)).
    Centre points of the 3x3 sub-lattices are dropped.
    """
    ni, nj = xl.shape
    ii, jj = np.meshgrid(np.arange(ni), np.arange(nj), indexing='ij')
    keep = ~((ii % 2 == 1) & (jj % 2 == 1))
    ids = -np.ones((ni, nj), dtype=np.int64)
    ids[keep] = np.arange(keep.sum())

    ex, ey = np.meshgrid(np.arange(0, ni - 1, 2), np.arange(0, nj - 1, 2), indexing='ij')
    i0, j0 = ex.ravel(), ey.ravel()
    elements = np.stack([ids[i0, j0], ids[i0 + 2, j0], ids[i0 + 2, j0 + 2], ids[i0, j0 + 2],
                         ids[i0 + 1, j0], ids[i0 + 2, j0 + 1], ids[i0 + 1, j0 + 2],
                         ids[i0, j0 + 1]], axis=1)
    nodes = np.stack([xl[keep], yl[keep]], axis=1)
    return nodes, elements


def _merge(blocks, tol):
    """
    Concatenate blocks and fuse coincident nodes (deterministic: first occurrence wins).
    """
    nodes = np.concatenate([b[0] for b in blocks])
    offsets = np.cumsum([0] + [len(b[0]) for b in blocks[:-1]])
    elements = np.concatenate([b[1] + o for b, o in zip(blocks, offsets)])

    keys = np.round(nodes / tol).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    order = np.argsort(first)
    renumber = np.empty(len(order), dtype=np.int64)
    renumber[order] = np.arange(len(order))
    return nodes[np.sort(first)], renumber[inverse][elements]


def _orient(nodes, elements):
    """
    Flip clockwise elements to counter-clockwise.
    """
    p = nodes[elements[:, :4]]
    area = 0.5 * np.sum(p[:, :, 0] * np.roll(p[:, :, 1], -1, axis=1)
                        - np.roll(p[:, :, 0], -1, axis=1) * p[:, :, 1], axis=1)
    elements = elements.copy()
    elements[area < 0.] = elements[area < 0.][:, _FLIP]
    return elements


def _near(values, target, tol):
    return np.abs(values - target) <= tol


def _bottom_faces(nodes, elements, x_max, tol):
    """
    (element, face) pairs on y = 0 whose midside node lies at x < `x_max`.
    """
    face_nodes = elements[:, FACES]
    on_axis = np.all(_near(nodes[face_nodes][..., 1], 0., tol), axis=-1)
    left = nodes[face_nodes[..., 1]][..., 0] < x_max
    element, face = np.nonzero(on_axis & left)
    return np.stack([element, face], axis=-1)


def build_rectangle_mesh(spec):
    """
    Graded structured mesh for the `rectangle`, `dcb_quarter` and `sent_half` geometries.
    A row of square elements of size h runs along the crack path y = 0; the crack occupies
    0 <= x < crack_length on y = 0.
    """
    if spec.geometry not in ('rectangle', 'dcb_quarter', 'sent_half'):
        raise MeshError(f'build_rectangle_mesh cannot build geometry `{spec.geometry}`')

    h, ratio, d = spec.h, spec.growth, spec.dims
    ell = spec.ell if spec.ell is not None else 4. * h

    if spec.geometry == 'dcb_quarter':
        width, height, a = d['length'], d['height'], d['crack_length']
    else:
        width, height, a = d['width'], d['height'], d['crack_length']
    if width <= 0. or height <= 0.:
        raise MeshError(f'Mesh dimensions must be positive, got {width} x {height}')
    if not 0. <= a < width:
        raise MeshError(f'Crack length {a} must lie in [0, {width})')

    if spec.geometry == 'rectangle':
        xs = _join(_uniform(0., a, h) if a > 0. else None, _uniform(a, width, h))
        ys = _uniform(0., height, h)
    else:
        if spec.geometry == 'dcb_quarter':
            before = d['refine_before'] if d['refine_before'] is not None else 4. * ell
            x_end = d['refine_to'] if d['refine_to'] is not None else min(width, a + 6.)
            k = min(int(math.ceil(before / h)), int(math.floor(a / h)))
            x0 = a - k * h
            m = int(math.ceil((x_end - a) / h))
            x1 = min(width, a + m * h)
            xs = _join(_graded(0., x0, h, ratio, False) if x0 > 1e-12 * width else None,
                       _uniform(x0, a, h) if k > 0 else None,
                       _uniform(a, x1, h),
                       _graded(x1, width, h, ratio, True) if x1 < width * (1. - 1e-12)
                       else None)
        else:
            xs = _join(_uniform(0., a, h) if a > 0. else None, _uniform(a, width, h))
        band = d['band_height'] if d['band_height'] is not None else 4. * ell
        nb = int(math.ceil(band / h))
        if nb * h >= height * (1. - 1e-12):
            ys = _uniform(0., height, h)
        else:
            ys = _join(_uniform(0., nb * h, h), _graded(nb * h, height, h, ratio, True))

    xl, yl = np.meshgrid(_lattice(xs), _lattice(ys), indexing='ij')
    nodes, elements = _block(xl, yl)
    tol = 1e-9 * max(width, height)

    x, y = nodes[:, 0], nodes[:, 1]
    bottom = np.nonzero(_near(y, 0., tol))[0]
    sets = {
        'bottom': bottom,
        'top': np.nonzero(_near(y, height, tol))[0],
        'left': np.nonzero(_near(x, 0., tol))[0],
        'right': np.nonzero(_near(x, width, tol))[0],
        'symmetry': bottom[x[bottom] >= a - tol],
        'crack_face': bottom[(x[bottom] < a - tol) & (x[bottom] > tol)],
    }
    sets['ligament'] = sets['symmetry']
    if spec.geometry == 'dcb_quarter':
        sets['load'] = sets['left']
    else:
        sets['load'] = sets['top']
        sets['pin'] = np.nonzero(_near(x, width, tol) & _near(y, 0., tol))[0]

    edges = {'crack_face': _bottom_faces(nodes, elements, a - tol, tol)}
    mesh = Mesh(nodes, elements, sets, edges, spec.quadrature, spec.geometry, spec)
    msglogger.debug('Built %s', mesh)
    return mesh


def build_half_disc_mesh(spec):
    """
    Half disc y >= 0 of radius R with the crack along the negative x axis and the tip at the
    origin. A band of square elements [-b, L] x [0, b] covers the crack tip and the ligament
    up to `refine_length` L ahead of it; an O-grid with geometric radial grading connects the
    band boundary to the arc.
    """
    if spec.geometry != 'half_disc':
        raise MeshError(f'build_half_disc_mesh cannot build geometry `{spec.geometry}`')

    h, q = spec.h, max(spec.growth, 1. + 1e-6)
    ell = spec.ell if spec.ell is not None else 8. * h
    radius = spec['radius'] if spec['radius'] is not None else RADIUS_FLOOR * ell
    if radius < RADIUS_FLOOR * ell * (1. - 1e-12):
        raise MeshError(f'mesh.radius = {radius:g} is below {RADIUS_FLOOR:g} ell = '
                        f'{RADIUS_FLOOR * ell:g}')
    half_width = spec['refine_half_width'] if spec['refine_half_width'] is not None else 3. * ell
    nb = max(1, int(math.ceil(half_width / h)))
    b = nb * h
    length = spec['refine_length'] if spec['refine_length'] is not None else 2. * b
    nr = max(nb, int(math.ceil(length / h)))
    b_r = nr * h
    if b_r >= radius / 2.:
        raise MeshError(f'Refined band length {b_r:g} too large for radius {radius:g}')

    # Band of exact squares of size h
    xl, yl = np.meshgrid(_lattice(np.linspace(-b, b_r, nb + nr + 1)),
                         _lattice(np.linspace(0., b, nb + 1)), indexing='ij')
    inner = _block(xl, yl)

    # O-grid: perimeter (b_r,0) -> (b_r,b) -> (-b,b) -> (-b,0) mapped onto the arc 0..pi
    n_edge = 3 * nb + nr
    s = np.arange(2 * n_edge + 1) / (2. * n_edge)
    perimeter = n_edge * h
    dist = perimeter * s
    top = b + b_r + b
    px = np.where(dist <= b, b_r, np.where(dist <= top, b_r + b - dist, -b))
    py = np.where(dist <= b, dist, np.where(dist <= top, b, perimeter - dist))
    px[-1], py[-1] = -b, 0.
    ox, oy = radius * np.cos(np.pi * s), radius * np.sin(np.pi * s)
    ox[-1], oy[0], oy[-1] = -radius, 0., 0.

    layers = int(math.ceil(math.log(1. + (radius - b) * (q - 1.) / h) / math.log(q)))
    tau = np.arange(2 * layers + 1) / 2.
    f = (q**tau - 1.) / (q**layers - 1.)
    f[-1] = 1.
    xl = (1. - f[None, :]) * px[:, None] + f[None, :] * ox[:, None]
    yl = (1. - f[None, :]) * py[:, None] + f[None, :] * oy[:, None]
    outer = _block(xl, yl)

    nodes, elements = _merge([inner, outer], 1e-9 * h)
    elements = _orient(nodes, elements)

    tol = 1e-9 * h
    x, y = nodes[:, 0], nodes[:, 1]
    r = np.hypot(x, y)
    nodes[np.abs(r - radius) <= 1e-9 * radius] *= \
        (radius / r[np.abs(r - radius) <= 1e-9 * radius])[:, None]
    bottom = np.nonzero(_near(y, 0., tol))[0]
    sets = {
        'outer': np.nonzero(np.abs(np.hypot(x, y) - radius) <= 1e-9 * radius)[0],
        'bottom': bottom,
        'symmetry': bottom[x[bottom] >= -tol],
        'crack_face': bottom[x[bottom] < -tol],
    }
    sets['ligament'] = sets['symmetry']
    edges = {'crack_face': _bottom_faces(nodes, elements, -tol, tol)}

    spec.dims['radius'] = radius
    mesh = Mesh(nodes, elements, sets, edges, spec.quadrature, spec.geometry, spec)
    msglogger.debug('Built %s', mesh)
    return mesh


def build_mesh(spec):
    """
    Dispatch on the geometry tag of `spec`.
    """
    if spec.geometry == 'half_disc':
        return build_half_disc_mesh(spec)
    return build_rectangle_mesh(spec)


def crack_band(mesh):
    """
    Elements with a face on the `crack_face` edge set.
    """
    if 'crack_face' not in mesh.edge_sets or len(mesh.edge_sets['crack_face']) == 0:
        return np.zeros(0, dtype=np.int64)
    return mesh.elements_on('crack_face')


def dump_text(mesh, stream):
    """
    Plain-text listing: header line, node count, "x y" lines, element count, connectivity.
    """
    stream.write(f'# Q8 mesh {mesh.geometry}\n')
    stream.write(f'{mesh.n_nodes}\n')
    for x, y in mesh.nodes:
        stream.write(f'{x:.17g} {y:.17g}\n')
    stream.write(f'{mesh.n_elements}\n')
    for e in mesh.elements:
        stream.write(' '.join(str(i) for i in e) + '\n')


def dump_vtk(mesh, stream, point_data=None):
    """
    Legacy VTK (ASCII) unstructured grid with quadratic quads. `point_data` maps names to
    nodal scalar arrays.
    """
    stream.write('# vtk DataFile Version 3.0\n')
    stream.write(f'Q8 mesh {mesh.geometry}\nASCII\nDATASET UNSTRUCTURED_GRID\n')
    stream.write(f'POINTS {mesh.n_nodes} double\n')
    for x, y in mesh.nodes:
        stream.write(f'{x:.17g} {y:.17g} 0\n')
    stream.write(f'CELLS {mesh.n_elements} {9 * mesh.n_elements}\n')
    for e in mesh.elements:
        stream.write('8 ' + ' '.join(str(i) for i in e) + '\n')
    stream.write(f'CELL_TYPES {mesh.n_elements}\n')
    stream.write('23\n' * mesh.n_elements)
    if point_data:
        stream.write(f'POINT_DATA {mesh.n_nodes}\n')
        for name, values in point_data.items():
            stream.write(f'SCALARS {name} double 1\nLOOKUP_TABLE default\n')
            for v in values:
                stream.write(f'{v:.17g}\n')
