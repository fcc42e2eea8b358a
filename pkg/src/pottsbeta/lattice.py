"""Regular 2D/3D image lattices with first-order neighbourhoods.

Sites are indexed row-major (the last extent varies fastest), boundaries are
free: sites on the edge of the image simply have fewer neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INDEX_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True, eq=False)
class Lattice:
    """Immutable lattice geometry.

    Attributes
    ----------
    dims : tuple of int
        Extents of the grid (2 or 3 entries).
    n : int
        Number of sites.
    nbr : ndarray, shape (n, 2*d)
        Neighbour indices of every site, sorted, padded with -1.
    degree : ndarray, shape (n,)
        Number of valid entries in each row of ``nbr``.
    edges : ndarray, shape (|E|, 2)
        Unique neighbour pairs ``(i, j)`` with ``i < j``.
    colour : ndarray, shape (n,)
        Chequerboard colour (parity of the coordinate sum).
    order : ndarray, shape (n,)
        Sweep order: every colour-0 site, then every colour-1 site. Sites of
        one colour share no edges.
    """

    dims: tuple[int, ...]
    n: int
    nbr: np.ndarray = field(repr=False)
    degree: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    colour: np.ndarray = field(repr=False)
    order: np.ndarray = field(repr=False)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @property
    def max_degree(self) -> int:
        return 2 * len(self.dims)

    def neighbours(self, i: int) -> list[int]:
        return neighbours(self, i)

    def __repr__(self) -> str:
        return f"Lattice(dims={self.dims}, n={self.n}, edge_count={self.edge_count})"


def build_lattice(dims) -> Lattice:
    """Construct a free-boundary lattice with the given extents."""
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (2, 3):
        raise ValueError(f"lattice must have 2 or 3 dimensions, got {len(dims)}")
    if any(d < 2 for d in dims):
        raise ValueError(f"every extent must be at least 2, got {dims}")
    n = 1
    for d in dims:
        n *= d
        if n > INDEX_MAX:
            raise OverflowError(f"lattice {dims} has too many sites for int64 indexing")

    idx = np.arange(n, dtype=np.int64).reshape(dims)
    pairs = []
    for axis in range(len(dims)):
        lo = [slice(None)] * len(dims)
        hi = [slice(None)] * len(dims)
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        pairs.append(np.stack([idx[tuple(lo)].ravel(), idx[tuple(hi)].ravel()], axis=1))
    edges = np.concatenate(pairs, axis=0)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]

    width = 2 * len(dims)
    degree = np.bincount(edges.ravel(), minlength=n).astype(np.int64)
    nbr = np.full((n, width), -1, dtype=np.int64)
    # both directions, sorted by (site, neighbour) so each row comes out ordered
    both = np.concatenate([edges, edges[:, ::-1]], axis=0)
    both = both[np.lexsort((both[:, 1], both[:, 0]))]
    start = np.concatenate([[0], np.cumsum(degree)[:-1]])
    slot = np.arange(both.shape[0]) - start[both[:, 0]]
    nbr[both[:, 0], slot] = both[:, 1]

    coords = np.indices(dims).reshape(len(dims), n)
    colour = (coords.sum(axis=0) % 2).astype(np.int64)
    order = np.argsort(colour, kind="stable").astype(np.int64)

    for arr in (nbr, degree, edges, colour, order):
        arr.setflags(write=False)
    return Lattice(dims=dims, n=n, nbr=nbr, degree=degree, edges=edges, colour=colour, order=order)


def neighbours(lat: Lattice, i: int) -> list[int]:
    """Sorted neighbour indices of site ``i``."""
    if not 0 <= i < lat.n:
        raise IndexError(f"site {i} out of range for lattice with {lat.n} sites")
    return [int(j) for j in lat.nbr[i, : lat.degree[i]]]
