"""
Beneath-beyond incremental convex hull in R^n

Builds the facet list of conv(points) for a full-dimensional point set.
Facets are kept simplicial: a point lying on the hyperplane of a horizon
facet is handled by retriangulating that facet together with the visible
region, so flat faces of structured inputs (cube vertices) come out as
several coplanar simplices. A new facet that would be degenerate (the
point lies in the affine hull of a ridge) raises Coplanar; callers
perturb and retry.

Working state:

| Array      | Shape   | Meaning                                      |
|------------|---------|----------------------------------------------|
| _normals   | (F, n)  | outward unit normal per facet slot           |
| _offsets   | (F,)    | <normal, v> for every vertex v of the facet  |
| _alive     | (F,)    | slot holds a current facet                   |
| _verts     | F-list  | sorted tuple of point indices                |
| _ridges    | dict    | frozenset of n-1 indices -> facet slot ids   |

Functions:
    IncrementalHull(points, eps):  Build the hull
    IncrementalHull.facets():      List of HullFacet (indices, normal, offset)
    IncrementalHull.volume():      Volume by coning facets to the interior point
    simplex_volume(vertices):      Volume of an n-simplex given n+1 vertices
    facet_area(vertices):          (n-1)-volume of a facet from its n vertices
"""
import logging
from dataclasses import dataclass
from math import factorial
from typing import Dict, List, Set, Tuple

import numpy as np

from randpoly.errors import Coplanar, DegenerateInput

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-10
FILTER_EVERY = 32


@dataclass(frozen=True)
class HullFacet:
    vertices: Tuple[int, ...]
    normal: np.ndarray
    offset: float


def facet_area(vertices: np.ndarray) -> float:
    """sqrt(det Gram(edges)) / (n-1)! for n vertices in R^n."""
    vertices = np.atleast_2d(vertices)
    n = vertices.shape[0]
    if n == 1:
        return 1.0
    edges = vertices[1:] - vertices[0]
    gram = edges @ edges.T
    det = np.linalg.det(gram)
    return float(np.sqrt(max(det, 0.0)) / factorial(n - 1))


def simplex_volume(vertices: np.ndarray) -> float:
    """|det(v_1 - v_0, ..., v_n - v_0)| / n! for n+1 vertices in R^n."""
    vertices = np.atleast_2d(vertices)
    edges = vertices[1:] - vertices[0]
    return float(abs(np.linalg.det(edges)) / factorial(edges.shape[0]))


def _hyperplane(points: np.ndarray, eps: float):
    """
    Unit normal and offset of the hyperplane through n points in R^n.

    Returns None when the points are affinely dependent.
    """
    n = points.shape[1]
    if n == 1:
        return np.ones(1), float(points[0, 0])
    edges = points[1:] - points[0]
    _, sing, vt = np.linalg.svd(edges)
    # n-1 edges: the last right singular vector spans the normal line
    if sing[-1] <= eps * max(1.0, sing[0]):
        return None
    normal = vt[-1]
    return normal, float(normal @ points[0])


class IncrementalHull:
    """Convex hull of a full-dimensional point set by beneath-beyond insertion."""

    def __init__(self, points, eps: float = DEFAULT_EPS):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.ndim != 2 or points.shape[0] < points.shape[1] + 1:
            raise DegenerateInput(
                f"need at least n+1 points in R^n, got {points.shape[0]} in R^{points.shape[1]}")
        self.points = points
        self.n = points.shape[1]
        self.eps = eps
        self.scale = float(np.max(np.linalg.norm(points, axis=1))) or 1.0
        self._normals = np.zeros((16, self.n))
        self._offsets = np.zeros(16)
        self._alive = np.zeros(16, dtype=bool)
        self._verts: List[Tuple[int, ...]] = [()] * 16
        self._ridges: Dict[frozenset, Set[int]] = {}
        self._count = 0
        if self.n == 1:
            self._build_segment()
        else:
            self._build()

    # -- construction -----------------------------------------------------

    def _build_segment(self):
        x = self.points[:, 0]
        hi, lo = int(np.argmax(x)), int(np.argmin(x))
        if x[hi] - x[lo] <= self.eps * self.scale:
            raise DegenerateInput("points do not span R^1")
        self.interior = np.array([0.5 * (x[hi] + x[lo])])
        self._add_facet((hi,), np.ones(1), float(x[hi]))
        self._add_facet((lo,), -np.ones(1), float(-x[lo]))

    def _initial_simplex(self) -> List[int]:
        pts = self.points / self.scale
        chosen = [int(np.argmax(np.linalg.norm(pts, axis=1)))]
        basis = np.zeros((0, self.n))
        for _ in range(self.n):
            diff = pts - pts[chosen[0]]
            resid = diff - (diff @ basis.T) @ basis
            dist = np.linalg.norm(resid, axis=1)
            best = int(np.argmax(dist))
            if dist[best] <= 1e3 * self.eps:
                raise DegenerateInput(
                    f"points span only {len(chosen) - 1} of {self.n} dimensions")
            chosen.append(best)
            basis = np.vstack([basis, resid[best] / dist[best]])
        return chosen

    def _build(self):
        simplex = self._initial_simplex()
        self.interior = self.points[simplex].mean(axis=0)
        for omit in range(self.n + 1):
            verts = tuple(sorted(simplex[:omit] + simplex[omit + 1:]))
            plane = _hyperplane(self.points[list(verts)], self.eps)
            if plane is None:
                raise DegenerateInput("initial simplex is flat")
            self._add_oriented(verts, *plane)

        used = set(simplex)
        order = np.argsort(-np.linalg.norm(self.points, axis=1), kind="stable")
        pending = [int(i) for i in order if int(i) not in used]
        pos = 0
        while pos < len(pending):
            self._insert(pending[pos])
            pos += 1
            if pos % FILTER_EVERY == 0 and pos < len(pending):
                pending, pos = self._drop_interior(pending[pos:]), 0
        log.debug("hull in R^%d: %d points, %d facets", self.n, len(self.points), self._count)

    def _drop_interior(self, pending: List[int]) -> List[int]:
        alive = np.flatnonzero(self._alive)
        idx = np.asarray(pending)
        dist = self.points[idx] @ self._normals[alive].T - self._offsets[alive]
        outside = np.max(dist, axis=1) > self.eps * self.scale
        return [int(i) for i in idx[outside]]

    def _grow(self):
        size = len(self._offsets)
        self._normals = np.vstack([self._normals, np.zeros((size, self.n))])
        self._offsets = np.concatenate([self._offsets, np.zeros(size)])
        self._alive = np.concatenate([self._alive, np.zeros(size, dtype=bool)])
        self._verts.extend([()] * size)

    def _add_facet(self, verts: Tuple[int, ...], normal: np.ndarray, offset: float) -> int:
        free = np.flatnonzero(~self._alive)
        if free.size == 0:
            self._grow()
            free = np.flatnonzero(~self._alive)
        slot = int(free[0])
        self._normals[slot] = normal
        self._offsets[slot] = offset
        self._alive[slot] = True
        self._verts[slot] = verts
        self._count += 1
        if self.n > 1:
            for k in range(self.n):
                ridge = frozenset(verts[:k] + verts[k + 1:])
                self._ridges.setdefault(ridge, set()).add(slot)
        return slot

    def _add_oriented(self, verts, normal, offset) -> int:
        if normal @ self.interior - offset > 0:
            normal, offset = -normal, -offset
        return self._add_facet(verts, normal, offset)

    def _remove_facet(self, slot: int):
        verts = self._verts[slot]
        for k in range(self.n):
            ridge = frozenset(verts[:k] + verts[k + 1:])
            owners = self._ridges.get(ridge)
            if owners is not None:
                owners.discard(slot)
                if not owners:
                    del self._ridges[ridge]
        self._alive[slot] = False
        self._count -= 1

    def _neighbours(self, slot: int):
        verts = self._verts[slot]
        for k in range(self.n):
            ridge = frozenset(verts[:k] + verts[k + 1:])
            for other in self._ridges.get(ridge, ()):
                if other != slot:
                    yield ridge, other

    def _insert(self, idx: int):
        p = self.points[idx]
        tol = self.eps * self.scale
        alive = np.flatnonzero(self._alive)
        dist = self._normals[alive] @ p - self._offsets[alive]
        signed = dict(zip(alive.tolist(), dist.tolist()))
        visible = {s for s, d in signed.items() if d > tol}
        if not visible:
            return

        # Coplanar facets reachable from the visible region are retriangulated with it.
        frontier = list(visible)
        while frontier:
            slot = frontier.pop()
            for _, other in self._neighbours(slot):
                if other not in visible and abs(signed[other]) <= tol:
                    visible.add(other)
                    frontier.append(other)

        horizon = []
        for slot in visible:
            for ridge, other in self._neighbours(slot):
                if other not in visible:
                    horizon.append(ridge)

        created = []
        for ridge in horizon:
            verts = tuple(sorted(ridge | {idx}))
            plane = _hyperplane(self.points[list(verts)] / self.scale, self.eps)
            if plane is None:
                raise Coplanar(f"point {idx} lies in the affine hull of a ridge")
            normal, offset = plane
            created.append((verts, normal, offset * self.scale))

        for slot in visible:
            self._remove_facet(slot)
        for verts, normal, offset in created:
            self._add_oriented(verts, normal, offset)

    # -- queries ----------------------------------------------------------

    def facets(self) -> List[HullFacet]:
        return [HullFacet(self._verts[s], self._normals[s].copy(), float(self._offsets[s]))
                for s in np.flatnonzero(self._alive)]

    @property
    def facet_count(self) -> int:
        return self._count

    def vertex_indices(self) -> List[int]:
        return sorted({i for s in np.flatnonzero(self._alive) for i in self._verts[s]})

    def volume(self) -> float:
        total = 0.0
        for facet in self.facets():
            height = facet.offset - facet.normal @ self.interior
            total += height * facet_area(self.points[list(facet.vertices)])
        return total / self.n
