"""
Random polytope lab - sample command

Draws one K_N and exports its generators in the point-cloud text format
(header "n N seed", one point per line), so it can be fed to other tools or
read back with `read_point_cloud`.

Functions:
    sample_polytope(distribution, n, N, seed):  VertexPolytope
    export_polytope(path, distribution, n, N, seed)
"""
from pathlib import Path

from randpoly.measures import make_distribution
from randpoly.polytope import VertexPolytope, random_polytope, write_point_cloud
from utils.rng_utils import Stream


def sample_polytope(distribution: str, n: int, N: int, seed: int = 0) -> VertexPolytope:
    root = Stream(seed)
    dist = make_distribution(distribution, n, root.child("distribution", distribution, n))
    return random_polytope(dist, N, root.child("sample", "N", N))


def export_polytope(path, distribution: str, n: int, N: int, seed: int = 0) -> VertexPolytope:
    K = sample_polytope(distribution, n, N, seed)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_point_cloud(path, K, seed)
    print(f"   Wrote {K.N} points in R^{K.n} to {path}")
    return K
