"""Reference generator and graph store for spatial preferential attachment.

The process grows a directed graph one vertex per step.  Step t places vertex
t uniformly at random on the torus; every older vertex u whose region of
influence (a ball of volume min{(a1*indeg(u) + a2)/(t-1), 1}) contains the
newcomer gets an edge (t, u) independently with probability p.

Randomness discipline
---------------------
Two independent substreams are derived from the seed: one for positions, one
for link coins.  Each step consumes exactly `dim` position uniforms, then one
coin per *containing* older vertex, taken in increasing birth order.  Any
generator honoring this discipline reproduces the reference output bit for
bit, which is how the bucketed generator is validated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import NormKind, contains_unchecked


class ParamError(ValueError):
    """Model parameters violate the admissible ranges."""


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the attachment process.

    p       link probability in [0, 1]
    a1      per-in-degree gain of the influence volume (0 < a1 < 1/p for p > 0)
    a2      base influence volume (> 0)
    dim     dimension of the torus (L2 requires dim == 2)
    norm    metric used for containment tests
    seed    64-bit seed of the deterministic random stream
    """

    p: float
    a1: float
    a2: float
    dim: int = 2
    norm: NormKind = NormKind.LINF
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ParamError(f"p must be in [0, 1], got {self.p!r}")
        if self.a1 <= 0.0:
            raise ParamError(f"a1 must be positive, got {self.a1!r}")
        if self.p > 0.0 and self.a1 >= 1.0 / self.p:
            raise ParamError(f"a1 must be below 1/p = {1.0 / self.p!r}, got {self.a1!r}")
        if self.a2 <= 0.0:
            raise ParamError(f"a2 must be positive, got {self.a2!r}")
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise ParamError(f"dim must be an integer >= 1, got {self.dim!r}")
        if self.norm is NormKind.L2 and self.dim != 2:
            raise ParamError("the L2 norm is only supported for dim=2")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ParamError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


class RngStream:
    """Deterministic pair of PCG64 substreams (positions, link coins)."""

    __slots__ = ("position", "coin")

    def __init__(self, seed: int):
        pos_seq, coin_seq = np.random.SeedSequence(seed).spawn(2)
        self.position = np.random.Generator(np.random.PCG64(pos_seq))
        self.coin = np.random.Generator(np.random.PCG64(coin_seq))


class SpaGraph:
    """Growable timestamped directed graph; vertex ids are birth times 1..n.

    Edges always point from a younger vertex to an older one, and every
    out-edge of a vertex is created at its birth step, so the edge timestamp
    equals the source id and is not stored.
    """

    def __init__(self, dim: int, norm: NormKind):
        self.dim = dim
        self.norm = norm
        self._n = 0
        self._n_edges = 0
        self._pos = np.empty((16, dim), dtype=np.float64)
        self._in_deg = np.zeros(16, dtype=np.int64)
        self._out_deg = np.zeros(16, dtype=np.int64)
        self._src = np.empty(16, dtype=np.int64)
        self._dst = np.empty(16, dtype=np.int64)

    # -- views -----------------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def n_edges(self) -> int:
        return self._n_edges

    @property
    def positions(self) -> np.ndarray:
        return self._pos[: self._n]

    @property
    def in_deg(self) -> np.ndarray:
        return self._in_deg[: self._n]

    @property
    def out_deg(self) -> np.ndarray:
        return self._out_deg[: self._n]

    @property
    def edge_src(self) -> np.ndarray:
        return self._src[: self._n_edges]

    @property
    def edge_dst(self) -> np.ndarray:
        return self._dst[: self._n_edges]

    def position(self, v: int) -> np.ndarray:
        if not 1 <= v <= self._n:
            raise KeyError(f"unknown vertex {v}")
        return self._pos[v - 1]

    def edges(self):
        """Iterate (src, dst, time) triples in creation order; time == src."""
        for s, d in zip(self.edge_src.tolist(), self.edge_dst.tolist()):
            yield s, d, s

    # -- growth ----------------------------------------------------------

    def add_vertex(self, coords: np.ndarray) -> int:
        if self._n == self._pos.shape[0]:
            cap = 2 * self._n
            self._pos = np.resize(self._pos, (cap, self.dim))
            self._in_deg = np.resize(self._in_deg, cap)
            self._out_deg = np.resize(self._out_deg, cap)
            self._in_deg[self._n:] = 0
            self._out_deg[self._n:] = 0
        self._pos[self._n] = coords
        self._n += 1
        return self._n

    def add_edge(self, src: int, dst: int) -> None:
        if not (1 <= dst < src <= self._n):
            raise ValueError(f"edge ({src}, {dst}) violates younger->older direction")
        if self._n_edges == self._src.shape[0]:
            cap = 2 * self._n_edges
            self._src = np.resize(self._src, cap)
            self._dst = np.resize(self._dst, cap)
        self._src[self._n_edges] = src
        self._dst[self._n_edges] = dst
        self._n_edges += 1
        self._in_deg[dst - 1] += 1
        self._out_deg[src - 1] += 1

    def add_edges(self, src: int, dsts) -> None:
        """Append all out-edges of `src` at once (dsts: ascending vertex ids)."""
        k = len(dsts)
        if k == 0:
            return
        need = self._n_edges + k
        if need > self._src.shape[0]:
            cap = max(2 * self._src.shape[0], need)
            self._src = np.resize(self._src, cap)
            self._dst = np.resize(self._dst, cap)
        dsts = np.asarray(dsts, dtype=np.int64)
        if not (1 <= int(dsts[0]) and int(dsts[-1]) < src <= self._n):
            raise ValueError(f"edges from {src} violate younger->older direction")
        self._src[self._n_edges:need] = src
        self._dst[self._n_edges:need] = dsts
        self._n_edges = need
        in_deg = self._in_deg
        for d in dsts.tolist():
            in_deg[d - 1] += 1
        self._out_deg[src - 1] += k

    # -- integrity --------------------------------------------------------

    def validate_invariants(self) -> None:
        """Assert the structural invariants; raises ValueError on violation."""
        n = self._n
        pos = self.positions
        if pos.shape != (n, self.dim):
            raise ValueError("positions array has the wrong shape")
        if n and (pos.min() < 0.0 or pos.max() >= 1.0):
            raise ValueError("vertex coordinates must lie in [0, 1)")
        src, dst = self.edge_src, self.edge_dst
        if src.size and not (src > dst).all():
            raise ValueError("every edge must point from a younger to an older vertex")
        if src.size and (dst < 1).any() or src.size and (src > n).any():
            raise ValueError("edge endpoints out of range")
        pairs = set(zip(src.tolist(), dst.tolist()))
        if len(pairs) != src.size:
            raise ValueError("duplicate edges")
        in_deg = np.bincount(dst, minlength=n + 1)[1:] if src.size else np.zeros(n, dtype=np.int64)
        out_deg = np.bincount(src, minlength=n + 1)[1:] if src.size else np.zeros(n, dtype=np.int64)
        if not np.array_equal(in_deg, self.in_deg) or not np.array_equal(out_deg, self.out_deg):
            raise ValueError("degree arrays disagree with the edge list")
        if int(self.in_deg.sum()) != self._n_edges or int(self.out_deg.sum()) != self._n_edges:
            raise ValueError("degree sums disagree with the edge count")


def graphs_equal(a: SpaGraph, b: SpaGraph) -> bool:
    """Exact equality: same vertices, bitwise-identical positions, same edges."""
    return (
        a.n == b.n
        and a.dim == b.dim
        and a.norm == b.norm
        and np.array_equal(a.positions, b.positions)
        and np.array_equal(a.edge_src, b.edge_src)
        and np.array_equal(a.edge_dst, b.edge_dst)
    )


def sphere_volume(params: ModelParams, in_deg: int, t: int) -> float:
    """Influence volume of a vertex with the given in-degree at time t >= 1."""
    if t < 1:
        raise ValueError(f"time must be >= 1, got {t}")
    return min((params.a1 * in_deg + params.a2) / t, 1.0)


@dataclass
class GenerationProfile:
    """Optional instrumentation collected during a generation run."""

    comparisons: int = 0
    rebuilds: int = 0
    # one row per phase: (t_start, cells, threshold, heavy_count, comparisons)
    phases: list = field(default_factory=list)


def step_naive(graph: SpaGraph, params: ModelParams, rng: RngStream,
               profile: GenerationProfile | None = None) -> None:
    """Add one vertex by scanning every older vertex for containment."""
    t = graph.n + 1
    point = rng.position.random(params.dim)
    prior = graph.n
    if prior > 0:
        vols = np.minimum((params.a1 * graph.in_deg + params.a2) / prior, 1.0)
        hit = contains_unchecked(graph.positions, point, vols, params.dim, params.norm)
        candidates = np.flatnonzero(hit)  # 0-based, ascending birth order
        coins = rng.coin.random(candidates.size)
        linked = candidates[coins < params.p]
        graph.add_vertex(point)
        if linked.size:
            graph.add_edges(t, linked + 1)
        if profile is not None:
            profile.comparisons += prior
    else:
        graph.add_vertex(point)


def generate(params: ModelParams, n: int, mode: str = "naive",
             profile: GenerationProfile | None = None) -> SpaGraph:
    """Generate the n-vertex graph; `fast` must match `naive` bit for bit."""
    params.validate()
    if not (isinstance(n, int) and n >= 0):
        raise ParamError(f"n must be a non-negative integer, got {n!r}")
    if mode == "naive":
        graph = SpaGraph(params.dim, params.norm)
        rng = RngStream(params.seed)
        for _ in range(n):
            step_naive(graph, params, rng, profile)
        return graph
    if mode == "fast":
        from .fastgen import generate_fast

        return generate_fast(params, n, profile=profile)
    raise ParamError(f"unknown generation mode {mode!r}")
