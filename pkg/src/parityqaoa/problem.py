"""Signed Max-Cut instances on graphs and hypergraphs.

Two energy conventions are used throughout the package:

* ``cut``: the cut objective ``C(s) = -sum_e J_e (s_i xor s_j)``, used for
  pairwise instances.
* ``spin``: ``E(z) = offset + sum_e J_e prod_{i in e} z_i`` with ``z = 1 - 2 s``,
  used for hypergraphs and inside the recursive solver.

For pairwise instances ``E = 2 C + sum_e J_e`` (plus ``offset``), so the
approximation ratio is the same in either convention.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import rng as rng_mod

BRUTE_FORCE_MAX_N = 30


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    vertices: tuple[int, ...]
    weight: int


@dataclass(frozen=True)
class Instance:
    n: int
    edges: tuple[Edge, ...]
    label: str = ""
    seed: int | None = None
    # constant term of the spin energy, produced by variable elimination
    offset: int = 0

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            vs = e.vertices
            if len(vs) not in (2, 3):
                raise InstanceError(f"edge {vs} must have 2 or 3 vertices")
            if list(vs) != sorted(set(vs)):
                raise InstanceError(f"edge {vs} must be sorted and distinct")
            if vs[0] < 0 or vs[-1] >= self.n:
                raise InstanceError(f"edge {vs} out of range for n={self.n}")
            if vs in seen:
                raise InstanceError(f"duplicate edge {vs}")
            if e.weight == 0 or int(e.weight) != e.weight:
                raise InstanceError(f"edge {vs} needs a nonzero integer weight")
            seen.add(vs)

    @property
    def pairwise(self) -> bool:
        return all(len(e.vertices) == 2 for e in self.edges)

    @property
    def convention(self) -> str:
        return "cut" if self.pairwise else "spin"

    @property
    def weight_sum(self) -> int:
        return sum(e.weight for e in self.edges)

    def weight_of(self, vertices: Sequence[int]) -> int:
        key = tuple(sorted(vertices))
        for e in self.edges:
            if e.vertices == key:
                return e.weight
        return 0

    def edge_index(self) -> dict[tuple[int, ...], int]:
        return {e.vertices: k for k, e in enumerate(self.edges)}

    def weight_matrix(self) -> np.ndarray:
        """Symmetric n x n matrix of pairwise weights."""
        w = np.zeros((self.n, self.n), dtype=np.int64)
        for e in self.edges:
            if len(e.vertices) == 2:
                i, j = e.vertices
                w[i, j] = w[j, i] = e.weight
        return w

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [{"vertices": list(e.vertices), "weight": int(e.weight)} for e in self.edges],
            "label": self.label,
            "seed": self.seed,
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        edges = [Edge(tuple(sorted(int(v) for v in e["vertices"])), int(e["weight"])) for e in data["edges"]]
        edges.sort(key=lambda e: e.vertices)
        return cls(int(data["n"]), tuple(edges), str(data.get("label", "")), data.get("seed"),
                   int(data.get("offset", 0)))


def make_instance(n: int, weighted_edges: Iterable[tuple[Sequence[int], int]], label: str = "",
                  seed: int | None = None, offset: int = 0) -> Instance:
    edges = sorted((Edge(tuple(sorted(vs)), int(w)) for vs, w in weighted_edges), key=lambda e: e.vertices)
    return Instance(n, tuple(edges), label, seed, offset)


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict(), indent=1))


def load_instance(path: str | Path) -> Instance:
    return Instance.from_dict(json.loads(Path(path).read_text()))


# -- topologies ---------------------------------------------------------------

# Logical graph of the 8-vertex 4-regular benchmark: the union of the bundled
# readout spanning trees.
REGULAR4_EDGES: tuple[tuple[int, int], ...] = (
    (0, 1), (0, 2), (0, 6), (0, 7), (1, 2), (1, 4), (1, 5), (2, 6),
    (2, 7), (3, 4), (3, 5), (3, 6), (3, 7), (4, 5), (4, 6), (5, 7),
)

# 8-vertex hypergraph benchmark with 10 two-vertex and 7 three-vertex
# hyperedges. The published figure does not list its members; this is a
# reconstruction with the same counts.
HYPERGRAPH_EDGES: tuple[tuple[int, ...], ...] = (
    (0, 1), (0, 4), (1, 2), (1, 5), (2, 3), (2, 6), (3, 7), (4, 5), (5, 6), (6, 7),
    (0, 1, 2), (0, 4, 5), (1, 2, 5), (2, 3, 6), (2, 6, 7), (3, 6, 7), (4, 5, 6),
)

TOPOLOGIES = ("complete", "regular4_fig3", "hypergraph_fig9", "from_file")


def topology_edges(topology: str, n: int | None = None) -> tuple[int, list[tuple[int, ...]]]:
    if topology == "complete":
        if n is None or n < 3:
            raise InstanceError("complete topology needs n >= 3")
        return n, list(itertools.combinations(range(n), 2))
    if topology == "regular4_fig3":
        return 8, list(REGULAR4_EDGES)
    if topology == "hypergraph_fig9":
        return 8, list(HYPERGRAPH_EDGES)
    raise InstanceError(f"unknown topology {topology!r}")


def random_instance(topology: str, seed: int, n: int | None = None, path: str | Path | None = None) -> Instance:
    """Draw +-1 weights i.i.d. uniformly on a fixed topology.

    The same ``seed`` always yields the same instance (Philox stream, see
    :mod:`parityqaoa.rng`).
    """
    if topology == "from_file":
        if path is None:
            raise InstanceError("from_file topology needs a path")
        base = load_instance(path)
        n_verts, verts = base.n, [e.vertices for e in base.edges]
        label = f"{Path(path).stem}-s{seed}"
    else:
        n_verts, verts = topology_edges(topology, n)
        label = f"{topology}{n_verts if topology == 'complete' else ''}-s{seed}"
    gen = rng_mod.generator(seed, rng_mod.STREAM_INSTANCE)
    weights = gen.choice(np.array([-1, 1]), size=len(verts))
    return make_instance(n_verts, zip(verts, weights.tolist()), label=label, seed=seed)


def instance_from_weights(topology: str, weights: Sequence[int], n: int | None = None, label: str = "") -> Instance:
    n_verts, verts = topology_edges(topology, n)
    if len(weights) != len(verts):
        raise InstanceError("weight count does not match topology")
    return make_instance(n_verts, zip(verts, weights), label=label)


# -- energies -------------------------------------------------------------------

def _check_bits(instance: Instance, bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.shape[-1] != instance.n:
        raise InstanceError(f"assignment length {arr.shape[-1]} != n={instance.n}")
    return arr


def spin_energy(instance: Instance, bits) -> np.ndarray | int:
    """Spin energy for one assignment or a stacked array of assignments."""
    arr = _check_bits(instance, bits)
    z = 1 - 2 * arr.astype(np.int64)
    total = np.full(arr.shape[:-1], instance.offset, dtype=np.int64)
    for e in instance.edges:
        total = total + e.weight * np.prod(z[..., list(e.vertices)], axis=-1)
    return int(total) if total.ndim == 0 else total


def cut_value(instance: Instance, bits) -> np.ndarray | int:
    if not instance.pairwise:
        raise InstanceError("cut objective is defined for pairwise instances only")
    arr = _check_bits(instance, bits).astype(np.int64)
    total = np.zeros(arr.shape[:-1], dtype=np.int64)
    for e in instance.edges:
        i, j = e.vertices
        total = total - e.weight * (arr[..., i] ^ arr[..., j])
    return int(total) if total.ndim == 0 else total


def objective_value(instance: Instance, bits) -> np.ndarray | int:
    """Energy in the instance's declared convention (see module docstring)."""
    if instance.convention == "cut":
        return cut_value(instance, bits)
    return spin_energy(instance, bits)


def energy(instance: Instance, bits, convention: str) -> np.ndarray | int:
    if convention == "cut":
        return cut_value(instance, bits)
    if convention == "spin":
        return spin_energy(instance, bits)
    raise InstanceError(f"unknown convention {convention!r}")


# -- extrema --------------------------------------------------------------------

@dataclass(frozen=True)
class Extrema:
    c_min: int
    c_max: int
    ground_states: tuple[tuple[int, ...], ...] = field(default=())
    convention: str = "cut"


def all_assignments(n: int, fix_first: bool = False) -> np.ndarray:
    """Every bitstring of length n (bit 0 held at 0 when ``fix_first``)."""
    free = n - 1 if fix_first else n
    idx = np.arange(2 ** free, dtype=np.int64)
    shift = np.arange(free, dtype=np.int64)
    bits = ((idx[:, None] >> shift[None, :]) & 1).astype(np.uint8)
    if fix_first:
        bits = np.concatenate([np.zeros((bits.shape[0], 1), dtype=np.uint8), bits], axis=1)
    return bits


def brute_force_extrema(instance: Instance, convention: str | None = None) -> Extrema:
    conv = convention or instance.convention
    if instance.n > BRUTE_FORCE_MAX_N:
        raise InstanceError(f"n={instance.n} exceeds brute-force guard {BRUTE_FORCE_MAX_N}")
    flip_symmetric = instance.pairwise
    chunk = 1 << 16
    free = instance.n - 1 if flip_symmetric else instance.n
    total = 1 << free
    c_min, c_max = None, None
    ground: list[tuple[int, ...]] = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(free)[None, :]) & 1).astype(np.uint8)
        if flip_symmetric:
            bits = np.concatenate([np.zeros((bits.shape[0], 1), dtype=np.uint8), bits], axis=1)
        vals = np.atleast_1d(energy(instance, bits, conv))
        lo, hi = int(vals.min()), int(vals.max())
        if c_max is None or hi > c_max:
            c_max = hi
        if c_min is None or lo < c_min:
            c_min, ground = lo, []
        if lo == c_min:
            ground.extend(tuple(int(b) for b in row) for row in bits[vals == lo])
    return Extrema(int(c_min), int(c_max), tuple(ground), conv)


def batch_extrema(weights: np.ndarray, edges: Sequence[tuple[int, int]], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cut-convention minima and maxima for many weightings of one graph.

    ``weights`` has shape (batch, n_edges).
    """
    states = all_assignments(n, fix_first=True).astype(np.int64)
    e = np.asarray(edges)
    cut = states[:, e[:, 0]] ^ states[:, e[:, 1]]
    vals = -(np.asarray(weights, dtype=np.int64) @ cut.T)
    return vals.min(axis=1), vals.max(axis=1)


def approximation_ratio(extrema: Extrema, energy_value: float) -> float:
    span = extrema.c_max - extrema.c_min
    if span <= 0:
        raise InstanceError("degenerate instance: c_max == c_min")
    return (extrema.c_max - energy_value) / span
