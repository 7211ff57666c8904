"""Parity (LHZ) encodings: physical qubits, plaquette constraints, readout bases."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gf2
from .problem import Instance


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    members: tuple[int, ...]
    sign: int = 1


@dataclass(frozen=True)
class ReadoutBasis:
    members: tuple[int, ...]
    kind: str = "imported"


@dataclass(frozen=True)
class ParityMapping:
    n_logical: int
    physical_qubits: tuple[tuple[int, ...], ...]
    ancilla_flags: tuple[bool, ...]
    constraints: tuple[Constraint, ...]
    readout_bases: tuple[ReadoutBasis, ...]
    degeneracy: int
    positions: tuple[tuple[int, int], ...] | None = None
    provenance: str = "paper_layout"
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {q: k for k, q in enumerate(self.physical_qubits)})

    @property
    def K(self) -> int:
        return len(self.physical_qubits)

    @property
    def L(self) -> int:
        return len(self.constraints)

    @property
    def ancillas(self) -> tuple[int, ...]:
        return tuple(k for k, a in enumerate(self.ancilla_flags) if a)

    def qubit_index(self, logical: Sequence[int]) -> int:
        return self._index[tuple(sorted(logical))]

    def has_qubit(self, logical: Sequence[int]) -> bool:
        return tuple(sorted(logical)) in self._index

    def logical_matrix(self) -> np.ndarray:
        """K x n matrix whose row k is the logical indicator of qubit k."""
        a = np.zeros((self.K, self.n_logical), dtype=np.uint8)
        for k, q in enumerate(self.physical_qubits):
            a[k, list(q)] = 1
        return a

    def constraint_matrix(self) -> np.ndarray:
        c = np.zeros((self.L, self.K), dtype=np.uint8)
        for l, con in enumerate(self.constraints):
            c[l, list(con.members)] = 1
        return c

    def constraints_of(self, qubit: int) -> list[int]:
        return [l for l, c in enumerate(self.constraints) if qubit in c.members]

    def with_bases(self, bases: Sequence[ReadoutBasis]) -> "ParityMapping":
        return build_mapping(self.n_logical, self.physical_qubits, self.constraints, bases,
                             ancillas=self.ancillas, positions=self.positions, provenance=self.provenance)

    def to_dict(self) -> dict:
        out = {
            "n_logical": self.n_logical,
            "degeneracy": self.degeneracy,
            "physical_qubits": [list(q) for q in self.physical_qubits],
            "ancillas": list(self.ancillas),
            "constraints": [{"qubits": list(c.members), "sign": c.sign} for c in self.constraints],
            "readout_bases": [list(b.members) for b in self.readout_bases],
            "readout_kinds": [b.kind for b in self.readout_bases],
            "provenance": self.provenance,
        }
        if self.positions is not None:
            out["positions"] = [list(p) for p in self.positions]
        return out


def _degeneracy(n: int, physical: Sequence[Sequence[int]]) -> int:
    a = np.zeros((len(physical), n), dtype=np.uint8)
    for k, q in enumerate(physical):
        a[k, list(q)] = 1
    return n - gf2.rank(a)


def build_mapping(n_logical: int, physical_qubits, constraints, readout_bases, ancillas=(),
                  positions=None, provenance: str = "paper_layout", degeneracy: int | None = None) -> ParityMapping:
    """Validate the pieces and assemble a :class:`ParityMapping`."""
    phys = tuple(tuple(sorted(int(v) for v in q)) for q in physical_qubits)
    K = len(phys)
    if len(set(phys)) != K:
        raise MappingError("duplicate physical qubit")
    for q in phys:
        if len(q) < 2 or len(set(q)) != len(q) or q[0] < 0 or q[-1] >= n_logical:
            raise MappingError(f"malformed physical qubit {q}")
    anc = set(int(a) for a in ancillas)
    if any(a < 0 or a >= K for a in anc):
        raise MappingError("ancilla index out of range")
    flags = tuple(k in anc for k in range(K))

    cons = []
    for c in constraints:
        if not isinstance(c, Constraint):
            c = Constraint(tuple(int(m) for m in c))
        members = tuple(int(m) for m in c.members)
        if len(members) not in (3, 4) or len(set(members)) != len(members):
            raise MappingError(f"malformed constraint {members}")
        if any(m < 0 or m >= K for m in members):
            raise MappingError(f"constraint {members} out of range")
        if c.sign not in (1, -1):
            raise MappingError("constraint sign must be +-1")
        parity = set()
        for m in members:
            parity ^= set(phys[m])
        if parity:
            raise MappingError(f"constraint {members} is not a parity relation")
        cons.append(Constraint(members, c.sign))
    cons = tuple(cons)

    d = _degeneracy(n_logical, phys)
    if degeneracy is not None and degeneracy != d:
        raise MappingError(f"declared degeneracy {degeneracy} but physical qubits give {d}")
    cmat = np.zeros((len(cons), K), dtype=np.uint8)
    for l, c in enumerate(cons):
        cmat[l, list(c.members)] = 1
    if gf2.rank(cmat) != len(cons):
        raise MappingError("constraints are not independent (rank deficiency)")
    if len(cons) != K - n_logical + d:
        raise MappingError(f"constraint count {len(cons)} != K - N + D = {K - n_logical + d}")

    bases = []
    need = n_logical - d
    for b in readout_bases:
        if not isinstance(b, ReadoutBasis):
            b = ReadoutBasis(tuple(int(m) for m in b))
        members = tuple(int(m) for m in b.members)
        if len(members) != need or len(set(members)) != need:
            raise MappingError(f"readout basis needs {need} distinct qubits")
        if any(m in anc for m in members):
            raise MappingError("ancilla qubits cannot be in a readout basis")
        sub = np.zeros((need, n_logical), dtype=np.uint8)
        for r, m in enumerate(members):
            sub[r, list(phys[m])] = 1
        if gf2.rank(sub) != need:
            raise MappingError(f"readout basis {members} is not decodable")
        bases.append(ReadoutBasis(members, b.kind))
    if positions is not None:
        positions = tuple(tuple(int(x) for x in p) for p in positions)
        if len(positions) != K:
            raise MappingError("positions length must equal K")
    return ParityMapping(n_logical, phys, flags, cons, tuple(bases), d, positions, provenance)


# -- complete graphs ---------------------------------------------------------

def lhz_constraints(n: int) -> list[tuple[tuple[int, int], ...]]:
    """Plaquettes of the LHZ triangle as tuples of logical pairs.

    Row ``i`` holds the boundary triangle {(i,i+1),(i,i+2),(i+1,i+2)} and the
    squares {(i,j),(i,j+1),(i+1,j),(i+1,j+1)} for j = i+2 .. n-2.
    """
    out = []
    for i in range(n - 2):
        out.append(((i, i + 1), (i, i + 2), (i + 1, i + 2)))
        for j in range(i + 2, n - 1):
            out.append(((i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)))
    return out


def encode_complete(n: int) -> ParityMapping:
    if n < 3:
        raise MappingError("complete encoding needs n >= 3")
    phys = list(itertools.combinations(range(n), 2))
    index = {q: k for k, q in enumerate(phys)}
    cons = [Constraint(tuple(index[q] for q in plaq)) for plaq in lhz_constraints(n)]
    positions = [(i, n - 1 - j) for i, j in phys]
    bases = _lines(n, index)
    return build_mapping(n, phys, cons, bases, positions=positions, provenance="paper_layout")


def _lines(n: int, index: dict) -> list[ReadoutBasis]:
    return [ReadoutBasis(tuple(sorted(index[tuple(sorted((i, j)))] for j in range(n) if j != i)),
                         kind=f"logical_line({i})") for i in range(n)]


def is_complete(mapping: ParityMapping) -> bool:
    n = mapping.n_logical
    return (mapping.K == n * (n - 1) // 2 and not any(mapping.ancilla_flags)
            and all(len(q) == 2 for q in mapping.physical_qubits))


def logical_lines(mapping: ParityMapping) -> tuple[ReadoutBasis, ...]:
    if not is_complete(mapping):
        raise MappingError("logical lines are defined for complete-graph mappings")
    return tuple(_lines(mapping.n_logical, mapping._index))


# -- constraint search ---------------------------------------------------------

def find_constraints(n_logical: int, physical_qubits: Sequence[Sequence[int]]) -> list[Constraint]:
    """Independent short (3- and 4-member) parity constraints.

    Candidates are all 3- and 4-subsets of physical qubits whose logical sets
    cancel; they are taken greedily, triangles before squares and each group in
    lexicographic member order, until the GF(2) nullspace of the logical map is
    spanned.
    """
    phys = [tuple(sorted(q)) for q in physical_qubits]
    K = len(phys)
    vec = [sum(1 << v for v in q) for q in phys]
    target = K - (n_logical - _degeneracy(n_logical, phys))

    single = {}
    for k, v in enumerate(vec):
        single.setdefault(v, []).append(k)
    pair_keys: dict[int, list[tuple[int, int]]] = {}
    for a, b in itertools.combinations(range(K), 2):
        pair_keys.setdefault(vec[a] ^ vec[b], []).append((a, b))

    triples = set()
    for key, pairs in pair_keys.items():
        for c in single.get(key, ()):
            for a, b in pairs:
                if c != a and c != b:
                    triples.add(tuple(sorted((a, b, c))))
    quads = set()
    for pairs in pair_keys.values():
        for (a, b), (c, d) in itertools.combinations(pairs, 2):
            if len({a, b, c, d}) == 4:
                quads.add(tuple(sorted((a, b, c, d))))

    chosen: list[Constraint] = []
    basis: dict[int, int] = {}  # pivot bit -> reduced row
    for members in sorted(triples) + sorted(quads):
        if len(chosen) == target:
            break
        row = sum(1 << m for m in members)
        while row:
            top = row.bit_length() - 1
            if top not in basis:
                basis[top] = row
                chosen.append(Constraint(members))
                break
            row ^= basis[top]
    if len(chosen) != target:
        raise MappingError(f"only {len(chosen)} of {target} constraints found among short cycles")
    return chosen


# -- fields and states -----------------------------------------------------------

def physical_fields(instance: Instance, mapping: ParityMapping, allow_missing: bool = False) -> np.ndarray:
    """Local field of every physical qubit; ancillas get 0."""
    if instance.n != mapping.n_logical:
        raise MappingError("instance and mapping sizes differ")
    weights = {e.vertices: e.weight for e in instance.edges}
    fields = np.zeros(mapping.K, dtype=np.int64)
    for k, q in enumerate(mapping.physical_qubits):
        if mapping.ancilla_flags[k]:
            continue
        if q in weights:
            fields[k] = weights[q]
        elif not allow_missing:
            raise MappingError(f"physical qubit {q} has no matching edge")
    for vs in weights:
        if vs not in mapping._index or mapping.ancilla_flags[mapping._index[vs]]:
            raise MappingError(f"edge {vs} is not represented by the mapping")
    return fields


def encode_logical_state(mapping: ParityMapping, logical) -> np.ndarray:
    bits = np.asarray(logical, dtype=np.uint8)
    if bits.shape[-1] != mapping.n_logical:
        raise MappingError("logical state length mismatch")
    out = np.zeros(bits.shape[:-1] + (mapping.K,), dtype=np.uint8)
    for k, q in enumerate(mapping.physical_qubits):
        out[..., k] = np.bitwise_xor.reduce(bits[..., list(q)], axis=-1)
    return out


def constraint_violations(mapping: ParityMapping, physical) -> np.ndarray:
    """1 where a constraint's Z-product is -1 (relative to its sign)."""
    q = np.asarray(physical, dtype=np.uint8)
    out = np.zeros(q.shape[:-1] + (mapping.L,), dtype=np.uint8)
    for l, c in enumerate(mapping.constraints):
        par = np.bitwise_xor.reduce(q[..., list(c.members)], axis=-1)
        out[..., l] = par ^ (1 if c.sign == -1 else 0)
    return out


def tree_coverage(mapping: ParityMapping, bases: Sequence[ReadoutBasis]) -> float:
    if not bases:
        raise MappingError("need at least one readout basis")
    return sum(len(b.members) for b in bases) / mapping.K


# -- files -------------------------------------------------------------------------

def mapping_from_dict(data: dict) -> ParityMapping:
    try:
        cons = [Constraint(tuple(c["qubits"]), int(c.get("sign", 1))) for c in data["constraints"]]
        bases = data.get("readout_bases", [])
        kinds = data.get("readout_kinds") or ["imported"] * len(bases)
        return build_mapping(int(data["n_logical"]), data["physical_qubits"], cons,
                             [ReadoutBasis(tuple(b), kind) for b, kind in zip(bases, kinds)],
                             ancillas=data.get("ancillas", []), positions=data.get("positions"),
                             provenance=str(data.get("provenance", "imported")),
                             degeneracy=data.get("degeneracy"))
    except (KeyError, TypeError) as exc:
        raise MappingError(f"malformed mapping file: {exc}") from exc


def load_mapping(path: str | Path) -> ParityMapping:
    return mapping_from_dict(json.loads(Path(path).read_text()))


def save_mapping(mapping: ParityMapping, path: str | Path) -> None:
    Path(path).write_text(json.dumps(mapping.to_dict(), indent=1))


def bundled(name: str) -> dict:
    return json.loads(resources.files("parityqaoa.data").joinpath(name).read_text())


def regular4_mapping(m_bases: int | None = None) -> ParityMapping:
    """The bundled 4-regular benchmark mapping, keeping the first ``m_bases`` trees."""
    mp = mapping_from_dict(bundled("regular4_fig3_mapping.json"))
    if m_bases is not None:
        mp = mp.with_bases(mp.readout_bases[:m_bases])
    return mp


def hypergraph_mapping() -> ParityMapping:
    return mapping_from_dict(bundled("hypergraph_fig9_mapping.json"))
