"""Stabilizer simulation of Clifford-angle QAOA circuits and the classical lower bound.

The tableau stores only stabilizer generators (no destabilizers are needed:
the circuits here are never measured mid-way). Columns are Python ints used
as bitsets over generator rows, so every gate is a handful of integer ops.

Sign bits may carry symbolic parts: ``r = r0 xor sum_v b_v R_v`` where the
``b_v`` are per-instance booleans. A field rotation ``exp(-i gamma J Z)`` with
``J -> -J`` differs from the ``+|J|`` one by at most a Pauli Z, so a whole batch
of +-1 field assignments on one mapping is simulated with a single pass.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .circuit import Circuit, Gate, ParamVector, parity_layer_gates, schedule_constraints
from .parity_map import ParityMapping, ReadoutBasis

QUARTER = np.pi / 4
CLIFFORD_ANGLES = (-QUARTER, 0.0, QUARTER, 2 * QUARTER)


class NonCliffordError(ValueError):
    pass


class NotBasisStateError(RuntimeError):
    pass


# -- rotation table ----------------------------------------------------------

_ELEMENTARY = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1, 1j]),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
}
_PAULI = {"x": _ELEMENTARY["x"], "z": _ELEMENTARY["z"], "y": _ELEMENTARY["y"]}


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """exp(-i theta P / 2) for a single-qubit Pauli axis."""
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * _PAULI[axis]


def word_matrix(word: Sequence[str]) -> np.ndarray:
    """Matrix of a gate word applied left to right in time."""
    m = np.eye(2, dtype=complex)
    for g in word:
        m = _ELEMENTARY[g] @ m
    return m


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    return abs(abs(np.vdot(a, b)) - a.shape[0]) < tol


@lru_cache(maxsize=None)
def rotation_word(axis: str, quarter_turns: int) -> tuple[str, ...]:
    """Shortest {h, s, x, y, z} word equal (up to phase) to rotation by quarter_turns * pi/2.

    Found by breadth-first search, so no decomposition is transcribed by hand.
    """
    target = rotation_matrix(axis, quarter_turns * np.pi / 2)
    for length in range(0, 6):
        for word in itertools.product("hsxyz", repeat=length):
            if equal_up_to_phase(word_matrix(word), target):
                return tuple(word)
    raise AssertionError("no Clifford word found")


def quarter_turns(theta: float) -> int:
    """theta / (pi/2) as an integer mod 4, or NonCliffordError."""
    k = theta / (np.pi / 2)
    kr = round(k)
    if abs(k - kr) > 1e-9:
        raise NonCliffordError(f"rotation angle {theta} is not a multiple of pi/2")
    return kr % 4


def compile_gate(gate: Gate, symbolic: dict | None = None) -> list[tuple]:
    """Lower a gate to elementary tableau ops.

    Ops are ("h"|"s"|"x"|"y"|"z", q), ("c", control, target) and ("v", q, var),
    the last being a Z applied when sign variable ``var`` is set.
    """
    k, q = gate.kind, gate.qubits
    if k == "cnot":
        return [("c", q[0], q[1])]
    if k in ("rz", "plaquette_rz"):
        turns = quarter_turns(gate.angle)
        ops = [(g, q[0]) for g in rotation_word("z", turns)]
        if symbolic is not None and gate.tag is not None and turns % 2:
            var = symbolic.get(gate.tag[1])
            if var is not None:
                ops.append(("v", q[0], var))
        return ops
    if k == "rx":
        return [(g, q[0]) for g in rotation_word("x", quarter_turns(gate.angle))]
    if k == "zz":
        turns = quarter_turns(gate.angle)
        return [("c", q[0], q[1])] + [(g, q[1]) for g in rotation_word("z", turns)] + [("c", q[0], q[1])]
    if k in ("h", "x", "y", "z"):
        return [(k, q[0])]
    raise NonCliffordError(f"unsupported gate {k}")


# -- tableau -------------------------------------------------------------------

class Tableau:
    """Stabilizer generators of a K-qubit state, column-major bitsets."""

    def __init__(self, width: int, n_vars: int = 0):
        width = int(width)
        self.width = width
        self.x = [0] * width
        self.z = [1 << q for q in range(width)]
        self.r = 0
        self.sym = [0] * n_vars
        self.full = (1 << width) - 1

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.width, t.full = self.width, self.full
        t.x, t.z, t.sym, t.r = self.x[:], self.z[:], self.sym[:], self.r
        return t

    # elementary gates
    def h(self, a):
        x, z = self.x, self.z
        self.r ^= x[a] & z[a]
        x[a], z[a] = z[a], x[a]

    def s(self, a):
        self.r ^= self.x[a] & self.z[a]
        self.z[a] ^= self.x[a]

    def px(self, a):
        self.r ^= self.z[a]

    def pz(self, a):
        self.r ^= self.x[a]

    def py(self, a):
        self.r ^= self.x[a] ^ self.z[a]

    def cnot(self, c, t):
        x, z = self.x, self.z
        self.r ^= x[c] & z[t] & (x[t] ^ z[c] ^ self.full)
        x[t] ^= x[c]
        z[c] ^= z[t]

    def sym_z(self, a, var):
        self.sym[var] ^= self.x[a]

    def word(self, a, word):
        for g in word:
            if g == "h":
                self.h(a)
            elif g == "s":
                self.s(a)
            elif g == "x":
                self.px(a)
            elif g == "y":
                self.py(a)
            else:
                self.pz(a)

    def apply(self, gate: Gate, symbolic: dict | None = None):
        self.run(compile_gate(gate, symbolic))

    def run(self, ops):
        """Execute compiled ops (see :func:`compile_gate`)."""
        x, z, sym, full = self.x, self.z, self.sym, self.full
        r = self.r
        for op in ops:
            k, a = op[0], op[1]
            if k == "c":
                t = op[2]
                r ^= x[a] & z[t] & (x[t] ^ z[a] ^ full)
                x[t] ^= x[a]
                z[a] ^= z[t]
            elif k == "h":
                r ^= x[a] & z[a]
                x[a], z[a] = z[a], x[a]
            elif k == "s":
                r ^= x[a] & z[a]
                z[a] ^= x[a]
            elif k == "z":
                r ^= x[a]
            elif k == "x":
                r ^= z[a]
            elif k == "y":
                r ^= x[a] ^ z[a]
            else:
                sym[op[2]] ^= x[a]
        self.r = r

    # readout
    def is_basis_state(self) -> bool:
        return not any(self.x)

    def bit_matrix(self, cols: list[int]) -> np.ndarray:
        """Rows = generators, columns = entries of ``cols`` (bitsets over rows)."""
        nbytes = (self.width + 7) // 8
        buf = b"".join(c.to_bytes(nbytes, "little") for c in cols) if cols else b""
        if not cols:
            return np.zeros((self.width, 0), dtype=np.uint8)
        bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8).reshape(len(cols), nbytes),
                             axis=1, bitorder="little")[:, : self.width]
        return bits.T.copy()

    def affine_basis_state(self) -> tuple[np.ndarray, np.ndarray]:
        """(c, M) with state bits q = c xor M b for the symbolic variables b."""
        if not self.is_basis_state():
            raise NotBasisStateError("stabilizer state is not a computational basis state")
        zmat = self.bit_matrix(self.z)
        rhs = self.bit_matrix([self.r] + self.sym)
        # generators are independent, so the Z part is invertible once X vanishes
        sol = gf2.solve(zmat, rhs)
        return sol[:, 0].copy(), sol[:, 1:].copy()

    def outcome_space(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Computational-basis outcome set as ``c xor M b xor span(V)``.

        Measurement outcomes of a stabilizer state are uniform over an affine
        subspace; its dimension is the rank of the X part. Returns ``(c, M, V)``
        with ``V`` of shape (r, K).
        """
        if self.is_basis_state():
            c, m = self.affine_basis_state()
            return c, m, np.zeros((0, self.width), dtype=np.uint8)
        K = self.width
        xs = self.bit_matrix(self.x).astype(np.int64)
        zs = self.bit_matrix(self.z).astype(np.int64)
        ph = 2 * self.bit_matrix([self.r])[:, 0].astype(np.int64)
        sym = self.bit_matrix(self.sym) if self.sym else np.zeros((K, 0), dtype=np.uint8)
        rank = 0
        for col in range(K):
            piv = next((g for g in range(rank, K) if xs[g, col]), None)
            if piv is None:
                continue
            for arr in (xs, zs, ph, sym):
                arr[[rank, piv]] = arr[[piv, rank]]
            for g in range(K):
                if g != rank and xs[g, col]:
                    ph[g] = (ph[g] + ph[rank] + _pauli_phase(xs[rank], zs[rank], xs[g], zs[g])) % 4
                    xs[g] ^= xs[rank]
                    zs[g] ^= zs[rank]
                    sym[g] ^= sym[rank]
            rank += 1
        zrows = zs[rank:].astype(np.uint8)
        rhs = np.concatenate([(ph[rank:] // 2)[:, None].astype(np.uint8), sym[rank:]], axis=1)
        sol = gf2.solve(zrows, rhs)
        return sol[:, 0].copy(), sol[:, 1:].copy(), gf2.nullspace(zrows)

    def stabilizers(self) -> list[str]:
        """Generators as signed Pauli strings (qubit 0 first)."""
        out = []
        for g in range(self.width):
            chars = []
            for a in range(self.width):
                xb, zb = (self.x[a] >> g) & 1, (self.z[a] >> g) & 1
                chars.append("IXZY"[xb + 2 * zb])
            out.append(("-" if (self.r >> g) & 1 else "+") + "".join(chars))
        return out


def _pauli_phase(x1, z1, x2, z2) -> int:
    """Exponent of i picked up by the product P1 P2 of two Pauli rows."""
    g = np.where((x1 == 1) & (z1 == 1), z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1),
        np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)))
    return int(g.sum())


def clifford_simulate(circuit: Circuit) -> Tableau:
    t = Tableau(circuit.width)
    for g in circuit.gates:
        t.apply(g)
    return t


def basis_state(circuit: Circuit) -> np.ndarray:
    c, _ = clifford_simulate(circuit).affine_basis_state()
    return c


# -- classical parameter vectors ----------------------------------------------------

def _exact_depth_vectors(q: int) -> list[tuple[tuple[int, int, int], ...]]:
    """Classical vectors at exact depth q, angles in units of pi/4 as (gamma, omega, beta)."""
    if q == 1:
        return [((1, 0, 1),), ((1, 2, 1),), ((-1, 0, 1),), ((-1, 2, 1),)]
    rows: list[list[tuple[int, int, int]]] = []
    if q % 2 == 0:
        half = q // 2
        rows += [[(0, 1, 1)]] * (half - 1)
        rows += [[(0, 1, 2)]]
        rows += [[(g, o, 1) for g in (0, 2) for o in (1, -1)]] * (q - 1 - half)
    else:
        half = (q + 1) // 2
        rows += [[(0, 1, 1)]] * (half - 1)
        rows += [[(g, 2, 1) for g in (0, 2)]]
        rows += [[(g, o, 1) for g in (0, 2) for o in (1, -1)]] * (q - 1 - half)
    rows += [[(g, o, 1) for g in (1, -1) for o in (1, -1)]]
    return [tuple(choice) for choice in itertools.product(*rows)]


def classical_vectors_units(p: int) -> list[tuple[tuple[int, int, int], ...]]:
    """All classical vectors up to depth p, zero-padded to p layers (units of pi/4)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    out = []
    for q in range(1, p + 1):
        for v in _exact_depth_vectors(q):
            out.append(v + ((0, 0, 0),) * (p - q))
    return out


def units_to_params(vec: Sequence[tuple[int, int, int]]) -> ParamVector:
    return ParamVector(tuple(g * QUARTER for g, _, _ in vec), tuple(b * QUARTER for _, _, b in vec),
                       tuple(o * QUARTER for _, o, _ in vec))


def classical_vectors(p: int) -> list[ParamVector]:
    return [units_to_params(v) for v in classical_vectors_units(p)]


def _trim(vec):
    v = list(vec)
    while v and v[-1] == (0, 0, 0):
        v.pop()
    return tuple(v)


# -- batched classical states ------------------------------------------------------

@dataclass(frozen=True)
class OutcomeMap:
    """Outcomes of one vector for every sign pattern b: ``offset xor flip_map b xor span(spread)``."""
    offset: np.ndarray  # (K,)
    flip_map: np.ndarray  # (K, K)
    spread: np.ndarray  # (r, K)

    def centers(self, flips: np.ndarray) -> np.ndarray:
        return (self.offset[None, :] ^ ((flips.astype(np.int64) @ self.flip_map.T.astype(np.int64)) & 1)).astype(np.uint8)

    def span(self) -> np.ndarray:
        r = self.spread.shape[0]
        coeffs = ((np.arange(1 << r)[:, None] >> np.arange(r)[None, :]) & 1).astype(np.int64)
        return (coeffs @ self.spread.astype(np.int64) % 2).astype(np.uint8)


def _magnitude_and_flips(mapping: ParityMapping, fields) -> tuple[tuple[int, ...], np.ndarray]:
    fields = np.atleast_2d(np.asarray(fields, dtype=np.int64))
    if fields.shape[1] != mapping.K:
        raise ValueError("fields must have length K")
    magnitude = np.abs(fields[0])
    if np.any(np.abs(fields) != magnitude):
        raise ValueError("batched fields must share magnitudes")
    return tuple(int(v) for v in magnitude), (fields < 0).astype(np.uint8)


def outcome_maps(mapping: ParityMapping, magnitude: Sequence[int], vectors: Sequence[tuple]) -> list[OutcomeMap]:
    return list(_outcome_maps(mapping, tuple(int(v) for v in magnitude), tuple(_trim(v) for v in vectors)))


@lru_cache(maxsize=64)
def _outcome_maps(mapping: ParityMapping, magnitude: tuple[int, ...], vectors: tuple) -> tuple[OutcomeMap, ...]:
    K = mapping.K
    symbolic = {q: q for q in range(K)}
    groups = schedule_constraints(mapping)
    root = Tableau(K, n_vars=K)
    for q in range(K):
        root.h(q)
    cache: dict[tuple, Tableau] = {(): root}
    compiled: dict[tuple, list] = {}

    def layer_ops(units):
        if units not in compiled:
            g, o, b = units
            gates = parity_layer_gates(mapping, magnitude, g * QUARTER, o * QUARTER, b * QUARTER, groups)
            compiled[units] = [op for gate in gates for op in compile_gate(gate, symbolic)]
        return compiled[units]

    def state_for(prefix):
        # vectors share long prefixes, so each trie node is simulated once
        if prefix not in cache:
            t = state_for(prefix[:-1]).copy()
            t.run(layer_ops(prefix[-1]))
            cache[prefix] = t
        return cache[prefix]

    results = {vec: OutcomeMap(*state_for(vec).outcome_space()) for vec in sorted(set(vectors))}
    return tuple(results[v] for v in vectors)


def classical_states(mapping: ParityMapping, fields, p: int,
                     vectors: Sequence[tuple] | None = None) -> np.ndarray:
    """Classical states for a batch of field vectors.

    ``fields`` has shape (batch, K) (or (K,)); all rows must share ``|J|``.
    Returns uint8 bits of shape (batch, n_vectors, K), vectors ordered as
    :func:`classical_vectors_units`. Raises NotBasisStateError when a vector
    leaves some qubit in superposition (possible with zero-field ancillas).
    """
    magnitude, flips = _magnitude_and_flips(mapping, fields)
    if vectors is None:
        vectors = classical_vectors_units(p)
    maps = outcome_maps(mapping, magnitude, vectors)
    out = np.empty((flips.shape[0], len(vectors), mapping.K), dtype=np.uint8)
    for i, om in enumerate(maps):
        if om.spread.shape[0]:
            raise NotBasisStateError(f"vector {vectors[i]} does not produce a basis state")
        out[:, i, :] = om.centers(flips)
    return out


def classical_state(mapping: ParityMapping, fields, vector) -> np.ndarray:
    """Basis state produced by one classical vector (ParamVector or unit tuple)."""
    if isinstance(vector, ParamVector):
        from .circuit import build_parity_circuit
        circ = build_parity_circuit(mapping, np.asarray(fields), vector)
        return basis_state(circ)
    return classical_states(mapping, fields, len(vector), [tuple(vector)])[0, 0]


# -- decoded energies of classical states ---------------------------------------------

def batch_energies(edges: Sequence[tuple[int, ...]], weights: np.ndarray, logical: np.ndarray,
                   convention: str, offsets=None) -> np.ndarray:
    """Energies of logical states (B, ..., n) under per-row weights (B, E)."""
    z = (1 - 2 * logical.astype(np.int8))
    w = np.asarray(weights, dtype=np.int64)
    shape = logical.shape[:-1]
    flat = z.reshape(shape[0], -1, z.shape[-1])
    total = np.zeros(flat.shape[:2], dtype=np.int64)
    for k, vs in enumerate(edges):
        term = flat[..., vs[0]] * flat[..., vs[1]]
        if len(vs) == 3:
            term = term * flat[..., vs[2]]
        total += w[:, k, None] * term
    if offsets is not None:
        total += np.asarray(offsets, dtype=np.int64)[:, None]
    if convention == "cut":
        total = (total - w.sum(axis=1)[:, None]) // 2
    return total.reshape(shape)


def _decode_energy(mapping, basis, states, edges, weights, conv, offsets):
    """Lowest-energy decoding of stacked states (B, ..., K) on one basis: (energies, logical)."""
    from .decode import decoder, _completions

    dec = decoder(mapping, basis)
    s = ((states[..., list(dec.members)].astype(np.int64) @ dec.matrix.T.astype(np.int64)) & 1).astype(np.uint8)
    if dec.kernel.shape[0] == 0 or conv == "cut":
        return batch_energies(edges, weights, s, conv, offsets), s
    cand = s[..., None, :] ^ _completions(dec.kernel)
    e = batch_energies(edges, weights, cand, conv, offsets)
    pick = np.argmin(e, axis=-1)
    return (np.take_along_axis(e, pick[..., None], axis=-1)[..., 0],
            np.take_along_axis(cand, pick[..., None, None], axis=-2)[..., 0, :])


def expected_decoded_energies(mapping: ParityMapping, bases: Sequence[ReadoutBasis], maps: Sequence[OutcomeMap],
                              flips: np.ndarray, edges, weights, conv: str, offsets=None) -> np.ndarray:
    """Expected decoded energy per (instance, vector, basis): shape (B, V, M)."""
    B, V, M = flips.shape[0], len(maps), len(bases)
    out = np.empty((B, V, M), dtype=float)
    by_rank: dict[int, list[int]] = {}
    for i, om in enumerate(maps):
        by_rank.setdefault(om.spread.shape[0], []).append(i)
    for r, idx in by_rank.items():
        centers = np.stack([maps[i].centers(flips) for i in idx], axis=1)  # (B, Vg, K)
        if r:
            spans = np.stack([maps[i].span() for i in idx])  # (Vg, S, K)
            centers = centers[:, :, None, :] ^ spans[None]
        for t, basis in enumerate(bases):
            e, _ = _decode_energy(mapping, basis, centers, edges, weights, conv, offsets)
            out[:, idx, t] = e.mean(axis=-1) if r else e
    return out


# -- lower bound ----------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBound:
    r0: float
    solved: bool
    best_state: np.ndarray
    best_objective: float
    best_vector: tuple


def _shared_structure(instances):
    first = instances[0]
    edges = [e.vertices for e in first.edges]
    for inst in instances[1:]:
        if inst.n != first.n or [e.vertices for e in inst.edges] != edges:
            raise ValueError("batched instances must share one edge set")
    weights = np.array([[e.weight for e in inst.edges] for inst in instances], dtype=np.int64)
    return edges, weights


def lower_bound_batch(instances, mapping: ParityMapping, bases: Sequence[ReadoutBasis], p: int,
                      kind: str = "best", extrema=None) -> list[LowerBound]:
    """Clifford lower bound for many instances on one edge set, sharing one tableau pass.

    Every classical state is decoded with every basis. ``best`` scores a state
    by its lowest basis energy, ``mean`` by the basis average; ``solved`` means
    the lowest score equals the ground-state energy.
    """
    from .parity_map import physical_fields
    from .problem import approximation_ratio, brute_force_extrema

    if kind not in ("best", "mean"):
        raise ValueError(f"unknown objective kind {kind!r}")
    instances = list(instances)
    if not instances:
        return []
    if not bases:
        raise ValueError("need at least one readout basis")
    edges, weights = _shared_structure(instances)
    conv = instances[0].convention
    fields = np.stack([physical_fields(inst, mapping) for inst in instances])
    offsets = np.array([inst.offset for inst in instances], dtype=np.int64)
    if extrema is None:
        extrema = [brute_force_extrema(inst) for inst in instances]
    magnitude, flips = _magnitude_and_flips(mapping, fields)
    vectors = classical_vectors_units(p)
    maps = outcome_maps(mapping, magnitude, vectors)
    span_size = max(1 << om.spread.shape[0] for om in maps)
    chunk = max(1, 4_000_000 // (len(vectors) * mapping.K * span_size))
    out = []
    for start in range(0, len(instances), chunk):
        sl = slice(start, start + chunk)
        en = expected_decoded_energies(mapping, bases, maps, flips[sl], edges, weights[sl], conv, offsets[sl])
        score = en.min(axis=2) if kind == "best" else en.mean(axis=2)
        for i in range(en.shape[0]):
            v = int(np.argmin(score[i]))
            t = int(np.argmin(en[i, v]))
            ext = extrema[start + i]
            best = float(score[i, v])
            # report the lowest-energy outcome of the winning state and basis
            om = maps[v]
            outcomes = om.centers(flips[start + i:start + i + 1])[0] ^ om.span()
            e, logical = _decode_energy(mapping, bases[t], outcomes[None], edges, weights[start + i:start + i + 1],
                                        conv, offsets[start + i:start + i + 1])
            out.append(LowerBound(
                r0=float(approximation_ratio(ext, best)),
                solved=bool(abs(best - ext.c_min) < 1e-9),
                best_state=logical[0, int(np.argmin(e[0]))].copy(),
                best_objective=best,
                best_vector=vectors[v],
            ))
    return out


def lower_bound(instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis], p: int,
                objective_kind: str = "best") -> tuple[float, bool, np.ndarray]:
    lb = lower_bound_batch([instance], mapping, bases, p, objective_kind)[0]
    return lb.r0, lb.solved, lb.best_state


# -- census -----------------------------------------------------------------------------

@dataclass(frozen=True)
class CensusRow:
    p: int
    total_classes: int
    non_trivial: int

    @property
    def percent(self) -> float:
        return round(100.0 * self.non_trivial / self.total_classes, 2)


def census_fields(mapping: ParityMapping, patterns: np.ndarray) -> np.ndarray:
    """Representative +-1 fields whose local-field ground state violates each pattern.

    The local-field ground state has bit 1 exactly where the field is +1, so
    the fields follow from one GF(2) solve per pattern. Ancillas keep field 0.
    """
    c = mapping.constraint_matrix()
    regular = [k for k in range(mapping.K) if not mapping.ancilla_flags[k]]
    x = gf2.solve(c[:, regular], np.atleast_2d(np.asarray(patterns, dtype=np.uint8)).T).T
    fields = np.zeros((x.shape[0], mapping.K), dtype=np.int64)
    fields[:, regular] = np.where(x == 1, 1, -1)
    return fields


def census(mapping: ParityMapping, bases: Sequence[ReadoutBasis], p_list: Iterable[int],
           patterns: np.ndarray | None = None) -> list[CensusRow]:
    """Non-trivial instance counts (best objective) over constraint-violation classes."""
    from .problem import all_assignments

    if patterns is None:
        patterns = all_assignments(mapping.L)
    fields = census_fields(mapping, patterns)
    regular = [k for k in range(mapping.K) if not mapping.ancilla_flags[k]]
    edges = [mapping.physical_qubits[k] for k in regular]
    if any(len(e) != 2 for e in edges):
        raise ValueError("census is defined for pairwise mappings")
    weights = fields[:, regular]
    e = np.asarray(edges)
    states = all_assignments(mapping.n_logical, fix_first=True).astype(np.int64)
    c_min = (-(weights @ (states[:, e[:, 0]] ^ states[:, e[:, 1]]).T)).min(axis=1)
    magnitude, flips = _magnitude_and_flips(mapping, fields)
    rows = []
    for p in p_list:
        maps = outcome_maps(mapping, magnitude, classical_vectors_units(p))
        span_size = max(1 << om.spread.shape[0] for om in maps)
        chunk = max(1, 4_000_000 // (len(maps) * mapping.K * span_size))
        best = np.empty(len(fields))
        for start in range(0, len(fields), chunk):
            sl = slice(start, start + chunk)
            en = expected_decoded_energies(mapping, bases, maps, flips[sl], edges, weights[sl], "cut")
            best[sl] = en.min(axis=(1, 2))
        rows.append(CensusRow(p, len(fields), int((best > c_min + 1e-9).sum())))
    return rows


def census_complete7(p_list: Iterable[int] = (3, 4, 5)) -> list[CensusRow]:
    from .parity_map import encode_complete
    mp = encode_complete(7)
    return census(mp, mp.readout_bases, p_list)
