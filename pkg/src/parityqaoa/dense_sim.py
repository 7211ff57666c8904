"""Exact statevector simulation.

Amplitude index bit ``a`` is qubit ``a`` (qubit 0 least significant), the same
order used for bitstrings everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import rng as rng_mod
from .circuit import Circuit, Gate, ParamVector, build_parity_circuit
from .parity_map import ParityMapping
from .problem import Instance, all_assignments

MAX_WIDTH = 26


class SimulationError(ValueError):
    pass


@dataclass
class StateVector:
    width: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _guard(width: int):
    if width > MAX_WIDTH:
        raise SimulationError(f"width {width} exceeds dense limit {MAX_WIDTH}")


def plus_state(width: int) -> np.ndarray:
    _guard(width)
    return np.full(1 << width, 2 ** (-width / 2), dtype=complex)


def _apply_1q(psi: np.ndarray, width: int, q: int, m: np.ndarray) -> np.ndarray:
    v = psi.reshape(1 << (width - 1 - q), 2, 1 << q)
    out = np.empty_like(v)
    out[:, 0, :] = m[0, 0] * v[:, 0, :] + m[0, 1] * v[:, 1, :]
    out[:, 1, :] = m[1, 0] * v[:, 0, :] + m[1, 1] * v[:, 1, :]
    return out.reshape(-1)


def _z_signs(width: int, qubits: Iterable[int]) -> np.ndarray:
    """(-1)^(parity of the given qubits) for every basis index."""
    idx = np.arange(1 << width, dtype=np.int64)
    mask = 0
    for q in qubits:
        mask ^= 1 << q
    par = np.zeros(idx.shape, dtype=np.int64)
    m = idx & mask
    while np.any(m):
        par ^= m & 1
        m >>= 1
    return 1 - 2 * par


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_PAULIS = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
}


def apply_gate(psi: np.ndarray, width: int, gate: Gate) -> np.ndarray:
    k, q = gate.kind, gate.qubits
    if k == "h":
        return _apply_1q(psi, width, q[0], _H)
    if k in _PAULIS:
        return _apply_1q(psi, width, q[0], _PAULIS[k])
    if k == "rx":
        c, s = np.cos(gate.angle / 2), np.sin(gate.angle / 2)
        return _apply_1q(psi, width, q[0], np.array([[c, -1j * s], [-1j * s, c]]))
    if k in ("rz", "plaquette_rz"):
        ph = np.exp(-0.5j * gate.angle)
        return _apply_1q(psi, width, q[0], np.diag([ph, np.conj(ph)]))
    if k == "cnot":
        idx = np.arange(1 << width, dtype=np.int64)
        src = np.where((idx >> q[0]) & 1, idx ^ (1 << q[1]), idx)
        return psi[src]
    if k == "zz":
        signs = _z_signs(width, q)
        return psi * np.exp(-0.5j * gate.angle * signs)
    raise SimulationError(f"unsupported gate {k}")


def simulate(circuit: Circuit) -> StateVector:
    """Apply the circuit to |0...0>."""
    _guard(circuit.width)
    psi = np.zeros(1 << circuit.width, dtype=complex)
    psi[0] = 1.0
    for g in circuit.gates:
        psi = apply_gate(psi, circuit.width, g)
    return StateVector(circuit.width, psi)


def permute_qubits(psi: np.ndarray, width: int, order: Sequence[int]) -> np.ndarray:
    """Relabel qubits: the qubit at position ``a`` becomes qubit ``order[a]``."""
    t = psi.reshape([2] * width)
    # tensor axis k holds qubit width-1-k
    src_axis = [0] * width
    for a, j in enumerate(order):
        src_axis[width - 1 - j] = width - 1 - a
    return np.transpose(t, src_axis).reshape(-1)


def logical_state(circuit: Circuit, state: StateVector) -> StateVector:
    """Undo a SWAP network's final permutation."""
    return StateVector(state.width, permute_qubits(state.amplitudes, state.width, circuit.final_permutation))


def sample(state: StateVector, shots: int, seed: int) -> np.ndarray:
    """i.i.d. computational-basis samples, shape (shots, width)."""
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    p = state.probabilities()
    p = p / p.sum()
    gen = rng_mod.generator(seed, rng_mod.STREAM_SHOTS)
    idx = gen.choice(p.size, size=shots, p=p)
    return ((idx[:, None] >> np.arange(state.width)[None, :]) & 1).astype(np.uint8)


def expectation_zstring(state: StateVector, support: Iterable[int]) -> float:
    support = list(support)
    if any(q < 0 or q >= state.width for q in support):
        raise SimulationError("support out of range")
    return float(state.probabilities() @ _z_signs(state.width, support))


def zstring_expectations(probabilities: np.ndarray, width: int, supports: Sequence[Sequence[int]]) -> np.ndarray:
    """Z-string expectations for many supports from one probability vector."""
    idx = np.arange(1 << width, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(width)[None, :]) & 1).astype(np.int8)
    out = np.empty(len(supports))
    for i, sup in enumerate(supports):
        par = np.bitwise_xor.reduce(bits[:, list(sup)], axis=1) if len(sup) else np.zeros(idx.size, np.int8)
        out[i] = probabilities @ (1 - 2 * par.astype(np.int64))
    return out


# -- fast QAOA states -----------------------------------------------------------------

def _mixer_all(psi: np.ndarray, width: int, beta: float) -> np.ndarray:
    c, s = np.cos(beta), -1j * np.sin(beta)
    m = np.array([[c, s], [s, c]])
    for q in range(width):
        psi = _apply_1q(psi, width, q, m)
    return psi


def spin_diagonal(instance: Instance) -> np.ndarray:
    """Spin energy sum_e J_e prod z over all 2^n basis states (no offset)."""
    _guard(instance.n)
    bits = all_assignments(instance.n)
    z = 1 - 2 * bits.astype(np.int64)
    diag = np.zeros(bits.shape[0], dtype=np.int64)
    for e in instance.edges:
        diag += e.weight * np.prod(z[:, list(e.vertices)], axis=1)
    return diag


def vanilla_state(instance: Instance, params: ParamVector) -> StateVector:
    """QAOA state prod_l exp(-i beta X) exp(-i gamma H_P) |+>, in logical qubit order."""
    n = instance.n
    diag = spin_diagonal(instance).astype(float)
    psi = plus_state(n)
    for gamma, beta in zip(params.gammas, params.betas):
        psi = psi * np.exp(-1j * gamma * diag)
        psi = _mixer_all(psi, n, beta)
    return StateVector(n, psi)


def parity_diagonals(mapping: ParityMapping, fields) -> tuple[np.ndarray, np.ndarray]:
    """(sum_v J_v z_v, sum_l sign_l prod z) over all 2^K basis states."""
    K = mapping.K
    _guard(K)
    idx = np.arange(1 << K, dtype=np.int64)
    z = 1 - 2 * ((idx[:, None] >> np.arange(K)[None, :]) & 1).astype(np.int8)
    hz = z.astype(np.int64) @ np.asarray(fields, dtype=np.int64)
    hp = np.zeros(idx.size, dtype=np.int64)
    for c in mapping.constraints:
        hp += c.sign * np.prod(z[:, list(c.members)], axis=1, dtype=np.int64)
    return hz, hp


def parity_state(mapping: ParityMapping, fields, params: ParamVector, diagonals=None) -> StateVector:
    """Parity QAOA state without gate decomposition (field and plaquette terms commute)."""
    if params.omegas is None:
        raise SimulationError("parity state needs omega parameters")
    K = mapping.K
    hz, hp = diagonals if diagonals is not None else parity_diagonals(mapping, fields)
    psi = plus_state(K)
    for gamma, omega, beta in zip(params.gammas, params.omegas, params.betas):
        psi = psi * np.exp(-1j * (gamma * hz + omega * hp))
        psi = _mixer_all(psi, K, beta)
    return StateVector(K, psi)


# -- p = 1 expectations -------------------------------------------------------------------

def lightcone(mapping: ParityMapping, support: Iterable[int]) -> tuple[list[int], list[int]]:
    """(cone qubits, constraints touching the support) for a single layer."""
    support = set(support)
    touching = [l for l, c in enumerate(mapping.constraints) if support.intersection(c.members)]
    cone = set(support)
    for l in touching:
        cone.update(mapping.constraints[l].members)
    return sorted(cone), touching


def lightcone_zstring_expectation(mapping: ParityMapping, fields, params: ParamVector, support) -> float:
    """Exact single-layer Z-string expectation simulated on the causal cone only."""
    if params.p != 1 or params.omegas is None:
        raise SimulationError("light-cone evaluation needs a single parity layer")
    support = sorted(set(support))
    if not support:
        return 1.0
    cone, touching = lightcone(mapping, support)
    if len(cone) > MAX_WIDTH:
        raise SimulationError(f"light cone of {len(cone)} qubits exceeds {MAX_WIDTH}")
    local = {q: i for i, q in enumerate(cone)}
    w = len(cone)
    gamma, omega, beta = params.gammas[0], params.omegas[0], params.betas[0]
    fields = np.asarray(fields)
    idx = np.arange(1 << w, dtype=np.int64)
    z = 1 - 2 * ((idx[:, None] >> np.arange(w)[None, :]) & 1).astype(np.int64)
    phase = gamma * (z @ fields[cone].astype(float))
    for l in touching:
        c = mapping.constraints[l]
        phase = phase + omega * c.sign * np.prod(z[:, [local[m] for m in c.members]], axis=1)
    psi = plus_state(w) * np.exp(-1j * phase)
    psi = _mixer_all(psi, w, beta)
    signs = np.prod(z[:, [local[q] for q in support]], axis=1)
    return float(np.abs(psi) ** 2 @ signs)


def is_independent_support(mapping: ParityMapping, support: Sequence[int]) -> bool:
    """True when no nonempty subset of the support multiplies to a constraint product."""
    from . import gf2
    rows = mapping.logical_matrix()[list(support)]
    return gf2.rank(rows) == len(support)


def p1_zstring_expectation(mapping: ParityMapping, fields, gamma: float, omega: float, beta: float,
                           support: Sequence[int]) -> float:
    """Closed-form single-layer value for supports with independent logical sets.

    Such a string gets contributions only from flipping every support qubit,
    so the value factorizes:
    sin(2 beta)^|S| * prod_S sin(2 gamma J) * prod over constraints with odd
    overlap of cos(2 Omega sign). Other supports fall back to the cone simulator.
    """
    support = list(support)
    if not support:
        return 1.0
    if not is_independent_support(mapping, support):
        params = ParamVector((gamma,), (beta,), (omega,))
        return lightcone_zstring_expectation(mapping, fields, params, support)
    fields = np.asarray(fields, dtype=float)
    val = np.sin(2 * beta) ** len(support) * np.prod(np.sin(2 * gamma * fields[support]))
    sup = set(support)
    for c in mapping.constraints:
        if len(sup.intersection(c.members)) % 2:
            val *= np.cos(2 * omega * c.sign)
    return float(val)


class P1Evaluator:
    """Vectorized closed-form p = 1 expectations for a fixed list of independent supports."""

    def __init__(self, mapping: ParityMapping, fields, supports: Sequence[Sequence[int]]):
        self.supports = [list(s) for s in supports]
        for s in self.supports:
            if s and not is_independent_support(mapping, s):
                raise SimulationError(f"support {s} is not independent; use the light-cone path")
        K = mapping.K
        self.fields = np.asarray(fields, dtype=float)
        self.mask = np.zeros((len(self.supports), K))
        for i, s in enumerate(self.supports):
            self.mask[i, s] = 1.0
        self.sizes = self.mask.sum(axis=1)
        # constraints with odd overlap; cos is even so their signs drop out
        self.odd = np.array([sum(len(set(s).intersection(c.members)) % 2 for c in mapping.constraints)
                             for s in self.supports], dtype=float)

    def __call__(self, gamma: float, omega: float, beta: float) -> np.ndarray:
        s = np.sin(2 * gamma * self.fields)
        prod = np.prod(np.where(self.mask > 0, s[None, :], 1.0), axis=1)
        return np.sin(2 * beta) ** self.sizes * prod * np.cos(2 * omega) ** self.odd


def parity_circuit_state(mapping: ParityMapping, fields, params: ParamVector) -> StateVector:
    """Gate-level reference for :func:`parity_state`."""
    return simulate(build_parity_circuit(mapping, fields, params))
