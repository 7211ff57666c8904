"""Readout-basis decoding and objectives over decoded ensembles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import gf2
from .parity_map import ParityMapping, ReadoutBasis
from .problem import Instance, all_assignments, energy

EXACT_MAX_K = 22


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Decoder:
    """Linear decoder for one readout basis: ``s = matrix @ q[members]`` plus a completion."""
    members: tuple[int, ...]
    matrix: np.ndarray  # (n, |members|)
    kernel: np.ndarray  # (D, n) symmetry directions of this basis


def _key(mapping: ParityMapping, basis: ReadoutBasis):
    return (mapping.n_logical, mapping.physical_qubits, tuple(basis.members))


@lru_cache(maxsize=4096)
def _decoder_cached(n: int, physical: tuple, members: tuple) -> Decoder:
    sub = np.zeros((len(members), n), dtype=np.uint8)
    for r, m in enumerate(members):
        sub[r, list(physical[m])] = 1
    if gf2.rank(sub) != len(members):
        raise DecodeError("readout basis rows are dependent")
    matrix = gf2.solve(sub, np.eye(len(members), dtype=np.uint8))
    return Decoder(members, matrix, gf2.nullspace(sub))


def decoder(mapping: ParityMapping, basis: ReadoutBasis) -> Decoder:
    return _decoder_cached(*_key(mapping, basis))


def _completions(kernel: np.ndarray) -> np.ndarray:
    """All 2^D elements of the kernel span, shape (2^D, n)."""
    d = kernel.shape[0]
    coeffs = all_assignments(d) if d else np.zeros((1, 0), dtype=np.uint8)
    return (coeffs.astype(np.int64) @ kernel.astype(np.int64) % 2).astype(np.uint8)


def _rank_key(bits: np.ndarray) -> np.ndarray:
    """Integer with logical bit 0 most significant, so smaller keys put zeros first."""
    n = bits.shape[-1]
    weights = (1 << np.arange(n - 1, -1, -1, dtype=np.int64))
    return bits.astype(np.int64) @ weights


def decode_many(mapping: ParityMapping, basis: ReadoutBasis, physical,
                instance: Instance | None = None) -> np.ndarray:
    """Decode stacked physical states (..., K) to logical states (..., n).

    Among the equivalent completions the lowest-index logical bit is held at 0;
    when ``instance`` has 3-body terms the completion of lowest energy wins
    instead (ties keep the bit-0 rule).
    """
    q = np.asarray(physical, dtype=np.uint8)
    if q.shape[-1] != mapping.K:
        raise DecodeError("physical state length mismatch")
    dec = decoder(mapping, basis)
    sub = q[..., list(dec.members)].astype(np.int64)
    s = (sub @ dec.matrix.T.astype(np.int64) % 2).astype(np.uint8)
    if dec.kernel.shape[0] == 0:
        return s
    comps = _completions(dec.kernel)
    cand = s[..., None, :] ^ comps  # (..., C, n)
    key = _rank_key(cand)
    if instance is not None and not instance.pairwise:
        e = np.asarray(energy(instance, cand, "spin"), dtype=np.int64)
        key = e * (1 << mapping.n_logical) + key
    pick = np.argmin(key, axis=-1)
    return np.take_along_axis(cand, pick[..., None, None], axis=-2)[..., 0, :]


def decode_basis(mapping: ParityMapping, basis: ReadoutBasis, physical, instance: Instance | None = None) -> np.ndarray:
    q = np.asarray(physical, dtype=np.uint8)
    if q.ndim != 1:
        raise DecodeError("decode_basis takes a single state; use decode_many for batches")
    return decode_many(mapping, basis, q, instance)


def decode_all(mapping: ParityMapping, bases: Sequence[ReadoutBasis], physical,
               instance: Instance | None = None) -> np.ndarray:
    """Logical states for every basis: shape (..., M, n)."""
    return np.stack([decode_many(mapping, b, physical, instance) for b in bases], axis=-2)


def decoded_energies(instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis], physical) -> np.ndarray:
    """Energies (instance convention) of every basis readout: shape (..., M)."""
    logical = decode_all(mapping, bases, physical, instance)
    return np.asarray(energy(instance, logical, instance.convention), dtype=np.int64)


# -- objectives ----------------------------------------------------------------------

def outcome_distribution(probabilities, tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """(bitstrings (R, K), probabilities (R,)) of the nonzero outcomes of a 2^K vector."""
    p = np.asarray(probabilities, dtype=float)
    K = int(np.log2(p.size))
    if 1 << K != p.size:
        raise DecodeError("probability vector length is not a power of two")
    if K > EXACT_MAX_K:
        raise DecodeError(f"exact enumeration limited to K <= {EXACT_MAX_K}")
    idx = np.nonzero(p > tol)[0]
    bits = ((idx[:, None] >> np.arange(K)[None, :]) & 1).astype(np.uint8)
    w = p[idx]
    return bits, w / w.sum()


def objective_expectation(instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis],
                          outcomes, weights=None, kind: str = "best") -> float:
    """Mean, best, or per-shot-minimum objective.

    ``outcomes`` is a (R, K) array of physical bitstrings (or a single state);
    ``weights`` their probabilities or counts (uniform when omitted).

    * ``mean``: average over bases and outcomes.
    * ``best``: minimum over bases of the outcome-averaged energy.
    * ``shot_min``: outcome average of the best basis per outcome (optional
      post-selection variant).
    """
    q = np.atleast_2d(np.asarray(outcomes, dtype=np.uint8))
    if q.shape[0] == 0:
        raise DecodeError("empty sample set")
    if weights is None:
        w = np.full(q.shape[0], 1.0 / q.shape[0])
    else:
        w = np.asarray(weights, dtype=float)
        if w.sum() <= 0:
            raise DecodeError("weights must have positive total")
        w = w / w.sum()
    e = decoded_energies(instance, mapping, bases, q).astype(float)  # (R, M)
    if kind == "mean":
        return float(w @ e.mean(axis=1))
    if kind == "best":
        return float((w @ e).min())
    if kind == "shot_min":
        return float(w @ e.min(axis=1))
    raise DecodeError(f"unknown objective kind {kind!r}")


@dataclass(frozen=True)
class DecodedEnsemble:
    """Outcomes with their weights and every basis' logical readout and energy."""
    physical: np.ndarray  # (R, K)
    probabilities: np.ndarray  # (R,)
    logical: np.ndarray  # (R, M, n)
    energies: np.ndarray  # (R, M)

    def __post_init__(self):
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-9:
            raise DecodeError("ensemble probabilities must sum to 1")

    def objective(self, kind: str = "best") -> float:
        e = self.energies.astype(float)
        if kind == "mean":
            return float(self.probabilities @ e.mean(axis=1))
        if kind == "best":
            return float((self.probabilities @ e).min())
        if kind == "shot_min":
            return float(self.probabilities @ e.min(axis=1))
        raise DecodeError(f"unknown objective kind {kind!r}")


def decoded_ensemble(instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis],
                     probabilities=None, samples=None) -> DecodedEnsemble:
    """Build the ensemble from a 2^K probability vector or from (R, K) samples."""
    if (probabilities is None) == (samples is None):
        raise DecodeError("pass exactly one of probabilities or samples")
    if probabilities is not None:
        q, w = outcome_distribution(probabilities)
    else:
        q, counts = np.unique(np.atleast_2d(np.asarray(samples, dtype=np.uint8)), axis=0, return_counts=True)
        if q.shape[0] == 0:
            raise DecodeError("empty sample set")
        w = counts / counts.sum()
    logical = decode_all(mapping, bases, q, instance)
    e = np.asarray(energy(instance, logical, instance.convention), dtype=np.int64)
    return DecodedEnsemble(q, w, logical, e)


def objective_from_probabilities(instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis],
                                 probabilities, kind: str = "best") -> float:
    bits, w = outcome_distribution(probabilities)
    return objective_expectation(instance, mapping, bases, bits, w, kind)


# -- objectives linear in Z-string expectations ------------------------------------------

def decoded_supports(instance: Instance, mapping: ParityMapping, basis: ReadoutBasis) -> list[list[int]] | None:
    """Physical support whose Z-string equals each edge's decoded spin product.

    The decoded product over an edge is a parity of basis bits whenever it is
    unchanged by the basis' completion freedom; otherwise returns None.
    """
    dec = decoder(mapping, basis)
    out = []
    for e in instance.edges:
        ind = np.zeros(mapping.n_logical, dtype=np.int64)
        ind[list(e.vertices)] = 1
        if dec.kernel.shape[0] and np.any((dec.kernel.astype(np.int64) @ ind) % 2):
            return None
        row = (ind @ dec.matrix.astype(np.int64)) % 2
        out.append([dec.members[i] for i in np.nonzero(row)[0]])
    return out


class LinearObjective:
    """Per-basis decoded energies as a linear map of Z-string expectations."""

    def __init__(self, instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis]):
        self.instance = instance
        self.weights = np.array([e.weight for e in instance.edges], dtype=float)
        supports = []
        for b in bases:
            s = decoded_supports(instance, mapping, b)
            if s is None:
                raise DecodeError("decoded energy is not linear in Z strings for this basis")
            supports.append(s)
        self.n_bases = len(bases)
        self.n_edges = len(instance.edges)
        # dedupe strings so each expectation is computed once
        keyed: dict[tuple, int] = {}
        self.index = np.empty((self.n_bases, self.n_edges), dtype=np.int64)
        for t, sup in enumerate(supports):
            for k, s in enumerate(sup):
                key = tuple(sorted(s))
                self.index[t, k] = keyed.setdefault(key, len(keyed))
        self.strings = [list(k) for k in keyed]

    def basis_energies(self, values: np.ndarray) -> np.ndarray:
        """Energies per basis (instance convention) from expectations of ``self.strings``."""
        terms = self.weights @ values[self.index].T  # (M,)
        if self.instance.convention == "cut":
            return (terms - self.weights.sum()) / 2
        return terms + self.instance.offset

    def objective(self, values: np.ndarray, kind: str) -> float:
        e = self.basis_energies(values)
        if kind == "mean":
            return float(e.mean())
        if kind == "best":
            return float(e.min())
        raise DecodeError(f"objective kind {kind!r} is not linear")


def is_trivial(instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis], p: int) -> bool:
    """True when decoding the classical states alone finds the ground state."""
    from .clifford_sim import lower_bound
    return lower_bound(instance, mapping, bases, p, "best")[1]
