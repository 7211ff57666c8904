"""Recursive QAOA: correlation rounding, variable elimination and reconstruction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import rng as rng_mod
from .circuit import ParamVector
from .dense_sim import MAX_WIDTH, SimulationError, vanilla_state, zstring_expectations
from .optimize import OptimizerConfig, ParityObjective, metropolis_optimize, vanilla_objective
from .parity_map import ParityMapping, ReadoutBasis, encode_complete, logical_lines
from .problem import Instance, approximation_ratio, brute_force_extrema, energy, make_instance


class RqaoaError(ValueError):
    pass


@dataclass(frozen=True)
class FixingRule:
    """``z[eliminated] = sign * z[anchor]``, in the vertex labels of the step's instance."""
    eliminated: int
    anchor: int
    sign: int
    # reduced index -> index in the instance before this step
    index_map: tuple[int, ...] = ()

    def __post_init__(self):
        if self.eliminated == self.anchor:
            raise RqaoaError("eliminated vertex equals anchor")
        if self.sign not in (1, -1):
            raise RqaoaError("sign must be +1 or -1")


@dataclass
class RqaoaTrace:
    rules: list[FixingRule] = field(default_factory=list)
    correlations: list[float] = field(default_factory=list)
    zero_sign_steps: list[int] = field(default_factory=list)
    residual: Instance | None = None
    residual_solution: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "rules": [{"eliminated": r.eliminated, "anchor": r.anchor, "sign": r.sign,
                       "index_map": list(r.index_map)} for r in self.rules],
            "abs_correlations": self.correlations,
            "zero_sign_steps": self.zero_sign_steps,
            "residual": self.residual.to_dict() if self.residual else None,
            "residual_solution": list(self.residual_solution),
        }

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))


# -- correlations ------------------------------------------------------------------------

def _pairs(instance: Instance) -> list[tuple[int, int]]:
    if not instance.pairwise:
        raise RqaoaError("RQAOA handles pairwise instances")
    return [e.vertices for e in instance.edges]


def _as_matrix(n: int, pairs, values) -> np.ndarray:
    w = np.full((n, n), np.nan)
    for (j, k), v in zip(pairs, values):
        w[j, k] = w[k, j] = v
    return w


def correlation_matrix_vanilla(instance: Instance, params: ParamVector) -> np.ndarray:
    """<z_j z_k> on the vanilla QAOA state for every edge; NaN off the edge set."""
    if instance.n > MAX_WIDTH:
        raise SimulationError("instance too large for dense simulation")
    pairs = _pairs(instance)
    probs = vanilla_state(instance, params).probabilities()
    return _as_matrix(instance.n, pairs, zstring_expectations(probs, instance.n, pairs))


def correlation_matrix_parity(instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis],
                              params: ParamVector, objective: ParityObjective | None = None) -> np.ndarray:
    """Decoded edge correlators averaged over the readout bases.

    Each decoded product is a Z string on the physical qubits, evaluated in
    closed form for p = 1 and by dense simulation otherwise.
    """
    pairs = _pairs(instance)
    obj = objective or ParityObjective(instance, mapping, bases, params.p, "mean", OptimizerConfig())
    if obj.linear is None:
        raise RqaoaError("decoded correlators need readout bases orthogonal to the edge products")
    values = obj.expectations(params)
    per_edge = values[obj.linear.index].mean(axis=0)
    return _as_matrix(instance.n, pairs, per_edge)


# -- elimination --------------------------------------------------------------------------

def select_edge(W: np.ndarray) -> tuple[int, int, float]:
    """Upper-triangle argmax of |W| over finite entries; first in row-major order on ties."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    best, pick = -1.0, None
    for j in range(n):
        for k in range(j + 1, n):
            v = W[j, k]
            if np.isfinite(v) and abs(v) > best:
                best, pick = abs(v), (j, k, float(v))
    if pick is None:
        raise RqaoaError("correlation matrix has no finite entry")
    return pick


def eliminate(instance: Instance, W: np.ndarray) -> tuple[Instance, FixingRule, float]:
    """Fix the larger vertex of the most correlated edge to the smaller one.

    Returns (reduced instance, rule, chosen correlation). Spin energy is
    preserved: the removed vertex's couplings move to the anchor, a coupling
    to the anchor itself becomes a constant.
    """
    j, k, w = select_edge(W)
    sign = 1 if w >= 0 else -1
    elim, anchor = k, j
    merged: dict[tuple[int, int], int] = {}
    offset = instance.offset
    for e in instance.edges:
        a, b = e.vertices
        if elim in (a, b):
            other = b if a == elim else a
            if other == anchor:
                offset += sign * e.weight
                continue
            a, b, wt = min(other, anchor), max(other, anchor), sign * e.weight
        else:
            wt = e.weight
        merged[(a, b)] = merged.get((a, b), 0) + wt
    keep = [v for v in range(instance.n) if v != elim]
    new_index = {old: i for i, old in enumerate(keep)}
    edges = [((new_index[a], new_index[b]), wt) for (a, b), wt in merged.items() if wt != 0]
    reduced = make_instance(instance.n - 1, edges, instance.label, instance.seed, offset)
    return reduced, FixingRule(elim, anchor, sign, tuple(keep)), w


def lift(assignment: Sequence[int], rule: FixingRule) -> np.ndarray:
    """Undo one elimination: bits of the reduced instance to bits of the one before."""
    small = np.asarray(assignment, dtype=np.uint8)
    full = np.zeros(len(rule.index_map) + 1, dtype=np.uint8)
    full[list(rule.index_map)] = small
    bit = full[rule.anchor]
    full[rule.eliminated] = bit if rule.sign == 1 else bit ^ 1
    return full


def reconstruct(residual_solution: Sequence[int], rules: Sequence[FixingRule]) -> np.ndarray:
    bits = np.asarray(residual_solution, dtype=np.uint8)
    for rule in reversed(rules):
        bits = lift(bits, rule)
    return bits


def solve_residual(instance: Instance) -> np.ndarray:
    return np.asarray(brute_force_extrema(instance, "spin").ground_states[0], dtype=np.uint8)


# -- driver -------------------------------------------------------------------------------

@dataclass
class RqaoaResult:
    assignment: np.ndarray
    ratio: float
    trace: RqaoaTrace
    energy: float


def step_correlations(instance: Instance, variant: str, p: int, config: OptimizerConfig,
                      kind: str = "mean") -> np.ndarray:
    """Optimize the step's QAOA from scratch and return its correlation matrix."""
    if variant == "vanilla":
        obj = vanilla_objective(instance, config)
        res = metropolis_optimize(obj, 2 * p, config)
        return correlation_matrix_vanilla(instance, ParamVector.from_flat(res.params, parity=False))
    if variant == "parity":
        mapping = encode_complete(instance.n)
        bases = logical_lines(mapping)
        obj = ParityObjective(instance, mapping, bases, p, kind, config)
        res = metropolis_optimize(obj, 3 * p, config)
        params = ParamVector.from_flat(res.params, parity=True)
        exact = obj if config.shots is None else None
        return correlation_matrix_parity(instance, mapping, bases, params, exact)
    raise RqaoaError(f"unknown variant {variant!r}")


def run_rqaoa(instance: Instance, variant: str, p: int = 1, stop_size: int = 8,
              config: OptimizerConfig | None = None, kind: str = "mean") -> RqaoaResult:
    if stop_size < 2:
        raise RqaoaError("stop_size must be >= 2")
    if p < 1:
        raise RqaoaError("p must be >= 1")
    config = config or OptimizerConfig()
    trace = RqaoaTrace()
    current = instance
    step = 0
    while current.n > stop_size and current.edges:
        step_cfg = config.with_seed(rng_mod.child_seed(config.seed, rng_mod.STREAM_RQAOA, step))
        W = step_correlations(current, variant, p, step_cfg, kind)
        current, rule, w = eliminate(current, W)
        if w == 0:
            trace.zero_sign_steps.append(step)
        trace.rules.append(rule)
        trace.correlations.append(abs(w))
        step += 1
    trace.residual = current
    trace.residual_solution = tuple(int(b) for b in solve_residual(current))
    bits = reconstruct(trace.residual_solution, trace.rules)
    conv = instance.convention
    value = float(energy(instance, bits, conv))
    ratio = approximation_ratio(brute_force_extrema(instance), value)
    return RqaoaResult(bits, ratio, trace, value)
