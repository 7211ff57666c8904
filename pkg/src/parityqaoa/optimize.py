"""Metropolis parameter search and QAOA drivers for both architectures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng as rng_mod
from .circuit import (ParamVector, ResourceReport, analytic_resources, build_parity_circuit,
                      build_vanilla_circuit, cnot_metrics)
from .decode import DecodeError, LinearObjective, objective_expectation, objective_from_probabilities
from .dense_sim import (MAX_WIDTH, P1Evaluator, SimulationError, is_independent_support, parity_diagonals,
                        parity_state, sample, spin_diagonal, vanilla_state)
from .parity_map import ParityMapping, ReadoutBasis, is_complete, physical_fields
from .problem import Extrema, Instance, approximation_ratio, brute_force_extrema

EXACT_MAX_K = 22


@dataclass(frozen=True)
class OptimizerConfig:
    n_init: int = 10
    n_mc: int = 400
    temperature: float = 0.2
    step_halfwidth: float = 0.25
    shots: int | None = None  # None means exact expectations
    seed: int = 0

    def __post_init__(self):
        if self.n_init < 1 or self.n_mc < 1:
            raise ValueError("n_init and n_mc must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")

    @property
    def mode(self) -> str:
        return "exact" if self.shots is None else "shots"

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return OptimizerConfig(self.n_init, self.n_mc, self.temperature, self.step_halfwidth, self.shots, seed)


@dataclass
class OptimizeResult:
    params: np.ndarray
    value: float
    trace: list[float]
    evaluations: int


def metropolis_optimize(objective: Callable[[np.ndarray], float], n_params: int,
                        config: OptimizerConfig) -> OptimizeResult:
    """Minimize ``objective`` by restarted single-coordinate Metropolis moves.

    Each restart draws its start uniformly from [-pi/2, pi/2)^n_params and
    proposes ``n_mc`` moves ``theta_i += U(-h, h)``, accepting when
    ``u < exp((old - new) / T)``. Returns the lowest value ever evaluated.
    """
    best_x, best_v = None, math.inf
    trace = []
    evals = 0
    h, temp = config.step_halfwidth, config.temperature
    for restart in range(config.n_init):
        gen = rng_mod.generator(config.seed, rng_mod.STREAM_OPTIMIZER, restart)
        x = gen.uniform(-np.pi / 2, np.pi / 2, size=n_params)
        cur = float(objective(x))
        evals += 1
        run_best_x, run_best = x.copy(), cur
        for _ in range(config.n_mc):
            i = int(gen.integers(n_params))
            y = x.copy()
            y[i] += gen.uniform(-h, h)
            new = float(objective(y))
            evals += 1
            u = gen.uniform()
            if new <= cur or u < math.exp((cur - new) / temp):
                x, cur = y, new
            if new < run_best:
                run_best_x, run_best = y.copy(), new
        trace.append(run_best)
        if run_best < best_v:
            best_x, best_v = run_best_x, run_best
    return OptimizeResult(best_x, best_v, trace, evals)


@dataclass
class QaoaResult:
    best_params: ParamVector
    best_objective: float
    ratio: float
    resources: tuple[ResourceReport, ResourceReport | None]
    trace: list[float]
    metadata: dict = field(default_factory=dict)


def _check_p(p: int):
    if p < 1:
        raise ValueError("p must be >= 1")


# -- vanilla ------------------------------------------------------------------------------

def vanilla_objective(instance: Instance, config: OptimizerConfig, copies: int = 1):
    """Energy estimator over flat (gamma, beta) vectors (instance convention)."""
    if instance.n > MAX_WIDTH:
        raise SimulationError(f"n={instance.n} exceeds dense limit")
    spin = spin_diagonal(instance).astype(float)
    if instance.convention == "cut":
        diag = (spin - instance.weight_sum) / 2
    else:
        diag = spin + instance.offset
    counter = [0]

    def objective(theta):
        params = ParamVector.from_flat(theta, parity=False)
        probs = vanilla_state(instance, params).probabilities()
        if config.shots is None:
            return float(probs @ diag)
        counter[0] += 1
        estimates = []
        for c in range(copies):
            st = _Probs(instance.n, probs)
            seed = rng_mod.child_seed(config.seed, rng_mod.STREAM_SHOTS, counter[0], c)
            bits = sample(st, config.shots, seed)
            idx = bits.astype(np.int64) @ (1 << np.arange(instance.n))
            estimates.append(float(diag[idx].mean()))
        return min(estimates)

    return objective


class _Probs:
    """Minimal stand-in for a StateVector when only probabilities are known."""

    def __init__(self, width, probs):
        self.width = width
        self._p = probs

    def probabilities(self):
        return self._p


def copies_for(instance: Instance, mapping: ParityMapping | None = None) -> int:
    """ceil(K / N): repetitions granted to vanilla QAOA in shot mode."""
    K = mapping.K if mapping is not None else len(instance.edges)
    return max(1, math.ceil(K / instance.n))


def run_vanilla_qaoa(instance: Instance, p: int, config: OptimizerConfig, extrema: Extrema | None = None,
                     mapping: ParityMapping | None = None, analytic_kind: str | None = None) -> QaoaResult:
    _check_p(p)
    if not instance.pairwise:
        raise ValueError("vanilla QAOA driver handles pairwise instances")
    copies = copies_for(instance, mapping) if config.shots is not None else 1
    obj = vanilla_objective(instance, config, copies)
    res = metropolis_optimize(obj, 2 * p, config)
    params = ParamVector.from_flat(res.params, parity=False)
    ext = extrema or brute_force_extrema(instance)
    # report the exact expectation at the chosen parameters
    exact = vanilla_objective(instance, OptimizerConfig(seed=config.seed))(res.params)
    measured = cnot_metrics(build_vanilla_circuit(instance, params))
    if analytic_kind is None and len(instance.edges) == instance.n * (instance.n - 1) // 2:
        analytic = analytic_resources("vanilla_complete", p, instance.n)
    else:
        analytic = analytic_resources(analytic_kind, p) if analytic_kind else None
    return QaoaResult(params, exact, _clip(approximation_ratio(ext, exact)), (measured, analytic), res.trace,
                      {"mode": config.mode, "copies": copies, "evaluations": res.evaluations,
                       "optimized_estimate": res.value})


def _clip(r: float) -> float:
    # exact expectations sit inside [c_min, c_max]; guard float rounding only
    return float(min(1.0, max(0.0, r)))


# -- parity -------------------------------------------------------------------------------

class ParityObjective:
    """Decoded objective of the parity QAOA state over flat (gamma, omega, beta) vectors."""

    def __init__(self, instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis], p: int,
                 kind: str, config: OptimizerConfig):
        if kind not in ("mean", "best", "shot_min"):
            raise ValueError(f"unknown objective kind {kind!r}")
        self.instance, self.mapping, self.bases = instance, mapping, list(bases)
        self.p, self.kind, self.config = p, kind, config
        self.fields = physical_fields(instance, mapping, allow_missing=True)
        self.linear = None
        if kind != "shot_min":
            try:
                self.linear = LinearObjective(instance, mapping, self.bases)
            except DecodeError:
                self.linear = None
        self.closed_form = None
        if (p == 1 and config.shots is None and self.linear is not None
                and all(is_independent_support(mapping, s) for s in self.linear.strings if s)):
            self.closed_form = P1Evaluator(mapping, self.fields, self.linear.strings)
        self.diagonals = None
        self.signs = None
        if self.closed_form is None:
            if mapping.K > EXACT_MAX_K:
                raise SimulationError(f"K={mapping.K} needs the p=1 closed form; dense limit is {EXACT_MAX_K}")
            self.diagonals = parity_diagonals(mapping, self.fields)
            if self.linear is not None:
                idx = np.arange(1 << mapping.K, dtype=np.int64)
                bits = ((idx[:, None] >> np.arange(mapping.K)[None, :]) & 1).astype(np.int8)
                rows = []
                for s in self.linear.strings:
                    par = np.bitwise_xor.reduce(bits[:, s], axis=1) if s else np.zeros(idx.size, np.int8)
                    rows.append(1 - 2 * par)
                self.signs = np.array(rows, dtype=float)
        self.calls = 0

    def expectations(self, params: ParamVector) -> np.ndarray:
        if self.closed_form is not None:
            return self.closed_form(params.gammas[0], params.omegas[0], params.betas[0])
        probs = parity_state(self.mapping, self.fields, params, self.diagonals).probabilities()
        return self.signs @ probs

    def value(self, params: ParamVector) -> float:
        if self.config.shots is None:
            if self.linear is not None:
                return self.linear.objective(self.expectations(params), self.kind)
            probs = parity_state(self.mapping, self.fields, params, self.diagonals).probabilities()
            return objective_from_probabilities(self.instance, self.mapping, self.bases, probs, self.kind)
        self.calls += 1
        st = parity_state(self.mapping, self.fields, params, self.diagonals)
        seed = rng_mod.child_seed(self.config.seed, rng_mod.STREAM_SHOTS, self.calls)
        bits = sample(st, self.config.shots, seed)
        return objective_expectation(self.instance, self.mapping, self.bases, bits, None, self.kind)

    def basis_energies(self, params: ParamVector) -> np.ndarray | None:
        if self.linear is None:
            return None
        return self.linear.basis_energies(self.expectations(params))

    def __call__(self, theta) -> float:
        return self.value(ParamVector.from_flat(theta, parity=True))


def run_parity_qaoa(instance: Instance, mapping: ParityMapping, bases: Sequence[ReadoutBasis], p: int,
                    kind: str, config: OptimizerConfig, extrema: Extrema | None = None,
                    analytic_kind: str | None = None) -> QaoaResult:
    """Optimize 3p parity parameters from random starts (no Clifford seeding)."""
    _check_p(p)
    obj = ParityObjective(instance, mapping, bases, p, kind, config)
    res = metropolis_optimize(obj, 3 * p, config)
    params = ParamVector.from_flat(res.params, parity=True)
    ext = extrema or brute_force_extrema(instance)
    exact_obj = obj if config.shots is None else ParityObjective(instance, mapping, bases, p, kind,
                                                                 OptimizerConfig(seed=config.seed))
    value = exact_obj.value(params)
    energies = exact_obj.basis_energies(params)
    measured = cnot_metrics(build_parity_circuit(mapping, obj.fields, params))
    if analytic_kind is None and is_complete(mapping):
        analytic = analytic_resources("parity_complete", p, mapping.n_logical)
    else:
        analytic = analytic_resources(analytic_kind, p) if analytic_kind else None
    meta = {"mode": config.mode, "copies": 1, "evaluations": res.evaluations, "optimized_estimate": res.value,
            "evaluator": "closed_form_p1" if obj.closed_form is not None else "dense"}
    if energies is not None:
        meta["best_basis_ratio"] = _clip(approximation_ratio(ext, float(energies.min())))
    return QaoaResult(params, value, _clip(approximation_ratio(ext, value)), (measured, analytic), res.trace, meta)
