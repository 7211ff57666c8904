import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parityqaoa.circuit import ParamVector
from parityqaoa.clifford_sim import lower_bound_batch
from parityqaoa.optimize import (OptimizerConfig, ParityObjective, copies_for, metropolis_optimize, run_parity_qaoa,
                                 run_vanilla_qaoa, vanilla_objective)
from parityqaoa.parity_map import encode_complete, logical_lines, physical_fields
from parityqaoa.problem import brute_force_extrema, random_instance
import oracles


def test_config_validation():
    for bad in (dict(n_init=0), dict(n_mc=0), dict(temperature=0), dict(shots=0)):
        with pytest.raises(ValueError):
            OptimizerConfig(**bad)
    assert OptimizerConfig().mode == "exact"
    assert OptimizerConfig(shots=100).mode == "shots"
    assert OptimizerConfig(seed=1).with_seed(5).seed == 5


def test_convex_objective():
    res = metropolis_optimize(lambda x: (x[0] - 0.3) ** 2, 1, OptimizerConfig(n_init=5, n_mc=500))
    assert res.value < 1e-2
    assert res.evaluations == 5 * 501


def test_same_seed_same_trace():
    f = lambda x: float(np.sin(3 * x[0]) * np.cos(x[1]))
    a = metropolis_optimize(f, 2, OptimizerConfig(n_init=3, n_mc=50, seed=11))
    b = metropolis_optimize(f, 2, OptimizerConfig(n_init=3, n_mc=50, seed=11))
    c = metropolis_optimize(f, 2, OptimizerConfig(n_init=3, n_mc=50, seed=12))
    assert a.trace == b.trace and np.array_equal(a.params, b.params)
    assert a.trace != c.trace


def test_returns_lowest_value_evaluated():
    seen = []

    def f(x):
        v = float(np.sum(np.cos(5 * x)))
        seen.append(v)
        return v
    res = metropolis_optimize(f, 3, OptimizerConfig(n_init=4, n_mc=60, seed=2))
    assert res.value == min(seen)
    assert res.value == min(res.trace)
    assert f(res.params) == res.value


def test_improving_moves_always_accepted():
    # at vanishing temperature only improvements are taken, so each proposal
    # lies within one step of the lowest point seen so far
    path = []

    def f(x):
        path.append(float(x[0]))
        return float(x[0])
    metropolis_optimize(f, 1, OptimizerConfig(n_init=1, n_mc=200, temperature=1e-9, seed=3))
    current = path[0]
    for y in path[1:]:
        assert abs(y - current) <= 0.25
        current = min(current, y)
    assert current < path[0] - 1.0


def test_starts_inside_box():
    starts = []
    for seed in range(30):
        metropolis_optimize(lambda x: starts.append(x.copy()) or 0.0, 4, OptimizerConfig(n_init=1, n_mc=1, seed=seed))
    s = np.array(starts[::2])
    assert s.min() >= -np.pi / 2 and s.max() < np.pi / 2


def test_p_zero_rejected():
    inst = random_instance("complete", 0, n=4)
    mp = encode_complete(4)
    with pytest.raises(ValueError):
        run_vanilla_qaoa(inst, 0, OptimizerConfig(n_init=1, n_mc=1))
    with pytest.raises(ValueError):
        run_parity_qaoa(inst, mp, logical_lines(mp), 0, "best", OptimizerConfig(n_init=1, n_mc=1))


@pytest.mark.parametrize("seed", range(5))
def test_uniform_superposition_energy(seed):
    inst = random_instance("complete", seed, n=5)
    assert vanilla_objective(inst, OptimizerConfig())(np.zeros(2)) == pytest.approx(-inst.weight_sum / 2)


def test_vanilla_objective_matches_oracle():
    inst = random_instance("complete", 8, n=4)
    edges = [(e.vertices, e.weight) for e in inst.edges]
    theta = np.array([0.3, -0.7, 0.2, 0.5])
    psi = oracles.vanilla_state(4, edges, theta[0::2], theta[1::2])
    probs = np.abs(psi) ** 2
    expect = sum(probs[i] * oracles.cut_energy(4, edges, [(i >> k) & 1 for k in range(4)]) for i in range(16))
    assert vanilla_objective(inst, OptimizerConfig())(theta) == pytest.approx(expect, abs=1e-10)


def _grid_ratio_p1(inst, steps=60):
    edges = [(e.vertices, e.weight) for e in inst.edges]
    ext = brute_force_extrema(inst)
    zz = [oracles.zstring(inst.n, list(v)) for v, _ in edges]
    best = math.inf
    for g in np.linspace(-np.pi / 2, np.pi / 2, steps):
        for b in np.linspace(-np.pi / 2, np.pi / 2, steps):
            psi = oracles.vanilla_state(inst.n, edges, [g], [b])
            c = sum(-w * (1 - oracles.expectation(psi, z)) / 2 for (_, w), z in zip(edges, zz))
            best = min(best, c)
    return (ext.c_max - best) / (ext.c_max - ext.c_min)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1])
def test_vanilla_small_instance_reaches_optimum(seed):
    inst = random_instance("complete", seed, n=3)
    res = run_vanilla_qaoa(inst, 3, OptimizerConfig(n_init=20, n_mc=500, seed=seed))
    assert res.ratio >= 0.98
    assert res.ratio >= _grid_ratio_p1(inst) - 1e-3
    assert res.metadata["copies"] == 1
    assert res.resources[0].cnot_count > 0 and res.resources[1] is not None


def test_parity_n4_p1_best_kind():
    mp = encode_complete(4)
    ratios = [run_parity_qaoa(random_instance("complete", s, n=4), mp, logical_lines(mp), 1, "best",
                              OptimizerConfig(seed=s)).ratio for s in range(20)]
    assert np.mean(ratios) >= 0.99


def test_parity_ratio_in_unit_interval_and_reported_exactly():
    mp = encode_complete(5)
    inst = random_instance("complete", 4, n=5)
    ext = brute_force_extrema(inst)
    res = run_parity_qaoa(inst, mp, logical_lines(mp), 2, "mean", OptimizerConfig(n_init=2, n_mc=40, seed=1), ext)
    assert 0.0 <= res.ratio <= 1.0
    assert res.ratio == pytest.approx((ext.c_max - res.best_objective) / (ext.c_max - ext.c_min))
    assert res.metadata["evaluator"] == "dense"
    assert 0.0 <= res.metadata["best_basis_ratio"] <= 1.0


def test_closed_form_used_for_p1():
    mp = encode_complete(6)
    inst = random_instance("complete", 2, n=6)
    obj = ParityObjective(inst, mp, logical_lines(mp), 1, "mean", OptimizerConfig())
    assert obj.closed_form is not None
    dense = ParityObjective(inst, mp, logical_lines(mp), 2, "mean", OptimizerConfig())
    theta = np.array([0.4, -0.2, 0.7])
    padded = np.array([0.4, -0.2, 0.7, 0.0, 0.0, 0.0])
    assert obj(theta) == pytest.approx(dense(padded), abs=1e-9)


def test_shot_estimator_unbiased_for_mean_objective():
    mp = encode_complete(5)
    inst = random_instance("complete", 6, n=5)
    bases = logical_lines(mp)
    theta = np.array([0.35, -0.6, 0.25])
    exact = ParityObjective(inst, mp, bases, 1, "mean", OptimizerConfig())(theta)
    shots = 200
    obj = ParityObjective(inst, mp, bases, 1, "mean", OptimizerConfig(shots=shots, seed=9))
    est = np.array([obj(theta) for _ in range(60)])
    # per-estimate spread from a large single run
    big = ParityObjective(inst, mp, bases, 1, "mean", OptimizerConfig(shots=20000, seed=10))(theta)
    se = est.std(ddof=1) / np.sqrt(est.size)
    assert abs(est.mean() - exact) <= 5 * se
    assert abs(big - exact) <= 5 * est.std(ddof=1) / np.sqrt(100)


def test_copies_rule():
    inst = random_instance("complete", 0, n=6)
    assert copies_for(inst, encode_complete(6)) == math.ceil(15 / 6)
    res = run_vanilla_qaoa(inst, 1, OptimizerConfig(n_init=1, n_mc=5, shots=50), mapping=encode_complete(6))
    assert res.metadata["copies"] == 3 and res.metadata["mode"] == "shots"
    assert run_vanilla_qaoa(inst, 1, OptimizerConfig(n_init=1, n_mc=5)).metadata["copies"] == 1


def test_shot_mode_is_deterministic():
    inst = random_instance("complete", 1, n=5)
    cfg = OptimizerConfig(n_init=2, n_mc=20, shots=64, seed=4)
    a = run_vanilla_qaoa(inst, 1, cfg)
    b = run_vanilla_qaoa(inst, 1, cfg)
    assert a.best_objective == b.best_objective and a.trace == b.trace


@settings(max_examples=15)
@given(st.integers(0, 1000), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_objective_between_extrema(seed, theta):
    mp = encode_complete(5)
    inst = random_instance("complete", seed, n=5)
    ext = brute_force_extrema(inst)
    for kind in ("mean", "best"):
        v = ParityObjective(inst, mp, logical_lines(mp), 1, kind, OptimizerConfig())(np.array(theta))
        assert ext.c_min - 1e-9 <= v <= ext.c_max + 1e-9


@pytest.mark.slow
def test_parity_qaoa_beats_lower_bound_on_average_small():
    mp = encode_complete(5)
    insts = [random_instance("complete", 500 + s, n=5) for s in range(8)]
    lb = [r.r0 for r in lower_bound_batch(insts, mp, logical_lines(mp), 1, "best")]
    qa = [run_parity_qaoa(i, mp, logical_lines(mp), 1, "best", OptimizerConfig(n_init=10, n_mc=300, seed=k)).ratio
          for k, i in enumerate(insts)]
    assert np.mean(qa) >= np.mean(lb) - 0.02
