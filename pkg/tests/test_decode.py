import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from parityqaoa.circuit import ParamVector
from parityqaoa.clifford_sim import lower_bound_batch
from parityqaoa.decode import (DecodeError, LinearObjective, decode_all, decode_basis, decode_many, decoded_energies,
                               is_trivial, objective_expectation, objective_from_probabilities, outcome_distribution)
from parityqaoa.dense_sim import parity_state, zstring_expectations
from parityqaoa.parity_map import (encode_complete, encode_logical_state, hypergraph_mapping, logical_lines,
                                   physical_fields, regular4_mapping)
from parityqaoa.problem import all_assignments, energy, random_instance
import oracles


def canonical(s):
    s = np.asarray(s, dtype=np.uint8)
    return s ^ s[0]


def oracle_decode(mapping, basis, q):
    """Search every logical state for one matching the basis bits, bit 0 held at 0."""
    for s in itertools.product((0, 1), repeat=mapping.n_logical):
        if s[0]:
            continue
        enc = encode_logical_state(mapping, np.array(s, dtype=np.uint8))
        if all(enc[m] == q[m] for m in basis.members):
            return np.array(s, dtype=np.uint8)
    raise AssertionError("no consistent logical state")


def test_line_example():
    mp = encode_complete(4)
    q = np.zeros(mp.K, dtype=np.uint8)
    q[list(logical_lines(mp)[0].members)] = (1, 0, 1)
    assert decode_basis(mp, logical_lines(mp)[0], q).tolist() == [0, 1, 0, 1]


def test_zero_state_decodes_to_zero():
    mp = encode_complete(6)
    out = decode_all(mp, logical_lines(mp), np.zeros(mp.K, dtype=np.uint8))
    assert not out.any()


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_roundtrip_complete_exhaustive(n):
    mp = encode_complete(n)
    s = all_assignments(n)
    q = encode_logical_state(mp, s)
    for b in logical_lines(mp):
        assert np.array_equal(decode_many(mp, b, q), s ^ s[:, :1])


def test_roundtrip_regular4_exhaustive():
    mp = regular4_mapping()
    s = all_assignments(mp.n_logical)
    q = encode_logical_state(mp, s)
    for b in mp.readout_bases:
        assert np.array_equal(decode_many(mp, b, q), s ^ s[:, :1])


def test_roundtrip_hypergraph_is_exact():
    mp = hypergraph_mapping()
    s = all_assignments(mp.n_logical)
    q = encode_logical_state(mp, s)
    for b in mp.readout_bases:
        assert np.array_equal(decode_many(mp, b, q), s)


def test_decoder_matches_search_oracle():
    mp = encode_complete(5)
    rng = np.random.default_rng(1)
    for q in rng.integers(0, 2, size=(50, mp.K)).astype(np.uint8):
        for b in logical_lines(mp):
            assert np.array_equal(decode_basis(mp, b, q), oracle_decode(mp, b, q))


def test_decode_basis_rejects_batches_and_bad_width():
    mp = encode_complete(4)
    with pytest.raises(DecodeError):
        decode_basis(mp, logical_lines(mp)[0], np.zeros((2, mp.K)))
    with pytest.raises(DecodeError):
        decode_many(mp, logical_lines(mp)[0], np.zeros(mp.K + 1))


def test_flip_completion_does_not_change_pairwise_energy():
    inst = random_instance("complete", 3, n=6)
    s = all_assignments(6)
    assert np.array_equal(energy(inst, s, "cut"), energy(inst, 1 - s, "cut"))


def test_hypergraph_decoding_uses_lowest_energy_completion():
    mp = encode_complete(4)
    from parityqaoa.problem import make_instance
    inst = make_instance(4, [((0, 1, 2), 1), ((0, 1), 1)], "three_body")
    for b in logical_lines(mp):
        for s in all_assignments(4):
            got = decode_basis(mp, b, encode_logical_state(mp, s), inst)
            assert energy(inst, got, "spin") == min(energy(inst, s, "spin"), energy(inst, 1 - s, "spin"))


def test_single_outcome_mean_and_best():
    mp = encode_complete(5)
    inst = random_instance("complete", 2, n=5)
    q = np.random.default_rng(3).integers(0, 2, mp.K).astype(np.uint8)
    e = decoded_energies(inst, mp, logical_lines(mp), q)
    assert objective_expectation(inst, mp, logical_lines(mp), q, kind="mean") == pytest.approx(e.mean())
    assert objective_expectation(inst, mp, logical_lines(mp), q, kind="best") == e.min()


def test_empty_samples_rejected():
    mp = encode_complete(4)
    inst = random_instance("complete", 0, n=4)
    with pytest.raises(DecodeError):
        objective_expectation(inst, mp, logical_lines(mp), np.zeros((0, mp.K)))


def test_best_never_exceeds_mean_on_random_states():
    mp = encode_complete(6)
    bases = logical_lines(mp)
    rng = np.random.default_rng(7)
    for trial in range(1000):
        inst = random_instance("complete", trial, n=6)
        q = rng.integers(0, 2, size=(int(rng.integers(1, 5)), mp.K)).astype(np.uint8)
        w = rng.random(q.shape[0])
        best = objective_expectation(inst, mp, bases, q, w, "best")
        mean = objective_expectation(inst, mp, bases, q, w, "mean")
        assert best <= mean + 1e-12


def _random_parity_probs(mp, fields, seed, p=2):
    rng = np.random.default_rng(seed)
    params = ParamVector(tuple(rng.uniform(-1, 1, p)), tuple(rng.uniform(-1, 1, p)), tuple(rng.uniform(-1, 1, p)))
    return parity_state(mp, fields, params).probabilities()


@pytest.mark.parametrize("seed", range(3))
def test_objectives_match_direct_sum_oracle(seed):
    mp = encode_complete(5)
    bases = logical_lines(mp)
    inst = random_instance("complete", 40 + seed, n=5)
    edges = [(e.vertices, e.weight) for e in inst.edges]
    probs = _random_parity_probs(mp, physical_fields(inst, mp), seed)
    per_basis = np.zeros(len(bases))
    mean = 0.0
    for idx in range(1 << mp.K):
        q = np.array([(idx >> k) & 1 for k in range(mp.K)], dtype=np.uint8)
        es = [oracles.cut_energy(5, edges, oracle_decode(mp, b, q)) for b in bases]
        per_basis += probs[idx] * np.array(es)
        mean += probs[idx] * np.mean(es)
    assert objective_from_probabilities(inst, mp, bases, probs, "mean") == pytest.approx(mean, abs=1e-9)
    assert objective_from_probabilities(inst, mp, bases, probs, "best") == pytest.approx(per_basis.min(), abs=1e-9)


@pytest.mark.parametrize("mp_factory", [lambda: encode_complete(5), lambda: regular4_mapping(5)])
def test_linear_objective_matches_enumeration(mp_factory):
    mp = mp_factory()
    bases = mp.readout_bases
    topo = "complete" if mp.n_logical == 5 else "regular4_fig3"
    inst = random_instance(topo, 9, n=5 if topo == "complete" else None)
    probs = _random_parity_probs(mp, physical_fields(inst, mp), 4, p=1)
    lin = LinearObjective(inst, mp, bases)
    vals = zstring_expectations(probs, mp.K, lin.strings)
    for kind in ("mean", "best"):
        assert lin.objective(vals, kind) == pytest.approx(
            objective_from_probabilities(inst, mp, bases, probs, kind), abs=1e-9)


def test_outcome_distribution_normalized():
    bits, w = outcome_distribution(np.array([0.5, 0, 0.25, 0.25]))
    assert bits.tolist() == [[0, 0], [0, 1], [1, 1]]
    assert w.sum() == pytest.approx(1.0)
    with pytest.raises(DecodeError):
        outcome_distribution(np.ones(3) / 3)


def test_n4_always_trivial_at_p1():
    mp = encode_complete(4)
    assert all(is_trivial(random_instance("complete", s, n=4), mp, logical_lines(mp), 1) for s in range(50))


def test_n7_sample_mostly_trivial_at_p3():
    mp = encode_complete(7)
    insts = [random_instance("complete", s, n=7) for s in range(100)]
    trivial = sum(r.solved for r in lower_bound_batch(insts, mp, logical_lines(mp), 3, "best"))
    # about 96 of 100 expected; sampling spread of a few instances
    assert 90 <= trivial <= 100


def test_more_bases_never_lower_solved_rate():
    mp = regular4_mapping()
    insts = [random_instance("regular4_fig3", s) for s in range(100)]
    for p in (1, 2):
        rates = []
        for m in range(1, len(mp.readout_bases) + 1):
            rs = lower_bound_batch(insts, mp, mp.readout_bases[:m], p, "best")
            rates.append(sum(r.solved for r in rs))
        assert rates == sorted(rates)


@given(st.integers(0, 10_000), st.lists(st.integers(0, 1), min_size=6, max_size=6))
def test_decoded_energy_of_encoded_state_is_logical_energy(seed, s):
    mp = encode_complete(6)
    inst = random_instance("complete", seed, n=6)
    s = np.array(s, dtype=np.uint8)
    e = decoded_energies(inst, mp, logical_lines(mp), encode_logical_state(mp, s))
    assert np.all(e == energy(inst, s, "cut"))


def test_decoded_ensemble_agrees_with_objectives():
    from parityqaoa.decode import decoded_ensemble
    mp = encode_complete(5)
    bases = logical_lines(mp)
    inst = random_instance("complete", 12, n=5)
    probs = _random_parity_probs(mp, physical_fields(inst, mp), 8)
    ens = decoded_ensemble(inst, mp, bases, probabilities=probs)
    assert ens.probabilities.sum() == pytest.approx(1.0)
    assert ens.logical.shape == (ens.physical.shape[0], len(bases), 5)
    for kind in ("mean", "best", "shot_min"):
        assert ens.objective(kind) == pytest.approx(objective_from_probabilities(inst, mp, bases, probs, kind))
    q = np.random.default_rng(2).integers(0, 2, size=(40, mp.K)).astype(np.uint8)
    from_samples = decoded_ensemble(inst, mp, bases, samples=q)
    assert from_samples.objective("mean") == pytest.approx(objective_expectation(inst, mp, bases, q, kind="mean"))
    with pytest.raises(DecodeError):
        decoded_ensemble(inst, mp, bases)
