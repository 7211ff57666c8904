"""Regenerate the bundled mapping files under src/parityqaoa/data."""

import itertools
import json
from pathlib import Path

import numpy as np

from parityqaoa import gf2
from parityqaoa.parity_map import ReadoutBasis, build_mapping, find_constraints, MappingError
from parityqaoa.problem import HYPERGRAPH_EDGES, REGULAR4_EDGES

DATA = Path(__file__).resolve().parents[1] / "src" / "parityqaoa" / "data"

REGULAR4_TREES = [
    [(0, 2), (0, 1), (0, 6), (0, 7), (3, 7), (3, 5), (4, 5)],
    [(0, 2), (0, 7), (5, 7), (4, 5), (4, 6), (3, 4), (1, 4)],
    [(3, 6), (3, 7), (2, 7), (5, 7), (1, 5), (0, 1), (1, 4)],
    [(2, 7), (2, 6), (1, 2), (0, 6), (3, 6), (1, 5), (4, 6)],
    [(2, 6), (1, 2), (3, 4), (3, 5), (0, 6), (3, 6), (2, 7)],
    [(0, 2), (0, 1), (2, 6), (1, 5), (5, 7), (3, 5), (4, 5)],
    [(1, 2), (0, 7), (1, 4), (1, 5), (3, 4), (3, 7), (4, 6)],
    [(1, 2), (0, 6), (0, 7), (0, 1), (3, 4), (3, 5), (3, 7)],
]


def regular4():
    phys = list(REGULAR4_EDGES) + [(1, 6)]
    index = {q: k for k, q in enumerate(phys)}
    cons = find_constraints(8, phys)
    bases = [ReadoutBasis(tuple(index[e] for e in tree), "imported") for tree in REGULAR4_TREES]
    return build_mapping(8, phys, cons, bases, ancillas=[16], provenance="reconstructed")


def _spread_bases(phys, usable, need, count):
    """Decodable qubit sets chosen greedily to spread coverage evenly."""
    cover = {k: 0 for k in usable}
    out = []
    while len(out) < count:
        rows, members = [], []
        for k in sorted(usable, key=lambda k: (cover[k], k)):
            vec = np.zeros(8, dtype=np.uint8)
            vec[list(phys[k])] = 1
            if gf2.rank(np.array(rows + [vec])) == len(rows) + 1:
                rows.append(vec)
                members.append(k)
            if len(members) == need:
                break
        basis = tuple(sorted(members))
        if basis in out:
            raise RuntimeError("basis search repeated itself")
        out.append(basis)
        for k in basis:
            cover[k] += 1
    return out


def hypergraph():
    edges = list(HYPERGRAPH_EDGES)
    candidates = [q for r in (2, 3) for q in itertools.combinations(range(8), r) if q not in edges]
    for anc in itertools.combinations(candidates, 2):
        phys = edges + list(anc)
        try:
            cons = find_constraints(8, phys)
        except MappingError:
            continue
        break
    usable = list(range(len(edges)))
    m = build_mapping(8, phys, cons, [], ancillas=[len(edges), len(edges) + 1], provenance="reconstructed")
    bases = _spread_bases(phys, usable, 8 - m.degeneracy, 5)
    return build_mapping(8, phys, cons, bases, ancillas=m.ancillas, provenance="reconstructed")


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    for name, mp in (("regular4_fig3_mapping.json", regular4()), ("hypergraph_fig9_mapping.json", hypergraph())):
        (DATA / name).write_text(json.dumps(mp.to_dict(), indent=1) + "\n")
        print(name, "K", mp.K, "L", mp.L, "D", mp.degeneracy, "bases", len(mp.readout_bases))
    (DATA / "regular4_fig3_graph.json").write_text(json.dumps({
        "n": 8, "edges": [list(e) for e in REGULAR4_EDGES], "spanning_trees": [[list(e) for e in t] for t in REGULAR4_TREES],
    }, indent=1) + "\n")
    (DATA / "hypergraph_fig9_graph.json").write_text(json.dumps({
        "n": 8, "edges": [list(e) for e in HYPERGRAPH_EDGES],
    }, indent=1) + "\n")
