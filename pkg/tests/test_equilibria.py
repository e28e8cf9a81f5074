import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ensemblekit.equilibria import (
    EquilibriumSet, Relation, brute_force_set, canonical2_set, canonical_set, feasibility, group_by_value,
    micro2_set, microcanonical_set, mixed_set, set_distance,
)
from ensemblekit.errors import CapacityError
from ensemblekit.model import repr_value
from ensemblekit.models import curie_weiss, point_vortex, random_tabular, three_point_table, three_state_skew, worked_mixed_table

import oracles as o


@given(st.integers(0, 10_000), st.floats(-4, 4))
def test_tabular_sets_match_enumeration(seed, beta):
    model = random_tabular(np.random.default_rng(seed))
    I, H = model.table_I.tolist(), model.table_H[0].tolist()
    assert canonical_set(model, beta).members == o.table_canonical(I, H, beta)
    for u in set(H):
        assert microcanonical_set(model, u).members == o.table_micro(I, H, u)


def test_curie_weiss_canonical_set_is_symmetric_pair():
    eb = canonical_set(curie_weiss(), 2.0)
    ms = sorted(x[1] - x[0] for x in eb.members)
    assert ms == pytest.approx([-o.CW_M_STAR_2, o.CW_M_STAR_2], abs=1e-9)
    single = canonical_set(curie_weiss(), 0.5)
    assert len(single) == 1 and single.members[0] == pytest.approx([0.5, 0.5], abs=1e-9)


def test_curie_weiss_microcanonical_set():
    eu = microcanonical_set(curie_weiss(), -0.125)
    ms = sorted(x[1] - x[0] for x in eu.members)
    assert ms == pytest.approx([-0.5, 0.5], abs=1e-8)
    assert feasibility(curie_weiss(), eu, -0.125) < 1e-8
    off = microcanonical_set(curie_weiss(), 0.3)
    assert not off.feasible and off.members == []


@pytest.mark.parametrize("beta", [0.5, 2.0])
def test_solver_agrees_with_brute_force_canonical(beta):
    model = curie_weiss()
    a = canonical_set(model, beta)
    b = brute_force_set(model, "canonical", {"beta": [beta]}, resolution=2000, tol_deg=1e-6)
    assert a.objective <= b.objective + 1e-12
    assert set_distance(a, b, tol_match=2e-3).relation == Relation.EQUAL


@pytest.mark.parametrize("u", [-1.5, -0.8, -0.3])
def test_solver_agrees_with_brute_force_microcanonical(u):
    model = three_state_skew()
    a = microcanonical_set(model, u)
    b = brute_force_set(model, "microcanonical", {"u": [u]}, resolution=1000)
    # grid feasible points are exact on the constraint, so the solver can only do better
    assert -1e-5 < a.objective - b.objective <= 1e-10
    assert set_distance(a, b, tol_match=2e-3).relation == Relation.EQUAL


def test_brute_force_capacity():
    with pytest.raises(CapacityError):
        brute_force_set(point_vortex(), "canonical", {"beta": [1.0]})


def test_set_relations():
    def S(*xs):
        return EquilibriumSet([np.array(x, float) for x in xs], 0.0, "t", {}, False)

    assert set_distance(S([0, 1]), S([0, 1])).relation == Relation.EQUAL
    assert set_distance(S([0, 1]), S([0, 1], [1, 0])).relation == Relation.A_IN_B
    assert set_distance(S([0, 1], [1, 0]), S([1, 0])).relation == Relation.B_IN_A
    assert set_distance(S([0, 1]), S([1, 0])).relation == Relation.DISJOINT
    assert set_distance(S([0, 1], [0.5, 0.5]), S([1, 0], [0.5, 0.5])).relation == Relation.OVERLAP
    assert set_distance(S([0, 1]), S([1, 0])).hausdorff == pytest.approx(1.0)


def test_nonequivalence_witness_sets():
    model = three_point_table()
    assert microcanonical_set(model, 1.0).members == [1]
    for beta in np.linspace(-10, 10, 201):
        assert 1 not in canonical_set(model, beta).members


def test_mixed_sets_on_worked_table():
    model = worked_mixed_table()
    assert mixed_set(model, 0.0, 1.0).members == [3]
    assert canonical2_set(model, 0.0, 1.0).members == [0]
    assert micro2_set(model, 0.0, 1.0).members == [2]
    assert not micro2_set(model, 3.0, 1.0).feasible


def test_round_trip_and_grouping():
    model = curie_weiss()
    eb = canonical_set(model, 2.0)
    back = EquilibriumSet.from_dict(eb.to_dict())
    assert set_distance(eb, back).relation == Relation.EQUAL
    assert eb.to_dict()["certification"] == "heuristic"
    groups = group_by_value(model, eb.members)
    assert len(groups) == 1
    assert groups[0][0] == pytest.approx(repr_value(model, eb.members[0])[0])
