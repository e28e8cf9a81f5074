import json

import numpy as np
import pytest

from ensemblekit.classify import (
    BOUNDARY, FULL, INFEASIBLE, NONEQUIVALENT, PARTIAL, ClassificationReport, FixedBeta1, FixedU2,
    classify_curve, classify_mixed, classify_point, context_from_values, decompose_canonical,
    default_beta_grid, differentiability_check, hull_context, mixed_legendre_gap, mixed_u2_legendre_gap,
    verify_mixed_equality, verify_point,
)
from ensemblekit.equilibria import canonical2_set, mixed_set
from ensemblekit.errors import ArgumentError
from ensemblekit.models import (
    curie_weiss, random_tabular, random_tabular_mixed, tabular_mixed, three_point_table,
    two_point_table, worked_mixed_table,
)

import oracles as o

DENTED = ([0, 0.6, 0.2, 0.8, 0.9, 0.7], [0, 0, 0, 1, 1, 1], [0, 1, 2, 1, 0, 2])
FLAT = ([1, 0, 0.1, 0.2, 1.2], [0, 0, 0, 0, 1], [0, 1, 2, 3, 4])


def _by_u(report):
    return {r.u: r for r in report.records}


def test_three_point_labels_and_witness():
    rep = _by_u(classify_curve(three_point_table()))
    assert rep[1.0].label == NONEQUIVALENT and rep[1.0].passed
    assert rep[0.0].support_label == FULL and rep[2.0].support_label == FULL
    assert rep[2.0].witness == pytest.approx(-0.2)
    assert rep[0.0].label == BOUNDARY


def test_two_point_is_partial():
    rep = _by_u(classify_curve(two_point_table()))
    assert rep[0.0].support_label == PARTIAL
    assert all(r.passed for r in rep.values())


def test_classify_point_rejects_off_grid():
    ctx = hull_context(three_point_table())
    with pytest.raises(ArgumentError):
        classify_point(three_point_table(), 0.5, ctx)


def test_labels_match_brute_force_hull(rng):
    for _ in range(25):
        model = random_tabular(rng)
        I, H = model.table_I.tolist(), model.table_H[0].tolist()
        rep = classify_curve(model)
        noneq = {r.u for r in rep.records if r.support_label == NONEQUIVALENT}
        assert noneq == o.brute_nonequivalent(I, H)
        assert rep.coherence_violations() == []
        assert rep.all_passed()


def test_infeasible_points_are_labelled():
    ctx = context_from_values([0.0, 1.0, 2.0], [0.0, -0.5, -np.inf])
    rec = classify_point(three_point_table(), 2.0, ctx)
    assert rec.label == INFEASIBLE


def test_report_round_trip():
    rep = classify_curve(three_point_table())
    blob = json.loads(json.dumps(rep.to_dict()))
    back = ClassificationReport.from_dict(blob)
    assert [r.label for r in back.records] == [r.label for r in rep.records]
    assert back.records[1].checks[0].evidence == rep.records[1].checks[0].evidence
    blob["schema_version"] = 99
    with pytest.raises(ValueError):
        ClassificationReport.from_dict(blob)


def test_verify_catches_a_wrong_label():
    model = three_point_table()
    ctx = hull_context(model)
    rec = classify_point(model, 1.0, ctx)
    rec.support_label = FULL
    rec.witness = -0.1
    checks = verify_point(model, rec, default_beta_grid(ctx))
    assert not all(c.passed for c in checks)


def test_decomposition_at_kink():
    model = three_point_table()
    ctx = hull_context(model)
    dec = decompose_canonical(model, -0.1, ctx)
    assert [u for u, _ in dec.partition] == [0.0, 2.0]
    assert all(c.passed for c in dec.checks)
    kink = differentiability_check(model, -0.1, ctx)
    assert not kink.differentiable and kink.consistent
    smooth = differentiability_check(model, -0.2, ctx)
    assert smooth.differentiable and smooth.consistent


def test_curie_weiss_decomposition_pairs_by_energy():
    model = curie_weiss()
    ctx = hull_context(model, np.linspace(-0.5, 0.0, 41))
    dec = decompose_canonical(model, 2.0, ctx)
    assert len(dec.partition) == 1
    assert len(dec.partition[0][1].members) == 2
    assert dec.partition[0][0] == pytest.approx(-o.CW_M_STAR_2**2 / 2, abs=1e-9)
    assert all(c.passed for c in dec.checks)


def _breakpoints(I, H1, H2, beta1):
    """Every beta2 where two objective lines cross, plus midpoints and outer probes."""
    a = np.asarray(I) + beta1 * np.asarray(H1)
    b = np.asarray(H2, float)
    cross = {(a[j] - a[i]) / (b[i] - b[j]) for i in range(len(a)) for j in range(len(a)) if b[i] != b[j]}
    cross = sorted(cross)
    mids = [0.5 * (x + y) for x, y in zip(cross, cross[1:])]
    return cross + mids + [cross[0] - 1.0, cross[-1] + 1.0]


def test_mixed_dent_is_nonequivalent_exhaustively():
    model = tabular_mixed(*DENTED)
    rep = _by_u(classify_mixed(model, FixedBeta1(0.0)))
    dent = rep[1.0]
    assert dent.label == NONEQUIVALENT and dent.passed
    eu = mixed_set(model, 0.0, 1.0)
    for b2 in _breakpoints(*DENTED, 0.0):
        assert not set(eu.members) & set(canonical2_set(model, 0.0, b2).members)


def test_mixed_flat_segment_is_partial():
    rep = _by_u(classify_mixed(tabular_mixed(*FLAT), FixedBeta1(0.0)))
    assert rep[2.0].label == PARTIAL and rep[2.0].passed
    assert rep[1.0].label == FULL and rep[3.0].label == FULL


def test_mixed_fixed_u2_runs():
    rep = classify_mixed(worked_mixed_table(), FixedU2(1.0))
    assert rep.all_passed()
    assert rep.metadata["mode"] == "fixed_u2"


def test_mixed_equality_and_legendre(rng):
    assert verify_mixed_equality(worked_mixed_table(), 0.0, 1.0).passed
    for _ in range(10):
        model = random_tabular_mixed(rng)
        u2 = np.unique(model.table_H[1])
        u1 = np.unique(model.table_H[0])
        for b1 in (-1.0, 0.3):
            assert verify_mixed_equality(model, b1, float(u2[0])).passed
        if len(u2) > 1:
            assert mixed_legendre_gap(model, 0.5, u2, np.linspace(-3, 3, 13)) <= 1e-12
        if len(u1) > 1:
            assert mixed_u2_legendre_gap(model, float(u2[0]), u1, np.linspace(-3, 3, 13)) <= 1e-12


def test_mixed_requires_known_mode():
    with pytest.raises(ArgumentError):
        classify_mixed(worked_mixed_table(), "sideways")
