import json

import numpy as np
import pytest

from ensemblekit import coarse_grain, microstate_energy, rate_value, repr_value, validate_model
from ensemblekit.errors import ConfigurationError, ModelFormatError, ShapeError
from ensemblekit.model import Model, relative_entropy_rows
from ensemblekit.models import (
    BUILTINS, build_builtin, curie_weiss, load_model, miller_robert, point_vortex, save_model,
    tabular, three_state_skew,
)

import oracles as o


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_validate(name):
    assert validate_model(BUILTINS[name]()) == []


def test_rate_zero_at_prior_and_positive_elsewhere(rng):
    for model in (curie_weiss(), three_state_skew(), point_vortex(), miller_robert()):
        prior = np.tile(model.prior, (model.q, 1))
        assert rate_value(model, prior) == 0.0
        x = rng.dirichlet(np.ones(model.m), size=model.q)
        assert rate_value(model, x) > 0


def test_relative_entropy_off_support_is_inf():
    assert np.isinf(relative_entropy_rows(np.array([[0.5, 0.5]]), np.array([1.0, 0.0]))[0])
    assert relative_entropy_rows(np.array([[1.0, 0.0]]), np.array([1.0, 0.0]))[0] == 0.0


def test_curie_weiss_rate_and_energy_match_closed_form():
    model = curie_weiss()
    for m in (-0.9, -0.2, 0.0, 0.4, 1.0):
        x = np.array([(1 - m) / 2, (1 + m) / 2])
        assert rate_value(model, x) == pytest.approx(o.binary_rate(m), abs=1e-14)
        assert repr_value(model, x)[0] == pytest.approx(-m * m / 2, abs=1e-14)


def test_microstate_energy_is_energy_of_coarse_grained_state(rng):
    for model, n in ((curie_weiss(), 12), (three_state_skew(), 9), (miller_robert(q=2, cutoff=2), 16)):
        zeta = model.alphabet[rng.integers(model.m, size=n)]
        cells = coarse_grain(model, zeta)
        assert cells.shape == (model.q, model.m)
        assert np.allclose(cells.sum(axis=1), 1.0)
        if model.site_cutoff is None:
            assert np.allclose(microstate_energy(model, zeta), repr_value(model, cells))


def test_microstate_rejects_foreign_letters():
    with pytest.raises(ShapeError):
        coarse_grain(curie_weiss(), [1.0, 0.5])


def test_tabular_validation_messages():
    bad = Model(kind="tabular", sigma=1, table_I=[0.1, 0.2], table_H=[[0.0, 1.0]])
    assert any("inf I" in p for p in validate_model(bad))
    neg = Model(kind="tabular", sigma=1, table_I=[0.0, -0.2], table_H=[[0.0, 1.0]])
    assert any("negative" in p for p in validate_model(neg))
    shape = Model(kind="tabular", sigma=1, table_I=[0.0, 0.2], table_H=[[0.0, 1.0, 2.0]])
    assert any("shape" in p for p in validate_model(shape))


def test_tabular_index_errors():
    model = tabular([0, 1], [0, 1])
    assert rate_value(model, 1) == 1.0
    with pytest.raises(ShapeError):
        rate_value(model, 2)
    with pytest.raises(ShapeError):
        rate_value(model, [0.5, 0.5])


def test_spec_rejects_unknown_fields_and_bad_ranges():
    with pytest.raises(ModelFormatError) as err:
        build_builtin({"kind": "curie_weiss", "temperature": 1.0})
    assert "temperature" in str(err.value)
    with pytest.raises(ModelFormatError):
        build_builtin({"kind": "not_a_model"})
    with pytest.raises(ConfigurationError):
        build_builtin({"kind": "curie_weiss", "alphabet": [1.0]})
    with pytest.raises(ConfigurationError):
        build_builtin({"kind": "miller_robert", "sigma": 3})


def test_save_load_round_trip(tmp_path):
    model = three_state_skew(prior=[0.2, 0.2, 0.6])
    path = tmp_path / "m.json"
    save_model(model, path)
    again = load_model(path)
    assert np.array_equal(again.prior, model.prior)
    assert json.loads(path.read_text())["kind"] == "three_state_skew"
    assert load_model("builtin:three_point_table").m == 3
    with pytest.raises(ModelFormatError):
        load_model("builtin:nope")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "bad.json")
