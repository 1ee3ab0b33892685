import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frechetnet import activation as A
from frechetnet import data as D
from frechetnet import network as N
from frechetnet.errors import ParseError, ValidationError
from frechetnet.training import Dataset, EpochRecord

COEFFS = np.array([0.3, -0.5, 0.2, 0.1, 0.7, -0.2, 0.05, 0.4, 0.0])


def warped(n, a=0.1):
    u = np.linspace(0.0, 1.0, n)
    return D.Grid(u + a * np.sin(2 * np.pi * u) / (2 * np.pi))


# -- grid and basis ------------------------------------------------------------


@pytest.mark.parametrize("points", [[0.5], [0.0, 0.0], [0.3, 0.1], [-0.1, 0.5], [0.0, 1.2], [0.0, np.nan]])
def test_invalid_grids(points):
    with pytest.raises(ValidationError):
        D.Grid(points)


def test_basis_values():
    e = D.eval_basis(D.BasisSpec(5), D.Grid.uniform(11))
    assert np.array_equal(e[:, 0], np.ones(11))
    assert e[0, 1] == math.sqrt(2.0)
    t = 0.3
    e = D.eval_basis(D.BasisSpec(5), D.Grid([0.0, t]))
    expected = [1.0, math.sqrt(2) * math.cos(2 * math.pi * t), math.sqrt(2) * math.sin(2 * math.pi * t),
                math.sqrt(2) * math.cos(4 * math.pi * t), math.sqrt(2) * math.sin(4 * math.pi * t)]
    assert np.allclose(e[1], expected, rtol=0, atol=1e-15)


def test_gram_identity_fine_grid():
    g = D.gram_matrix(D.BasisSpec(16), D.Grid.uniform(1024))
    assert np.max(np.abs(g - np.eye(16))) < 1e-6


def test_invalid_basis():
    with pytest.raises(ValidationError):
        D.BasisSpec(0)
    with pytest.raises(ValidationError):
        D.BasisSpec(4, "wavelet")


# -- coefficients ----------------------------------------------------------------


def test_constant_function():
    c = D.function_to_coeffs(np.ones(256), D.BasisSpec(8), D.Grid.uniform(256))
    expected = np.zeros(8)
    expected[0] = 1.0
    assert np.max(np.abs(c - expected)) < 1e-10


def test_cosine_function():
    grid = D.Grid.uniform(1024)
    c = D.function_to_coeffs(math.sqrt(2) * np.cos(2 * np.pi * grid.points), D.BasisSpec(8), grid)
    assert abs(c[1] - 1.0) < 1e-6
    assert np.max(np.abs(np.delete(c, 1))) < 1e-6


def test_zero_function():
    c = D.function_to_coeffs(np.zeros(64), D.BasisSpec(8), D.Grid.uniform(64))
    assert np.array_equal(c, np.zeros(8))


def test_length_mismatch():
    with pytest.raises(ValidationError):
        D.function_to_coeffs(np.zeros(10), D.BasisSpec(4), D.Grid.uniform(11))
    with pytest.raises(ValidationError):
        D.coeffs_to_function(np.zeros(3), D.BasisSpec(4), D.Grid.uniform(11))


def test_reconstruct_constant_and_zero():
    spec, grid = D.BasisSpec(6), D.Grid.uniform(50)
    x = np.zeros(6)
    assert np.array_equal(D.coeffs_to_function(x, spec, grid), np.zeros(50))
    x[0] = 2.5
    assert np.allclose(D.coeffs_to_function(x, spec, grid), 2.5, rtol=0, atol=1e-15)


def test_round_trip_band_limited():
    spec, grid = D.BasisSpec(9), D.Grid.uniform(1024)
    f = D.coeffs_to_function(COEFFS, spec, grid)
    again = D.coeffs_to_function(D.function_to_coeffs(f, spec, grid), spec, grid)
    assert np.max(np.abs(again - f)) < 1e-4


def test_batch_transform(rng):
    spec, grid = D.BasisSpec(5), D.Grid.uniform(40)
    f = rng.normal(size=(3, 40))
    batch = D.function_to_coeffs(f, spec, grid)
    for i in range(3):
        assert np.allclose(batch[i], D.function_to_coeffs(f[i], spec, grid), rtol=0, atol=1e-15)


@given(st.integers(3, 200), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_reported_bound_dominates(n, dim, seed):
    spec, grid = D.BasisSpec(dim), D.Grid.uniform(n)
    x = np.random.default_rng(seed).normal(size=dim)
    f = D.coeffs_to_function(x, spec, grid)
    c, bound = D.function_to_coeffs(f, spec, grid, return_bound=True)
    err = np.linalg.norm(D.function_to_coeffs(D.coeffs_to_function(c, spec, grid), spec, grid) - c)
    assert err <= bound * (1 + 1e-9) + 1e-13


def test_uniform_grid_exact_once_band_resolved():
    # products e_k f carry frequencies below 8, resolved by 16 intervals
    spec = D.BasisSpec(9)
    for n in (17, 33, 65, 1024):
        grid = D.Grid.uniform(n)
        c = D.function_to_coeffs(D.coeffs_to_function(COEFFS, spec, grid), spec, grid)
        assert np.max(np.abs(c - COEFFS)) < 1e-14


def test_quadrature_error_decays_second_order():
    spec = D.BasisSpec(9)
    errs = []
    for n in (33, 65, 129, 257, 513):
        grid = warped(n)
        c = D.function_to_coeffs(D.coeffs_to_function(COEFFS, spec, grid), spec, grid)
        errs.append(np.max(np.abs(c - COEFFS)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios > 3.8)


# -- CSV -----------------------------------------------------------------------


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_function_csv(tmp_path):
    grid = D.Grid.uniform(4)
    p = write(tmp_path / "d.csv", "a,b,c,d,y\n1,1,1,1,0.5\n0,0,0,0,1\n2,2,2,2,-1\n")
    data = D.load_dataset_csv(p, D.BasisSpec(3), grid)
    assert len(data) == 3
    assert data.inputs.shape == (3, 3)
    assert np.allclose(data.inputs[:, 0], [1.0, 0.0, 2.0], rtol=0, atol=1e-15)
    assert np.array_equal(data.targets, [0.5, 1.0, -1.0])


@pytest.mark.parametrize("body, row", [
    ("1,2,3,4,5\n1,2,3\n", "row 3"),
    ("1,2,3,4,5\n1,2,nan,4,5\n", "row 3"),
    ("1,2,3,4,5\n1,x,3,4,5\n", "row 3"),
    ("1,2,3,4,inf\n", "row 2"),
])
def test_malformed_rows_named(tmp_path, body, row):
    p = write(tmp_path / "d.csv", "a,b,c,d,y\n" + body)
    with pytest.raises(ParseError, match=row) as info:
        D.load_dataset_csv(p, D.BasisSpec(3), D.Grid.uniform(4))
    assert info.value.field == row


def test_empty_and_header_only(tmp_path):
    with pytest.raises(ParseError):
        D.load_dataset_csv(write(tmp_path / "e.csv", ""))
    with pytest.raises(ParseError):
        D.load_dataset_csv(write(tmp_path / "h.csv", "x1,target\n"))


def test_spec_and_grid_together(tmp_path):
    with pytest.raises(ValueError):
        D.load_dataset_csv(tmp_path / "x.csv", D.BasisSpec(3))


def test_dataset_round_trip(tmp_path, rng):
    data = Dataset(rng.normal(size=(20, 6)) * 10.0 ** rng.integers(-300, 300, size=(20, 6)),
                   rng.normal(size=20))
    D.save_dataset_csv(tmp_path / "d.csv", data)
    back = D.load_dataset_csv(tmp_path / "d.csv")
    assert np.array_equal(back.inputs, data.inputs)
    assert np.array_equal(back.targets, data.targets)
    D.save_dataset_csv(tmp_path / "e.csv", back)
    assert (tmp_path / "d.csv").read_bytes() == (tmp_path / "e.csv").read_bytes()
    assert b"\r" not in (tmp_path / "d.csv").read_bytes()


def test_function_csv_round_trip(tmp_path, rng):
    grid = D.Grid.uniform(8)
    values, targets = rng.normal(size=(4, 8)), rng.normal(size=4)
    D.save_function_csv(tmp_path / "f.csv", values, targets, grid)
    data = D.load_dataset_csv(tmp_path / "f.csv", D.BasisSpec(5), grid)
    assert np.array_equal(data.inputs, D.function_to_coeffs(values, D.BasisSpec(5), grid))
    assert np.array_equal(data.targets, targets)


def test_vector_targets_rejected(tmp_path):
    with pytest.raises(ValidationError):
        D.save_dataset_csv(tmp_path / "d.csv", Dataset(np.zeros((2, 3)), np.zeros((2, 3))))


# -- models and metrics --------------------------------------------------------------


def test_model_round_trip(tmp_path):
    act = A.default_activation("truncated_sum", 5)
    for arch in ("shallow", "deep", "vector"):
        net = N.init_params(N.ArchSpec(arch, 5, act, neurons=3, layers=2, outputs=2), 4)
        D.save_model(tmp_path / "m.json", net)
        back = D.load_model(tmp_path / "m.json")
        x = np.random.default_rng(0).normal(size=(7, 5))
        assert np.array_equal(back(x), net(x))
        assert N.serialize(back) == (tmp_path / "m.json").read_text(encoding="utf-8")


def test_model_bad_document(tmp_path):
    write(tmp_path / "m.json", json.dumps({"architecture": "shallow"}))
    with pytest.raises(ParseError):
        D.load_model(tmp_path / "m.json")


def test_metrics_csv(tmp_path):
    history = [EpochRecord(1, 0.5, None, 1.25), EpochRecord(2, 0.1, 0.3, 2.5)]
    D.save_metrics_csv(tmp_path / "m.csv", history)
    assert (tmp_path / "m.csv").read_text(encoding="utf-8") == "epoch,loss,sup_error\n1,0.5,\n2,0.1,0.3\n"
    D.save_metrics_csv(tmp_path / "w.csv", history, include_wall_ms=True)
    lines = (tmp_path / "w.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "epoch,loss,sup_error,wall_ms"
    assert lines[2] == "2,0.1,0.3,2.500"


def test_sweep_csv(tmp_path):
    D.save_sweep_csv(tmp_path / "s.csv", [(4, 0.25), (64, 0.0)])
    assert (tmp_path / "s.csv").read_text(encoding="utf-8") == "N,sup_deviation\n4,0.25\n64,0.0\n"
