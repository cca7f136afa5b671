import json
import os

import numpy as np
import pytest

import mpmiqp

FIXTURES = os.environ.get("MPMIQP_FIXTURES", os.path.join(os.path.dirname(__file__), "..", "fixtures"))


def toy():
    return mpmiqp.ProjectedMIQP(mpmiqp.FactorizableSpec([1.0, 1.0], [2.0, 1.0]), [-2.0, -2.0], [0.5, 0.5])


def test_toy_solution():
    sol = mpmiqp.solve(toy())
    assert sol["objective"] == pytest.approx(-0.5)
    assert sol["support"] == [1]
    assert sol["path"] == [0, 2, 3]
    assert mpmiqp.enumerate_supports(toy())["objective"] == pytest.approx(-0.5)


def test_fixture_file():
    m = mpmiqp.load_instance_file(os.path.join(FIXTURES, "toy_n2.json"))
    assert m.n == 2
    assert mpmiqp.solve(m)["objective"] == pytest.approx(-0.5)


def test_submatrix_inverse_matches_numpy():
    spec = mpmiqp.FactorizableSpec([1.0, 2.0, 4.0], [5.0, 4.0, 2.0])
    q = spec.dense()
    w = spec.submatrix_inverse([0, 2])
    idx = [0, 2]
    np.testing.assert_allclose(w[np.ix_(idx, idx)], np.linalg.inv(q[np.ix_(idx, idx)]), atol=1e-14)
    assert w[1, 1] == 0.0


def test_block_spec_and_threads():
    u1 = np.array([[1.0, 1.0], [1.0, 2.0]])
    U = [u1, 2 * u1, 4 * u1, 8 * u1]
    V = [np.array(v, dtype=float) for v in ([[4, 1], [1, 5]], [[3, 1], [1, 4]], [[2, 1], [1, 3]], [[1, 1], [1, 2]])]
    spec = mpmiqp.BlockFactorizableSpec(U, V)
    assert spec.assumption_holds()
    assert np.all(np.linalg.eigvalsh(spec.dense()) > 0)
    m = mpmiqp.ProjectedMIQP(spec, list(np.linspace(-3, 3, 8)), [0.2] * 4, 1.0)
    a = mpmiqp.solve(m)
    b = mpmiqp.solve(m, threads=2)
    assert a["objective"] == b["objective"]
    assert a["objective"] == pytest.approx(mpmiqp.enumerate_supports(m)["objective"], rel=1e-10, abs=1e-10)


def test_calcium_round_trip_and_export():
    text = mpmiqp.gen_calcium(40, seed=3)
    assert text == mpmiqp.gen_calcium(40, seed=3)
    m = mpmiqp.load_instance(text)
    sol = mpmiqp.solve(m)
    assert np.isfinite(sol["objective"])
    model = json.loads(mpmiqp.build_socp(m))
    assert len(model["cones"]) == 40 * 41 // 2


def test_errors_map_to_python():
    bad = mpmiqp.ProjectedMIQP(mpmiqp.FactorizableSpec([1.0, 1.0], [1.0, 2.0]), [0.0, 0.0], [0.0, 0.0])
    with pytest.raises(mpmiqp.AssumptionError):
        mpmiqp.solve(bad)
    with pytest.raises(ValueError):
        mpmiqp.load_instance('{"kind": "nope"}')


def test_cli_in_process():
    code, out, _ = mpmiqp.run_cli(["solve", os.path.join(FIXTURES, "toy_n2.json")])
    assert code == 0
    assert json.loads(out)["support"] == [2]
    assert mpmiqp.run_cli(["gen", "calcium"])[0] == 2
