import numpy as np
import pytest
from fastapi.testclient import TestClient

from scatterlab.qstate import fidelity, mems, singlet, werner
from scatterlab.serialize import density_matrix_from_obj, density_matrix_to_obj
from scatterlab.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_singlet_endpoint(client):
    body = client.get("/states/singlet").json()
    rho = density_matrix_from_obj(body)
    assert np.max(np.abs(rho - singlet())) <= 1e-12


@pytest.mark.parametrize("p,t,sl", [(0.8, 0.49, 0.36), (0.5, 0.0625, 0.75)])
def test_werner_and_measures(client, p, t, sl):
    state = client.post("/states/werner", json={"p": p}).json()
    meas = client.post("/measures", json=state).json()
    assert meas["tangle"] == pytest.approx(t, abs=1e-9)
    assert meas["linear_entropy"] == pytest.approx(sl, abs=1e-9)
    assert meas["classification"] == "on_werner"


def test_werner_rejects_bad_p(client):
    assert client.post("/states/werner", json={"p": 1.5}).status_code == 422


def test_mems_endpoint(client):
    state = client.post("/states/mems", json={"c": 0.8}).json()
    rho = density_matrix_from_obj(state)
    assert np.max(np.abs(rho - mems(0.8))) <= 1e-12


def test_invalid_density_matrix_is_422(client):
    bad = {"basis": "HV-product", "matrix": [[[1.0, 0.0]] * 4] * 4}
    resp = client.post("/measures", json=bad)
    assert resp.status_code == 422
    assert "trace" in resp.json()["detail"]


def test_gw_fit_endpoint(client):
    state = client.post(
        "/states/generalized-werner",
        json={"p": 0.7, "alpha": 0.3, "beta": 1.0, "gamma": 2.0},
    ).json()
    fit = client.post("/fit/generalized-werner", json={"state": state}).json()
    assert fit["fidelity"] >= 1.0 - 1e-6
    assert fit["p"] == pytest.approx(0.7, abs=1e-4)


def test_decompose_endpoint(client):
    body = client.post(
        "/mueller/decompose",
        json={"matrix": [[1, 0, 0, 0], [0, 0.8, 0, 0], [0, 0, 0.8, 0], [0, 0, 0, 0.8]]},
    ).json()
    weights = [p["weight"] for p in body["pairs"]]
    assert weights == pytest.approx([0.85, 0.05, 0.05, 0.05], abs=1e-12)
    assert body["trace_preserving"] is True


def test_decompose_nonphysical_is_422(client):
    resp = client.post(
        "/mueller/decompose",
        json={"matrix": [[1, 0, 0, 0], [0, 1.2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]},
    )
    assert resp.status_code == 422


def test_physicality_endpoint(client):
    resp = client.post(
        "/mueller/physical",
        json={"matrix": [[1, 0, 0, 0], [0, 1.2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]},
    ).json()
    assert resp["physical"] is False
    assert resp["min_coherency_eigenvalue"] < 0


def test_scatter_endpoint_type_iii(client):
    body = client.post(
        "/scatter", json={"kind": "III", "delta": 0.2, "d": [0.6, 0, 0]}
    ).json()
    assert body["classification"] == "sub_werner"
    density_matrix_from_obj(body["state"])


def test_scatter_missing_params_is_422(client):
    assert client.post("/scatter", json={"kind": "II", "delta": 0.2}).status_code == 422


def test_sweep_endpoint_deterministic(client):
    req = {"kind": "I", "samples": 5, "seed": 11}
    a = client.post("/sweep", json=req).json()
    b = client.post("/sweep", json=req).json()
    assert a == b
    assert all(rec["classification"] == "on_werner" for rec in a)


def test_curve_endpoint(client):
    pts = client.get("/curves/werner", params={"samples": 3}).json()
    assert pts[1] == {"param": 0.5, "s_l": 0.75, "t": 0.0625}
    assert client.get("/curves/bogus").status_code == 422


def test_tomography_endpoints_roundtrip(client):
    state = density_matrix_to_obj(werner(0.8))
    counts = client.post(
        "/tomography/simulate",
        json={"state": state, "counts_per_setting": 10000.0},
    ).json()
    assert counts["counts"]["HH"] == pytest.approx(500.0, abs=1e-6)

    rec = client.post("/tomography/reconstruct", json=counts).json()
    assert rec["convergence"]["converged"] is True
    rho = density_matrix_from_obj(rec["state"])
    assert fidelity(rho, werner(0.8)) >= 0.9999
    assert rec["tangle"] == pytest.approx(0.49, abs=1e-4)

    errs = client.post(
        "/tomography/errors", json={"counts": counts, "trials": 5, "seed": 1}
    ).json()
    assert errs["trials"] == 5
    assert errs["clipped"]["t_hi"] <= 1.0


def test_counts_missing_setting_is_422(client):
    resp = client.post("/tomography/reconstruct", json={"counts": {"HH": 5.0}})
    assert resp.status_code == 422
