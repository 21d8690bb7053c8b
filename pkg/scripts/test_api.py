"""
Tests for the HTTP API (FastAPI TestClient, no server needed).

Run with: python scripts/test_api.py
"""

import sys
import os

# Add parent directory to path to allow imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fastapi.testclient import TestClient

from app.core.config import settings
from app.main import app
from runner import run_all

client = TestClient(app)
API = settings.api_prefix


def test_root_points_at_docs():
    body = client.get("/").json()
    assert body["docs"] == f"{API}/docs"


def test_catalog_lists_shipped_designs():
    response = client.get(f"{API}/designs/catalog")
    assert response.status_code == 200
    entries = {e["name"]: e for e in response.json()}
    assert set(entries) == {"3-8-4-1", "fano"}
    assert entries["3-8-4-1"]["b"] == 14
    assert entries["3-8-4-1"]["lambda"] == 1


def test_design_params_and_unknown_name():
    body = client.get(f"{API}/designs/3-8-4-1/params").json()
    assert body["lambda_s"] == {"0": 14, "1": 7, "2": 3, "3": 1}
    assert body["lambda_s_t"] == {"1": 2, "2": 2, "3": 1}
    assert client.get(f"{API}/designs/nope/params").status_code == 404


def test_design_verify_reports_violation():
    blocks = [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 5]]
    response = client.post(f"{API}/designs/verify", json={"v": 4, "t": 2, "lambda": 1, "blocks": blocks})
    assert response.status_code == 200
    body = response.json()
    assert body["valid"] is False
    assert "outside" in body["violation"]
    empty = client.post(f"{API}/designs/verify", json={"v": 4, "t": 2, "lambda": 1, "blocks": []})
    assert empty.status_code == 400


def test_hppda_build_defaults():
    response = client.post(f"{API}/hppda/build", json={})
    assert response.status_code == 200
    body = response.json()
    assert (body["F"], body["Z_c"], body["Z"]) == (14, 7, 11)
    assert body["feasibility"]["D"] == 12
    assert all(check["match"] for check in body["checks"])
    assert body["B"]["2"] == "*|*|(123,1)_1\n*|(123,1)_1|*\n(123,1)_1|*|*"


def test_hppda_build_rejects_out_of_range_a():
    response = client.post(f"{API}/hppda/build", json={"a": "1.1=5"})
    assert response.status_code == 400
    assert "outside" in response.json()["detail"]


def test_hppda_verify_one_and_all():
    one = client.post(f"{API}/hppda/verify", json={"online": [2, 4, 6]}).json()
    assert one[0]["online"] == [2, 4, 6]
    assert all(m["containment_ok"] and m["availability_ok"] for m in one[0]["per_j"])
    everything = client.post(f"{API}/hppda/verify", json={}).json()
    assert len(everything) == 56
    bad = client.post(f"{API}/hppda/verify", json={"online": [1, 2]})
    assert bad.status_code == 400


def test_scheme_rate():
    body = client.post(f"{API}/scheme/rate", json={}).json()
    assert body["memory_ratio"] == "7/12"
    assert body["rate"] == "3"
    assert (body["D"], body["k_o"]) == (12, 18)
    assert body["rate_per_user"] == "1/6"


def test_scheme_simulate():
    response = client.post(f"{API}/scheme/simulate", json={"online": [2, 4, 6]})
    assert response.status_code == 200
    body = response.json()
    assert body["transmissions"] == 36
    assert body["all_decoded"] is True
    assert len(body["stranded"]) == 10
    assert body["users_csv"].count("\n") == 19
    short = client.post(f"{API}/scheme/simulate", json={"online": [2, 4, 6], "n": 5})
    assert short.status_code == 400


def test_sweep_endpoint():
    response = client.post(
        f"{API}/sweep",
        json={"proposed_a": "1.1=2,2.1=1,1.2=1", "crr_a": "1=2,2=2;1=2,2=1", "rr_a": "1=2,2=2"},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["rows"] == 1 + 3 + 3 + 2 + 1
    assert body["csv"].startswith("scheme,params,m_over_n,rate,k_o,rate_per_user")
    assert body["dominance"]["holds"] is True
    assert client.post(f"{API}/sweep", json={"design": "catalog:nope"}).status_code == 400


TESTS = [
    test_root_points_at_docs,
    test_catalog_lists_shipped_designs,
    test_design_params_and_unknown_name,
    test_design_verify_reports_violation,
    test_hppda_build_defaults,
    test_hppda_build_rejects_out_of_range_a,
    test_hppda_verify_one_and_all,
    test_scheme_rate,
    test_scheme_simulate,
    test_sweep_endpoint,
]


def main():
    return run_all("API Tests", TESTS)


if __name__ == "__main__":
    exit(main())
