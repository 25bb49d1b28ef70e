import math

import numpy as np
import pytest

import oddvmc

EXACT_H = {
    "molecule": "H",
    "ansatz": {"orbital_kind": "exponential", "primitives": 1, "exponent_min": 1.0, "exponent_max": 1.0},
    "batch": 64,
    "burn_in": 50,
    "steps": 20,
    "seed": 1,
}


def test_presets():
    names = oddvmc.molecule_presets()
    for n in ("H", "He", "H2", "LiH"):
        assert n in names


def test_exact_hydrogen_local_energy():
    a = oddvmc.Ansatz(EXACT_H)
    p = a.init_params(0)
    assert p.shape == (a.n_params,)
    r = a.sample(p, 200, seed=3)
    assert r.shape == (200, 3)
    for x in r[:50]:
        assert abs(a.local_energy(x, p)["total"] + 0.5) < 1e-10


def test_lih_antisymmetry():
    a = oddvmc.Ansatz({"molecule": "LiH", "ansatz": {"determinants": 2, "readout": "explicit", "odd_hidden": [4]}})
    p = a.init_params(1)
    r = a.sample(p, 1, seed=2)[0]
    s, l = a.log_psi(r, p)
    swapped = r.copy()
    swapped[0:3], swapped[3:6] = r[3:6], r[0:3].copy()  # electrons 0 and 1 are both spin up
    s2, l2 = a.log_psi(swapped, p)
    assert s2 == -s
    assert abs(l2 - l) < 1e-10
    assert len(a.determinants(r, p)) == 2
    assert a.grad_log_psi(r, p).shape == (a.n_params,)


def test_train_matches_across_threads():
    cfg = dict(EXACT_H, ansatz={"primitives": 2})
    a = oddvmc.train(cfg)
    b = oddvmc.train(dict(cfg, threads=2))
    assert len(a["records"]) == 20
    assert [r["energy"] for r in a["records"]] == [r["energy"] for r in b["records"]]
    assert np.array_equal(a["params"], b["params"])
    assert oddvmc.config_hash(cfg) == oddvmc.config_hash(dict(cfg, threads=2))


def test_config_errors_name_the_path():
    with pytest.raises(oddvmc.ConfigError, match="ansatz.readuot"):
        oddvmc.resolve_config({"molecule": "H", "ansatz": {"readuot": "linear"}})
    with pytest.raises(ValueError):
        oddvmc.Ansatz({"molecule": "Xe"})


def test_cusp_and_checks():
    a = oddvmc.Ansatz(EXACT_H)
    p = a.init_params(0)
    scan = a.cusp_scan(p, 0, [1e-2, 1e-5], np.zeros(3))
    assert math.isclose(scan[-1]["averaged"], 1.0, rel_tol=1e-9)
    reports = oddvmc.check("theorem1", trials=20)
    assert reports and all(r["pass"] for r in reports)


def test_run_writes_artifacts(tmp_path):
    out = oddvmc.run(EXACT_H, tmp_path / "h")
    assert abs(out["energy"] + 0.5) < 1e-9
    assert not out["nan_flag"]
    assert (tmp_path / "h" / "summary.csv").exists()
    assert (tmp_path / "h" / "config.sha1").read_text().strip() == out["config_hash"]
