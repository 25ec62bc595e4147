import json
import math
import os

import numpy as np
import pytest

import hybridlens as hl

CONFIGS = os.environ.get(
    "HYBRIDLENS_CONFIG_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs")
)


def test_refraction_keeps_tangential_component():
    x = np.array([0.3, -0.2, 1.0])
    x /= np.linalg.norm(x)
    nu = np.array([0.0, 0.1, 1.0])
    nu /= np.linalg.norm(nu)
    m, _ = hl.refract(x, nu, 1.5)
    m = np.asarray(m)
    assert abs(np.linalg.norm(m) - 1.0) < 1e-14
    assert np.linalg.norm(np.cross(x, nu) - 1.5 * np.cross(m, nu)) < 1e-13
    flat, _ = hl.refract_metasurface(x, nu, 1.5, [0.0, 0.0, 0.0], 1.0)
    assert np.array_equal(np.asarray(flat), m)


def test_total_internal_reflection_raises():
    with pytest.raises(hl.Error):
        hl.refract([0.99, 0.0, 0.141], [0.0, 0.0, 1.0], 0.5)


def test_lemma_residual_small():
    assert hl.lemma_residual([0.3, -0.4], 1.5) < 1e-12


def test_rotation_not_admissible_dilation_is():
    assert hl.admissibility(hl.TargetMap.dilation(0.2), [-0.5, -0.5], [0.5, 0.5])["passed"]
    r = hl.admissibility(hl.TargetMap.rotation(0.1), [-0.5, -0.5], [0.5, 0.5])
    assert not r["passed"]
    curl = next(e for e in r["entries"] if e["id"] == "curl_S")
    assert abs(curl["value"] - 0.2) < 1e-10


def test_solve_rho_flat_for_identity():
    c = hl.OpticalConstants()
    d = hl.solve_rho(hl.TargetMap.identity(), c, [-0.5, -0.5], [0.5, 0.5], n=11, z0=0.5)
    assert d["rho"].shape == (11, 11)
    assert np.all(d["rho"] == c.a - 0.5)


def test_verdict_and_trace():
    c = hl.OpticalConstants()
    assert hl.existence_verdict(hl.TargetMap.dilation(0.2), c)["passed"]
    v = hl.existence_verdict(hl.TargetMap.horizontal(0.1, 1.2, 0.1), c)
    assert v["failing"] == ["ζ⊥ ≠ 0"]
    s = hl.trace_dilation(0.2, c, n=101, rays=100, mode="analytic")
    assert s["rays"] == 100
    assert s["max_direction_error"] < 1e-6


def test_bad_constants_rejected():
    with pytest.raises(hl.Error):
        hl.OpticalConstants(n1=1.5, n2=1.0)


def test_cli_in_process(tmp_path):
    code, out, _ = hl.run_cli(["check", "--config", os.path.join(CONFIGS, "dilation.json"), "--out", str(tmp_path)])
    assert code == 0
    assert json.loads((tmp_path / "check.json").read_text())["passed"]
    assert hl.run_cli(["check", "--config", str(tmp_path / "missing.json")])[0] == 2
    assert math.isfinite(hl.deviation_lower_bound(1.5))
