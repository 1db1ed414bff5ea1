import numpy as np
import pytest

import cartex


def test_frame_is_tight():
    rng = np.random.default_rng(0)
    x = rng.random((20, 24))
    c = cartex.analyze(x)
    assert c.shape == (9, 20, 24)
    assert np.max(np.abs(cartex.synthesize(c) - x)) <= 1e-12


def test_laplacian_rows_sum_to_zero():
    img = cartex.preset(0, 32)["mix"]
    g = cartex.GraphParams()
    g.window = 15
    rows, cols, vals = cartex.laplacian_triplets(img, g)
    sums = np.bincount(rows, weights=vals, minlength=img.size)
    diag = vals[rows == cols]
    assert np.all(diag == 1.0)
    assert np.all(vals[rows != cols] <= 0.0)
    isolated = np.bincount(rows, minlength=img.size) == 1
    assert np.max(np.abs(sums[~isolated])) <= 1e-12


def test_noiseless_decomposition_sums_to_input():
    truth = cartex.preset(2, 48)
    r = cartex.decompose(truth["mix"], mode="noiseless")
    assert r["cartoon"].shape == (48, 48)
    assert r["constraint_met"]
    assert np.max(np.abs(truth["mix"] - r["cartoon"] - r["texture"])) <= 1e-6
    assert r["diagnostics"][0]["iteration"] == 1


def test_noisy_mode_improves_psnr():
    truth = cartex.preset(0, 48)["mix"]
    noisy = cartex.add_noise(truth, 0.1, 7)
    r = cartex.decompose(noisy, mode="noisy", sigma=0.1)
    assert cartex.psnr(r["cartoon"] + r["texture"], truth) > cartex.psnr(noisy, truth) + 3.0


def test_inpaint_mode_uses_mask():
    truth = cartex.preset(1, 48)["mix"]
    mask = cartex.random_mask(48, 48, 0.4, 3)
    assert mask.dtype == bool and mask.mean() == pytest.approx(0.6, abs=0.01)
    r = cartex.decompose(np.where(mask, truth, 0.0), mode="inpaint", mask=mask)
    assert cartex.psnr(r["residual"], truth) > cartex.psnr(np.where(mask, truth, 0.0), truth) + 5.0


def test_solver_parameters_round_trip():
    p = cartex.SolverParams.defaults_for("noisy")
    p.iterations = 3
    p.validate()
    p.gamma = 0.0
    with pytest.raises(ValueError):
        p.validate()
    with pytest.raises(ValueError):
        cartex.decompose(np.zeros((8, 8, 2)))
