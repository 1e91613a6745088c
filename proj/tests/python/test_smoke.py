import math

import numpy as np
import pytest

import aasm


def test_momentum_and_restart():
    t, beta = aasm.momentum_update(1.0)
    assert t == pytest.approx((1 + math.sqrt(5)) / 2)
    assert beta == 0.0
    u_old = np.zeros(2)
    u_new = np.array([1.0, 0.0])
    assert aasm.restart_test(np.array([2.0, 0.0]), u_new, u_old)
    assert not aasm.restart_test(np.array([0.5, 0.0]), u_new, u_old)


def test_problem_energy_and_prox():
    p = aasm.Problem.create(problem="obstacle", n=16)
    assert p.kind == "obstacle"
    u0 = p.initial_guess()
    assert u0.shape == (p.num_dofs,)
    assert p.is_feasible(u0)
    assert math.isfinite(p.energy(u0))
    x = np.random.default_rng(0).uniform(-2, 2, p.num_dofs)
    px = p.prox(x)
    assert p.is_feasible(px)
    np.testing.assert_array_equal(p.prox(px), px)
    assert p.energy(np.full(p.num_dofs, 0.5)) == math.inf
    with pytest.raises(ValueError):
        p.energy(np.zeros(3))


def test_gradient_matches_difference_quotient():
    p = aasm.Problem.create(problem="slap", s=4, n=8)
    rng = np.random.default_rng(1)
    u = rng.uniform(-1, 1, p.num_dofs)
    d = rng.uniform(-1, 1, p.num_dofs)
    eps = 1e-6
    fd = (p.energy(u + eps * d) - p.energy(u - eps * d)) / (2 * eps)
    assert p.gradient(u) @ d == pytest.approx(fd, rel=1e-5)


def test_run_experiment_accelerated_is_faster():
    kw = dict(problem="slap", s=4, n=16, N=4, overlap=2, level="two", max_iter=300, tol=1e-8)
    plain = aasm.run_experiment(solver="asm", **kw)
    accel = aasm.run_experiment(solver="accel_asm", **kw)
    assert plain["reference_energy"] == accel["reference_energy"]
    it_plain = aasm.iterations_to_tol(plain["energy_error"], 1e-8)
    it_accel = aasm.iterations_to_tol(accel["energy_error"], 1e-8)
    assert it_accel is not None and it_plain is not None
    assert it_accel < it_plain
    assert list(accel["iter"]) == list(range(len(accel["iter"])))
    assert accel["solution"].shape == (225,)


def test_reference_cache(tmp_path):
    first = aasm.compute_reference(problem="poisson", n=8, ref_dir=str(tmp_path))
    assert first["generator"] == "direct"
    second = aasm.compute_reference(problem="poisson", n=8, ref_dir=str(tmp_path))
    np.testing.assert_array_equal(first["u"], second["u"])
    assert len(list(tmp_path.iterdir())) == 1


def test_bad_configuration():
    with pytest.raises(ValueError):
        aasm.run_experiment(problem="slap", solver="pcg")
    assert aasm.iterations_to_tol(np.array([1.0, 1e-3, 1e-9]), 1e-8) == 2
    assert aasm.iterations_to_tol(np.array([1.0]), 1e-8) is None
