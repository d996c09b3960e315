import numpy as np
import pytest

from nlkaczmarz import (
    BlockSelection,
    BreakdownError,
    IterateState,
    Method,
    NonlinearSystem,
    SolverConfig,
    average_block_step,
    make_brown,
    make_h_equation,
    newton_step,
    nrk_step,
    rbcnk_step,
    run,
    select_ngabk,
)

from conftest import make_affine


def test_single_affine_equation_one_projection():
    sys = make_affine(np.array([[1.0]]), np.array([5.0]))
    state = IterateState.at(sys, np.zeros(1))
    out = average_block_step(sys, state, select_ngabk(state.fx))
    assert out.x == pytest.approx([5.0])
    assert out.k == 1


def test_diagonal_affine_hand_example():
    # fx = (-1, -2) at the origin; the greedy rule keeps only row 1,
    # and the single-row projection solves that coordinate exactly
    sys = make_affine(np.eye(2), np.array([1.0, 2.0]))
    state = IterateState.at(sys, np.zeros(2))
    sel = select_ngabk(state.fx)
    assert list(sel.indices) == [1]
    assert sel.threshold == pytest.approx(13.0 / 20.0)
    out = average_block_step(sys, state, sel)
    assert out.x == pytest.approx([0.0, 2.0])


@pytest.mark.parametrize("index", [0, 2, 4])
def test_singleton_block_reduces_to_nrk(index, rng):
    sys = make_brown(5)
    x = rng.uniform(0.3, 1.4, size=5)
    state = IterateState.at(sys, x)
    sel = BlockSelection(indices=np.array([index], dtype=np.intp), threshold=0.0)
    blocked = average_block_step(sys, state, sel)
    single = nrk_step(sys, state, rng, index=index)
    assert np.allclose(blocked.x, single.x, rtol=1e-14, atol=0.0)


def test_eta_identity(rng):
    # eta^T(-f) == sum of selected f_i^2 == ||eta||^2
    for _ in range(50):
        fx = rng.normal(size=rng.integers(2, 40))
        sel = select_ngabk(fx)
        eta = np.zeros(len(fx))
        eta[sel.indices] = -fx[sel.indices]
        s2 = float((fx[sel.indices] ** 2).sum())
        assert eta @ (-fx) == pytest.approx(s2, rel=1e-12)
        assert eta @ eta == pytest.approx(s2, rel=1e-12)


def test_average_block_step_rejects_empty_selection():
    sys = make_brown(3)
    state = IterateState.at(sys, 0.5 * np.ones(3))
    with pytest.raises(ValueError):
        average_block_step(sys, state, BlockSelection(np.array([], dtype=np.intp), 0.0))


def test_breakdown_on_annihilated_direction():
    # f(x) = x^2 - 1 has zero gradient at x = 0 with residual -1
    sys = NonlinearSystem(1, 1, lambda x: x * x - 1.0, lambda i, x: 2.0 * x)
    state = IterateState.at(sys, np.zeros(1))
    sel = BlockSelection(np.array([0], dtype=np.intp), 0.0)
    with pytest.raises(BreakdownError):
        average_block_step(sys, state, sel)
    report = run(sys, np.zeros(1), SolverConfig(method=Method.NGABK))
    assert report.status.value == "breakdown"
    assert report.iters == 0


def test_nrk_affine_row_zeroed_after_step(rng):
    A = rng.normal(size=(4, 3))
    sys = make_affine(A, rng.normal(size=4))
    state = IterateState.at(sys, np.zeros(3))
    out = nrk_step(sys, state, rng, index=2)
    assert out.fx[2] == pytest.approx(0.0, abs=1e-12)


def test_nrk_deterministic_under_seed():
    sys = make_h_equation(20, c=0.9)
    a = run(sys, np.zeros(20), SolverConfig(method=Method.NRK, seed=42))
    b = run(sys, np.zeros(20), SolverConfig(method=Method.NRK, seed=42))
    assert a.iters == b.iters
    assert a.history == b.history
    c = run(sys, np.zeros(20), SolverConfig(method=Method.NRK, seed=43))
    assert c.history != a.history


def test_rbcnk_singleton_reduces_to_nrk(rng):
    sys = make_brown(5)
    x = rng.uniform(0.3, 1.4, size=5)
    state = IterateState.at(sys, x)
    sel = BlockSelection(indices=np.array([3], dtype=np.intp), threshold=0.0)
    assert np.allclose(rbcnk_step(sys, state, sel).x,
                       nrk_step(sys, state, rng, index=3).x, rtol=1e-12)


def test_rbcnk_full_affine_block_is_newton(rng):
    A = rng.normal(size=(4, 4))
    b = rng.normal(size=4)
    sys = make_affine(A, b)
    state = IterateState.at(sys, np.zeros(4))
    sel = BlockSelection(indices=np.arange(4, dtype=np.intp), threshold=0.0)
    out = rbcnk_step(sys, state, sel)
    assert np.allclose(out.x, np.linalg.solve(A, b), rtol=1e-10)


def test_rbcnk_rank_deficient_block_minimum_norm():
    A = np.array([[1.0, 0.0], [1.0, 0.0]])  # duplicated row
    sys = make_affine(A, np.array([2.0, 2.0]))
    state = IterateState.at(sys, np.zeros(2))
    sel = BlockSelection(indices=np.arange(2, dtype=np.intp), threshold=0.0)
    out = rbcnk_step(sys, state, sel)
    assert out.x == pytest.approx([2.0, 0.0])


def test_newton_affine_one_step(rng):
    A = rng.normal(size=(3, 3))
    b = rng.normal(size=3)
    sys = make_affine(A, b)
    out = newton_step(sys, IterateState.at(sys, np.zeros(3)))
    assert np.allclose(out.x, np.linalg.solve(A, b), rtol=1e-10)


def test_newton_step_is_zero_at_root():
    sys = make_brown(4)
    out = newton_step(sys, IterateState.at(sys, np.ones(4)))
    assert np.allclose(out.x, np.ones(4), atol=1e-12)


def test_newton_quadratic_residual_decrease():
    sys = make_h_equation(10, c=0.9)
    state = IterateState.at(sys, np.zeros(10))
    r = [float(state.fx @ state.fx)]
    for _ in range(3):
        state = newton_step(sys, state)
        r.append(float(state.fx @ state.fx))
    # squared residual should square (plus constant) each step
    assert r[1] < 0.1 * r[0]
    assert r[2] < 10.0 * r[1] ** 2
    assert r[3] < 10.0 * r[2] ** 2
