import numpy as np
import pytest

import twrelay.kernel as kernel
from conftest import make_instance
from oracles import projected_gradient_subproblem, random_pd, random_psd_rank
from twrelay.exceptions import ConvergenceError, InfeasibleError, InvalidInputError
from twrelay.kernel import SubproblemSpec, solve_subproblem
from twrelay.linalg import gen_eig_extremes


def tr(m, x):
    return float(np.real(np.trace(m @ x)))


def random_spec_mats(rng, n):
    b1, b2 = random_pd(rng, n), random_pd(rng, n)
    return b1 + random_psd_rank(rng, n, 1), b2 + random_psd_rank(rng, n, 1), b1, b2


def check_certificate(spec, sol, gap_tol=1e-6):
    """Verify the returned dual point proves optimality, from first principles."""
    x, z = sol.x, sol.z
    scale = max(1.0, abs(sol.value))
    assert abs(tr(spec.b1, x) - 1) < 1e-8
    assert np.linalg.eigvalsh(x)[0] > -1e-9
    assert sol.tau == pytest.approx(tr(spec.a2, x), rel=1e-12)
    assert sol.beta == pytest.approx(tr(spec.b2, x), rel=1e-12)
    value = np.log(tr(spec.a1, x)) + np.log(tr(spec.a2, x)) - spec.linear_slope * sol.beta
    assert sol.value == pytest.approx(value, rel=1e-12, abs=1e-12)
    if spec.beta_box is not None:
        lo, hi = spec.beta_box
        assert lo - 1e-8 <= sol.beta <= hi + 1e-8
    assert sol.lam_lo >= 0 and sol.lam_hi >= 0
    # stationarity of the Lagrangian, cone feasibility of the multiplier
    grad = spec.a1 / tr(spec.a1, x) + spec.a2 / tr(spec.a2, x) - spec.linear_slope * spec.b2
    resid = sol.nu * spec.b1 - grad - (sol.lam_lo - sol.lam_hi) * spec.b2 - z
    assert np.linalg.norm(resid) < 1e-7 * max(1.0, np.linalg.norm(grad))
    assert np.linalg.eigvalsh(z)[0] > -1e-9 * max(1.0, np.linalg.norm(z))
    # weak duality: value <= optimum <= dual_value, which needs these pieces to add up
    lo = spec.beta_box[0] if sol.lam_lo > 0 else 0.0
    hi = spec.beta_box[1] if sol.lam_hi > 0 else 0.0
    gap = tr(z, x) + sol.lam_lo * (sol.beta - lo) + sol.lam_hi * (hi - sol.beta)
    assert gap == pytest.approx(sol.duality_gap, abs=1e-9 * scale)
    assert sol.dual_value == pytest.approx(sol.value + sol.duality_gap, abs=1e-12 * scale)
    assert 0 <= sol.duality_gap < gap_tol * scale
    assert sol.kkt_residual < 1e-7


def test_scalar_example():
    sol = solve_subproblem(SubproblemSpec([[2.0]], [[3.0]], [[1.0]], [[1.0]]))
    assert sol.x[0, 0].real == pytest.approx(1.0, rel=1e-12)
    assert sol.value == pytest.approx(np.log(6.0), rel=1e-12)


@pytest.mark.parametrize("slope", [0.0, 0.5, 3.0])
def test_constant_objective(slope, rng):
    b = random_pd(rng, 3)
    sol = solve_subproblem(SubproblemSpec(b, b, b, b, linear_slope=slope))
    assert sol.value == pytest.approx(-slope, abs=1e-9)


def test_matches_projected_gradient_small_batch():
    rng = np.random.default_rng(3)
    mats = [random_spec_mats(rng, 4) for _ in range(6)]
    slopes = [0.0, 0.3, 0.0, 1.0, 0.1, 0.0]
    ref = projected_gradient_subproblem(*(np.array(m) for m in zip(*mats)), slopes, iters=20000)
    for (a1, a2, b1, b2), s, r in zip(mats, slopes, ref):
        spec = SubproblemSpec(a1, a2, b1, b2, linear_slope=s)
        sol = solve_subproblem(spec)
        assert sol.value == pytest.approx(r, rel=1e-5, abs=1e-5)
        check_certificate(spec, sol)


@pytest.mark.parametrize("n", [1, 2, 4, 9])
def test_certificate_on_random_specs(n):
    rng = np.random.default_rng(n)
    for slope in (0.0, 0.7):
        spec = SubproblemSpec(*random_spec_mats(rng, n), linear_slope=slope)
        check_certificate(spec, solve_subproblem(spec))


@pytest.mark.parametrize("where", [0.1, 0.5, 0.9])
def test_box_constrained(where, instance3):
    _, _, pm = instance3
    lo_b, hi_b, _ = gen_eig_extremes(pm.b2, pm.b1)
    span = hi_b - lo_b
    box = (lo_b + (where - 0.05) * span, lo_b + (where + 0.05) * span)
    free = solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=0.4))
    spec = SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=0.4, beta_box=box)
    sol = solve_subproblem(spec)
    check_certificate(spec, sol)
    # removing the box never lowers the optimum
    assert free.value >= sol.value - 1e-9
    if not box[0] <= free.beta <= box[1]:
        assert sol.lam_lo > 0 or sol.lam_hi > 0


def test_box_wider_than_pencil_is_ignored(instance3):
    _, _, pm = instance3
    lo_b, hi_b, _ = gen_eig_extremes(pm.b2, pm.b1)
    free = solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=1.0))
    boxed = solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=1.0,
                                            beta_box=(0.5 * lo_b, 2 * hi_b)))
    assert boxed.value == pytest.approx(free.value, abs=1e-9)


def test_linearized_problem_reproduced(instance3):
    """Slope 1/beta_c plus the constant 1 - log(beta_c) is the linearized objective."""
    _, _, pm = instance3
    beta_c = 0.7
    sol = solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=1 / beta_c))
    t = np.log(beta_c) + (sol.beta - beta_c) / beta_c
    linearized = np.log(tr(pm.a1, sol.x)) + np.log(sol.tau) - t
    assert sol.value + 1 - np.log(beta_c) == pytest.approx(linearized, rel=1e-12)


def test_infeasible_box(instance3):
    _, _, pm = instance3
    lo_b, hi_b, _ = gen_eig_extremes(pm.b2, pm.b1)
    with pytest.raises(InfeasibleError):
        solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, beta_box=(2 * hi_b, 3 * hi_b)))
    with pytest.raises(InfeasibleError):
        solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, beta_box=(0.1 * lo_b, 0.5 * lo_b)))


def test_spec_validation(rng):
    b = random_pd(rng, 2)
    with pytest.raises(InvalidInputError):
        SubproblemSpec(b, b, b, b, beta_box=(2.0, 1.0))
    with pytest.raises(InvalidInputError):
        SubproblemSpec(b, b, b, b, linear_slope=-1.0)
    with pytest.raises(InvalidInputError):
        SubproblemSpec(b, b, b, np.eye(3))
    with pytest.raises(InvalidInputError):
        SubproblemSpec(b, b, b, b, include_log_tau=False)


def test_iteration_cap_surfaces(monkeypatch, instance3):
    _, _, pm = instance3
    monkeypatch.setattr(kernel, "MAX_NEWTON", 3)
    with pytest.raises(ConvergenceError) as info:
        solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2))
    assert np.isfinite(info.value.residual)


def test_newton_steps_reasonable():
    _, _, pm = make_instance(1, m_r=6)
    sol = solve_subproblem(SubproblemSpec(pm.a1, pm.a2, pm.b1, pm.b2, linear_slope=0.2))
    assert sol.newton_steps < 200
