"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line (visible without ``-s``) and then
asserts.  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math

import numpy as np
import pytest

from swarmcert.analysis import center_matrix, energy_drift, ring_metrics, tail_bounds
from swarmcert.certify import (
    GUARD_BAND,
    Region,
    check_params,
    dispersal_window,
    lyapunov_derivative,
    lyapunov_values,
    manifold_energies,
    ramp,
    ramp_jacobian,
    sample_manifold_state,
    select_params,
    bounded_coupling_speed_bound,
    verify_decrease,
)
from swarmcert.errors import CertificateFailure
from swarmcert.integrate import IntegratorConfig, integrate
from swarmcert.linalg import inf_norm, projection_pair
from swarmcert.model import LienardState, Propulsion, flux_F, flux_jacobian, to_lienard, vector_field
from swarmcert.scenarios import build_scenario, helix_reference


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{criterion}] {detail}")
        assert ok, detail

    return emit


def simulate(model, state0, system="position", **cfg):
    config = IntegratorConfig(**{"method": "embedded45", "abs_tol": 1e-8, "rel_tol": 1e-8, **cfg})
    return integrate(vector_field(model, system), np.stack(state0), config, system=system)


def random_psd(rng, n, kernel_dim):
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.concatenate([np.zeros(kernel_dim), rng.uniform(0.1, 10.0, n - kernel_dim)])
    return (V * lam) @ V.T


def test_01_matrix_identities(report):
    rng = np.random.default_rng(2024)
    worst = [0.0, 0.0, 0.0]
    ok = True
    for _ in range(100):
        n = int(rng.integers(1, 13))
        k = int(rng.integers(0, min(3, n) + 1))
        A = random_psd(rng, n, k)
        pp = projection_pair(A)
        errs = (
            inf_norm(pp.Q @ pp.Q - pp.Q),
            inf_norm(A @ pp.Q) / max(1.0, inf_norm(A)),
            inf_norm(pp.S_inv @ A - (np.eye(n) - pp.Q)),
        )
        worst = [max(w, e) for w, e in zip(worst, errs)]
        ok &= pp.kernel_dim == k and errs[0] <= 1e-10 and errs[1] <= 1e-10 and errs[2] <= 1e-9
    report("1 matrix identities", ok,
           f"100 matrices; max |Q^2-Q|={worst[0]:.2e} |AQ|/max(1,|A|)={worst[1]:.2e} |SinvA-(I-Q)|={worst[2]:.2e}")


def test_02_helix_sharpness(report):
    sc = build_scenario("helix")
    traj = simulate(sc.model, (sc.state0.r, sc.state0.v), method="rk4", h=1e-3, t_end=50.0, sample_every=0.5)
    exact = np.array([helix_reference(0.6, 0.8, 1.0, t).r for t in traj.times])
    err = float(np.abs(traj.r - exact).max())
    slope = tail_bounds(sc.model, traj, window_fraction=1.0).center_drift_slope
    report("2 helix sharpness", err <= 1e-6 and abs(slope - 0.6) <= 1e-4,
           f"position error {err:.2e}, center drift slope {slope:.8f}")


@pytest.mark.parametrize("name,overrides", [
    ("parabolic", {"n": 5}), ("example2", {"n": 30}), ("nearest_neighbor_ring", {"n": 8}),
])
def test_03_energy_conservation(report, name, overrides):
    sc = build_scenario(name, overrides)
    ls = to_lienard(sc.model, sc.state0.r, sc.state0.v)
    # a second start off the position-derived manifold, so E(0) != 0
    kick = np.random.default_rng(3).standard_normal(ls.y.shape)
    drifts = []
    for y0 in (ls.y, ls.y + kick):
        traj = simulate(sc.model, (ls.x, y0), "lienard", abs_tol=1e-9, rel_tol=1e-9, t_end=100.0, sample_every=0.5)
        drifts.append(energy_drift(sc.model, traj))
    report(f"3 energy conservation {name}({overrides['n']})", max(drifts) <= 1e-6,
           f"max |E(t)-E(0)| = {drifts[0]:.2e} (E=0 start), {drifts[1]:.2e} (E!=0 start)")


def flow_fd(model, params, Y, h=1e-5):
    # |y| reaches a few hundred on the sampled region, so the arcs must be short
    f = vector_field(model, "lienard")
    step = IntegratorConfig(t_end=h, sample_every=h, method="rk4", h=h / 4)
    fwd = integrate(f, Y, step).states[-1]
    back = integrate(lambda t, u: -f(t, u), Y, step).states[-1]
    return (lyapunov_values(model, params, fwd[0], fwd[1]) - lyapunov_values(model, params, back[0], back[1])) / (2 * h)


@pytest.mark.parametrize("n", [2, 3])
def test_04_lyapunov_decrease(report, n):
    model = build_scenario("parabolic", {"n": n}).model
    rng = np.random.default_rng(40 + n)
    details, ok = [], True
    for trial in range(2):
        x0, y0 = rng.uniform(-2, 2, (2, n, 2))
        E = manifold_energies(model, LienardState(0.0, x0, y0))
        params = select_params(model, E)
        conds = check_params(model, params)
        try:
            cert = verify_decrease(model, E, params, 10_000, rng_seed=trial)
            max_vdot = cert.max_Vdot_outside_box
        except CertificateFailure as exc:
            max_vdot = exc.certificate.max_Vdot_outside_box
        worst_fd, arcs, seed = 0.0, 0, 0
        region = Region(3 * params.a, 2 * params.b)
        while arcs < 100:
            s = sample_manifold_state(model, E, region, rng_seed=1000 * trial + seed)
            seed += 1
            if np.min(np.abs(np.linalg.norm(s.x, axis=-1) - params.a)) < 0.05 * params.a:
                continue  # the arc would cross the kink of V
            exact = lyapunov_derivative(model, E, params, s)
            fd = flow_fd(model, params, np.stack([s.x, s.y]))
            worst_fd = max(worst_fd, abs(fd - exact) / max(1.0, abs(exact)))
            arcs += 1
        ok &= all(conds.values()) and max_vdot <= -1.0 and worst_fd <= 1e-4
        details.append(f"|E|={inf_norm(E.E):.3f} conds={all(conds.values())} max dV/dt={max_vdot:.3f} "
                       f"fd rel err={worst_fd:.1e}")
    report(f"4 Lyapunov decrease parabolic({n})", ok, "; ".join(details))


def test_05_ultimate_boundedness(report):
    reports, bounds = [], None
    for seed in range(20):
        sc = build_scenario("parabolic", {"n": 30, "spread": 100.0, "seed": seed})
        if bounds is None:
            E = manifold_energies(sc.model, to_lienard(sc.model, sc.state0.r, sc.state0.v))
            bounds = verify_decrease(sc.model, E, select_params(sc.model, E), 2000).bounds
        traj = simulate(sc.model, (sc.state0.r, sc.state0.v), abs_tol=1e-6, rel_tol=1e-6, t_end=400.0, sample_every=0.5)
        reports.append(tail_bounds(sc.model, traj, window_fraction=0.5))
    speed = np.array([r.sup_speed for r in reports])
    accel = np.array([r.sup_accel for r in reports])
    offset = np.array([r.sup_center_offset for r in reports])
    finite = all(np.isfinite(a).all() for a in (speed, accel, offset))
    agree = speed.max() <= 1.05 * speed.min() and abs(np.median(speed) - 1.0) <= 0.05
    below = speed.max() <= bounds.speed and accel.max() <= bounds.accel and offset.max() <= bounds.center_offset
    report("5 ultimate boundedness", finite and agree and below,
           f"20 seeds, tail [200,400]: speed in [{speed.min():.5f}, {speed.max():.5f}], "
           f"accel <= {accel.max():.5f}, offset <= {offset.max():.5f}; certificate bounds "
           f"{bounds.speed:.3g}/{bounds.accel:.3g}/{bounds.center_offset:.3g}")


def test_06_ring_states(report):
    sc = build_scenario("example2")
    traj = simulate(sc.model, (sc.state0.r, sc.state0.v), t_end=200.0, sample_every=0.5)
    speeds = ring_metrics(traj, center_matrix(sc.model)).mean_speed
    ok = bool(np.all(np.abs(speeds - 1.0) <= 0.01))
    details = [f"example2 tail mean speeds in [{speeds.min():.5f}, {speeds.max():.5f}]"]
    for n in (5, 10):
        sc = build_scenario("parabolic", {"n": n, "init": "mill"})
        traj = simulate(sc.model, (sc.state0.r, sc.state0.v), t_end=100.0, sample_every=0.1)
        rm = ring_metrics(traj, center_matrix(sc.model))
        tail = traj.r[len(traj) // 2:].mean(axis=1)
        center_motion = float(np.linalg.norm(tail - tail[0], axis=-1).max())
        ok &= bool(np.all(np.abs(rm.mean_radius - 1.0) <= 0.02)) and center_motion <= 0.02
        details.append(f"mill n={n} radius in [{rm.mean_radius.min():.5f}, {rm.mean_radius.max():.5f}], "
                       f"center moves {center_motion:.1e}")
    report("6 ring states", ok, "; ".join(details))


def test_07_dispersal_numbers(report):
    m, _, v_a, v_b = dispersal_window(Propulsion.van_der_pol_radial())
    sc = build_scenario("dispersal_pair", {"M": 10.0})
    traj = simulate(sc.model, (sc.state0.r, sc.state0.v), abs_tol=1e-10, rel_tol=1e-10, t_end=100.0, sample_every=0.1)
    margin = float((traj.r[:, 0, 0] - (10.0 + v_a * traj.times)).min())
    ok = abs(m - 0.3849) <= 1e-3 and abs(v_a - 0.885) <= 5e-3 and abs(v_b - 1.085) <= 5e-3 and margin >= 0
    report("7 dispersal numbers", ok,
           f"m={m:.5f}, [v_a, v_b]=[{v_a:.5f}, {v_b:.5f}], min x(t)-(M+v_a t)={margin:.4f} over [0,100]")


def test_08_bounded_coupling(report):
    sups, M1 = [], None
    for seed in range(10):
        sc = build_scenario("morse_swarm", {"n": 5, "seed": seed})
        M1 = bounded_coupling_speed_bound(sc.model).M1
        traj = simulate(sc.model, (sc.state0.r, sc.state0.v), t_end=100.0, sample_every=0.1)
        sups.append(tail_bounds(sc.model, traj).sup_speed)
    report("8 bounded coupling", max(sups) <= M1,
           f"M1={M1:.4f}, tail sup speeds over 10 seeds in [{min(sups):.4f}, {max(sups):.4f}]")


def helix_error(h, t_end=2.0, lam=100.0, a=0.6):
    b = math.sqrt((1 - a * a) / lam)
    sc = build_scenario("helix", {"lam": lam, "a": a})
    traj = simulate(sc.model, (sc.state0.r, sc.state0.v), method="rk4", h=h, t_end=t_end, sample_every=t_end)
    return float(np.abs(traj.r[-1] - helix_reference(a, b, lam, t_end).r).max())


def test_09_integrator_order(report):
    hs = np.array([4e-3, 2e-3, 1e-3, 5e-4])
    errs = np.array([helix_error(h) for h in hs])
    order = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    report("9 integrator order", 3.7 <= order <= 4.3,
           f"RK4 helix (lam=100, T=2) errors {', '.join(f'{e:.2e}' for e in errs)}; fitted order {order:.3f}")


def central_jacobian(f, x, h):
    J = np.empty((x.size, x.size))
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        J[:, j] = (f(x + e) - f(x - e)) / (2 * h)
    return J


def test_10_jacobian_oracles(report):
    rng = np.random.default_rng(10)
    props = [Propulsion.van_der_pol_radial(), Propulsion.polynomial([-0.5, 0.2, 1.0, 0.0, 0.1]),
             Propulsion.shifted_polynomial(1.0, 2, 1.5)]
    a = 2.0
    worst_flux = worst_ramp = 0.0
    flux_count = ramp_count = 0
    while flux_count < 1000 or ramp_count < 1000:
        d = int(rng.integers(1, 4))
        x = rng.standard_normal(d) * rng.uniform(0.1, 4.0)
        z = np.linalg.norm(x)
        h = 1e-6 * max(1.0, z)
        if flux_count < 1000:
            prop = props[flux_count % len(props)]
            J = flux_jacobian(prop, 0, x)
            fd = central_jacobian(lambda u: flux_F(prop, 0, u), x, h)
            worst_flux = max(worst_flux, np.abs(fd - J).max() / max(1.0, np.abs(J).max()))
            flux_count += 1
        # guard bands around the kinks of ramp(x / a) at |x| = a and ramp(x) at |x| = 1
        if ramp_count < 1000 and abs(z - a) > 1e3 * h and abs(z - 1.0) > 1e3 * h and z > GUARD_BAND:
            J = ramp_jacobian(x / a) / a
            fd = central_jacobian(lambda u: ramp(u / a), x, h)
            worst_ramp = max(worst_ramp, np.abs(fd - J).max() / max(1.0, np.abs(J).max()))
            ramp_count += 1
    report("10 Jacobian oracles", worst_flux <= 1e-6 and worst_ramp <= 1e-6,
           f"1000 inputs each: flux_jacobian rel err {worst_flux:.1e}, ramp_jacobian rel err {worst_ramp:.1e}")
