"""Per-machine dynamics: lags, governors, turbines and the swing equation.

Oracles: closed-form solutions of the linear ODEs, scipy.integrate
reference solutions of the nonlinear ones, and steady-state droop
algebra.  Step functions must also hold their exact equilibria.
"""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from gridfreq.machines import (GATE_FLOOR, HydroParams, MachineState,
                               SteamParams, _lag, hydro_governor_step,
                               hydro_init, hydro_mech_power, hydro_turbine_step,
                               steam_governor_step, steam_init,
                               steam_mech_power, steam_turbine_step, swing_step)


# ---------------------------------------------------------------------------
# exact scalar lag
# ---------------------------------------------------------------------------

class TestLag:
    def test_matches_closed_form(self):
        tau, dt = 0.3, 0.05
        x, u = 1.0, 4.0
        got = _lag(x, u, tau, dt)
        want = u + (x - u) * math.exp(-dt / tau)
        assert got == pytest.approx(want, rel=1e-15)

    def test_stable_for_any_step_size(self):
        # dt >> tau must not overshoot (exact discretization, not Euler)
        x = _lag(0.0, 1.0, 0.001, 1.0)
        assert 0.0 < x <= 1.0

    def test_composition_over_substeps(self):
        # exactness: one step of dt equals two steps of dt/2
        tau = 0.2
        one = _lag(0.3, 2.0, tau, 0.1)
        two = _lag(_lag(0.3, 2.0, tau, 0.05), 2.0, tau, 0.05)
        assert one == pytest.approx(two, rel=1e-14)


# ---------------------------------------------------------------------------
# steam unit
# ---------------------------------------------------------------------------

class TestSteam:
    def test_equilibrium_holds(self):
        params = SteamParams()
        s = steam_init(0.7, params)
        for _ in range(1000):
            s = steam_governor_step(s, params, 0.0, 0.01)
            s, p_m = steam_turbine_step(s, params, 0.01)
        assert p_m == pytest.approx(0.7, abs=1e-12)
        assert s.valve == pytest.approx(0.7, abs=1e-12)

    def test_droop_steady_state(self):
        """Constant speed deviation -> valve settles at load_ref - gain*dw
        and the turbine DC gain is one."""
        params = SteamParams()
        s = steam_init(0.5, params, reserve=10.0)
        dw = -0.002
        for _ in range(12000):          # 120 s >> reheater time constant
            s = steam_governor_step(s, params, dw, 0.01)
            s, p_m = steam_turbine_step(s, params, 0.01)
        want = 0.5 - params.gain * dw
        assert s.valve == pytest.approx(want, abs=1e-9)
        assert p_m == pytest.approx(want, rel=1e-6)

    def test_fraction_weights_sum_to_one(self):
        params = SteamParams()
        assert params.f_hp + params.f_ip + params.f_lp == pytest.approx(1.0)

    def test_rate_limit_enforced(self):
        params = SteamParams()
        s = steam_init(0.2, params, reserve=10.0)
        dt = 0.01
        prev = s.valve
        for _ in range(200):
            s = steam_governor_step(s, params, -0.05, dt)   # huge demand
            rate = (s.valve - prev) / dt
            assert rate <= params.rate_open + 1e-12
            prev = s.valve

    def test_valve_cap_from_reserve(self):
        params = SteamParams()
        s = steam_init(0.5, params, reserve=0.1)
        for _ in range(5000):
            s = steam_governor_step(s, params, -0.1, 0.01)
        assert s.valve == pytest.approx(0.6, abs=1e-12)

    def test_valve_floor(self):
        params = SteamParams()
        s = steam_init(0.1, params)
        for _ in range(5000):
            s = steam_governor_step(s, params, 0.1, 0.01)
        assert s.valve >= params.valve_min

    def test_turbine_cascade_matches_ode_oracle(self):
        """Step response of the three-lag cascade vs scipy solve_ivp."""
        params = SteamParams()
        s = steam_init(0.0, params)
        dt = 0.01
        horizon = 20.0
        # hold the valve at 1.0 (bypass governor) and advance the cascade
        s = s.__class__(load_ref=0.0, relay_out=0.0, valve=1.0,
                        p_chest=0.0, p_reheat=0.0, p_crossover=0.0)
        n = int(round(horizon / dt))
        got_t = (np.arange(n) + 1) * dt
        got_p = np.empty(n)
        for k in range(n):
            s, got_p[k] = steam_turbine_step(s, params, dt)

        def rhs(_t, y):
            ch, rh, co = y
            return [(1.0 - ch) / params.t_chest,
                    (ch - rh) / params.t_reheat,
                    (rh - co) / params.t_crossover]

        sol = solve_ivp(rhs, (0.0, horizon + dt), [0.0, 0.0, 0.0],
                        t_eval=got_t, rtol=1e-10, atol=1e-12)
        want = (params.f_hp * sol.y[0] + params.f_ip * sol.y[1]
                + params.f_lp * sol.y[2])
        assert np.max(np.abs(got_p - want)) < 2e-3

    def test_mech_power_helper_consistent(self):
        params = SteamParams()
        s = steam_init(0.42, params)
        s2, p_m = steam_turbine_step(s, params, 0.01)
        assert steam_mech_power(s2, params) == pytest.approx(p_m, rel=1e-14)

    def test_rejects_nonpositive_dt(self):
        params = SteamParams()
        s = steam_init(0.5, params)
        with pytest.raises(ValueError):
            steam_governor_step(s, params, 0.0, 0.0)


# ---------------------------------------------------------------------------
# hydro unit
# ---------------------------------------------------------------------------

class TestHydro:
    def test_equilibrium_holds(self):
        params = HydroParams()
        s = hydro_init(0.6, params)
        for _ in range(2000):
            s = hydro_governor_step(s, params, 0.0, 0.0, 0.01)
            s, p_m = hydro_turbine_step(s, params, 0.01)
        assert p_m == pytest.approx(0.6, abs=1e-10)

    def test_init_gate_solves_power(self):
        params = HydroParams()
        s = hydro_init(0.5, params)
        # head is 1 at q = gate, so P = A_t (gate - q_nl)
        assert params.turbine_gain * (s.gate - params.q_nl) == pytest.approx(0.5)

    def test_init_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            hydro_init(5.0, HydroParams())

    def test_gate_droop_steady_state(self):
        """Constant speed deviation -> gate settles where the droop
        feedback cancels it: delta_P = -dw / droop."""
        params = HydroParams(droop_on_power=False)
        s = hydro_init(0.5, params, reserve=10.0)
        dw = -0.003
        for _ in range(60000):          # 600 s: integral tail is slow
            s = hydro_governor_step(s, params, dw, 0.0, 0.01)
            s, p_m = hydro_turbine_step(s, params, 0.01)
        want = 0.5 - dw / params.droop
        assert p_m == pytest.approx(want, rel=1e-4)

    def test_power_droop_steady_state(self):
        """With droop on electrical power the same equilibrium applies,
        fed back from delta_pe directly."""
        params = HydroParams(droop_on_power=True)
        s = hydro_init(0.5, params, reserve=10.0)
        dw = -0.003
        # at equilibrium the PID error is zero: -dw = droop * delta_pe
        dpe = -dw / params.droop
        for _ in range(5000):
            s2 = hydro_governor_step(s, params, dw, dpe, 0.01)
            if abs(s2.gate - s.gate) < 1e-14:
                break
            s = s2
        # gate velocity must be settling toward zero
        assert abs(s.servo_vel) < 1e-6

    def test_gate_cap_from_reserve(self):
        params = HydroParams()
        s = hydro_init(0.5, params, reserve=0.1)
        gate_cap = 0.6 / params.turbine_gain + params.q_nl
        assert s.gate_cap == pytest.approx(gate_cap)
        for _ in range(20000):
            s = hydro_governor_step(s, params, -0.05, 0.0, 0.01)
        assert s.gate <= s.gate_cap + 1e-12

    def test_antiwindup_freezes_integrator_at_cap(self):
        params = HydroParams()
        s = hydro_init(0.5, params, reserve=0.0)   # pinned at the cap
        pid0 = None
        for _ in range(100):
            s = hydro_governor_step(s, params, -0.05, 0.0, 0.01)
            if s.gate >= s.gate_cap - 1e-12:
                if pid0 is None:
                    pid0 = s.pid_int
                else:
                    assert s.pid_int == pid0
        assert pid0 is not None

    def test_penstock_matches_ode_oracle(self):
        """Flow transient after a gate step vs scipy solve_ivp."""
        params = HydroParams()
        g = 0.7
        s = hydro_init(0.5, params)
        s = s.__class__(gate=g, flow=s.flow, power_ref=0.5, gate_cap=1.0)
        dt = 0.01
        horizon = 5.0
        got_t, got_q = [], []
        t = 0.0
        while t < horizon - 1e-9:
            s, _ = hydro_turbine_step(s, params, dt)
            t += dt
            got_t.append(t)
            got_q.append(s.flow)

        q0 = 0.5 / params.turbine_gain + params.q_nl

        def rhs(_t, y):
            return [(1.0 - (y[0] / g) ** 2) / params.t_water]

        sol = solve_ivp(rhs, (0.0, horizon), [q0], t_eval=got_t,
                        rtol=1e-11, atol=1e-13)
        assert np.max(np.abs(np.array(got_q) - sol.y[0])) < 1e-8

    def test_non_minimum_phase_power_dip(self):
        """Opening the gate first reduces mechanical power (head drop)."""
        params = HydroParams()
        s = hydro_init(0.5, params)
        p0 = hydro_mech_power(s, params)
        s = s.__class__(gate=s.gate + 0.1, flow=s.flow, power_ref=0.5,
                        gate_cap=1.0)
        s, p_after = hydro_turbine_step(s, params, 0.01)
        assert p_after < p0

    def test_gate_floor_prevents_blowup(self):
        params = HydroParams()
        s = hydro_init(0.3, params)
        s = s.__class__(gate=0.0, flow=0.05, power_ref=0.3, gate_cap=1.0)
        s, p_m = hydro_turbine_step(s, params, 0.01)
        assert math.isfinite(p_m)
        assert s.flow >= 0.0
        assert GATE_FLOOR > 0.0

    def test_rejects_nonpositive_dt(self):
        params = HydroParams()
        s = hydro_init(0.5, params)
        with pytest.raises(ValueError):
            hydro_governor_step(s, params, 0.0, 0.0, -0.01)


# ---------------------------------------------------------------------------
# swing equation
# ---------------------------------------------------------------------------

class TestSwing:
    def test_constant_imbalance_matches_closed_form(self):
        """2H dw/dt = dP - D w has the closed form
        w(t) = (dP/D)(1 - exp(-D t / 2H))."""
        h, d, f0, dt = 4.0, 1.5, 60.0, 0.001
        dp = 0.2
        m = MachineState()
        t = 0.0
        for _ in range(3000):
            m = swing_step(m, p_m=dp, p_e=0.0, h=h, d=d, f0=f0, dt=dt)
            t += dt
        want = (dp / d) * (1.0 - math.exp(-d * t / (2.0 * h)))
        assert m.speed_dev == pytest.approx(want, rel=1e-9)

    def test_undamped_oscillator_matches_closed_form(self):
        """With a synchronizing term and D=0 the rotor is a harmonic
        oscillator: delta(t) = delta0 cos(omega_n t)."""
        h, f0, dt = 3.0, 60.0, 0.0005
        k = 2.0                          # dPe/ddelta
        ws = 2.0 * math.pi * f0
        omega_n = math.sqrt(k * ws / (2.0 * h))
        delta0 = 0.05
        m = MachineState(delta=delta0)
        t = 0.0
        for _ in range(4000):
            m = swing_step(m, p_m=0.0, p_e=k * m.delta, h=h, d=0.0, f0=f0,
                           dt=dt, dpe_ddelta=k)
            t += dt
        assert m.delta == pytest.approx(delta0 * math.cos(omega_n * t),
                                        abs=1e-6)

    def test_drift_reference_removes_spurious_restoring_force(self):
        """A machine moving exactly on the common drift trajectory with
        matched powers must keep its speed unchanged."""
        h, d, f0, dt = 3.0, 0.0, 60.0, 0.01
        w0 = 0.01
        m = MachineState(delta=1.0, speed_dev=w0)
        for _ in range(100):
            m = swing_step(m, p_m=0.3, p_e=0.3, h=h, d=d, f0=f0, dt=dt,
                           dpe_ddelta=3.0, drift_speed=w0)
        assert m.speed_dev == pytest.approx(w0, abs=1e-12)

    def test_frozen_linearization_would_inject_damping(self):
        """Without the drift reference the same setup loses speed (the
        regression the COI reference exists to prevent)."""
        h, f0, dt = 3.0, 60.0, 0.01
        w0 = 0.01
        m = MachineState(delta=1.0, speed_dev=w0)
        for _ in range(100):
            m = swing_step(m, p_m=0.3, p_e=0.3, h=h, d=0.0, f0=f0, dt=dt,
                           dpe_ddelta=3.0, drift_speed=0.0)
        assert m.speed_dev < w0 - 1e-4

    def test_offline_machine_is_inert(self):
        m = MachineState(delta=0.3, speed_dev=0.01, online=False)
        m2 = swing_step(m, p_m=1.0, p_e=0.0, h=3.0, d=1.0, f0=60.0, dt=0.01)
        assert m2 == m

    def test_rejects_nonpositive_inertia(self):
        with pytest.raises(ValueError):
            swing_step(MachineState(), 0.0, 0.0, h=0.0, d=1.0, f0=60.0, dt=0.01)
