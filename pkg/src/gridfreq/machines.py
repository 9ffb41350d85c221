"""Per-generator dynamics: swing equation plus governor/turbine models.

Two prime-mover chains are provided:

* a tandem-compound steam unit — proportional speed governor, speed-relay
  lag, rate- and position-limited hydraulic servomotor, and a cascade of
  first-order turbine stages (steam chest, reheater, crossover) with
  per-stage power fractions, and
* a hydro unit — PID governor with electrical-power droop feedback, a
  velocity-mode servomotor (a first-order lag commands the gate velocity,
  integrated to position), and the nonlinear penstock/turbine model
  dq/dt = (1 - h)/T_w with h = (q/G)^2 and P_m = A_t h (q - q_nl).

All scalar first-order lags are advanced by exact exponential
discretization, so they are unconditionally stable regardless of the
step size (the speed-relay time constant is 1 ms, far below typical
integration steps).  States are plain dataclasses; step functions are
pure and return new states, enabling deterministic replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

GATE_FLOOR = 1e-4   # gate floor preventing (q/G)^2 blow-up


def _lag(state: float, target: float, tau: float, dt: float) -> float:
    """Exact one-step response of dx/dt = (u - x)/tau for constant u."""
    return target + (state - target) * math.exp(-dt / tau)


# ---------------------------------------------------------------------------
# steam unit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteamParams:
    gain: float = 20.0             # governor gain, 1/droop
    t_relay: float = 0.001         # speed-relay (speed delay) time constant, s
    t_servo: float = 0.15          # servomotor time constant, s
    rate_open: float = 0.1         # max valve opening rate, p.u./s
    rate_close: float = -0.1       # max valve closing rate, p.u./s
    valve_max: float = 4.496       # physical valve position ceiling
    valve_min: float = 0.0
    t_chest: float = 0.3           # steam chest, s
    t_reheat: float = 7.0          # reheater, s
    t_crossover: float = 0.5       # crossover, s
    f_hp: float = 0.3
    f_ip: float = 0.3
    f_lp: float = 0.4              # F_LPA + F_LPB


@dataclass(frozen=True, slots=True)
class SteamGovState:
    load_ref: float = 0.0          # valve set-point from dispatch
    relay_out: float = 0.0         # speed-relay lag state
    valve: float = 0.0             # servomotor valve position C_v
    p_chest: float = 0.0           # turbine stage states
    p_reheat: float = 0.0
    p_crossover: float = 0.0
    valve_cap: float = math.inf    # operational cap (allocated reserve)


def steam_init(p_set: float, params: SteamParams,
               reserve: float = math.inf) -> SteamGovState:
    """Equilibrium state producing mechanical power ``p_set`` (machine p.u.)."""
    cap = min(params.valve_max, p_set + reserve)
    return SteamGovState(load_ref=p_set, relay_out=p_set, valve=p_set,
                         p_chest=p_set, p_reheat=p_set, p_crossover=p_set,
                         valve_cap=cap)


def steam_governor_step(s: SteamGovState, params: SteamParams,
                        delta_omega: float, dt: float) -> SteamGovState:
    """Advance governor/servomotor one step for speed deviation ``delta_omega``.

    The speed reference is constant (no AGC), so the valve demand is the
    load reference plus gain times the negated speed deviation.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    demand = s.load_ref + params.gain * (0.0 - delta_omega)
    relay = _lag(s.relay_out, demand, params.t_relay, dt)
    # exact lag toward the relay output unless the implied rate saturates
    candidate = _lag(s.valve, relay, params.t_servo, dt)
    rate = (candidate - s.valve) / dt
    rate = min(max(rate, params.rate_close), params.rate_open)
    valve = s.valve + rate * dt
    valve = min(max(valve, params.valve_min), min(params.valve_max, s.valve_cap))
    return replace(s, relay_out=relay, valve=valve)


def steam_turbine_step(s: SteamGovState, params: SteamParams, dt: float,
                       valve_prev: float | None = None) -> tuple[SteamGovState, float]:
    """Advance the turbine stage cascade; returns (state, P_m in machine p.u.).

    Each stage's held input is the step-average of its driving signal
    (midpoint rule), so the cascade coupling is second-order accurate;
    ``valve_prev`` supplies the valve position at the start of the step.
    """
    u_v = s.valve if valve_prev is None else 0.5 * (valve_prev + s.valve)
    p_ch = _lag(s.p_chest, u_v, params.t_chest, dt)
    p_rh = _lag(s.p_reheat, 0.5 * (s.p_chest + p_ch), params.t_reheat, dt)
    p_co = _lag(s.p_crossover, 0.5 * (s.p_reheat + p_rh), params.t_crossover, dt)
    p_m = params.f_hp * p_ch + params.f_ip * p_rh + params.f_lp * p_co
    return replace(s, p_chest=p_ch, p_reheat=p_rh, p_crossover=p_co), p_m


def steam_mech_power(s: SteamGovState, params: SteamParams) -> float:
    return (params.f_hp * s.p_chest + params.f_ip * s.p_reheat
            + params.f_lp * s.p_crossover)


# ---------------------------------------------------------------------------
# hydro unit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HydroParams:
    kp: float = 1.163              # PID proportional gain
    ki: float = 0.105              # PID integral gain, 1/s
    kd: float = 0.0                # PID derivative gain, s
    t_filter: float = 0.01         # derivative filter time constant, s
    servo_gain: float = 3.33       # K_a
    t_servo: float = 0.07          # T_a, s
    droop: float = 0.05            # permanent droop R_p
    droop_on_power: bool = True    # False: feed back gate position instead
    t_water: float = 1.0           # water starting time T_w, s
    q_nl: float = 0.08             # no-load flow, p.u.
    a_t: float | None = None       # turbine gain; default 1/(1 - q_nl)

    @property
    def turbine_gain(self) -> float:
        return self.a_t if self.a_t is not None else 1.0 / (1.0 - self.q_nl)


@dataclass(frozen=True, slots=True)
class HydroGovState:
    pid_int: float = 0.0           # integrator state
    pid_filt: float = 0.0          # filtered-derivative lag state
    servo_vel: float = 0.0         # servomotor output (gate velocity, p.u./s)
    gate: float = 0.0              # gate position G in [0, gate_cap]
    flow: float = 0.0              # water flow q, p.u.
    power_ref: float = 0.0         # electrical power set-point for droop feedback
    gate_cap: float = 1.0          # operational cap (allocated reserve)


def hydro_init(p_set: float, params: HydroParams,
               reserve: float = math.inf) -> HydroGovState:
    """Equilibrium state producing mechanical power ``p_set`` (machine p.u.)."""
    gate = p_set / params.turbine_gain + params.q_nl
    if not 0.0 <= gate <= 1.0:
        raise ValueError(f"set-point {p_set} outside gate range (gate {gate:.3f})")
    p_cap = p_set + reserve
    gate_cap = min(1.0, p_cap / params.turbine_gain + params.q_nl)
    return HydroGovState(gate=gate, flow=gate, power_ref=p_set,
                         gate_cap=gate_cap)


def hydro_governor_step(s: HydroGovState, params: HydroParams,
                        delta_omega: float, delta_pe: float,
                        dt: float) -> HydroGovState:
    """Advance PID governor + servomotor one step.

    ``delta_pe`` is the electrical power deviation from the set-point
    (machine p.u.); it is the droop feedback signal unless
    ``droop_on_power`` is off, in which case the gate deviation is used.
    The integrator holds (anti-windup) while the gate is pinned at a
    limit and the error pushes further into it.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if params.droop_on_power:
        feedback = params.droop * delta_pe
    else:
        gate0 = s.power_ref / params.turbine_gain + params.q_nl
        # midpoint gate estimate keeps the feedback consistent with the
        # (midpoint) speed deviation supplied by the caller
        gate_mid = s.gate + 0.5 * s.servo_vel * dt
        feedback = params.droop * (gate_mid - gate0) * params.turbine_gain
    err = -delta_omega - feedback

    at_max = s.gate >= s.gate_cap - 1e-12 and err > 0
    at_min = s.gate <= GATE_FLOOR and err < 0
    pid_int = s.pid_int if (at_max or at_min) else s.pid_int + params.ki * err * dt

    if params.kd > 0.0:
        filt = _lag(s.pid_filt, err, params.t_filter, dt)
        deriv = params.kd * (err - filt) / params.t_filter
    else:
        filt, deriv = s.pid_filt, 0.0

    u = params.kp * err + 0.5 * (s.pid_int + pid_int) + deriv
    # servomotor: first-order lag commanding gate velocity, then integration
    # to gate position (the gate itself holds when the PID output is zero)
    vel = _lag(s.servo_vel, params.servo_gain * u, params.t_servo, dt)
    # trapezoidal gate integration keeps the position second-order accurate
    gate = min(max(s.gate + 0.5 * (s.servo_vel + vel) * dt, 0.0), s.gate_cap)
    return replace(s, pid_int=pid_int, pid_filt=filt, servo_vel=vel, gate=gate)


def hydro_turbine_step(s: HydroGovState, params: HydroParams, dt: float,
                       gate_prev: float | None = None) -> tuple[HydroGovState, float]:
    """Advance the penstock flow (RK4, gate held at its step average);
    returns (state, P_m).  ``gate_prev`` is the gate position at the
    start of the step; omitting it freezes the gate at its current value.
    """
    g_held = s.gate if gate_prev is None else 0.5 * (gate_prev + s.gate)
    g = max(g_held, GATE_FLOOR)
    tw = params.t_water

    def dq(q: float) -> float:
        return (1.0 - (q / g) ** 2) / tw

    q = s.flow
    k1 = dq(q)
    k2 = dq(q + 0.5 * dt * k1)
    k3 = dq(q + 0.5 * dt * k2)
    k4 = dq(q + dt * k3)
    q_new = max(q + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0, 0.0)
    g_end = max(s.gate, GATE_FLOOR)      # output power at the endpoint gate
    head = (q_new / g_end) ** 2
    p_m = params.turbine_gain * head * (q_new - params.q_nl)
    return replace(s, flow=q_new), p_m


def hydro_mech_power(s: HydroGovState, params: HydroParams) -> float:
    g = max(s.gate, GATE_FLOOR)
    head = (s.flow / g) ** 2
    return params.turbine_gain * head * (s.flow - params.q_nl)


# ---------------------------------------------------------------------------
# swing equation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class MachineState:
    delta: float = 0.0             # rotor angle, rad
    speed_dev: float = 0.0         # speed deviation, p.u.
    p_mech: float = 0.0            # mechanical power, machine p.u.
    online: bool = True


def swing_step(m: MachineState, p_m: float, p_e: float, h: float, d: float,
               f0: float, dt: float, dpe_ddelta: float = 0.0,
               drift_speed: float = 0.0) -> MachineState:
    """RK4 step of the classical swing equation.

    d(speed_dev)/dt = (P_m - P_e - D*speed_dev) / (2H)
    d(delta)/dt     = 2*pi*f0 * speed_dev

    ``p_e`` is the electrical power at the current rotor angle; if
    ``dpe_ddelta`` is supplied, the electrical power is linearized in the
    rotor angle (network synchronizing term) within the step.  Because
    the network's common-mode angle tracks the machines, the restoring
    term must act only on the deviation from the collective drift:
    ``drift_speed`` (typically the center-of-inertia speed deviation)
    sets the reference trajectory delta0 + 2*pi*f0*drift_speed*t about
    which the linearization is taken.
    """
    if h <= 0:
        raise ValueError("inertia constant must be positive")
    if not m.online:
        return m
    ws = 2.0 * math.pi * f0
    two_h = 2.0 * h
    d0 = m.delta

    def deriv(delta: float, w: float, tau: float) -> tuple[float, float]:
        pe = p_e + dpe_ddelta * (delta - d0 - ws * drift_speed * tau)
        return ws * w, (p_m - pe - d * w) / two_h

    k1d, k1w = deriv(m.delta, m.speed_dev, 0.0)
    k2d, k2w = deriv(m.delta + 0.5 * dt * k1d,
                     m.speed_dev + 0.5 * dt * k1w, 0.5 * dt)
    k3d, k3w = deriv(m.delta + 0.5 * dt * k2d,
                     m.speed_dev + 0.5 * dt * k2w, 0.5 * dt)
    k4d, k4w = deriv(m.delta + dt * k3d, m.speed_dev + dt * k3w, dt)
    delta = m.delta + dt * (k1d + 2 * k2d + 2 * k3d + k4d) / 6.0
    w = m.speed_dev + dt * (k1w + 2 * k2w + 2 * k3w + k4w) / 6.0
    return replace(m, delta=delta, speed_dev=w, p_mech=p_m)
