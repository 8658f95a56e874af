"""Exact jump-chain simulation of the network and its two auxiliary variants.

States are integer vectors; holding times are exponential in the total
enabled rate and the next transition is drawn proportionally to its rate,
which reproduces the continuous-time law exactly.  All randomness comes
from numpy's PCG64 generator seeded explicitly; a run is a pure function
of (parameters, seed).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidState
from .skorokhod import SampledPath

MAX_EVENTS_DEFAULT = 10_000_000
_FALLBACK_POINTS = 1 << 20


class MicroState(NamedTuple):
    y_star: int
    y: int
    z: int


class Transition(NamedTuple):
    delta: tuple
    rate: float


@dataclass(frozen=True)
class Trajectory:
    """One simulation run: right-continuous piecewise-constant path.

    ``states`` holds one row per recorded time, row 0 being the initial
    state at t=0.  For untruncated runs consecutive rows differ by exactly
    one transition; when the event cap was hit, ``truncated`` is set and
    later rows are uniform-grid samples instead of raw jumps.
    """

    process: str
    columns: tuple
    times: np.ndarray
    states: np.ndarray
    horizon: float
    seed: int
    n: int
    c2: int
    absorbed: bool = False
    truncated: bool = False

    @property
    def initial(self):
        row = tuple(int(v) for v in self.states[0])
        return MicroState(*row) if self.process == "main" else row

    @property
    def events(self):
        return [
            (float(t), tuple(int(v) for v in row))
            for t, row in zip(self.times[1:], self.states[1:])
        ]

    @property
    def num_events(self):
        return len(self.times) - 1


def check_state(state, scaling):
    """Raise InvalidState unless (y_star, y, z) lies in the main state space."""
    y_star, y, z = state
    if y_star < 0 or y < 0 or z < 0:
        raise InvalidState(f"negative coordinate in {state}")
    if y_star + y > scaling.n:
        raise InvalidState(f"y_star + y exceeds n={scaling.n} in {state}")
    if z > scaling.c2:
        raise InvalidState(f"z exceeds c2={scaling.c2} in {state}")
    if y_star > 0 and z > 0:
        raise InvalidState(f"blocked operators with idle specialists in {state}")


def enabled_transitions(state, params, scaling):
    """All transitions with positive rate out of ``state``, in fixed clause order.

    The seven clauses: level-1 completion into blocking (all specialists
    busy); completion with handover, operator released; completion with
    handover, operator restarts class-0 work; a free operator starts a
    class-0 call; specialist completion unblocking an operator (released /
    restarting); a specialist finishing with no one blocked.
    """
    check_state(state, scaling)
    y_star, y, z = state
    p, mu01, mu11, mu02 = params.p, params.mu01, params.mu11, params.mu02
    n, c2 = scaling.n, scaling.c2
    out = []
    if z == 0:
        rate = mu01 * y
        if rate > 0:
            out.append(Transition((1, -1, 0), rate))
    else:
        rate = (1 - p) * mu01 * y
        if rate > 0:
            out.append(Transition((0, -1, -1), rate))
        rate = p * mu01 * y
        if rate > 0:
            out.append(Transition((0, 0, -1), rate))
    rate = p * mu11 * (n - y_star - y)
    if rate > 0:
        out.append(Transition((0, 1, 0), rate))
    if y_star > 0:
        rate = (1 - p) * mu02 * c2
        if rate > 0:
            out.append(Transition((-1, 0, 0), rate))
        rate = p * mu02 * c2
        if rate > 0:
            out.append(Transition((-1, 1, 0), rate))
    else:
        rate = mu02 * (c2 - z)
        if rate > 0:
            out.append(Transition((0, 0, 1), rate))
    return out


def aux_saturated_transitions(state, params, scaling):
    """Transitions of the always-saturated variant (state (y_star, y), no z)."""
    y_star, y = state
    if y_star < 0 or y < 0 or y_star + y > scaling.n:
        raise InvalidState(f"state {state} outside the saturated state space")
    p, mu01, mu11, mu02 = params.p, params.mu01, params.mu11, params.mu02
    out = []
    rate = mu01 * y
    if rate > 0:
        out.append(Transition((1, -1), rate))
    if y_star > 0:
        rate = (1 - p) * mu02 * scaling.c2
        if rate > 0:
            out.append(Transition((-1, 0), rate))
        rate = p * mu02 * scaling.c2
        if rate > 0:
            out.append(Transition((-1, 1), rate))
    rate = p * mu11 * (scaling.n - y_star - y)
    if rate > 0:
        out.append(Transition((0, 1), rate))
    return out


def aux_noblock_transitions(state, params, scaling):
    """Transitions of the no-blocking variant (state (y, z)): full handover is lost when z=0."""
    y, z = state
    if y < 0 or y > scaling.n or z < 0 or z > scaling.c2:
        raise InvalidState(f"state {state} outside the no-blocking state space")
    p, mu01, mu11, mu02 = params.p, params.mu01, params.mu11, params.mu02
    out = []
    if z == 0:
        rate = (1 - p) * mu01 * y
        if rate > 0:
            out.append(Transition((-1, 0), rate))
    else:
        rate = (1 - p) * mu01 * y
        if rate > 0:
            out.append(Transition((-1, -1), rate))
        rate = p * mu01 * y
        if rate > 0:
            out.append(Transition((0, -1), rate))
    rate = p * mu11 * (scaling.n - y)
    if rate > 0:
        out.append(Transition((1, 0), rate))
    rate = mu02 * (scaling.c2 - z)
    if rate > 0:
        out.append(Transition((0, 1), rate))
    return out


def step(state, rng, params, scaling):
    """One jump from ``state``: (exponential holding time, next state).

    Deterministic given the generator state.  With nothing enabled the
    absorbing marker (math.inf, state) is returned instead of looping.
    """
    transitions = enabled_transitions(state, params, scaling)
    if not transitions:
        return (math.inf, state)
    total = 0.0
    for tr in transitions:
        total += tr.rate
    holding = rng.exponential(1.0 / total)
    u = rng.random() * total
    acc = 0.0
    chosen = transitions[-1]
    for tr in transitions:
        acc += tr.rate
        if u < acc:
            chosen = tr
            break
    return (holding, MicroState(*(a + b for a, b in zip(state, chosen.delta))))


class _Recorder:
    """Event recorder with a cap; past the cap only a grid sample is kept."""

    def __init__(self, ncols, horizon, max_events):
        self.ts = [0.0]
        self.cols = [[] for _ in range(ncols)]
        self.horizon = horizon
        self.max_events = max_events
        self.truncated = False
        self.fallback_dt = None
        self.next_tau = None

    def start(self, state):
        for col, v in zip(self.cols, state):
            col.append(v)

    def record(self, t, old_state, new_state):
        if not self.truncated:
            self.ts.append(t)
            for col, v in zip(self.cols, new_state):
                col.append(v)
            if len(self.ts) - 1 >= self.max_events:
                self._switch_to_grid(t)
            return
        while self.next_tau < t:
            self.ts.append(self.next_tau)
            for col, v in zip(self.cols, old_state):
                col.append(v)
            self.next_tau += self.fallback_dt
        # the state change itself lands on the next grid crossing

    def _switch_to_grid(self, t_now):
        points = min(self.max_events, _FALLBACK_POINTS)
        self.fallback_dt = self.horizon / points
        times = np.array(self.ts)
        grid = np.arange(0.0, t_now, self.fallback_dt)
        idx = np.searchsorted(times, grid, side="right") - 1
        self.ts = list(grid)
        self.cols = [list(np.asarray(col)[idx]) for col in self.cols]
        self.next_tau = len(grid) * self.fallback_dt
        self.truncated = True

    def finish(self, final_state):
        if self.truncated:
            while self.next_tau <= self.horizon:
                self.ts.append(self.next_tau)
                for col, v in zip(self.cols, final_state):
                    col.append(v)
                self.next_tau += self.fallback_dt
        times = np.array(self.ts, dtype=float)
        states = np.column_stack([np.array(c, dtype=np.int64) for c in self.cols])
        return times, states


def simulate(init, params, scaling, horizon, seed, max_events=MAX_EVENTS_DEFAULT):
    """Run the main process from ``init`` up to ``horizon`` with the given seed."""
    check_state(init, scaling)
    rng = np.random.default_rng(seed)
    p, mu01, mu11, mu02 = params.p, params.mu01, params.mu11, params.mu02
    n, c2 = scaling.n, scaling.c2
    y_star, y, z = init
    rec = _Recorder(3, horizon, max_events)
    rec.start((y_star, y, z))
    rexp, runi = rng.exponential, rng.random
    t = 0.0
    absorbed = False
    while True:
        if z == 0:
            r1 = mu01 * y
            r2 = 0.0
            r3 = 0.0
        else:
            r1 = 0.0
            r2 = (1 - p) * mu01 * y
            r3 = p * mu01 * y
        r4 = p * mu11 * (n - y_star - y)
        if y_star > 0:
            r5 = (1 - p) * mu02 * c2
            r6 = p * mu02 * c2
            r7 = 0.0
        else:
            r5 = 0.0
            r6 = 0.0
            r7 = mu02 * (c2 - z)
        total = r1 + r2 + r3 + r4 + r5 + r6 + r7
        if total <= 0.0:
            absorbed = True
            break
        t += rexp(1.0 / total)
        if t >= horizon:
            break
        old = (y_star, y, z)
        u = runi() * total
        if u < r1:
            y_star += 1
            y -= 1
        elif u < r1 + r2:
            y -= 1
            z -= 1
        elif u < r1 + r2 + r3:
            z -= 1
        elif u < r1 + r2 + r3 + r4:
            y += 1
        elif u < r1 + r2 + r3 + r4 + r5:
            y_star -= 1
        elif u < r1 + r2 + r3 + r4 + r5 + r6:
            y_star -= 1
            y += 1
        else:
            z += 1
        rec.record(t, old, (y_star, y, z))
    times, states = rec.finish((y_star, y, z))
    return Trajectory(
        "main", ("y_star", "y", "z"), times, states, horizon, seed, n, c2,
        absorbed=absorbed, truncated=rec.truncated,
    )


def simulate_aux_saturated(init, params, scaling, horizon, seed, max_events=MAX_EVENTS_DEFAULT):
    """Run the always-saturated variant from (y_star, y)."""
    y_star, y = init
    if y_star < 0 or y < 0 or y_star + y > scaling.n:
        raise InvalidState(f"state {tuple(init)} outside the saturated state space")
    rng = np.random.default_rng(seed)
    p, mu01, mu11, mu02 = params.p, params.mu01, params.mu11, params.mu02
    n, c2 = scaling.n, scaling.c2
    rec = _Recorder(2, horizon, max_events)
    rec.start((y_star, y))
    rexp, runi = rng.exponential, rng.random
    t = 0.0
    absorbed = False
    while True:
        r1 = mu01 * y
        if y_star > 0:
            r2 = (1 - p) * mu02 * c2
            r3 = p * mu02 * c2
        else:
            r2 = 0.0
            r3 = 0.0
        r4 = p * mu11 * (n - y_star - y)
        total = r1 + r2 + r3 + r4
        if total <= 0.0:
            absorbed = True
            break
        t += rexp(1.0 / total)
        if t >= horizon:
            break
        old = (y_star, y)
        u = runi() * total
        if u < r1:
            y_star += 1
            y -= 1
        elif u < r1 + r2:
            y_star -= 1
        elif u < r1 + r2 + r3:
            y_star -= 1
            y += 1
        else:
            y += 1
        rec.record(t, old, (y_star, y))
    times, states = rec.finish((y_star, y))
    return Trajectory(
        "aux-saturated", ("y_star", "y"), times, states, horizon, seed, n, c2,
        absorbed=absorbed, truncated=rec.truncated,
    )


def simulate_aux_noblock(init, params, scaling, horizon, seed, max_events=MAX_EVENTS_DEFAULT):
    """Run the no-blocking variant from (y, z)."""
    y, z = init
    if y < 0 or y > scaling.n or z < 0 or z > scaling.c2:
        raise InvalidState(f"state {tuple(init)} outside the no-blocking state space")
    rng = np.random.default_rng(seed)
    p, mu01, mu11, mu02 = params.p, params.mu01, params.mu11, params.mu02
    n, c2 = scaling.n, scaling.c2
    rec = _Recorder(2, horizon, max_events)
    rec.start((y, z))
    rexp, runi = rng.exponential, rng.random
    t = 0.0
    absorbed = False
    while True:
        if z == 0:
            r1 = (1 - p) * mu01 * y
            r2 = 0.0
            r3 = 0.0
        else:
            r1 = 0.0
            r2 = (1 - p) * mu01 * y
            r3 = p * mu01 * y
        r4 = p * mu11 * (n - y)
        r5 = mu02 * (c2 - z)
        total = r1 + r2 + r3 + r4 + r5
        if total <= 0.0:
            absorbed = True
            break
        t += rexp(1.0 / total)
        if t >= horizon:
            break
        old = (y, z)
        u = runi() * total
        if u < r1:
            y -= 1
        elif u < r1 + r2:
            y -= 1
            z -= 1
        elif u < r1 + r2 + r3:
            z -= 1
        elif u < r1 + r2 + r3 + r4:
            y += 1
        else:
            z += 1
        rec.record(t, old, (y, z))
    times, states = rec.finish((y, z))
    return Trajectory(
        "aux-noblock", ("y", "z"), times, states, horizon, seed, n, c2,
        absorbed=absorbed, truncated=rec.truncated,
    )


def rescale(traj, scaling, grid_dt):
    """Sample the trajectory divided by n on the uniform grid k*grid_dt.

    Right-continuous: the value at a grid time is the state of the last
    jump at or before it.
    """
    if grid_dt <= 0:
        raise InvalidState("grid_dt must be positive")
    npts = int(math.floor(traj.horizon / grid_dt + 1e-9)) + 1
    grid = grid_dt * np.arange(npts)
    idx = np.searchsorted(traj.times, grid, side="right") - 1
    values = traj.states[idx].astype(float) / scaling.n
    return SampledPath(0.0, grid_dt, values)


def _compensator_pieces(traj, params, scaling):
    """Per-interval drift integrands and their prefix integrals for the main process."""
    if traj.process != "main":
        raise InvalidState("martingale residuals are defined for the main process")
    if traj.truncated:
        raise InvalidState("martingale residuals need the full event list, not a truncated run")
    p, mu01, mu11, mu02 = params.p, params.mu01, params.mu11, params.mu02
    n = scaling.n
    c2n = scaling.c2 / n
    ys = traj.states[:, 0].astype(float) / n
    yy = traj.states[:, 1].astype(float) / n
    zz = traj.states[:, 2].astype(float) / n
    blocked = traj.states[:, 0] > 0
    idle = traj.states[:, 2] > 0
    g = np.empty((len(ys), 3))
    g[:, 0] = mu01 * yy * ~idle - mu02 * c2n * blocked
    g[:, 1] = (
        -mu01 * yy * (1.0 - p * idle)
        + p * mu02 * c2n * blocked
        + p * mu11 * (1.0 - ys - yy)
    )
    g[:, 2] = -mu01 * yy * idle + mu02 * (c2n - zz) * ~blocked
    gaps = np.diff(traj.times)
    prefix = np.zeros((len(ys), 3))
    np.cumsum(g[:-1] * gaps[:, None], axis=0, out=prefix[1:])
    coords = np.column_stack([ys, yy, zz])
    return coords, g, prefix


def martingale_residual(traj, params, scaling, grid_dt):
    """Rescaled path minus initial value minus exact drift integrals, on a grid.

    The drift integrands are constant between jumps, so the compensator is
    integrated exactly; the residuals shrink like 1/sqrt(n) and certify
    that the simulated jumps carry the advertised rates.
    """
    coords, g, prefix = _compensator_pieces(traj, params, scaling)
    npts = int(math.floor(traj.horizon / grid_dt + 1e-9)) + 1
    grid = grid_dt * np.arange(npts)
    idx = np.searchsorted(traj.times, grid, side="right") - 1
    comp = prefix[idx] + g[idx] * (grid - traj.times[idx])[:, None]
    residual = coords[idx] - coords[0] - comp
    return SampledPath(0.0, grid_dt, residual)


def residual_sup(traj, params, scaling):
    """Exact sup over [0, horizon] of |residual| per coordinate.

    Between jumps the residual is linear in t, so the supremum is attained
    at jump times (left or right limit) or at the horizon.
    """
    coords, g, prefix = _compensator_pieces(traj, params, scaling)
    right = coords - coords[0] - prefix
    left = coords[:-1] - coords[0] - prefix[1:]
    tail = coords[-1] - coords[0] - (prefix[-1] + g[-1] * (traj.horizon - traj.times[-1]))
    sup = np.max(np.abs(right), axis=0)
    if len(left):
        sup = np.maximum(sup, np.max(np.abs(left), axis=0))
    return np.maximum(sup, np.abs(tail))


def write_trajectory_csv(traj, fp):
    """Write the run as CSV: time with 9 significant digits, then the counts."""
    fp.write("t," + ",".join(traj.columns) + "\n")
    for t, row in zip(traj.times, traj.states):
        fp.write(f"{t:.9g}," + ",".join(str(int(v)) for v in row) + "\n")
