"""Time-delayed thermoacoustic model on a Galerkin basis.

The acoustic field of a duct with a compact heat source is expanded in
N_g cosine/sine modes,

    u(x,t) = sum_j eta_j(t) cos(j pi x),   p(x,t) = -sum_j mu_j(t) sin(j pi x),

which turns the acoustics into 2*N_g coupled oscillators

    d(eta_j)/dt =  j pi mu_j
    d(mu_j)/dt  = -j pi eta_j - zeta_j mu_j - 2 qdot sin(j pi x_f)

driven by a square-root heat-release law with a time delay,
qdot(t) = beta*(sqrt|1 + u(x_f, t - tau)| - 1), and damped modally by
zeta_j = c1*j^2 + c2*sqrt(j).

Integration is fixed-step RK4 with the method of steps: the delayed flame
velocity u(x_f, t - tau) is read from a uniformly sampled history buffer by
cubic Hermite interpolation of stored values and derivatives. With the
default tau/dt an integer, whole-step queries land on grid nodes and only
the half-step stage is interpolated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidArgumentError,
    LyapunovConvergenceWarning,
    NumericalBlowupError,
)
from .series import TimeSeries

DEFAULT_DT = 0.01
DEFAULT_BLOWUP_LIMIT = 1.0e6

#: Standard initial condition for data generation: eta_1 = 1, rest zero,
#: zero pre-history. Any nonzero kick leaves the unstable equilibrium; a
#: fixed one keeps every run reproducible.
STANDARD_KICK = 1.0


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the delayed Galerkin model."""

    n_modes: int = 10
    beta: float = 7.0
    tau: float = 0.2
    x_f: float = 0.2
    damping_c1: float = 0.1
    damping_c2: float = 0.06

    def __post_init__(self):
        if self.n_modes < 1:
            raise InvalidArgumentError("n_modes must be >= 1")
        if self.beta < 0:
            raise InvalidArgumentError("beta must be >= 0")
        if self.tau <= 0:
            raise InvalidArgumentError("tau must be > 0")
        if not 0.0 < self.x_f < 1.0:
            raise InvalidArgumentError("x_f must lie strictly inside (0, 1)")

    @property
    def dim(self) -> int:
        return 2 * self.n_modes

    def damping(self) -> np.ndarray:
        """Modal damping zeta_j = c1*j^2 + c2*sqrt(j) (increasing in j).

        The quadratic leading term damps high modes strongly; with the
        default coefficients this is what keeps the ten-mode attractor at
        O(1) amplitudes and chaotic at beta=7, tau=0.2.
        """
        j = np.arange(1, self.n_modes + 1, dtype=float)
        return self.damping_c1 * j * j + self.damping_c2 * np.sqrt(j)


@dataclass
class GalerkinState:
    """Modal amplitudes: velocity modes eta_j and pressure modes mu_j."""

    eta: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        self.eta = np.atleast_1d(np.asarray(self.eta, dtype=float))
        self.mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if self.eta.shape != self.mu.shape or self.eta.ndim != 1:
            raise DimensionMismatchError("eta and mu must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.eta)) and np.all(np.isfinite(self.mu))):
            raise InvalidArgumentError("state components must be finite")

    @property
    def n_modes(self) -> int:
        return len(self.eta)

    def pack(self) -> np.ndarray:
        """Flat vector (eta_1..eta_Ng, mu_1..mu_Ng)."""
        return np.concatenate([self.eta, self.mu])

    @classmethod
    def unpack(cls, y) -> "GalerkinState":
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or len(y) % 2 != 0:
            raise DimensionMismatchError("packed state must be 1-d with even length")
        n = len(y) // 2
        return cls(eta=y[:n].copy(), mu=y[n:].copy())

    @classmethod
    def zeros(cls, n_modes: int) -> "GalerkinState":
        return cls(eta=np.zeros(n_modes), mu=np.zeros(n_modes))

    @classmethod
    def standard_kick(cls, n_modes: int) -> "GalerkinState":
        state = cls.zeros(n_modes)
        state.eta[0] = STANDARD_KICK
        return state


def _as_packed(state) -> np.ndarray:
    if isinstance(state, GalerkinState):
        return state.pack()
    y = np.asarray(state, dtype=float)
    if y.shape[-1] % 2 != 0:
        raise DimensionMismatchError("packed state length must be even")
    return y


def flame_velocity(state, x_f: float):
    """Acoustic velocity at the heat source, sum_j eta_j cos(j pi x_f).

    Accepts a GalerkinState or a packed array (..., 2*N_g); vectorizes over
    leading axes.
    """
    if not 0.0 < x_f < 1.0:
        raise InvalidArgumentError("x_f must lie strictly inside (0, 1)")
    y = _as_packed(state)
    n = y.shape[-1] // 2
    j = np.arange(1, n + 1)
    weights = np.cos(j * math.pi * x_f)
    return y[..., :n] @ weights


def flame_velocity_rate(state, x_f: float):
    """Time derivative of the flame velocity, sum_j (j pi mu_j) cos(j pi x_f).

    Follows from d(eta_j)/dt = j pi mu_j, which holds regardless of the
    delayed forcing, so the rate is a function of the instantaneous state.
    """
    if not 0.0 < x_f < 1.0:
        raise InvalidArgumentError("x_f must lie strictly inside (0, 1)")
    y = _as_packed(state)
    n = y.shape[-1] // 2
    j = np.arange(1, n + 1)
    weights = j * math.pi * np.cos(j * math.pi * x_f)
    return y[..., n:] @ weights


def heat_release(u_f_delayed: float, beta: float) -> float:
    """Square-root heat-release law beta*(sqrt|1 + u_f| - 1).

    The square-root argument is folded at zero (absolute value), keeping
    qdot real for any velocity while staying smooth away from u_f = -1;
    integrators count fold events as a diagnostic. At the fold boundary
    u_f = -1 the law returns exactly -beta.
    """
    if beta < 0:
        raise InvalidArgumentError("beta must be >= 0")
    return beta * (math.sqrt(abs(1.0 + u_f_delayed)) - 1.0)


def acoustic_energy(state):
    """Instantaneous acoustic energy, (1/4) sum_j (eta_j^2 + mu_j^2).

    Closed form of the integral of (u^2 + p^2)/2 over the duct: modes are
    orthogonal and each basis function integrates to 1/2. Accepts a
    GalerkinState or a packed array (..., 2*N_g); vectorizes over rows.
    """
    if isinstance(state, GalerkinState):
        return 0.25 * (state.eta @ state.eta + state.mu @ state.mu)
    y = np.asarray(state, dtype=float)
    return 0.25 * np.sum(y * y, axis=-1)


def rhs(state: GalerkinState, u_f_delayed: float, params: ModelParams) -> GalerkinState:
    """Modal derivatives for a given delayed flame velocity."""
    if state.n_modes != params.n_modes:
        raise DimensionMismatchError(
            f"state has {state.n_modes} modes, params expect {params.n_modes}"
        )
    kernel = _kernel(params)
    out = np.empty(params.dim)
    kernel.rhs(state.pack(), u_f_delayed, out)
    return GalerkinState(eta=out[: params.n_modes], mu=out[params.n_modes :])


class _ModelKernel:
    """Precomputed mode constants for fast packed-state evaluation."""

    __slots__ = ("n", "beta", "jpi", "zeta", "two_sin_xf", "cos_xf", "jpi_cos_xf")

    def __init__(self, params: ModelParams):
        n = params.n_modes
        j = np.arange(1, n + 1, dtype=float)
        self.n = n
        self.beta = params.beta
        self.jpi = j * math.pi
        self.zeta = params.damping()
        self.two_sin_xf = 2.0 * np.sin(self.jpi * params.x_f)
        self.cos_xf = np.cos(self.jpi * params.x_f)
        self.jpi_cos_xf = self.jpi * self.cos_xf

    def rhs(self, y: np.ndarray, u_delayed: float, out: np.ndarray) -> int:
        """Write dy/dt into `out`; returns 1 if the sqrt argument was folded."""
        n = self.n
        eta = y[:n]
        mu = y[n:]
        arg = 1.0 + u_delayed
        folded = arg < 0.0
        if folded:
            arg = -arg
        qdot = self.beta * (math.sqrt(arg) - 1.0)
        out[:n] = self.jpi * mu
        out[n:] = -self.jpi * eta - self.zeta * mu - qdot * self.two_sin_xf
        return int(folded)

    def u_f(self, y: np.ndarray) -> float:
        return float(y[: self.n] @ self.cos_xf)

    def du_f(self, y: np.ndarray) -> float:
        return float(y[self.n :] @ self.jpi_cos_xf)


@lru_cache(maxsize=None)
def _kernel(params: ModelParams) -> _ModelKernel:
    return _ModelKernel(params)


def delay_steps(tau: float, dt: float) -> int:
    """Smallest m with m*dt >= tau (robust to tau being a float multiple)."""
    return int(math.ceil(tau / dt - 1e-9))


class DelayHistory:
    """Uniformly spaced samples of the flame velocity and its derivative.

    Node k sits at time t_start + k*dt. Integrators append the node for
    their current time before stepping, so the filled buffer always spans
    [t - tau, t]. `eval` snaps to nodes when the query lands on the grid and
    otherwise interpolates with the cubic Hermite of the bracketing nodes.
    """

    __slots__ = ("dt", "t_start", "n", "_u", "_du")

    def __init__(self, dt: float, t_start: float, capacity: int = 256):
        if dt <= 0:
            raise InvalidArgumentError("dt must be positive")
        self.dt = float(dt)
        self.t_start = float(t_start)
        self.n = 0
        capacity = max(int(capacity), 4)
        self._u = np.empty(capacity)
        self._du = np.empty(capacity)

    @classmethod
    def constant(cls, t0: float, tau: float, dt: float, value: float = 0.0,
                 capacity: int = 256) -> "DelayHistory":
        """History identically `value` on [t0 - m*dt, t0); m = ceil(tau/dt).

        The node at t0 itself belongs to the trajectory and is appended by
        the integrator from the initial state.
        """
        m = delay_steps(tau, dt)
        hist = cls(dt, t0 - m * dt, capacity=max(capacity, m + 2))
        for _ in range(m):
            hist.append(value, 0.0)
        return hist

    @property
    def next_time(self) -> float:
        """Time the next appended node will be stamped with."""
        return self.t_start + self.n * self.dt

    @property
    def last_time(self) -> float:
        if self.n == 0:
            raise InvalidArgumentError("history is empty")
        return self.t_start + (self.n - 1) * self.dt

    @property
    def u_f_values(self) -> np.ndarray:
        """Filled flame-velocity samples (view)."""
        return self._u[: self.n]

    @property
    def du_f_values(self) -> np.ndarray:
        return self._du[: self.n]

    def append(self, u_f: float, du_f: float) -> None:
        if self.n == len(self._u):
            self._u = np.concatenate([self._u, np.empty(len(self._u))])
            self._du = np.concatenate([self._du, np.empty(len(self._du))])
        self._u[self.n] = u_f
        self._du[self.n] = du_f
        self.n += 1

    def copy(self) -> "DelayHistory":
        dup = DelayHistory(self.dt, self.t_start, capacity=len(self._u))
        dup._u[: self.n] = self._u[: self.n]
        dup._du[: self.n] = self._du[: self.n]
        dup.n = self.n
        return dup

    def eval(self, t: float) -> float:
        """Flame velocity at time t within the stored span."""
        x = (t - self.t_start) / self.dt
        k = int(math.floor(x))
        theta = x - k
        # Snap to grid nodes; keeps whole-step delay queries exact.
        if theta < 1e-9:
            theta = 0.0
        elif theta > 1.0 - 1e-9:
            k += 1
            theta = 0.0
        if k < 0 or k >= self.n or (theta > 0.0 and k + 1 >= self.n):
            raise InvalidArgumentError(
                f"delay query at t={t} outside stored history "
                f"[{self.t_start}, {self.next_time - self.dt}]"
            )
        u = self._u
        if theta == 0.0:
            return float(u[k])
        du = self._du
        t2 = theta * theta
        t3 = t2 * theta
        h00 = 2.0 * t3 - 3.0 * t2 + 1.0
        h10 = t3 - 2.0 * t2 + theta
        h01 = 1.0 - h00
        h11 = t3 - t2
        return float(
            h00 * u[k] + h01 * u[k + 1] + self.dt * (h10 * du[k] + h11 * du[k + 1])
        )


def _rk4_step(kernel: _ModelKernel, tau: float, y: np.ndarray,
              hist: DelayHistory, t: float, dt: float, stages) -> int:
    """One in-place RK4 update of y from t to t + dt; history untouched.

    The buffer's newest node must be stamped at t, so with tau >= dt every
    delayed stage query t + c*dt - tau lies inside the stored span. Returns
    the number of stage evaluations that folded the heat-release argument.
    """
    k1, k2, k3, k4 = stages
    half = 0.5 * dt
    folds = kernel.rhs(y, hist.eval(t - tau), k1)
    u_mid = hist.eval(t + half - tau)
    folds += kernel.rhs(y + half * k1, u_mid, k2)
    folds += kernel.rhs(y + half * k2, u_mid, k3)
    folds += kernel.rhs(y + dt * k3, hist.eval(t + dt - tau), k4)
    y += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return folds


def step_once(params: ModelParams, state, history: DelayHistory,
              dt: float) -> tuple[np.ndarray, int]:
    """Advance `state` by one RK4 step of length dt, leaving `history` as is.

    The newest history node must be stamped at the state's current time
    (callers append it from the state before invoking this). Returns the new
    packed state and the fold-event count for the step. This is the one-step
    primitive behind Stepper; reduced-order models drive it directly so they
    control what enters their delay buffer.
    """
    if dt <= 0:
        raise InvalidArgumentError("dt must be positive")
    if params.tau < dt - 1e-12:
        raise InvalidArgumentError("explicit method of steps requires tau >= dt")
    if abs(history.dt - dt) > 1e-12 * dt:
        raise InvalidArgumentError("history spacing must equal the integrator step")
    y = _as_packed(state).astype(float).copy()
    if len(y) != params.dim:
        raise DimensionMismatchError(
            f"state has length {len(y)}, params expect {params.dim}"
        )
    t = history.last_time
    if history.t_start > t - params.tau + 1e-9 * dt:
        raise InvalidArgumentError("history does not span tau behind the current time")
    kernel = _kernel(params)
    stages = tuple(np.empty_like(y) for _ in range(4))
    folds = _rk4_step(kernel, params.tau, y, history, t, dt, stages)
    return y, folds


class Stepper:
    """Advances one trajectory in lockstep with its delay buffer.

    Owns a packed state vector, the step counter, a fold-event counter, and
    the history buffer; `integrate` is the one-shot wrapper. The explicit
    method of steps requires tau >= dt so every stage query lies in the past.
    """

    def __init__(self, params: ModelParams, initial, history: DelayHistory,
                 dt: float, *, blowup_limit: float = DEFAULT_BLOWUP_LIMIT):
        if dt <= 0:
            raise InvalidArgumentError("dt must be positive")
        if params.tau < dt - 1e-12:
            raise InvalidArgumentError("explicit method of steps requires tau >= dt")
        if abs(history.dt - dt) > 1e-12 * dt:
            raise InvalidArgumentError("history spacing must equal the integrator step")
        y = _as_packed(initial).astype(float).copy()
        if len(y) != params.dim:
            raise DimensionMismatchError(
                f"initial state has length {len(y)}, params expect {params.dim}"
            )
        self.params = params
        self.kernel = _kernel(params)
        self.dt = float(dt)
        self.blowup_limit = float(blowup_limit)
        self.t0 = history.next_time
        if history.t_start > self.t0 - params.tau + 1e-9 * dt:
            raise InvalidArgumentError("history does not span tau behind the start time")
        self.history = history
        self.y = y
        self.step_index = 0
        self.fold_events = 0
        self._stages = tuple(np.empty_like(y) for _ in range(4))
        history.append(self.kernel.u_f(y), self.kernel.du_f(y))

    @property
    def t(self) -> float:
        return self.t0 + self.step_index * self.dt

    def step(self) -> None:
        """One RK4 step; appends the new node and checks the blowup guard."""
        kernel = self.kernel
        hist = self.history
        y = self.y
        self.fold_events += _rk4_step(kernel, self.params.tau, y, hist,
                                      self.t, self.dt, self._stages)
        self.step_index += 1
        hist.append(kernel.u_f(y), kernel.du_f(y))
        peak = float(np.max(np.abs(y)))
        if not peak <= self.blowup_limit:
            raise NumericalBlowupError(
                f"state magnitude {peak:g} exceeded {self.blowup_limit:g} at t={self.t:g}"
            )

    def run(self, n_steps: int, *, record: bool = True) -> TimeSeries | None:
        """Advance n_steps; if recording, returns the trajectory including
        the current state as sample 0 (n_steps + 1 samples)."""
        if n_steps < 0:
            raise InvalidArgumentError("n_steps must be >= 0")
        if not record:
            for _ in range(n_steps):
                self.step()
            return None
        out = np.empty((n_steps + 1, len(self.y)))
        out[0] = self.y
        t_first = self.t
        for i in range(n_steps):
            self.step()
            out[i + 1] = self.y
        return TimeSeries(dt=self.dt, t0=t_first, states=out)


def integrate(initial, history: DelayHistory, params: ModelParams, dt: float,
              n_steps: int, *, blowup_limit: float = DEFAULT_BLOWUP_LIMIT) -> TimeSeries:
    """Fixed-step RK4 trajectory from `initial`, sampled every dt.

    `history` must span tau behind its next node time, which becomes t0.
    The returned series has n_steps + 1 samples (the initial state first).
    """
    stepper = Stepper(params, initial, history, dt, blowup_limit=blowup_limit)
    return stepper.run(n_steps)


def simulate_transient(params: ModelParams, dt: float = DEFAULT_DT, *,
                       transient: float = 200.0,
                       blowup_limit: float = DEFAULT_BLOWUP_LIMIT) -> Stepper:
    """Stepper relaxed onto the attractor from the standard kick.

    Starts from eta_1 = 1 (rest zero) with zero pre-history at t = 0 and
    integrates without recording until t = transient.
    """
    history = DelayHistory.constant(0.0, params.tau, dt)
    stepper = Stepper(params, GalerkinState.standard_kick(params.n_modes), history,
                      dt, blowup_limit=blowup_limit)
    stepper.run(int(round(transient / dt)), record=False)
    return stepper


def simulate(params: ModelParams, dt: float = DEFAULT_DT, *, duration: float,
             transient: float = 200.0,
             blowup_limit: float = DEFAULT_BLOWUP_LIMIT) -> tuple[TimeSeries, int]:
    """Post-transient trajectory of length `duration` from the standard kick.

    Returns (series, fold_events); the series starts at t = transient.
    """
    stepper = simulate_transient(params, dt, transient=transient,
                                 blowup_limit=blowup_limit)
    series = stepper.run(int(round(duration / dt)))
    return series, stepper.fold_events


def lyapunov_leading(params: ModelParams, dt: float = DEFAULT_DT,
                     t_total: float = 1000.0, renorm_interval: float = 1.0,
                     seed: int = 0, *, transient: float = 200.0,
                     perturbation: float = 1e-8,
                     blowup_limit: float = DEFAULT_BLOWUP_LIMIT) -> float:
    """Leading Lyapunov exponent by the two-trajectory method.

    A reference trajectory is relaxed onto the attractor, then shadowed by a
    copy perturbed by `perturbation` in norm (the delay history starts
    identical and is rescaled jointly afterwards, so the separation norm is
    taken over the state vector plus the live history window). Every
    renorm_interval the separation is measured, its log growth recorded, and
    the perturbed pair pulled back to the reference. The first 10% of
    events are discarded so the perturbation can align with the fastest
    direction; the mean log growth rate over the rest is returned.

    Warns with LyapunovConvergenceWarning when the running estimate moves by
    more than 20% of max(|final|, 0.05) over the last half of the run.
    """
    if t_total < 2 * renorm_interval:
        raise InvalidArgumentError("t_total must cover at least two renorm intervals")
    rng = np.random.default_rng(seed)
    ref = simulate_transient(params, dt, transient=transient, blowup_limit=blowup_limit)
    pert = Stepper(params, ref.y, _live_copy(ref), dt, blowup_limit=blowup_limit)
    direction = rng.standard_normal(params.dim)
    pert.y += perturbation * direction / np.linalg.norm(direction)
    # Refresh the node just appended from the pre-perturbation state.
    pert.history.u_f_values[-1] = pert.kernel.u_f(pert.y)
    pert.history.du_f_values[-1] = pert.kernel.du_f(pert.y)

    m_live = delay_steps(params.tau, dt) + 1
    steps_per = int(round(renorm_interval / dt))
    if steps_per < 1:
        raise InvalidArgumentError("renorm_interval must be at least one step")
    n_events = int(round(t_total / renorm_interval))
    logs = np.empty(n_events)
    for event in range(n_events):
        for _ in range(steps_per):
            ref.step()
            pert.step()
        dy = pert.y - ref.y
        du = pert.history.u_f_values[-m_live:] - ref.history.u_f_values[-m_live:]
        ddu = pert.history.du_f_values[-m_live:] - ref.history.du_f_values[-m_live:]
        dist = math.sqrt(float(dy @ dy) + float(du @ du))
        if dist == 0.0:
            raise InvalidArgumentError("trajectories coincide; cannot renormalize")
        logs[event] = math.log(dist / perturbation)
        factor = perturbation / dist
        pert.y[:] = ref.y + factor * dy
        pert.history.u_f_values[-m_live:] = ref.history.u_f_values[-m_live:] + factor * du
        pert.history.du_f_values[-m_live:] = ref.history.du_f_values[-m_live:] + factor * ddu

    skip = max(1, n_events // 10)
    used = logs[skip:]
    running = np.cumsum(used) / (renorm_interval * np.arange(1, len(used) + 1))
    estimate = float(running[-1])
    tail = running[len(running) // 2 :]
    spread = float(np.max(tail) - np.min(tail))
    if spread > 0.2 * max(abs(estimate), 0.05):
        warnings.warn(
            f"Lyapunov estimate moved by {spread:.3g} over the last half of the run "
            f"(final {estimate:.3g}); increase t_total",
            LyapunovConvergenceWarning,
            stacklevel=2,
        )
    return estimate


def _live_copy(stepper: Stepper) -> DelayHistory:
    """Copy of the stepper's history trimmed so its next node is `stepper.t`.

    Only the last tau of history matters dynamically; the copy keeps the
    full buffer for simplicity but must end exactly one node before the
    current time because Stepper re-appends the current node.
    """
    hist = stepper.history
    dup = DelayHistory(hist.dt, hist.t_start, capacity=hist.n + 4)
    dup._u[: hist.n - 1] = hist._u[: hist.n - 1]
    dup._du[: hist.n - 1] = hist._du[: hist.n - 1]
    dup.n = hist.n - 1
    return dup
