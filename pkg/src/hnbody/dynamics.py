"""Cotangent-potential n-body dynamics on the hyperbolic half-plane.

The pairwise interaction is the hyperbolic-cotangent potential written in
model coordinates; its singular set is the zero locus of the pairwise
function theta.  The motion equations combine the geodesic term with the
metric gradient of the potential, here kept in the fully explicit closed
form.  An embedded Runge-Kutta 5(4) pair with cubic Hermite dense output
integrates the first-order system, and Noether functionals of the three
isometric subgroups provide conserved-quantity monitors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError, StepSizeError

# The interaction term of the closed-form motion equations equals
# GRADIENT_SIGN * (2/mu) * (2 R^2 / m_k) * dV/dwbar_k.  The sign is resolved
# by the finite-difference oracle (gradient_consistency) and frozen here;
# the matching potential-energy coupling makes E = T + 2 R^2 V conserved.
GRADIENT_SIGN = -1.0
ENERGY_COUPLING = 2.0

THETA_FLOOR_SCALE = 1e-12  # singularity guard: theta_min = 1e-12 * scale^4


@dataclass
class SystemState:
    """Instantaneous state: time, per-body positions/velocities, masses, R."""

    t: float
    positions: np.ndarray
    velocities: np.ndarray
    masses: np.ndarray
    R: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=complex).copy()
        self.velocities = np.asarray(self.velocities, dtype=complex).copy()
        self.masses = np.asarray(self.masses, dtype=float).copy()
        self.t = float(self.t)
        self.R = float(self.R)
        n = self.positions.size
        if n < 1:
            raise DomainError("a system needs at least one body")
        if self.velocities.size != n or self.masses.size != n:
            raise DomainError("positions, velocities and masses must have equal length")
        if not np.all(self.masses > 0):
            raise DomainError("masses must be positive")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise DomainError("curvature radius must be a positive real")
        if not np.all(self.positions.imag > 0):
            raise DomainError("all bodies must lie in the open upper half-plane")

    @property
    def n(self) -> int:
        return self.positions.size


def theta(wk: complex, wj: complex) -> float:
    """Pairwise singular-set function.

    [(conj(wk)+wk)(conj(wj)+wj) - 2(|wk|^2+|wj|^2)]^2
        - (conj(wk)-wk)^2 (conj(wj)-wj)^2,
    evaluated symmetrically so theta(wk, wj) == theta(wj, wk) bit for bit.
    Nonnegative; zero exactly on collision/antipodal configurations.
    """
    wk, wj = complex(wk), complex(wj)
    cross = (2.0 * wk.real) * (2.0 * wj.real) - 2.0 * (
        (wk.real * wk.real + wk.imag * wk.imag) + (wj.real * wj.real + wj.imag * wj.imag)
    )
    return cross * cross - 16.0 * (wk.imag * wk.imag) * (wj.imag * wj.imag)


def _pair_tables(w: np.ndarray):
    """Matrices of the pair numerator and theta over all body pairs."""
    x2 = 2.0 * w.real
    nrm = w.real * w.real + w.imag * w.imag
    cross = np.outer(x2, x2) - 2.0 * (nrm[:, None] + nrm[None, :])
    v2 = w.imag * w.imag
    th = cross * cross - 16.0 * np.outer(v2, v2)
    return cross, th


_TRIU_CACHE: dict = {}


def _triu(n: int):
    idx = _TRIU_CACHE.get(n)
    if idx is None:
        idx = np.triu_indices(n, k=1)
        _TRIU_CACHE[n] = idx
    return idx


def theta_floor(positions: np.ndarray) -> float:
    nn = positions.real ** 2 + positions.imag ** 2
    scale2 = max(1.0, float(nn.max()))
    return THETA_FLOOR_SCALE * scale2 * scale2


def min_pair_theta(positions: np.ndarray) -> float:
    w = np.asarray(positions, dtype=complex)
    if w.size < 2:
        return math.inf
    _, th = _pair_tables(w)
    return float(np.min(th[_triu(w.size)]))


def _check_off_singular(positions: np.ndarray, t: float | None = None):
    w = np.asarray(positions, dtype=complex)
    if w.size < 2:
        return
    _, th = _pair_tables(w)
    floor = theta_floor(w)
    iu = _triu(w.size)
    vals = th[iu]
    worst = int(np.argmin(vals))
    if vals[worst] < floor:
        pair = (int(iu[0][worst]), int(iu[1][worst]))
        raise SingularityError(
            f"pair {pair} touched the singular set (theta = {vals[worst]:.3e})",
            pair=pair,
            time=t,
            theta=float(vals[worst]),
        )


def cotangent_potential(state: SystemState) -> float:
    """Total potential (1/R) * sum_{k<j} m_k m_j * cross_{kj} / sqrt(theta_{kj}).

    Mobius invariant; raises on the singular set.
    """
    w = state.positions
    if state.n < 2:
        return 0.0
    cross, th = _pair_tables(w)
    iu = _triu(state.n)
    if np.any(th[iu] <= 0):
        k = int(np.argmin(th[iu]))
        pair = (int(iu[0][k]), int(iu[1][k]))
        raise SingularityError(f"pair {pair} lies on the singular set", pair=pair, time=state.t)
    mm = np.outer(state.masses, state.masses)
    return float(np.sum(mm[iu] * cross[iu] / np.sqrt(th[iu])) / state.R)


def _interaction_sums(positions: np.ndarray, masses: np.ndarray) -> np.ndarray:
    """S_k = sum_{j != k} m_j (conj(wj)-wj)^2 (wk-wj)(conj(wj)-wk) / theta^{3/2}."""
    w = positions
    n = w.size
    if n < 2:
        return np.zeros(n, dtype=complex)
    _, th = _pair_tables(w)
    np.fill_diagonal(th, 1.0)
    wb = w.conjugate()
    kernel = (wb - w)[None, :] ** 2 * (w[:, None] - w[None, :]) * (wb[None, :] - w[:, None])
    terms = masses[None, :] * kernel / th ** 1.5
    np.fill_diagonal(terms, 0.0)
    return terms.sum(axis=1)


def _force(w: np.ndarray, masses: np.ndarray, R: float, t: float | None = None) -> np.ndarray:
    """Interaction force -(2 (wk - conj wk)^3 / R) * S_k with the theta guard."""
    n = w.size
    if n < 2:
        return np.zeros(n, dtype=complex)
    _, th = _pair_tables(w)
    iu = _triu(n)
    vals = th[iu]
    if vals.min() < theta_floor(w):
        worst = int(np.argmin(vals))
        pair = (int(iu[0][worst]), int(iu[1][worst]))
        raise SingularityError(
            f"pair {pair} touched the singular set (theta = {vals[worst]:.3e})",
            pair=pair,
            time=t,
            theta=float(vals[worst]),
        )
    np.fill_diagonal(th, 1.0)
    wb = w.conjugate()
    kernel = (wb - w)[None, :] ** 2 * (w[:, None] - w[None, :]) * (wb[None, :] - w[:, None])
    terms = masses[None, :] * kernel / th ** 1.5
    np.fill_diagonal(terms, 0.0)
    return -(2.0 * (w - wb) ** 3 / R) * terms.sum(axis=1)


def _accel(w: np.ndarray, v: np.ndarray, masses: np.ndarray, R: float,
           t: float | None = None) -> np.ndarray:
    return 2.0 * v * v / (w - w.conjugate()) + _force(w, masses, R, t)


def eom_interaction(state: SystemState) -> np.ndarray:
    """Force part of the motion equations (geodesic term excluded):

    -(2 (wk - conj(wk))^3 / R) * S_k  per body.
    """
    return _force(state.positions, state.masses, state.R, state.t)


def eom_rhs(state: SystemState) -> np.ndarray:
    """Accelerations: 2*wdot^2/(w - conj(w)) plus the interaction force."""
    return _accel(state.positions, state.velocities, state.masses, state.R, state.t)


# ---------------------------------------------------------------------------
# Gradient oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradientReport:
    sign: float
    max_rel_error: float
    step: float


def gradient_consistency(state: SystemState, step: float | None = None) -> GradientReport:
    """Check the interaction force against the metric gradient of the potential.

    The force on body k is compared with c * (2/mu(wk)) * (2 R^2 / m_k) *
    dV/dwbar_k, the Wirtinger derivative taken by central finite differences
    in the real and imaginary parts.  Returns the sign c in {+1, -1} that
    minimizes the maximal relative error, together with that error.
    """
    scale = max(1.0, float(np.max(np.abs(state.positions))))
    h = step if step is not None else 1e-6 * scale
    if not h > 1e-13 * scale:
        raise DomainError(f"finite-difference step underflow: {h!r}")

    force = eom_interaction(state)
    if state.n < 2:
        return GradientReport(GRADIENT_SIGN, 0.0, h)

    def potential_at(k: int, dz: complex) -> float:
        w = state.positions.copy()
        w[k] += dz
        shifted = SystemState(state.t, w, state.velocities, state.masses, state.R)
        return cotangent_potential(shifted)

    target = np.zeros(state.n, dtype=complex)
    for k in range(state.n):
        dvdx = (potential_at(k, h) - potential_at(k, -h)) / (2.0 * h)
        dvdy = (potential_at(k, 1j * h) - potential_at(k, -1j * h)) / (2.0 * h)
        dwbar = 0.5 * (dvdx + 1j * dvdy)
        mu = (state.R / state.positions[k].imag) ** 2
        target[k] = (2.0 / mu) * (2.0 * state.R ** 2 / state.masses[k]) * dwbar

    denom = np.maximum(np.abs(force), 1e-300)
    best_sign, best_err = 1.0, math.inf
    for c in (1.0, -1.0):
        err = float(np.max(np.abs(force - c * target) / denom))
        if err < best_err:
            best_sign, best_err = c, err
    return GradientReport(best_sign, best_err, h)


# ---------------------------------------------------------------------------
# Conserved quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConservedQuantities:
    """Energy and the three momentum maps of the isometric subgroup actions."""

    energy: float
    momenta: np.ndarray  # pairing of the velocity with the fields w, 1, 1 + w^2

    def as_dict(self) -> dict:
        return {
            "energy": self.energy,
            "momentum_normal": float(self.momenta[0]),
            "momentum_nilpotent": float(self.momenta[1]),
            "momentum_rotation": float(self.momenta[2]),
        }


def conserved(state: SystemState) -> ConservedQuantities:
    """Energy T + 2 R^2 V and the momenta J_xi = sum m mu Re(wdot conj(xi))."""
    w, v, m, R = state.positions, state.velocities, state.masses, state.R
    mu = (R / w.imag) ** 2
    kinetic = 0.5 * float(np.sum(m * mu * np.abs(v) ** 2))
    energy = kinetic + ENERGY_COUPLING * R * R * cotangent_potential(state)
    momenta = np.array(
        [
            float(np.sum(m * mu * (v * np.conjugate(xi)).real))
            for xi in (w, np.ones_like(w), 1.0 + w * w)
        ]
    )
    return ConservedQuantities(energy, momenta)


# ---------------------------------------------------------------------------
# Adaptive integration (Dormand-Prince 5(4), FSAL, Hermite dense output)
# ---------------------------------------------------------------------------

# the motion equations are autonomous, so only the stage weights are needed
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.append(_DP_A[6], 0.0)  # the 7th stage is evaluated at the 5th-order result
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected: int
    min_theta: float


@dataclass
class Trajectory:
    """Accepted integration nodes with enough data for dense evaluation.

    ``ys`` stacks (positions, velocities) per node as a complex vector of
    length 2n; ``fs`` holds the corresponding derivative, so each step
    carries a cubic Hermite interpolant for every state component.
    """

    times: np.ndarray
    ys: np.ndarray
    fs: np.ndarray
    masses: np.ndarray
    R: float
    stats: IntegratorStats

    @property
    def n(self) -> int:
        return self.ys.shape[1] // 2

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def _hermite(self, t: float) -> np.ndarray:
        ts = self.times
        if not (ts[0] <= t <= ts[-1]):
            raise DomainError(f"time {t} outside the integrated span [{ts[0]}, {ts[-1]}]")
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        h = ts[i + 1] - ts[i]
        s = (t - ts[i]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (
            h00 * self.ys[i]
            + h10 * h * self.fs[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.fs[i + 1]
        )

    def sample(self, t: float):
        """Positions and velocities at time t (cubic Hermite between nodes)."""
        y = self._hermite(t)
        return y[: self.n], y[self.n :]

    def sample_many(self, ts):
        W = np.empty((len(ts), self.n), dtype=complex)
        V = np.empty_like(W)
        for i, t in enumerate(ts):
            W[i], V[i] = self.sample(t)
        return W, V

    def state_at(self, t: float) -> SystemState:
        w, v = self.sample(t)
        return SystemState(t, w, v, self.masses, self.R)

    @property
    def samples(self):
        """The accepted nodes as SystemState values (strictly increasing t)."""
        return [
            SystemState(t, y[: self.n], y[self.n :], self.masses, self.R)
            for t, y in zip(self.times, self.ys)
        ]


def integrate(
    state: SystemState,
    t_end: float,
    tol: float = 1e-10,
    max_step: float | None = None,
) -> Trajectory:
    """Integrate the motion equations from state.t to t_end.

    Embedded 5(4) pair with mixed absolute/relative per-component error
    control at ``tol``; halts with a singularity error if any pair drops
    below the theta floor, and with a step-size error on underflow.
    """
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    t0, t1 = state.t, float(t_end)
    if not t1 > t0:
        raise DomainError("t_end must exceed the initial time")
    hmax = (t1 - t0) if max_step is None else float(max_step)
    if not hmax > 0:
        raise DomainError("max_step must be positive")

    n = state.n
    masses, R = state.masses, state.R
    _check_off_singular(state.positions, t0)

    def rhs(y: np.ndarray) -> np.ndarray:
        if np.any(y[:n].imag <= 0):
            raise DomainError("body left the upper half-plane")
        out = np.empty_like(y)
        out[:n] = y[n:]
        out[n:] = _accel(y[:n], y[n:], masses, R)
        return out

    y = np.concatenate([state.positions, state.velocities])
    f = rhs(y)
    times, ys, fs = [t0], [y], [f]
    min_theta = min_pair_theta(state.positions)

    def err_norm(y0, y1, e):
        sc = tol + tol * np.maximum(np.abs(y0), np.abs(y1))
        return float(np.sqrt(np.mean(np.abs(e / sc) ** 2)))

    # starting step size from the scaled derivative magnitudes
    sc = tol + tol * np.abs(y)
    d0 = float(np.sqrt(np.mean(np.abs(y / sc) ** 2)))
    d1 = float(np.sqrt(np.mean(np.abs(f / sc) ** 2)))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, hmax, t1 - t0)

    t = t0
    steps = rejected = 0
    last_singularity = None
    k = np.empty((7, 2 * n), dtype=complex)
    while t < t1:
        h = min(h, t1 - t, hmax)
        if h < 1e-14 * max(1.0, abs(t)):
            th_here = min_pair_theta(y[:n])
            near_singular = th_here < 1e8 * theta_floor(y[:n])
            if last_singularity is not None or near_singular:
                traj = Trajectory(
                    np.array(times), np.array(ys), np.array(fs), masses, R,
                    IntegratorStats(steps, rejected, min_theta),
                )
                exc = last_singularity or SingularityError(
                    f"singularity verdict at t = {t} (theta = {th_here:.3e})",
                    time=t,
                    theta=th_here,
                )
                exc.trajectory = traj
                raise exc
            raise StepSizeError(f"step size underflow at t = {t}")
        k[0] = f
        failed = False
        for i in range(1, 7):
            yi = y + h * (_DP_A[i] @ k[:i])
            try:
                k[i] = rhs(yi)
            except SingularityError as exc:
                last_singularity = exc
                exc.time = t
                failed = True
                break
            except DomainError:
                failed = True
                break
        if failed:
            h *= 0.25
            rejected += 1
            continue
        y5 = y + h * (_DP_B5 @ k)
        err = err_norm(y, y5, h * ((_DP_B5 - _DP_B4) @ k))
        if err <= 1.0:
            t += h
            y = y5
            f = k[6].copy()  # FSAL: the last stage is rhs(y5); copy out of the stage buffer
            times.append(t)
            ys.append(y)
            fs.append(f)
            steps += 1
            th = min_pair_theta(y[:n])
            min_theta = min(min_theta, th)
            if th < theta_floor(y[:n]):
                traj = Trajectory(
                    np.array(times), np.array(ys), np.array(fs), masses, R,
                    IntegratorStats(steps, rejected, min_theta),
                )
                raise SingularityError(
                    f"singularity verdict at t = {t} (theta = {th:.3e})",
                    time=t,
                    theta=th,
                    trajectory=traj,
                )
            h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 1e-30 else 5.0
        else:
            rejected += 1
            h *= max(0.2, 0.9 * err ** -0.2)

    return Trajectory(
        np.array(times), np.array(ys), np.array(fs), masses, R,
        IntegratorStats(steps, rejected, min_theta),
    )


# ---------------------------------------------------------------------------
# Weak-form kinetic-equation check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseTestFunction:
    """Smooth phi(t, x, v) with analytic partials for the weak-form check.

    Gradients are encoded as complex numbers g with Re g = d/d(Re .) and
    Im g = d/d(Im .), so the pairing <V, grad phi> is Re(conj(V) * g).
    """

    name: str
    value: callable
    dt: callable
    grad_x: callable
    grad_v: callable


def _gaussian(x: complex, v: complex) -> float:
    return math.exp(-(abs(x - 1j) ** 2 + abs(v) ** 2) / 8.0)


def _gauss_gx(x, v):
    g = _gaussian(x, v)
    return -g * ((x - 1j).real + 1j * (x - 1j).imag) / 4.0


def _gauss_gv(x, v):
    g = _gaussian(x, v)
    return -g * (v.real + 1j * v.imag) / 4.0


def default_test_functions() -> tuple:
    """Fixed library: low-order polynomials and polynomial-times-Gaussian."""
    zero = lambda t, x, v: 0.0
    zeroc = lambda t, x, v: 0.0j
    return (
        PhaseTestFunction("one", lambda t, x, v: 1.0, zero, zeroc, zeroc),
        PhaseTestFunction("re_x", lambda t, x, v: x.real, zero, lambda t, x, v: 1.0 + 0.0j, zeroc),
        PhaseTestFunction("im_x", lambda t, x, v: x.imag, zero, lambda t, x, v: 1.0j, zeroc),
        PhaseTestFunction(
            "speed_sq", lambda t, x, v: abs(v) ** 2, zero, zeroc,
            lambda t, x, v: 2.0 * (v.real + 1j * v.imag),
        ),
        PhaseTestFunction(
            "re_x_gauss",
            lambda t, x, v: x.real * _gaussian(x, v),
            zero,
            lambda t, x, v: _gaussian(x, v) + x.real * _gauss_gx(x, v),
            lambda t, x, v: x.real * _gauss_gv(x, v),
        ),
        PhaseTestFunction(
            "t_im_x_gauss",
            lambda t, x, v: t * x.imag * _gaussian(x, v),
            lambda t, x, v: x.imag * _gaussian(x, v),
            lambda t, x, v: t * (1.0j * _gaussian(x, v) + x.imag * _gauss_gx(x, v)),
            lambda t, x, v: t * x.imag * _gauss_gv(x, v),
        ),
    )


def vlasov_weak_residual(traj: Trajectory, tests=None, num_points: int = 2001) -> float:
    """Weak-form defect of the kinetic equation under the point-mass ansatz.

    For the empirical measure sum_i m_i delta(v - V_i) delta(x - X_i), the
    weak formulation against phi reduces to

        d/dt sum_i m_i phi(t, X_i, V_i)
            = sum_i m_i [dphi/dt + <V_i, grad_x phi> + <a_i, grad_v phi>],

    with a_i the acceleration delivered by the motion equations.  The left
    side is taken by 4th-order central differences on a uniform grid; the
    returned value is the largest time-averaged absolute defect over the
    test-function library.
    """
    if tests is None:
        tests = default_test_functions()
    ts = np.linspace(traj.t0, traj.t1, num_points)
    dt = ts[1] - ts[0]
    W, V = traj.sample_many(ts)
    A = np.empty_like(W)
    for i, t in enumerate(ts):
        A[i] = eom_rhs(SystemState(t, W[i], V[i], traj.masses, traj.R))

    m = traj.masses
    worst = 0.0
    for tf in tests:
        g = np.array(
            [sum(m[k] * tf.value(t, W[i, k], V[i, k]) for k in range(traj.n))
             for i, t in enumerate(ts)]
        )
        rhs = np.array(
            [
                sum(
                    m[k]
                    * (
                        tf.dt(t, W[i, k], V[i, k])
                        + (np.conjugate(V[i, k]) * tf.grad_x(t, W[i, k], V[i, k])).real
                        + (np.conjugate(A[i, k]) * tf.grad_v(t, W[i, k], V[i, k])).real
                    )
                    for k in range(traj.n)
                )
                for i, t in enumerate(ts)
            ]
        )
        dg = (-g[4:] + 8.0 * g[3:-1] - 8.0 * g[1:-3] + g[:-4]) / (12.0 * dt)
        defect = float(np.mean(np.abs(dg - rhs[2:-2])))
        worst = max(worst, defect)
    return worst
