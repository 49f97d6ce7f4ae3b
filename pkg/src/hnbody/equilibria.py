"""Residual systems for the five Mobius-solution classes and their solvers.

A Mobius solution (relative equilibrium) drifts along the orbit of a
one-parameter subgroup while solving the motion equations.  Matching the
drift ansatz against the equations turns each class into an algebraic
system over the configuration:

* hyperbolic normal  -- drift field w at rate 1/2,
* parabolic nilpotent -- drift field 1 (no solutions exist),
* elliptic cyclic    -- drift field 1 + w^2,
* parabolic cyclic   -- drift field 1 + w^2 - (w - conj w)^2/4 (none exist),
* hyperbolic cyclic  -- drift field 1 + w^2 - (w - conj w)^2/2 (none exist).

The first three systems act on positions directly; the two cyclic families
are written in the tan-reparametrized variables (alpha, beta, s) of their
explicit flows.  ``mobius_ansatz_defect`` is the independent oracle tying
every system back to the motion equations, and the two certifiers sample
the sign-contradiction identities behind the non-existence results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .clifford import (
    KillingField,
    NILPOTENT_N,
    NORMAL_A,
    ROTATION_ELLIPTIC,
    ROTATION_HYPERBOLIC,
    ROTATION_PARABOLIC,
    killing_velocity,
    killing_wirtinger,
)
from .dynamics import SystemState, _interaction_sums, eom_interaction, theta
from .errors import ClassNotSolvableError, ConvergenceError, DomainError, SingularityError


class EquilibriumClass(str, Enum):
    HYPERBOLIC_NORMAL = "hyperbolic-normal"
    PARABOLIC_NILPOTENT = "parabolic-nilpotent"
    ELLIPTIC_CYCLIC = "elliptic-cyclic"
    PARABOLIC_CYCLIC = "parabolic-cyclic"
    HYPERBOLIC_CYCLIC = "hyperbolic-cyclic"


#: Drift field and rate under which each class solves the motion equations.
CLASS_DRIFT: dict[EquilibriumClass, tuple[KillingField, float]] = {
    EquilibriumClass.HYPERBOLIC_NORMAL: (NORMAL_A, 0.5),
    EquilibriumClass.PARABOLIC_NILPOTENT: (NILPOTENT_N, 1.0),
    EquilibriumClass.ELLIPTIC_CYCLIC: (ROTATION_ELLIPTIC, 1.0),
    EquilibriumClass.PARABOLIC_CYCLIC: (ROTATION_PARABOLIC, 1.0),
    EquilibriumClass.HYPERBOLIC_CYCLIC: (ROTATION_HYPERBOLIC, 1.0),
}

SOLVABLE_CLASSES = (EquilibriumClass.HYPERBOLIC_NORMAL, EquilibriumClass.ELLIPTIC_CYCLIC)
NONEXISTENT_CLASSES = (
    EquilibriumClass.PARABOLIC_NILPOTENT,
    EquilibriumClass.PARABOLIC_CYCLIC,
    EquilibriumClass.HYPERBOLIC_CYCLIC,
)
CERTIFIABLE_CLASSES = (EquilibriumClass.PARABOLIC_CYCLIC, EquilibriumClass.HYPERBOLIC_CYCLIC)


def equilibrium_velocity(cls: EquilibriumClass, w) -> np.ndarray:
    """Velocity field of the class drift at the given positions."""
    field, rate = CLASS_DRIFT[cls]
    w = np.asarray(w, dtype=complex)
    return np.array([rate * killing_velocity(field, wk) for wk in w.ravel()]).reshape(w.shape)


def mobius_ansatz_defect(
    field: KillingField, positions, masses, R: float, rate: float = 1.0
) -> np.ndarray:
    """Motion-equation defect of the drift ansatz wdot = rate * K(w).

    Independent oracle for all five residual systems: substitutes the drift
    velocity and its chain-rule acceleration into the equations of motion
    and returns the per-body complex defect.
    """
    w = np.asarray(positions, dtype=complex)
    m = np.asarray(masses, dtype=float)
    s = SystemState(0.0, w, np.zeros_like(w), m, R)
    force = eom_interaction(s)
    out = np.empty_like(w)
    for k in range(w.size):
        K = killing_velocity(field, w[k])
        dKw, dKwb = killing_wirtinger(field, w[k])
        wddot = rate * rate * (dKw * K + dKwb * np.conjugate(K))
        vel = rate * K
        out[k] = wddot - 2.0 * vel * vel / (w[k] - np.conjugate(w[k])) - force[k]
    return out


# ---------------------------------------------------------------------------
# Position-space residual systems
# ---------------------------------------------------------------------------

def _sides(state: SystemState, lhs_fn) -> tuple[np.ndarray, np.ndarray]:
    w = state.positions
    lhs = np.array([lhs_fn(wk, state.R) for wk in w])
    rhs = _interaction_sums(w, state.masses)
    return lhs, rhs


def _lhs_hyperbolic_normal(w: complex, R: float) -> complex:
    wb = np.conjugate(w)
    return R * (w + wb) * w / (8.0 * (w - wb) ** 4)


def _lhs_parabolic_nilpotent(w: complex, R: float) -> complex:
    wb = np.conjugate(w)
    return -R / (4.0 * (w - wb) ** 4)


def _lhs_elliptic_cyclic(w: complex, R: float) -> complex:
    wb = np.conjugate(w)
    return R * (1.0 + w * w) * (1.0 + abs(w) ** 2) / ((w - wb) ** 4)


def _lhs_parabolic_cyclic(w: complex, R: float) -> complex:
    wb = np.conjugate(w)
    num = (w - wb) ** 2 * (8.0 - w * w + 6.0 * abs(w) ** 2 + 3.0 * wb * wb) - 16.0 * (
        1.0 + w * w
    ) * (1.0 + abs(w) ** 2)
    return -R * num / (16.0 * (w - wb) ** 4)


def condition_sides(cls: EquilibriumClass, state: SystemState):
    """(lhs, rhs) of the algebraic condition system, per body.

    lhs is the class-specific closed form; rhs is the interaction sum
    S_k = sum_{j != k} m_j (conj(wj)-wj)^2 (wk-wj)(conj(wj)-wk)/theta^{3/2}.
    The hyperbolic-cyclic class is available only through its
    reparametrized family (residual_hyperbolic_cyclic).
    """
    table = {
        EquilibriumClass.HYPERBOLIC_NORMAL: _lhs_hyperbolic_normal,
        EquilibriumClass.PARABOLIC_NILPOTENT: _lhs_parabolic_nilpotent,
        EquilibriumClass.ELLIPTIC_CYCLIC: _lhs_elliptic_cyclic,
        EquilibriumClass.PARABOLIC_CYCLIC: _lhs_parabolic_cyclic,
    }
    if cls not in table:
        raise DomainError(f"{cls.value} has no position-space condition system")
    return _sides(state, table[cls])


def residual_hyperbolic_normal(state: SystemState) -> np.ndarray:
    """Per-body defect of R (w + conj w) w / [8 (w - conj w)^4] = S_k."""
    lhs, rhs = condition_sides(EquilibriumClass.HYPERBOLIC_NORMAL, state)
    return lhs - rhs


def residual_parabolic_nilpotent(state: SystemState) -> np.ndarray:
    """Per-body defect of -R / [4 (w - conj w)^4] = S_k.

    The left side is the strictly negative real -R/(64 Im(w)^4), which is
    what rules the class out.
    """
    lhs, rhs = condition_sides(EquilibriumClass.PARABOLIC_NILPOTENT, state)
    return lhs - rhs


def residual_elliptic_cyclic(state: SystemState) -> np.ndarray:
    """Per-body defect of R (1 + w^2)(1 + |w|^2) / (w - conj w)^4 = S_k."""
    lhs, rhs = condition_sides(EquilibriumClass.ELLIPTIC_CYCLIC, state)
    return lhs - rhs


# ---------------------------------------------------------------------------
# Reparametrized cyclic families
# ---------------------------------------------------------------------------

_POLE_TOL = 1e-10


@dataclass(frozen=True)
class CyclicParams:
    """Initial data (alpha_k, beta_k) and the tan-reparametrized variable s.

    The parabolic family uses w_k(0) = alpha_k + i beta_k (beta_k != 0);
    the hyperbolic family uses alpha_k = u_k(0) + v_k(0) and
    beta_k = u_k(0) - v_k(0), so alpha_k != beta_k keeps bodies off the
    real axis.
    """

    alpha: np.ndarray
    beta: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float).copy())
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).copy())
        object.__setattr__(self, "s", float(self.s))
        if self.alpha.size != self.beta.size or self.alpha.size < 1:
            raise DomainError("alpha and beta must be nonempty and equally long")

    @property
    def n(self) -> int:
        return self.alpha.size


def _pole_check(factors: np.ndarray, what: str):
    if np.any(np.abs(factors) < _POLE_TOL):
        raise DomainError(f"reparametrization pole: {what} vanishes")


@dataclass(frozen=True)
class AuxLetters:
    """Per-body letters of the hyperbolic-cyclic flow and the pairwise Xi.

    A_l and B_l are the half tangent-additions of the two characteristics,
    C_l = A_l + B_l and D_l = A_l - B_l recover Re w and Im w, and
    Xi_{(k,j)} collects the squared coordinates entering the singular
    function of the parabolic parametrization.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Xi: np.ndarray


def aux_letters(p: CyclicParams) -> AuxLetters:
    """Evaluate A, B, C, D at s, plus the parabolic pairwise Xi table."""
    fa = 1.0 - p.alpha * p.s
    fb = 1.0 - p.beta * p.s
    _pole_check(fa, "1 - alpha*s")
    _pole_check(fb, "1 - beta*s")
    A = (p.alpha + p.s) / (2.0 * fa)
    B = (p.beta + p.s) / (2.0 * fb)
    # parabolic-parametrization coordinates for Xi
    u = (p.alpha + p.s) / fa
    v2 = p.beta ** 2 * (1.0 + p.s ** 2) ** 2 / fa ** 4
    Xi = u[:, None] ** 2 + u[None, :] ** 2 + v2[:, None] + v2[None, :]
    return AuxLetters(A, B, A + B, A - B, Xi)


def positions_parabolic_cyclic(p: CyclicParams) -> np.ndarray:
    """w_k(s) = (alpha_k + s)/(1 - alpha_k s) + i beta_k (1 + s^2)/(1 - alpha_k s)^2."""
    fa = 1.0 - p.alpha * p.s
    _pole_check(fa, "1 - alpha*s")
    if np.any(p.beta == 0):
        raise DomainError("parabolic-cyclic bodies need beta != 0")
    return (p.alpha + p.s) / fa + 1j * p.beta * (1.0 + p.s ** 2) / fa ** 2


def positions_hyperbolic_cyclic(p: CyclicParams) -> np.ndarray:
    """w_k(s) = C_k(s) + i D_k(s) from the letters of the two characteristics."""
    if np.any(p.alpha == p.beta):
        raise DomainError("hyperbolic-cyclic bodies need alpha != beta")
    letters = aux_letters(p)
    return letters.C + 1j * letters.D


def theta_parametric(p: CyclicParams, kind: str = "parabolic") -> np.ndarray:
    """Pairwise singular function in the (alpha, beta) variables.

    Written through the Xi table for the parabolic parametrization,
    [4 u_j u_k - 2 Xi_{(k,j)}]^2 - 16 beta_k^2 beta_j^2 (1+s^2)^4 / (...)^4,
    which coincides with theta at the parametrized positions.
    """
    if kind == "parabolic":
        letters = aux_letters(p)
        fa = 1.0 - p.alpha * p.s
        u = (p.alpha + p.s) / fa
        v2 = p.beta ** 2 * (1.0 + p.s ** 2) ** 2 / fa ** 4
        cross = 4.0 * np.outer(u, u) - 2.0 * letters.Xi
        return cross ** 2 - 16.0 * np.outer(v2, v2)
    w = positions_hyperbolic_cyclic(p)
    return np.array([[theta(wk, wj) for wj in w] for wk in w])


def residual_parabolic_cyclic(p: CyclicParams, masses, R: float):
    """Real and imaginary condition families of the parabolic-cyclic ansatz.

    Per body k, with u_l = (alpha_l + s)/(1 - alpha_l s):

      real:  -R (alpha_k+s)(1+alpha_k^2)(1-alpha_k s)^5 / [64 beta_k^4 (1+s^2)^5]
                 = sum_j m_j beta_j^2 (u_j - u_k) / [Theta^{3/2} (1-alpha_j s)^4]
      imag:   R (1+alpha_k^2)[(1+alpha_k^2)(1-alpha_k s)^2 + 2 beta_k^2 (1+s^2)]
                 * (1-alpha_k s)^2 / [64 beta_k^4 (1+s^2)^4]
                 = sum_j m_j beta_j^2 [(u_j-u_k)^2 + (1+s^2)^2 (beta_j^2/(1-alpha_j s)^4
                   - beta_k^2/(1-alpha_k s)^4)] / [Theta^{3/2} (1-alpha_j s)^4]

    These are the real and imaginary parts of the motion-equation defect of
    the flow ansatz, scaled by R/(128 v_k^4 (1+s^2)^2) and
    R/(64 v_k^3 (1+s^2)^2) respectively.
    """
    m = np.asarray(masses, dtype=float)
    if m.size != p.n:
        raise DomainError("masses must match the number of bodies")
    if np.any(p.beta == 0):
        raise DomainError("parabolic-cyclic bodies need beta != 0")
    fa = 1.0 - p.alpha * p.s
    _pole_check(fa, "1 - alpha*s")
    s2 = 1.0 + p.s ** 2
    u = (p.alpha + p.s) / fa
    th = theta_parametric(p, "parabolic")
    np.fill_diagonal(th, 1.0)
    if np.any(th <= 0):
        raise DomainError("parametrized configuration touches the singular set")

    pref = m[None, :] * p.beta[None, :] ** 2 / (th ** 1.5 * fa[None, :] ** 4)
    du = u[None, :] - u[:, None]
    vterm = s2 ** 2 * (
        p.beta[None, :] ** 2 / fa[None, :] ** 4 - p.beta[:, None] ** 2 / fa[:, None] ** 4
    )
    re_sum = pref * du
    im_sum = pref * (du ** 2 + vterm)
    np.fill_diagonal(re_sum, 0.0)
    np.fill_diagonal(im_sum, 0.0)

    lhs_re = -R * (p.alpha + p.s) * (1.0 + p.alpha ** 2) * fa ** 5 / (64.0 * p.beta ** 4 * s2 ** 5)
    lhs_im = (
        R
        * (1.0 + p.alpha ** 2)
        * ((1.0 + p.alpha ** 2) * fa ** 2 + 2.0 * p.beta ** 2 * s2)
        * fa ** 2
        / (64.0 * p.beta ** 4 * s2 ** 4)
    )
    return lhs_re - re_sum.sum(axis=1), lhs_im - im_sum.sum(axis=1)


def residual_hyperbolic_cyclic(p: CyclicParams, masses, R: float):
    """Real and imaginary condition families of the hyperbolic-cyclic ansatz.

    Written through the letters: with u = C, v = D and the primed
    characteristic derivatives p' = (1+alpha^2)/(1-alpha s)^2,
    q' = (1+beta^2)/(1-beta s)^2,

      real:  (1+s^2)^2 u'' + 2 s (1+s^2) u' - 4 (1+s^2) u u'
                 = (128 D_k^4 / R) sum_j m_j D_j^2 (C_j - C_k) / Theta^{3/2}
      imag:  (1+s^2)^2 v'' + 2 s (1+s^2) v' + (1+s^2)^2 p' q' / D_k
                 = (64 D_k^3 / R) sum_j m_j D_j^2 [(C_k-C_j)^2 - D_k^2 + D_j^2]
                   / Theta^{3/2}

    These are exactly the real and imaginary parts of the motion-equation
    defect of the flow ansatz.
    """
    m = np.asarray(masses, dtype=float)
    if m.size != p.n:
        raise DomainError("masses must match the number of bodies")
    if np.any(p.alpha == p.beta):
        raise DomainError("hyperbolic-cyclic bodies need alpha != beta (D_k != 0)")
    fa = 1.0 - p.alpha * p.s
    fb = 1.0 - p.beta * p.s
    _pole_check(fa, "1 - alpha*s")
    _pole_check(fb, "1 - beta*s")
    s2 = 1.0 + p.s ** 2

    letters = aux_letters(p)
    C, D = letters.C, letters.D
    pp = (1.0 + p.alpha ** 2) / fa ** 2
    qp = (1.0 + p.beta ** 2) / fb ** 2
    ppp = 2.0 * p.alpha * (1.0 + p.alpha ** 2) / fa ** 3
    qpp = 2.0 * p.beta * (1.0 + p.beta ** 2) / fb ** 3
    up, vp = (pp + qp) / 2.0, (pp - qp) / 2.0
    upp, vpp = (ppp + qpp) / 2.0, (ppp - qpp) / 2.0

    lhs_re = s2 ** 2 * upp + 2.0 * p.s * s2 * up - 4.0 * s2 * C * up
    lhs_im = s2 ** 2 * vpp + 2.0 * p.s * s2 * vp + s2 ** 2 * pp * qp / D

    w = C + 1j * D
    if np.any(w.imag <= 0):
        raise DomainError("parametrized bodies must stay in the upper half-plane")
    th = np.array([[theta(wk, wj) for wj in w] for wk in w])
    np.fill_diagonal(th, 1.0)
    if np.any(th <= 0):
        raise DomainError("parametrized configuration touches the singular set")

    dj2 = D[None, :] ** 2
    dc = C[:, None] - C[None, :]
    re_terms = m[None, :] * dj2 * (C[None, :] - C[:, None]) / th ** 1.5
    im_terms = m[None, :] * dj2 * (dc ** 2 - D[:, None] ** 2 + dj2) / th ** 1.5
    np.fill_diagonal(re_terms, 0.0)
    np.fill_diagonal(im_terms, 0.0)
    rhs_re = (128.0 * D ** 4 / R) * re_terms.sum(axis=1)
    rhs_im = (64.0 * D ** 3 / R) * im_terms.sum(axis=1)
    return lhs_re - rhs_re, lhs_im - rhs_im


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FindOptions:
    symmetry: str = "none"  # "none" | "axis" | "mirror"
    tol: float = 1e-10
    max_iter: int = 200
    fd_step: float = 1e-7
    lm_lambda0: float = 1e-3


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual_norm: float
    lm_lambda: float


def _residual_for(cls: EquilibriumClass, masses, R):
    def fn(positions: np.ndarray) -> np.ndarray:
        state = SystemState(0.0, positions, np.zeros_like(positions), masses, R)
        if cls is EquilibriumClass.HYPERBOLIC_NORMAL:
            r = residual_hyperbolic_normal(state)
        else:
            r = residual_elliptic_cyclic(state)
        return np.concatenate([r.real, r.imag])

    return fn


def _pack(cls_positions, symmetry: str):
    w = np.asarray(cls_positions, dtype=complex)
    if symmetry == "axis":
        return np.log(w.imag)
    if symmetry == "mirror":
        if w.size != 2:
            raise DomainError("mirror symmetry expects exactly two bodies")
        return np.array([w[0].real, math.log(w[0].imag)])
    return np.column_stack([w.real, np.log(w.imag)]).ravel()


def _unpack(x: np.ndarray, n: int, symmetry: str) -> np.ndarray:
    # ordinates live on a log scale; clip so wild trial steps cannot underflow
    if symmetry == "axis":
        return 1j * np.exp(np.clip(x, -30.0, 30.0))
    if symmetry == "mirror":
        w0 = x[0] + 1j * math.exp(min(max(x[1], -30.0), 30.0))
        return np.array([w0, -np.conjugate(w0)])
    xs = x.reshape(n, 2)
    return xs[:, 0] + 1j * np.exp(np.clip(xs[:, 1], -30.0, 30.0))


def _levenberg_marquardt(fun, x0, opts: FindOptions):
    x = np.asarray(x0, dtype=float).copy()
    r = fun(x)
    lam = opts.lm_lambda0
    for it in range(opts.max_iter):
        if float(np.max(np.abs(r))) < opts.tol:
            return x, SolveReport(it, float(np.max(np.abs(r))), lam)
        J = np.empty((r.size, x.size))
        for i in range(x.size):
            h = opts.fd_step * max(1.0, abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            J[:, i] = (fun(xp) - fun(xm)) / (2.0 * h)
        JtJ = J.T @ J
        g = J.T @ r
        scale = np.diag(np.maximum(np.diag(JtJ), 1e-30))
        while True:
            try:
                step = np.linalg.solve(JtJ + lam * scale, -g)
            except np.linalg.LinAlgError:
                raise ConvergenceError(
                    "singular normal equations",
                    iterations=it,
                    residual_norm=float(np.max(np.abs(r))),
                    condition=float(np.linalg.cond(JtJ)),
                ) from None
            try:
                r_trial = fun(x + step)
                ok = np.linalg.norm(r_trial) < np.linalg.norm(r)
            except (DomainError, SingularityError):  # off-domain trial step
                ok = False
            if ok:
                x = x + step
                r = r_trial
                lam = max(lam / 10.0, 1e-14)
                break
            lam *= 10.0
            if lam > 1e14:
                raise ConvergenceError(
                    "damping exhausted without an acceptable step",
                    iterations=it,
                    residual_norm=float(np.max(np.abs(r))),
                    condition=float(np.linalg.cond(JtJ)),
                )
    norm = float(np.max(np.abs(r)))
    if norm < opts.tol:
        return x, SolveReport(opts.max_iter, norm, lam)
    raise ConvergenceError(
        f"no convergence in {opts.max_iter} iterations (residual {norm:.3e})",
        iterations=opts.max_iter,
        residual_norm=norm,
    )


def find_equilibrium_detailed(
    cls: EquilibriumClass,
    masses,
    R: float,
    ansatz,
    opts: FindOptions | None = None,
):
    """Solve the class condition system; returns (state, report).

    ``ansatz`` provides starting positions (SystemState or complex array).
    The returned state carries the drift velocities of the class, so its
    trajectory follows the subgroup orbit.
    """
    cls = EquilibriumClass(cls)
    if cls in NONEXISTENT_CLASSES:
        raise ClassNotSolvableError(
            f"no {cls.value} solutions exist; the class is ruled out by a "
            "sign contradiction (see certify_nonexistence)"
        )
    opts = opts or FindOptions()
    positions = ansatz.positions if isinstance(ansatz, SystemState) else np.asarray(ansatz, dtype=complex)
    masses = np.asarray(masses, dtype=float)
    if masses.size != positions.size:
        raise DomainError("masses must match the ansatz size")

    residual = _residual_for(cls, masses, R)
    n = positions.size

    def fun(x):
        return residual(_unpack(x, n, opts.symmetry))

    x, report = _levenberg_marquardt(fun, _pack(positions, opts.symmetry), opts)
    w = _unpack(x, n, opts.symmetry)
    state = SystemState(0.0, w, equilibrium_velocity(cls, w), masses, R)
    return state, report


def find_equilibrium(cls, masses, R, ansatz, opts: FindOptions | None = None) -> SystemState:
    """Like find_equilibrium_detailed but returning only the solved state."""
    state, _ = find_equilibrium_detailed(cls, masses, R, ansatz, opts)
    return state


# ---------------------------------------------------------------------------
# Two-body elliptic pairing
# ---------------------------------------------------------------------------

def _elliptic_pair_sides(m1, m2, alpha, beta, R):
    state = SystemState(
        0.0,
        np.array([1j * alpha, 1j / beta]),
        np.zeros(2, dtype=complex),
        np.array([m1, m2]),
        R,
    )
    lhs, rhs = condition_sides(EquilibriumClass.ELLIPTIC_CYCLIC, state)
    return lhs.real, rhs.real


def elliptic_pair_rate(m1, m2, alpha, beta, R: float = 1.0) -> float:
    """Squared drift rate making the circle pair a relative equilibrium."""
    lhs, rhs = _elliptic_pair_sides(m1, m2, alpha, beta, R)
    return float(rhs[0] / lhs[0])


def two_body_elliptic(m1: float, m2: float, alpha: float, R: float = 1.0) -> float:
    """Companion circle parameter of the two-body rotating solution.

    Body 1 rides the foliation circle through i*alpha and i/alpha, body 2
    the circle with parameter beta, the two bodies staying on one geodesic
    through i on opposite sides of it (positions i*alpha and i/beta on the
    axis).  Both condition equations hold with a common positive drift
    rate exactly for one beta > 1, which is returned.  Equal masses give
    beta = alpha; the heavier companion rides the smaller circle.
    """
    if not (m1 > 0 and m2 > 0):
        raise DomainError("masses must be positive")
    if not alpha > 1:
        raise DomainError("alpha must exceed 1")

    def g(beta: float) -> float:
        lhs, rhs = _elliptic_pair_sides(m1, m2, alpha, beta, R)
        return lhs[0] * rhs[1] - lhs[1] * rhs[0]

    lo = 1.0 + 1e-9
    hi = max(4.0 * alpha, 8.0)
    glo = g(lo)
    while g(hi) * glo > 0:
        hi *= 4.0
        if hi > 1e9:
            raise ConvergenceError("no sign change found for the companion circle")
    beta = brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    if elliptic_pair_rate(m1, m2, alpha, beta, R) <= 0:
        raise ConvergenceError("companion root has a nonphysical drift rate")
    return float(beta)


# ---------------------------------------------------------------------------
# Non-existence certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificateSample:
    params: dict
    lhs: float
    rhs: float

    @property
    def witnesses(self) -> bool:
        return self.lhs > 0 and self.rhs < 0


@dataclass(frozen=True)
class NonexistenceCertificate:
    """Sampled sign-contradiction evidence that a solution class is empty."""

    cls: EquilibriumClass
    n: int
    seed: int
    samples: tuple
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "class": self.cls.value,
            "n": self.n,
            "seed": self.seed,
            "sample_count": len(self.samples),
            "verdict": self.verdict,
            "samples": [
                {"params": s.params, "lhs": s.lhs, "rhs": s.rhs, "witnesses": s.witnesses}
                for s in self.samples
            ],
        }


def parabolic_contradiction_sides(beta, masses, R: float, k: int = 0):
    """Two sides of the parabolic-cyclic axis identity.

    For bodies at i*beta_j (all alpha = 0, s = 0) the condition forces
    R/(64 beta_k^2) = -sum_{j != k} m_j beta_j^2 / (4 (beta_j^2 - beta_k^2)^2);
    the left side is positive, the right side negative, for every k.
    """
    beta = np.asarray(beta, dtype=float)
    m = np.asarray(masses, dtype=float)
    lhs = R / (64.0 * beta[k] ** 2)
    rhs = 0.0
    for j in range(beta.size):
        if j == k:
            continue
        gap = beta[j] ** 2 - beta[k] ** 2
        if gap == 0:
            raise DomainError("degenerate sample: equal beta values")
        rhs -= m[j] * beta[j] ** 2 / (4.0 * gap ** 2)
    return float(lhs), float(rhs)


def hyperbolic_contradiction_sides(heights, masses, R: float, k: int | None = None):
    """Two sides of the hyperbolic-cyclic axis identity.

    Axis bodies at i*v_j correspond to alpha_j = -beta_j = v_j.  With k the
    topmost body,
      lhs = (alpha_k - beta_k)(1 + beta_k^2)
            + 8 (1 + alpha_k^2)(1 + beta_k^2)/(alpha_k - beta_k)  > 0,
      rhs = -(2 (alpha_k - beta_k)^3 / R) sum_j (alpha_j - beta_j)^2 m_j
            (D_k^2 - D_j^2) / Theta^{3/2}                          < 0.
    """
    v = np.asarray(heights, dtype=float)
    m = np.asarray(masses, dtype=float)
    if k is None:
        k = int(np.argmax(v))
    alpha, beta = v, -v
    dk = alpha[k] - beta[k]
    lhs = dk * (1.0 + beta[k] ** 2) + 8.0 * (1.0 + alpha[k] ** 2) * (1.0 + beta[k] ** 2) / dk
    total = 0.0
    for j in range(v.size):
        if j == k:
            continue
        th = theta(1j * v[k], 1j * v[j])
        if th <= 0:
            raise DomainError("degenerate sample: equal heights")
        total += (alpha[j] - beta[j]) ** 2 * m[j] * (v[k] ** 2 - v[j] ** 2) / th ** 1.5
    rhs = -(2.0 * dk ** 3 / R) * total
    return float(lhs), float(rhs), k


def certify_nonexistence(
    cls, n: int, samples: int, seed: int = 0
) -> NonexistenceCertificate:
    """Sample the contradiction identity of a cyclic class over admissible data.

    Draws axis configurations (sizes log-uniform on [0.1, 10], masses
    log-uniform on [0.1, 10], R from {0.5, 1, 2}, one substream per sample
    index) and records both sides.  The verdict is true exactly when every
    sample has a positive left and a negative right side.
    """
    cls = EquilibriumClass(cls)
    if cls not in CERTIFIABLE_CLASSES:
        raise DomainError(f"{cls.value} is not a certifiable class")
    if n < 2:
        raise DomainError("certification needs n >= 2 bodies")
    if samples < 1:
        raise DomainError("at least one sample is required")

    out = []
    for idx in range(samples):
        rng = np.random.default_rng([seed, idx])
        for _ in range(100):
            beta = np.exp(rng.uniform(math.log(0.1), math.log(10.0), n))
            gaps = np.abs(np.subtract.outer(beta ** 2, beta ** 2))
            gaps[np.diag_indices(n)] = math.inf
            if gaps.min() > 1e-6 * float(np.max(beta ** 2)):
                break
        else:
            raise ConvergenceError("could not draw a nondegenerate sample")
        masses = np.exp(rng.uniform(math.log(0.1), math.log(10.0), n))
        R = float(rng.choice([0.5, 1.0, 2.0]))
        if cls is EquilibriumClass.PARABOLIC_CYCLIC:
            lhs, rhs = parabolic_contradiction_sides(beta, masses, R, k=0)
            k = 0
        else:
            lhs, rhs, k = hyperbolic_contradiction_sides(beta, masses, R)
        out.append(
            CertificateSample(
                {
                    "beta": [float(b) for b in beta],
                    "masses": [float(mm) for mm in masses],
                    "R": R,
                    "k": k,
                },
                lhs,
                rhs,
            )
        )
    verdict = all(s.witnesses for s in out)
    return NonexistenceCertificate(cls, n, seed, tuple(out), verdict)
