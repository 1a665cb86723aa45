"""Numerical verification of volume- and area-preservation along flows.

Fixed-step classical RK4 is a measurement instrument here, not a
structure-preserving scheme: trajectories, the variational (tangent) flow
J' = DX(x(t)) J and transported chain integrals are all computed with it and
compared against the exact predictions of the symbolic layer.

All floating-point work uses numpy's extended-precision ``longdouble``.
Tangent flows of the bundled linear systems stretch by ~1e5 over t = 10, so
det J sits at condition number ~1e10; double precision would bury the 1e-6
drift budget under rounding (measured: ~1e-5), extended precision keeps the
measurement honest (~1e-8).  ``numpy.linalg`` refuses longdouble, hence the
small pivoted-LU determinant below.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exterior import Frame, blade_basis, omega_power
from .fields import PolyVectorField, classify
from .polynomials import Poly

WORK_DTYPE = np.longdouble
NORM_CAP = 1e9


class ChainMismatchError(ValueError):
    """Chain patch incompatible with the requested integral."""


@dataclass(frozen=True)
class FlowConfig:
    """Fixed-step RK4 run to t_final.

    The step count is round(t_final / dt) and the uniform step width is
    nudged to t_final / steps so the run lands exactly on t_final (when
    t_final is a multiple of dt the width is dt itself).
    """

    t_final: float
    dt: float
    integrator: str = "rk4"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")
        if self.integrator != "rk4":
            raise ValueError("only the fixed 4th-order Runge-Kutta is supported")

    @property
    def steps(self) -> int:
        if self.t_final == 0:
            return 0
        return max(1, int(round(self.t_final / self.dt)))

    @property
    def effective_dt(self) -> float:
        if self.t_final == 0:
            return self.dt
        return self.t_final / self.steps


# ---------------------------------------------------------------------------
# compiled evaluation of a polynomial field and its Jacobian
# ---------------------------------------------------------------------------

def _poly_rows(poly: Poly, slot: int, dim: int, exps, coeffs, slots):
    for e, c in poly.sorted_terms():
        exps.append(e)
        coeffs.append(WORK_DTYPE(c.numerator) / WORK_DTYPE(c.denominator))
        slots.append(slot)


class CompiledField:
    """One stacked evaluator for all components and all Jacobian entries."""

    def __init__(self, x: PolyVectorField):
        self.field = x
        dim = x.frame.dim
        self.dim = dim
        exps: list = []
        coeffs: list = []
        slots: list = []
        for i, comp in enumerate(x.components):
            _poly_rows(comp, i, dim, exps, coeffs, slots)
        for i, comp in enumerate(x.components):
            for j in range(dim):
                _poly_rows(comp.diff(j), dim + i * dim + j, dim, exps, coeffs, slots)
        self.nterms = len(exps)
        self.out_dim = dim + dim * dim
        if self.nterms:
            self.exps = np.array(exps, dtype=np.int64)
            scatter = np.zeros((self.nterms, self.out_dim), dtype=WORK_DTYPE)
            for row, (slot, coeff) in enumerate(zip(slots, coeffs)):
                scatter[row, slot] += coeff
            self.scatter = scatter
        else:
            self.exps = np.zeros((0, dim), dtype=np.int64)
            self.scatter = np.zeros((0, self.out_dim), dtype=WORK_DTYPE)

    def __call__(self, xs: np.ndarray):
        """xs (m, dim) -> (values (m, dim), jacobians (m, dim, dim))."""
        m = xs.shape[0]
        if not self.nterms:
            return (
                np.zeros((m, self.dim), dtype=WORK_DTYPE),
                np.zeros((m, self.dim, self.dim), dtype=WORK_DTYPE),
            )
        monomials = (xs[:, None, :] ** self.exps[None, :, :]).prod(axis=2)
        stacked = monomials @ self.scatter
        values = stacked[:, : self.dim]
        jacobians = stacked[:, self.dim:].reshape(m, self.dim, self.dim)
        return values, jacobians


def batch_det(mats: np.ndarray) -> np.ndarray:
    """Determinants of a (m, d, d) batch via pivoted LU, in the input dtype."""
    a = np.array(mats, dtype=WORK_DTYPE, copy=True)
    m, d, _ = a.shape
    det = np.ones(m, dtype=WORK_DTYPE)
    rows = np.arange(m)
    for c in range(d):
        piv = c + np.argmax(np.abs(a[:, c:, c]), axis=1)
        swapped = piv != c
        if swapped.any():
            tmp = a[rows, piv, :].copy()
            a[rows, piv, :] = a[:, c, :]
            a[:, c, :] = tmp
            det[swapped] = -det[swapped]
        pivval = a[:, c, c].copy()
        det *= pivval
        if c + 1 < d:
            safe = np.where(pivval == 0, WORK_DTYPE(1), pivval)
            factors = a[:, c + 1:, c] / safe[:, None]
            a[:, c + 1:, c:] -= factors[:, :, None] * a[:, None, c, c:]
    return det


# ---------------------------------------------------------------------------
# trajectories and the variational flow
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    blew_up: bool = False
    blow_up_step: int | None = None


@dataclass
class TangentFlow:
    trajectory: Trajectory
    jacobians: np.ndarray

    def det_path(self) -> np.ndarray:
        return batch_det(self.jacobians)

    def max_det_drift(self) -> float:
        return float(np.max(np.abs(self.det_path() - 1)))


def _rk4_run(compiled: CompiledField, xs, js, cfg: FlowConfig,
             keep_states=False, keep_jacobians=False, track_det=False):
    """Joint RK4 on a batch of states and (optionally) tangent matrices.

    Returns (xs, js, states_path, jac_path, max_det_drift, blow_step).
    """
    dt = WORK_DTYPE(cfg.effective_dt)
    half = WORK_DTYPE(0.5) * dt
    sixth = dt / WORK_DTYPE(6.0)
    two = WORK_DTYPE(2.0)
    with_j = js is not None
    states_path = [xs.copy()] if keep_states else None
    jac_path = [js.copy()] if (keep_jacobians and with_j) else None
    max_det = WORK_DTYPE(0.0)
    if track_det and with_j:
        max_det = np.max(np.abs(batch_det(js) - 1))
    blow_step = None
    for step in range(cfg.steps):
        v1, j1 = compiled(xs)
        if with_j:
            k1j = np.einsum("mij,mjk->mik", j1, js)
        v2, j2 = compiled(xs + half * v1)
        if with_j:
            k2j = np.einsum("mij,mjk->mik", j2, js + half * k1j)
        v3, j3 = compiled(xs + half * v2)
        if with_j:
            k3j = np.einsum("mij,mjk->mik", j3, js + half * k2j)
        v4, j4 = compiled(xs + dt * v3)
        if with_j:
            k4j = np.einsum("mij,mjk->mik", j4, js + dt * k3j)
        xs = xs + sixth * (v1 + two * v2 + two * v3 + v4)
        if with_j:
            js = js + sixth * (k1j + two * k2j + two * k3j + k4j)
        if keep_states:
            states_path.append(xs.copy())
        if keep_jacobians and with_j:
            jac_path.append(js.copy())
        if track_det and with_j:
            max_det = max(max_det, np.max(np.abs(batch_det(js) - 1)))
        if np.sqrt(np.max(np.sum(xs * xs, axis=1))) > NORM_CAP:
            blow_step = step + 1
            break
    return xs, js, states_path, jac_path, float(max_det), blow_step


def integrate(x: PolyVectorField, x0, cfg: FlowConfig) -> Trajectory:
    """RK4 trajectory with samples at every step; blow-up is flagged, not
    raised (state norm cap 1e9)."""
    compiled = CompiledField(x)
    xs = np.array([x0], dtype=WORK_DTYPE)
    if xs.shape != (1, x.frame.dim):
        raise ValueError("x0 must have one coordinate per generator")
    _, _, path, _, _, blow = _rk4_run(compiled, xs, None, cfg, keep_states=True)
    states = np.array([p[0] for p in path], dtype=WORK_DTYPE)
    times = np.arange(states.shape[0], dtype=WORK_DTYPE) * WORK_DTYPE(cfg.effective_dt)
    return Trajectory(times, states, blow is not None, blow)


def tangent_flow(x: PolyVectorField, x0, cfg: FlowConfig) -> TangentFlow:
    """Trajectory plus the variational flow J(t), J(0) = identity."""
    compiled = CompiledField(x)
    dim = x.frame.dim
    xs = np.array([x0], dtype=WORK_DTYPE)
    if xs.shape != (1, dim):
        raise ValueError("x0 must have one coordinate per generator")
    js = np.eye(dim, dtype=WORK_DTYPE)[None, :, :]
    _, _, path, jpath, _, blow = _rk4_run(
        compiled, xs, js, cfg, keep_states=True, keep_jacobians=True
    )
    states = np.array([p[0] for p in path], dtype=WORK_DTYPE)
    times = np.arange(states.shape[0], dtype=WORK_DTYPE) * WORK_DTYPE(cfg.effective_dt)
    traj = Trajectory(times, states, blow is not None, blow)
    jacobians = np.array([j[0] for j in jpath], dtype=WORK_DTYPE)
    return TangentFlow(traj, jacobians)


def divergence(x: PolyVectorField) -> Poly:
    """Exact divergence; the zero polynomial iff X preserves phase volume."""
    out = Poly.zero(x.frame.dim)
    for i, comp in enumerate(x.components):
        out = out + comp.diff(i)
    return out


# ---------------------------------------------------------------------------
# chains and transported integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainPatch:
    """A parametrized 2l-cube [0,1]^{2l} -> R^{2n} with quadrature orders.

    ``maps`` lists one polynomial per phase-space coordinate, in 2l
    parameter variables; ``orders`` gives the Gauss-Legendre point count per
    axis.
    """

    l: int
    maps: tuple[Poly, ...]
    orders: tuple[int, ...]

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("need l >= 1")
        if len(self.orders) != 2 * self.l:
            raise ValueError("need one quadrature order per parameter axis")
        if any(o < 1 for o in self.orders):
            raise ValueError("quadrature orders must be >= 1")
        if len(self.maps) % 2 or len(self.maps) < 2 * self.l:
            raise ValueError("need one map component per phase-space coordinate")
        for p in self.maps:
            if p.nvars != 2 * self.l:
                raise ValueError("map component over wrong parameter count")

    @property
    def ambient_dim(self) -> int:
        return len(self.maps)

    @classmethod
    def affine(cls, l: int, origin, axes, orders=None) -> "ChainPatch":
        """Patch origin + sum_j u_j * axes[j] over the unit 2l-cube."""
        dim = len(origin)
        nvars = 2 * l
        if len(axes) != nvars or any(len(a) != dim for a in axes):
            raise ValueError("need 2l axis vectors of the ambient dimension")
        maps = []
        for coord in range(dim):
            poly = Poly.constant(nvars, Fraction(str(origin[coord])))
            for j, axis in enumerate(axes):
                c = Fraction(str(axis[coord]))
                if c:
                    poly = poly + c * Poly.variable(nvars, j)
            maps.append(poly)
        if orders is None:
            orders = (4,) * nvars
        return cls(l, tuple(maps), tuple(orders))

    def nodes_and_weights(self):
        """Tensor Gauss-Legendre rule on [0,1]^{2l}, fixed axis order."""
        per_axis = []
        for order in self.orders:
            t, w = np.polynomial.legendre.leggauss(order)
            per_axis.append(((t + 1.0) / 2.0, w / 2.0))
        points = []
        weights = []
        for combo in itertools.product(*(range(len(p[0])) for p in per_axis)):
            points.append([per_axis[ax][0][i] for ax, i in enumerate(combo)])
            weights.append(
                math.prod(per_axis[ax][1][i] for ax, i in enumerate(combo))
            )
        return (
            np.array(points, dtype=WORK_DTYPE),
            np.array(weights, dtype=WORK_DTYPE),
        )

    def evaluate(self, nodes: np.ndarray) -> np.ndarray:
        """Map parameter nodes (m, 2l) into phase space (m, dim)."""
        return _eval_polys(self.maps, nodes)

    def jacobians(self, nodes: np.ndarray) -> np.ndarray:
        """Tangent frames d(map)/du at the nodes: (m, dim, 2l)."""
        dim, nvars = self.ambient_dim, 2 * self.l
        flat = [self.maps[a].diff(j) for a in range(dim) for j in range(nvars)]
        vals = _eval_polys(flat, nodes)
        return vals.reshape(nodes.shape[0], dim, nvars)


def _eval_polys(polys, xs: np.ndarray) -> np.ndarray:
    m = xs.shape[0]
    out = np.zeros((m, len(polys)), dtype=WORK_DTYPE)
    for idx, poly in enumerate(polys):
        if poly.is_zero:
            continue
        exps = np.array(list(poly.terms.keys()), dtype=np.int64)
        coeffs = np.array(
            [
                WORK_DTYPE(c.numerator) / WORK_DTYPE(c.denominator)
                for c in poly.terms.values()
            ],
            dtype=WORK_DTYPE,
        )
        monomials = (xs[:, None, :] ** exps[None, :, :]).prod(axis=2)
        out[:, idx] = monomials @ coeffs
    return out


def _omega_power_blades(n: int, l: int):
    """(coefficient, row-index tuple) pairs of omega^l over a Darboux frame."""
    frame = Frame.darboux(n)
    wl = omega_power(frame, l)
    blades = []
    for mask, coeff in sorted(wl.terms.items()):
        rows = tuple(i for i in range(frame.dim) if mask >> i & 1)
        blades.append((WORK_DTYPE(coeff.numerator) / WORK_DTYPE(coeff.denominator), rows))
    return blades


def _pullback_integral(blades, frames: np.ndarray, weights: np.ndarray, l: int):
    """Quadrature of the omega^l pullback given tangent frames (m, 2n, 2l)."""
    m = frames.shape[0]
    total = np.zeros(m, dtype=WORK_DTYPE)
    for coeff, rows in blades:
        minors = frames[:, rows, :]
        total += coeff * batch_det(minors)
    value = np.sum(total * weights)
    return value / WORK_DTYPE(math.factorial(l))


@dataclass(frozen=True)
class ChainIntegral:
    value: float
    degenerate: bool


def _patches(chain):
    if isinstance(chain, ChainPatch):
        return [(1, chain)]
    return [(int(sign), patch) for sign, patch in chain]


def chain_integral(chain, n: int | None = None) -> ChainIntegral:
    """(1/l!) integral of omega^l over a patch or a signed list of patches.

    A parametrization whose Jacobian vanishes at every quadrature node is
    reported as degenerate with value 0 rather than an error.
    """
    total = WORK_DTYPE(0.0)
    degenerate = True
    for sign, patch in _patches(chain):
        if patch.ambient_dim % 2:
            raise ChainMismatchError("ambient dimension must be even")
        amb_n = patch.ambient_dim // 2
        if n is not None and amb_n != n:
            raise ChainMismatchError("patch ambient dimension != 2n")
        if patch.l > amb_n:
            raise ChainMismatchError("need l <= n")
        nodes, weights = patch.nodes_and_weights()
        frames = patch.jacobians(nodes)
        if np.any(frames != 0):
            degenerate = False
        blades = _omega_power_blades(amb_n, patch.l)
        total += WORK_DTYPE(sign) * _pullback_integral(
            blades, frames, weights, patch.l
        )
    return ChainIntegral(float(total), degenerate)


# ---------------------------------------------------------------------------
# conservation reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConservationReport:
    """Before/after comparison of a transported chain integral."""

    quantity: str
    l: int
    k: int
    t_final: float
    dt: float
    initial: float
    final: float
    abs_drift: float
    rel_drift: float
    per_step_max_det_drift: float | None
    hypothesis_ok: bool
    hypothesis_note: str
    blew_up: bool = False

    @property
    def applicable(self) -> bool:
        return self.hypothesis_ok


def verify_area_preservation(
    x: PolyVectorField, chain, l: int, k: int, cfg: FlowConfig
) -> ConservationReport:
    """Transport a 2l-chain along the flow of X and recompute (1/l!) int omega^l.

    Quadrature nodes ride the RK4 flow; their tangent frames ride the
    variational flow (pushforward J . dsigma/du), so quadrature error and
    integration error stay separate.  The theorem hypothesis (symplectic
    for l < n, divergence-free for l = n) is checked first and reported; a
    violation flags the report as not applicable instead of failing.
    """
    n = x.frame.n
    if not 1 <= l <= n:
        raise ValueError("need 1 <= l <= n")
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if l < n:
        ok = classify(x, 1).symplectic_like
        note = (
            "symplectic field: omega^l conserved for every l"
            if ok
            else "theorem not applicable: X is not symplectic and l < n"
        )
    else:
        ok = divergence(x).is_zero
        note = (
            "divergence-free field: phase volume conserved"
            if ok
            else "theorem not applicable: X has nonzero divergence"
        )

    patches = _patches(chain)
    for _, patch in patches:
        if patch.l != l:
            raise ChainMismatchError("patch half-degree differs from l")
        if patch.ambient_dim != x.frame.dim:
            raise ChainMismatchError("patch ambient dimension != 2n")

    initial = chain_integral(chain, n).value
    compiled = CompiledField(x)
    blades = _omega_power_blades(n, l)
    track_det = l == n
    final = WORK_DTYPE(0.0)
    max_det = 0.0
    blew_up = False
    for sign, patch in patches:
        nodes, weights = patch.nodes_and_weights()
        xs = patch.evaluate(nodes)
        frames0 = patch.jacobians(nodes)
        js = np.broadcast_to(
            np.eye(x.frame.dim, dtype=WORK_DTYPE), (xs.shape[0],) + (x.frame.dim,) * 2
        ).copy()
        xs_t, js_t, _, _, det_drift, blow = _rk4_run(
            compiled, xs, js, cfg, track_det=track_det
        )
        if blow is not None:
            blew_up = True
            break
        max_det = max(max_det, det_drift)
        frames_t = np.einsum("mij,mjl->mil", js_t, frames0)
        final += WORK_DTYPE(sign) * _pullback_integral(blades, frames_t, weights, l)

    if blew_up:
        final_f = float("nan")
        abs_drift = float("nan")
        rel_drift = float("nan")
    else:
        final_f = float(final)
        abs_drift = abs(final_f - initial)
        rel_drift = abs_drift / abs(initial) if initial else float("nan")
    return ConservationReport(
        quantity=f"(1/{l}!) int omega^{l}",
        l=l,
        k=k,
        t_final=cfg.t_final,
        dt=cfg.dt,
        initial=initial,
        final=final_f,
        abs_drift=abs_drift,
        rel_drift=rel_drift,
        per_step_max_det_drift=max_det if track_det and not blew_up else None,
        hypothesis_ok=ok,
        hypothesis_note=note,
        blew_up=blew_up,
    )
