"""Hamiltonian Floer data on C^n and the perturbed Cauchy-Riemann operator.

The geometric input is an autonomous vector field X : C^n -> C^n with a
nondegenerate critical point at the origin and an almost complex structure
J : C^n -> End_R(C^n) with J(z)^2 = -Id.  A trajectory is a cylinder field
gamma with

    dbar(gamma) = d_s gamma + J(gamma) (d_t gamma - X(gamma)) = 0,

finite energy, and exponential decay |d_s gamma| <= C exp(-delta |s|).

Built-in models (target dimension 1, all machinery generic in n):

* ``LinearModel(a)``      J = i, X(z) = i a z, 0 < a < 2*pi.  Everything is
  complex linear and collapses to closed forms: the mode
  c*exp((2*pi*k - a)s) exp(2*pi*i*k*t) solves the equation exactly, and the
  asymptotic spectral gap is min(a, 2*pi - a).
* ``PerturbedModel(a, eps)``   X(z) = i a z + eps * chi(|z|^2) * conj(z)^2
  with chi a smooth compactly supported bump, so all derivatives stay
  uniformly bounded.  J = i.
* ``VaryingJModel(a, kappa)``  J(z) = [[0, -e^h], [e^-h, 0]] with
  h = kappa * chi(|z|^2) * Re z; used to exercise the difference between the
  two linearization variants (the extra DJ term vanishes identically for
  constant J).

Two linearization variants are provided: ``displayed`` assembles
d_s + J(gamma) d_t - D(JX)|_gamma, and ``full`` adds the term
(DJ|_gamma [xi]) d_t gamma that differentiation of J(gamma) produces, so
``full`` always matches finite differences of the residual.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import assemble as asm
from .grid import (
    CylinderGrid,
    Field,
    cutoff_beta,
    cutoff_beta_prime,
    diff_s,
    diff_t,
    quadrature_weights,
    save_field,
    load_field,
)
from .linop import ScOperator, SpaceSpec
from .scales import WeightSequence, weighted_norm

__all__ = [
    "HamiltonianModel",
    "LinearModel",
    "PerturbedModel",
    "VaryingJModel",
    "Trajectory",
    "floer_residual",
    "energy",
    "linearize_cr",
    "solve_trajectory",
    "decay_rate",
    "decay_rate_sides",
    "exact_linear_mode",
    "save_trajectory",
    "load_trajectory",
    "model_from_params",
]


def _chi(q: np.ndarray) -> np.ndarray:
    """Smooth bump: exactly 1 for q <= 1, exactly 0 for q >= 3."""
    return 1.0 - cutoff_beta(np.asarray(q, dtype=float) - 2.0)


def _chi_prime(q: np.ndarray) -> np.ndarray:
    return -cutoff_beta_prime(np.asarray(q, dtype=float) - 2.0)


class HamiltonianModel:
    """Base class holding the evaluator contract.

    Subclasses provide X, DX_real, J_real, DJ_bilinear_real on value arrays
    of shape (..., n); derivative evaluators return per-point real 2n x 2n
    matrices in the (Re, Im) basis.
    """

    n = 1
    name = "model"
    delta_decay: float
    gap_info: float

    def X(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def DX_real(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def J_real(self, z: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def DJ_bilinear_real(self, z: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Matrix of xi -> (DJ|_z [xi]) v; zero for constant J."""
        shape = z.shape[:-1] + (2 * self.n, 2 * self.n)
        return np.zeros(shape)

    @property
    def has_varying_j(self) -> bool:
        return False

    def params(self) -> dict:
        return {}


_I2 = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass
class LinearModel(HamiltonianModel):
    """J = i, X(z) = i a z with 0 < a < 2*pi and a not a multiple of 2*pi."""

    a: float = 1.0
    name: str = "linear"

    def __post_init__(self):
        if not (0.0 < self.a < 2.0 * np.pi):
            raise ValueError("need 0 < a < 2*pi")
        self.gap_info = min(self.a, 2.0 * np.pi - self.a)
        self.delta_decay = self.gap_info

    def X(self, z):
        return 1j * self.a * np.asarray(z, dtype=complex)

    def DX_real(self, z):
        z = np.asarray(z)
        out = np.empty(z.shape[:-1] + (2, 2))
        out[...] = self.a * _I2
        return out

    def J_real(self, z):
        z = np.asarray(z)
        out = np.empty(z.shape[:-1] + (2, 2))
        out[...] = _I2
        return out

    def params(self):
        return {"a": self.a}


@dataclass
class PerturbedModel(HamiltonianModel):
    """X(z) = i a z + eps * chi(|z|^2) conj(z)^2, J = i.

    The bump chi keeps all derivatives uniformly bounded; the quadratic term
    makes the linearization genuinely base-point dependent.
    """

    a: float = 1.0
    eps: float = 0.05
    name: str = "perturbed"

    def __post_init__(self):
        if not (0.0 < self.a < 2.0 * np.pi):
            raise ValueError("need 0 < a < 2*pi")
        self.gap_info = min(self.a, 2.0 * np.pi - self.a)
        self.delta_decay = self.gap_info

    def X(self, z):
        z = np.asarray(z, dtype=complex)
        q = np.abs(z) ** 2
        return 1j * self.a * z + self.eps * _chi(q) * np.conj(z) ** 2

    def DX_real(self, z):
        z = np.asarray(z, dtype=complex)[..., 0]
        q = np.abs(z) ** 2
        chi = _chi(q)
        dchi = _chi_prime(q)
        # d/dz and d/dconj(z) parts of X (n = 1):
        alpha = 1j * self.a + self.eps * dchi * np.conj(z) ** 3
        beta = self.eps * (dchi * z * np.conj(z) ** 2 + 2.0 * chi * np.conj(z))
        return asm.complex_pair_matrix(alpha, beta)

    def J_real(self, z):
        z = np.asarray(z)
        out = np.empty(z.shape[:-1] + (2, 2))
        out[...] = _I2
        return out

    def params(self):
        return {"a": self.a, "eps": self.eps}


@dataclass
class VaryingJModel(HamiltonianModel):
    """X(z) = i a z with J(z) = [[0, -e^h], [e^-h, 0]], h = kappa chi(|z|^2) Re z."""

    a: float = 1.0
    kappa: float = 0.2
    name: str = "varying_j"

    def __post_init__(self):
        self.gap_info = min(self.a, 2.0 * np.pi - self.a)
        self.delta_decay = self.gap_info

    def X(self, z):
        return 1j * self.a * np.asarray(z, dtype=complex)

    def DX_real(self, z):
        z = np.asarray(z)
        out = np.empty(z.shape[:-1] + (2, 2))
        out[...] = self.a * _I2
        return out

    def _theta(self, z):
        z0 = np.asarray(z, dtype=complex)[..., 0]
        return self.kappa * _chi(np.abs(z0) ** 2) * z0.real

    def J_real(self, z):
        th = self._theta(z)
        out = np.zeros(th.shape + (2, 2))
        out[..., 0, 1] = -np.exp(th)
        out[..., 1, 0] = np.exp(-th)
        return out

    def DJ_bilinear_real(self, z, v):
        # dJ/dtheta applied to v, times the real-linear dtheta[xi].
        z0 = np.asarray(z, dtype=complex)[..., 0]
        v0 = np.asarray(v, dtype=complex)[..., 0]
        q = np.abs(z0) ** 2
        th = self._theta(z)
        # dtheta[xi] = kappa*(chi'(q) * 2 Re(conj(z) xi) * Re z + chi(q) * Re xi)
        # as a real-linear functional: dtheta[xi] = p * Re xi + m * Im xi
        p = self.kappa * (2.0 * _chi_prime(q) * z0.real * z0.real + _chi(q))
        mcoef = self.kappa * (2.0 * _chi_prime(q) * z0.imag * z0.real)
        # (dJ/dtheta) v = [[0, -e^th],[-e^-th, 0]] v
        wr = -np.exp(th) * v0.imag
        wi = -np.exp(-th) * v0.real
        out = np.empty(z0.shape + (2, 2))
        out[..., 0, 0] = wr * p
        out[..., 0, 1] = wr * mcoef
        out[..., 1, 0] = wi * p
        out[..., 1, 1] = wi * mcoef
        return out

    @property
    def has_varying_j(self) -> bool:
        return True

    def params(self):
        return {"a": self.a, "kappa": self.kappa}


def model_from_params(kind: str, **kw) -> HamiltonianModel:
    kinds = {"linear": LinearModel, "perturbed": PerturbedModel, "varying_j": VaryingJModel}
    if kind not in kinds:
        raise ValueError(f"unknown model kind {kind!r}")
    return kinds[kind](**kw)


# ---------------------------------------------------------------------------
# residual, energy
# ---------------------------------------------------------------------------


def floer_residual(model: HamiltonianModel, gamma: Field, edge: str = "onesided") -> Field:
    """dbar(gamma) = d_s gamma + J(gamma) (d_t gamma - X(gamma))."""
    ds = diff_s(gamma, 1, edge=edge)
    dt = diff_t(gamma, 1)
    drift = dt.values - model.X(gamma.values)
    J = model.J_real(gamma.values)
    return Field(gamma.grid, ds.values + asm.apply_pointwise(J, drift))


def energy(model: HamiltonianModel, gamma: Field) -> float:
    """Quadrature of |d_s gamma|^2 + |d_t gamma - X(gamma)|^2."""
    q = quadrature_weights(gamma.grid)
    ds = diff_s(gamma, 1)
    drift = diff_t(gamma, 1).values - model.X(gamma.values)
    dens = np.sum(np.abs(ds.values) ** 2 + np.abs(drift) ** 2, axis=2)
    return float(np.sum(q * dens))


# ---------------------------------------------------------------------------
# linearization
# ---------------------------------------------------------------------------


def cr_coefficient_fields(model: HamiltonianModel, base: Field, variant: str = "full"):
    """(J, M) with the linearized operator = d_s + J d_t + M.

    displayed: M = -D(JX)|_base = -(DJ[.] X + J DX)
    full:      M = -D(JX)|_base + DJ[.] d_t(base)
    """
    z = base.values
    J = model.J_real(z)
    DX = model.DX_real(z)
    JDX = np.einsum("...ij,...jk->...ik", J, DX)
    M = -JDX - model.DJ_bilinear_real(z, model.X(z))
    if variant == "full":
        M = M + model.DJ_bilinear_real(z, diff_t(base, 1).values)
    elif variant != "displayed":
        raise ValueError(f"unknown variant {variant!r}")
    return J, M


def linearize_cr(
    model: HamiltonianModel,
    base: Field,
    ws: WeightSequence | None = None,
    levels=(0,),
    variant: str = "full",
    edge: str = "ghost",
    mode: str = "auto",
) -> ScOperator:
    """Matrix of the linearized operator with coefficients frozen at ``base``.

    ``mode='auto'`` stores a complex matrix when the coefficients are exactly
    complex linear and falls back to the stacked-real representation
    otherwise.  ``edge`` selects the s-stencil closure ('ghost' zero
    extension for spectral work, 'onesided' to match field differentiation).
    """
    grid = base.grid
    n = base.target_dim
    J, M = cr_coefficient_fields(model, base, variant)
    if mode == "auto":
        mode = "complex" if (asm.is_complex_structured(J) and asm.is_complex_structured(M)) else "real"
    DS = asm.ds_matrix(grid, n, mode, 1, edge)
    DT = asm.dt_matrix(grid, n, mode, 1)
    MJ = asm.mult_matrix(J, grid, n, mode)
    MM = asm.mult_matrix(M, grid, n, mode)
    A = (DS + MJ @ DT + MM).tocsr()
    if ws is None:
        deltas = {m: 0.0 for m in levels}
    else:
        deltas = {m: ws[m] for m in levels}
    mats = {m: A for m in levels}
    domain = {m: SpaceSpec("cyl", 1 + m, deltas[m]) for m in levels}
    target = {m: SpaceSpec("cyl", m, deltas[m]) for m in levels}
    return ScOperator(mats, domain, target, grid=grid, mode=mode, pair=False,
                      order=1, meta={"variant": variant, "edge": edge, "model": model.name})


# ---------------------------------------------------------------------------
# trajectories and the Newton solver
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """A solved trajectory: the field plus solver and decay diagnostics.

    residual_norm is the weighted level-0 norm of the solver's discrete
    residual over the interior (the pinned truncation ring is excluded; the
    zero-Dirichlet truncation budgets an exp(-delta*s_max) error there).
    """

    gamma: Field
    residual_norm: float
    decay_rate: float
    energy: float
    converged: bool = True
    history: list = dataclass_field(default_factory=list)
    meta: dict = dataclass_field(default_factory=dict)


class SolverError(RuntimeError):
    pass


def _interior_mask(grid: CylinderGrid) -> np.ndarray:
    m = np.ones((grid.n_s, grid.n_t))
    m[0] = 0.0
    m[-1] = 0.0
    return m


def solve_trajectory(
    model: HamiltonianModel,
    guess: Field,
    tol: float = 1e-12,
    max_iter: int = 30,
    boundary: str = "zero",
    delta0: float = 0.0,
    verbose: bool = False,
) -> Trajectory:
    """Newton iteration on the Floer residual with Dirichlet-pinned edges.

    ``boundary='zero'`` pins gamma(+-s_max) = 0 (the truncation convention);
    ``boundary='guess'`` pins the values of the initial guess, which is the
    right frame for recovering a known decaying solution through noise.
    Raises SolverError with a singular-value diagnostic if the Jacobian is
    singular; returns converged=False after max_iter without convergence.
    """
    grid = guess.grid
    n = guess.target_dim
    if boundary not in ("zero", "guess"):
        raise ValueError(f"unknown boundary policy {boundary!r}")
    bc = np.zeros((2, grid.n_t, n), dtype=complex)
    if boundary == "guess":
        bc[0] = guess.values[0]
        bc[1] = guess.values[-1]

    N = grid.n_s * grid.n_t * n
    edge_rows = np.zeros(grid.n_s, dtype=bool)
    edge_rows[0] = edge_rows[-1] = True
    row_is_edge = np.repeat(edge_rows, grid.n_t * n)
    row_is_edge2 = np.concatenate([row_is_edge, row_is_edge])

    gamma = guess.copy()
    history = []

    def residual_vec(g: Field) -> np.ndarray:
        r = floer_residual(model, g, edge="onesided")
        vec = asm.field_to_real(r.values)
        pin = g.values.copy()
        pin[0] -= bc[0]
        pin[-1] -= bc[1]
        pinvec = asm.field_to_real(pin)
        out = np.where(row_is_edge2, pinvec, vec)
        return out

    res = residual_vec(gamma)
    rnorm = float(np.linalg.norm(res))
    history.append(rnorm)
    it = 0
    stalled = 0
    while rnorm > tol and it < max_iter and stalled < 2:
        op = linearize_cr(model, gamma, variant="full", edge="onesided", mode="real")
        Jmat = op.mats[0].tolil()
        idx = np.where(row_is_edge2)[0]
        Jmat[idx, :] = 0.0
        Jmat[idx, idx] = 1.0
        Jmat = Jmat.tocsc()
        try:
            lu = spla.splu(Jmat)
        except RuntimeError as exc:
            svals = spla.svds(Jmat.tocsc(), k=1, which="SM", return_singular_vectors=False)
            raise SolverError(f"singular Jacobian (smallest sv ~ {svals[0]:.3e})") from exc
        step = lu.solve(res)
        lam = 1.0
        for _ in range(30):
            cand_vals = gamma.values - lam * asm.real_to_field_values(step, gamma.values.shape)
            cand = Field(grid, cand_vals)
            cres = residual_vec(cand)
            cnorm = float(np.linalg.norm(cres))
            if cnorm < rnorm or rnorm == 0.0:
                break
            lam *= 0.5
        stalled = stalled + 1 if cnorm > 0.99 * rnorm else 0
        gamma, res, rnorm = cand, cres, cnorm
        history.append(rnorm)
        if verbose:
            print(f"newton iter {it}: |res| = {rnorm:.3e}")
        it += 1

    converged = rnorm <= tol
    mask = _interior_mask(grid)
    res_field = floer_residual(model, gamma, edge="onesided")
    res_interior = weighted_norm(res_field, 0, delta0, mask=mask)
    rate = decay_rate(gamma)
    return Trajectory(
        gamma=gamma,
        residual_norm=res_interior,
        decay_rate=rate,
        energy=energy(model, gamma),
        converged=converged,
        history=history,
        meta={"model": model.name, "params": model.params(), "boundary": boundary,
              "iterations": it, "tol": tol},
    )


# ---------------------------------------------------------------------------
# decay rates
# ---------------------------------------------------------------------------

#: Amplitudes below this (relative to the field maximum) count as numerically zero tail.
TAIL_FLOOR_REL = 1e-13


def decay_rate_sides(gamma: Field) -> tuple:
    """Per-side fitted exponential rates of max_t |d_s gamma| over
    |s| in [s_max/2, s_max - 1]; numerically zero tails give +inf."""
    grid = gamma.grid
    ds = diff_s(gamma, 1)
    prof = np.max(np.abs(ds.values), axis=(1, 2))
    scale = float(np.max(prof)) if np.max(prof) > 0 else 0.0
    lo, hi = grid.s_max / 2.0, grid.s_max - 1.0
    rates = []
    for side in (-1.0, 1.0):
        sel = (grid.s * side >= lo) & (grid.s * side <= hi)
        vals = prof[sel]
        absc = np.abs(grid.s[sel])
        if scale == 0.0 or np.max(vals) <= TAIL_FLOOR_REL * scale:
            rates.append(np.inf)
            continue
        ok = vals > TAIL_FLOOR_REL * scale
        if np.sum(ok) < 3:
            rates.append(np.inf)
            continue
        slope = np.polyfit(absc[ok], np.log(vals[ok]), 1)[0]
        rates.append(-slope)
    return tuple(rates)


def decay_rate(gamma: Field) -> float:
    """Conservative decay rate: the smaller of the two one-sided rates."""
    return float(min(decay_rate_sides(gamma)))


# ---------------------------------------------------------------------------
# closed-form solutions of the linear model
# ---------------------------------------------------------------------------


def exact_linear_mode(grid: CylinderGrid, a: float, k: int = 0, c: complex = 1.0) -> Field:
    """c * exp((2*pi*k - a) s) * exp(2*pi*i*k*t): exact dbar-zero of LinearModel(a)."""
    lam = 2.0 * np.pi * k - a
    prof = np.exp(lam * grid.s).astype(complex)
    mode = np.exp(2j * np.pi * k * grid.t)
    return Field(grid, (c * prof[:, None] * mode[None, :])[:, :, None])


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_trajectory(traj: Trajectory, field_path, meta_path) -> None:
    save_field(traj.gamma, field_path)
    payload = {
        "residual_norm": traj.residual_norm,
        "decay_rate": traj.decay_rate if np.isfinite(traj.decay_rate) else "inf",
        "energy": traj.energy,
        "converged": traj.converged,
        "meta": traj.meta,
    }
    with open(meta_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def load_trajectory(field_path, meta_path) -> Trajectory:
    gamma = load_field(field_path)
    with open(meta_path) as fh:
        payload = json.load(fh)
    rate = payload["decay_rate"]
    rate = np.inf if rate == "inf" else float(rate)
    return Trajectory(
        gamma=gamma,
        residual_norm=float(payload["residual_norm"]),
        decay_rate=rate,
        energy=float(payload["energy"]),
        converged=bool(payload["converged"]),
        meta=payload.get("meta", {}),
    )
