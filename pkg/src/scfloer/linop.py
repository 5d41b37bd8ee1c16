"""Level-indexed linear operators and SVD-based Fredholm diagnostics.

An :class:`ScOperator` carries one coefficient matrix per scale level (for
differential operators the collocation matrix is the same object on every
level; what distinguishes the levels is the pair of norms).  Kernel and
cokernel dimensions are read off a singular value decomposition of the
matrix conjugated into norm-orthonormal coordinates,

    M_m = F_target @ A @ inv(F_domain),

where F is a factor of the level Gram matrix (diagonal for weighted-L2
norms, Cholesky for weighted H^k, an exact Fourier weighting for loop
norms).  Dimensions are basis independent; the factors only move the
singular values, so reports record the gap between retained and discarded
singular values and refuse to certify ambiguous spectra.

Two model operator families live here: d/dt on real loops (the basic
sc-Fredholm example, kernel and cokernel the constants) and the cylinder
operators assembled by :mod:`.floer` and :mod:`.gluing`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.sparse as sp

from .grid import CylinderGrid, Field, quadrature_weights, s_derivative_matrix, t_derivative_factors, weight_eta

__all__ = [
    "SpaceSpec",
    "ScOperator",
    "FredholmReport",
    "Splitting",
    "RegularizingResult",
    "assemble_ddt",
    "fredholm_report",
    "index_all_scales",
    "regularizing_check",
    "build_splittings",
    "loop_derivative_matrix",
    "export_triplets",
    "report_to_json",
]

#: Dense linear algebra guard: norm factors and SVDs above this size are refused.
MAX_DENSE_DIM = 12000
#: Dense Cholesky guard for non-diagonal Gram factors.
MAX_GRAM_DIM = 5000

DEFAULT_SV_REL_CUTOFF = 1e-4
DEFAULT_SV_FLOOR = 1e-10
TRUSTWORTHY_GAP = 10.0


class LinopError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# space specifications and norm factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceSpec:
    """Norm data for one level of a domain or target scale.

    kind 'cyl': weighted Sobolev H^{order, delta} on the cylinder grid.
    kind 'loop': Fourier-weighted norm (sum (1+|k|)^{2*order} |u_k|^2)^(1/2)
    on real loops, the inner-product stand-in for the C^order scale.
    """

    kind: str
    order: int
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("cyl", "loop"):
            raise ValueError(f"unknown space kind {self.kind!r}")


def _loop_trig_basis(n_t: int) -> np.ndarray:
    """Orthonormal real trigonometric basis rows (constants, cos, sin...)."""
    t = np.arange(n_t) / n_t
    rows = [np.full(n_t, 1.0 / np.sqrt(n_t))]
    kmax = n_t // 2
    for k in range(1, kmax + 1):
        c = np.cos(2 * np.pi * k * t)
        rows.append(c / np.linalg.norm(c))
        if k < kmax or n_t % 2 == 1:
            s = np.sin(2 * np.pi * k * t)
            rows.append(s / np.linalg.norm(s))
    return np.array(rows[:n_t])


def _loop_row_freqs(n_t: int) -> np.ndarray:
    freqs = [0]
    kmax = n_t // 2
    for k in range(1, kmax + 1):
        freqs.append(k)
        if k < kmax or n_t % 2 == 1:
            freqs.append(k)
    return np.array(freqs[:n_t], dtype=float)


class NormFactor:
    """Matrix F with ||u||_level = ||F u||_2; supports solve against F."""

    def __init__(self, mat: np.ndarray, diag: np.ndarray | None = None):
        self._mat = mat
        self._diag = diag

    @classmethod
    def diagonal(cls, d: np.ndarray) -> "NormFactor":
        return cls(None, diag=np.asarray(d))

    @classmethod
    def dense(cls, mat: np.ndarray) -> "NormFactor":
        return cls(np.asarray(mat))

    @property
    def is_diagonal(self) -> bool:
        return self._diag is not None

    def matmat(self, A):
        if self.is_diagonal:
            return A * self._diag[:, None] if A.ndim == 2 else A * self._diag
        return self._mat @ A

    def right_solve(self, A: np.ndarray) -> np.ndarray:
        """Return A @ inv(F)."""
        if self.is_diagonal:
            return A / self._diag[None, :]
        return np.linalg.solve(self._mat.T, A.T).T

    def solve_vec(self, v: np.ndarray) -> np.ndarray:
        """Return inv(F) v."""
        if self.is_diagonal:
            return v / self._diag
        return np.linalg.solve(self._mat, v)

    def apply_vec(self, v: np.ndarray) -> np.ndarray:
        if self.is_diagonal:
            return v * self._diag
        return self._mat @ v


def norm_factor(spec: SpaceSpec, grid: CylinderGrid | None, n_t: int | None = None,
                pair: bool = False, mode: str = "complex") -> NormFactor:
    """Build the Gram factor for a space specification.

    For cylinder norms of order 0 the factor is diagonal
    (exp(delta*eta) * sqrt(quadrature)); positive orders build the sparse
    Gram of the H^{k,delta} inner product and take a dense Cholesky factor
    (guarded by MAX_GRAM_DIM).  Loop norms use the exact orthonormal
    trigonometric transform with (1+|k|)^order weights.
    """
    if spec.kind == "loop":
        T = _loop_trig_basis(n_t)
        w = (1.0 + _loop_row_freqs(n_t)) ** spec.order
        return NormFactor.dense(w[:, None] * T)
    assert grid is not None
    wdiag = np.exp(spec.delta * weight_eta(grid.s))
    q = np.sqrt(quadrature_weights(grid))
    base = (wdiag[:, None] * q).ravel()  # length n_s*n_t, per-point factor
    if spec.order == 0:
        d = base
        if mode == "real":
            d = np.concatenate([d, d])
        if pair:
            d = np.concatenate([d, d])
        return NormFactor.diagonal(d)
    # H^k Gram: L = stack of sqrt(q) D^{a,b} W over a+b<=k, G = L^H L.
    n = grid.n_s * grid.n_t
    W = sp.diags(np.repeat(np.exp(spec.delta * weight_eta(grid.s)), grid.n_t))
    Q = sp.diags(np.sqrt(quadrature_weights(grid)).ravel())
    blocks = []
    for a in range(spec.order + 1):
        Da = sp.identity(grid.n_s, format="csr") if a == 0 else s_derivative_matrix(grid, a)
        DaF = sp.kron(Da, sp.identity(grid.n_t, format="csr"), format="csr")
        for b in range(spec.order + 1 - a):
            if b == 0:
                Dab = DaF
            else:
                fac = t_derivative_factors(grid.n_t, b)
                # dense spectral differentiation matrix in t (n_t small)
                Ft = np.fft.fft(np.eye(grid.n_t), axis=0)
                Dt = np.fft.ifft(fac[:, None] * Ft, axis=0)
                Dab = (DaF @ sp.kron(sp.identity(grid.n_s, format="csr"),
                                     sp.csr_matrix(Dt), format="csr")).tocsr()
            blocks.append((Q @ Dab @ W).tocsr())
    L = sp.vstack(blocks).tocsc()
    size = n * (2 if mode == "real" else 1) * (2 if pair else 1)
    if size > MAX_GRAM_DIM:
        raise LinopError(
            f"H^{spec.order} Gram factor of dimension {size} exceeds the dense "
            f"guard {MAX_GRAM_DIM}; use order-0 report norms at this resolution"
        )
    G = (L.conj().T @ L).toarray()
    G = 0.5 * (G + G.conj().T)
    # Robust Cholesky: tiny diagonal lift for rounding.
    lift = 1e-14 * np.trace(G).real / n
    R = np.linalg.cholesky(G + lift * np.eye(n)).conj().T
    if mode == "real":
        # ||x + i y||_G in stacked [Re; Im] coordinates.
        R = np.block([[R.real, -R.imag], [R.imag, R.real]])
    if pair:
        Z = np.zeros_like(R)
        R = np.block([[R, Z], [Z, R]])
    return NormFactor.dense(R)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


@dataclass
class ScOperator:
    """Level-indexed matrix realization of a linear operator between scales.

    ``mats[m]`` acts on flattened coefficient vectors; ``domain[m]`` and
    ``target[m]`` carry the level norms.  ``mode`` is 'complex' when the
    matrix is complex linear (stored complex), 'real' when it acts on the
    stacked [Re; Im] coordinates.  ``pair`` marks operators on PairField
    coefficient vectors (two stacked slots).
    """

    mats: dict
    domain: dict
    target: dict
    grid: CylinderGrid | None = None
    n_t: int | None = None
    mode: str = "complex"
    pair: bool = False
    order: int = 1
    meta: dict = dataclass_field(default_factory=dict)

    @property
    def levels(self) -> list:
        return sorted(self.mats)

    def matrix(self, m: int):
        return self.mats[m]

    def with_matrix(self, m: int, mat) -> "ScOperator":
        mats = dict(self.mats)
        mats[m] = mat
        return ScOperator(mats, self.domain, self.target, self.grid, self.n_t,
                          self.mode, self.pair, self.order, dict(self.meta))

    # -- coefficient packing ------------------------------------------------

    def flatten_field(self, u: Field) -> np.ndarray:
        flat = u.values.ravel()
        if self.mode == "complex":
            return flat
        return np.concatenate([flat.real, flat.imag])

    def unflatten_field(self, v: np.ndarray) -> Field:
        g = self.grid
        if self.mode == "complex":
            flat = v
        else:
            n = v.size // 2
            flat = v[:n] + 1j * v[n:]
        dim = flat.size // (g.n_s * g.n_t)
        return Field(g, flat.reshape(g.n_s, g.n_t, dim))

    def flatten_pair(self, pairf) -> np.ndarray:
        return np.concatenate([self.flatten_field(pairf.xi1), self.flatten_field(pairf.xi2)])

    def unflatten_pair(self, v: np.ndarray):
        from .gluing import PairField

        half = v.size // 2
        return PairField(self.unflatten_field(v[:half]), self.unflatten_field(v[half:]))

    def apply(self, u, m: int = 0):
        A = self.mats[m]
        if self.pair:
            return self.unflatten_pair(A @ self.flatten_pair(u))
        if isinstance(u, Field):
            return self.unflatten_field(A @ self.flatten_field(u))
        return A @ np.asarray(u)


# ---------------------------------------------------------------------------
# d/dt on real loops
# ---------------------------------------------------------------------------


def loop_derivative_matrix(n_t: int) -> np.ndarray:
    """Real spectral differentiation matrix for loops of circumference 1."""
    fac = t_derivative_factors(n_t, 1)
    F = np.fft.fft(np.eye(n_t), axis=0)
    return np.real(np.fft.ifft(fac[:, None] * F, axis=0))


def assemble_ddt(n_t: int, levels=(0, 1, 2)) -> ScOperator:
    """d/dt from the C^{1+m} scale to the C^m scale on real loops.

    Realized on the Fourier grid with the inner-product stand-ins
    (sum (1+|k|)^{2m} |u_k|^2)^(1/2) for the level norms; the Fredholm data
    (kernel and cokernel are the constants, index 0) is norm independent.
    On even grids the spectral derivative annihilates the Nyquist sawtooth
    as well (a grid artifact that doubles the reported kernel); odd n_t
    reproduces the continuum counts exactly.
    """
    if n_t < 4:
        raise ValueError("n_t must be >= 4")
    D = loop_derivative_matrix(n_t)
    mats = {m: D for m in levels}
    domain = {m: SpaceSpec("loop", 1 + m) for m in levels}
    target = {m: SpaceSpec("loop", m) for m in levels}
    return ScOperator(mats, domain, target, grid=None, n_t=n_t, mode="real",
                      pair=False, order=1, meta={"name": "d/dt"})


# ---------------------------------------------------------------------------
# Fredholm reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FredholmReport:
    level: int
    dim_ker: int
    dim_coker: int
    index: int
    sv_threshold: float
    sv_gap: float
    sv_min_retained: float
    sv_max_discarded: float
    sigma_max: float
    trustworthy: bool
    note: str = ""


def _choose_threshold(svals: np.ndarray, rel_cutoff: float, floor: float):
    """Threshold policy: the largest multiplicative gap below rel_cutoff*s_max,
    floored at floor*s_max.  Returns (n_discarded, threshold, gap)."""
    smax = svals[0] if len(svals) else 0.0
    if smax == 0.0:
        return len(svals), 0.0, np.inf
    asc = np.sort(svals)
    cut = rel_cutoff * smax
    small = asc[asc < cut]
    if len(small) == 0:
        thr = floor * smax
        gap = asc[0] / thr if thr > 0 else np.inf
        return 0, thr, gap
    if len(small) == len(asc):
        return len(asc), cut, np.inf
    # candidate split points: after each small singular value
    best_i, best_ratio = None, -1.0
    for i in range(len(small)):
        lo = asc[i]
        hi = asc[i + 1]
        ratio = np.inf if lo == 0.0 else hi / lo
        if ratio >= best_ratio:
            best_ratio = ratio
            best_i = i
    n_disc = best_i + 1
    lo = asc[n_disc - 1]
    hi = asc[n_disc]
    thr = max(np.sqrt(lo * hi) if lo > 0 else 0.5 * hi, floor * smax)
    return n_disc, thr, best_ratio


def _weighted_matrix(op: ScOperator, m: int, domain_norms: str = "level") -> np.ndarray:
    A = op.mats[m]
    if sp.issparse(A):
        A = A.toarray()
    A = np.asarray(A)
    if max(A.shape) > MAX_DENSE_DIM:
        raise LinopError(f"matrix of dimension {A.shape} exceeds dense guard")
    tgt = op.target[m]
    dom = op.domain[m]
    if domain_norms == "l2":
        dom = SpaceSpec(dom.kind, 0, dom.delta)
        tgt = SpaceSpec(tgt.kind, 0, tgt.delta)
    Ft = norm_factor(tgt, op.grid, op.n_t, pair=op.pair, mode=op.mode)
    Fd = norm_factor(dom, op.grid, op.n_t, pair=op.pair, mode=op.mode)
    return Ft.matmat(Fd.right_solve(A)), Ft, Fd


def fredholm_report(
    op: ScOperator,
    m: int = 0,
    rel_cutoff: float = DEFAULT_SV_REL_CUTOFF,
    floor: float = DEFAULT_SV_FLOOR,
    domain_norms: str = "level",
) -> FredholmReport:
    """Kernel/cokernel/index of the level-m matrix by singular value counting.

    Real dimensions are reported: for a complex-linear matrix the complex
    counts are doubled.  Reports with sv_gap <= 10 are flagged untrustworthy
    rather than silently returned.
    """
    M, _, _ = _weighted_matrix(op, m, domain_norms)
    svals = np.linalg.svd(M, compute_uv=False)
    n_disc, thr, gap = _choose_threshold(svals, rel_cutoff, floor)
    mult = 2 if op.mode == "complex" else 1
    n_rows, n_cols = M.shape
    rank = min(n_rows, n_cols) - n_disc
    dim_ker = (n_cols - rank) * mult
    dim_coker = (n_rows - rank) * mult
    asc = np.sort(svals)
    retained = asc[n_disc] if n_disc < len(asc) else np.nan
    discarded = asc[n_disc - 1] if n_disc > 0 else np.nan
    note = "" if gap > TRUSTWORTHY_GAP else "untrustworthy: sv gap <= 10"
    return FredholmReport(
        level=m,
        dim_ker=int(dim_ker),
        dim_coker=int(dim_coker),
        index=int(dim_ker - dim_coker),
        sv_threshold=float(thr),
        sv_gap=float(gap),
        sv_min_retained=float(retained),
        sv_max_discarded=float(discarded),
        sigma_max=float(svals[0]) if len(svals) else 0.0,
        trustworthy=gap > TRUSTWORTHY_GAP,
        note=note,
    )


def fredholm_report_estimate(op: ScOperator, m: int = 0) -> FredholmReport:
    """LU-based invertibility certificate in place of a full SVD.

    Uses one-norm estimates of the level matrix and its inverse; when the
    estimated condition is moderate the operator is certified invertible
    (kernel and cokernel zero).  Falls back to :func:`fredholm_report` when
    the factorization fails or the estimate is ambiguous.
    """
    import scipy.sparse.linalg as spla

    A = op.mats[m]
    As = sp.csc_matrix(A)
    try:
        lu = spla.splu(As)
        nrm = spla.onenormest(As)
        n = As.shape[0]
        inv_op = spla.LinearOperator(As.shape, matvec=lu.solve,
                                     rmatvec=lambda v: lu.solve(v, trans="H"),
                                     dtype=As.dtype)
        inv_nrm = spla.onenormest(inv_op)
        sigma_min_est = 1.0 / (inv_nrm * np.sqrt(n))
        thr = DEFAULT_SV_FLOOR * nrm
        gap = sigma_min_est / thr
        if gap > TRUSTWORTHY_GAP:
            return FredholmReport(
                level=m, dim_ker=0, dim_coker=0, index=0, sv_threshold=float(thr),
                sv_gap=float(gap), sv_min_retained=float(sigma_min_est),
                sv_max_discarded=float("nan"), sigma_max=float(nrm),
                trustworthy=True, note="estimated (LU norm bounds)")
    except RuntimeError:
        pass
    return fredholm_report(op, m)


@dataclass
class ScaleMismatch(RuntimeError):
    level_a: int
    level_b: int
    report_a: FredholmReport
    report_b: FredholmReport

    def __str__(self):
        return (
            f"scale mismatch between levels {self.level_a} and {self.level_b}: "
            f"(ker, coker, index) = ({self.report_a.dim_ker}, {self.report_a.dim_coker}, "
            f"{self.report_a.index}) vs ({self.report_b.dim_ker}, {self.report_b.dim_coker}, "
            f"{self.report_b.index}); sv thresholds {self.report_a.sv_threshold:.3e} / "
            f"{self.report_b.sv_threshold:.3e}"
        )


def index_all_scales(op: ScOperator, domain_norms: str = "level") -> list:
    """Reports on every level; raises ScaleMismatch if index or kernel
    dimension differ between trustworthy levels."""
    levels = op.levels
    if len(levels) < 2:
        raise ValueError("need at least two levels")
    reports = [fredholm_report(op, m, domain_norms=domain_norms) for m in levels]
    ref = None
    for m, rep in zip(levels, reports):
        if not rep.trustworthy:
            continue
        if ref is None:
            ref = (m, rep)
            continue
        if rep.index != ref[1].index or rep.dim_ker != ref[1].dim_ker:
            raise ScaleMismatch(ref[0], m, ref[1], rep)
    return reports


# ---------------------------------------------------------------------------
# regularizing check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularizingResult:
    status: str  # 'ok' | 'no_preimage' | 'irregular'
    residual_rel: float
    preimage_norm: float
    rhs_norm: float
    ratio: float
    witness: dict


#: Documented elliptic-bound constant for the regularity proxy.
REGULARITY_CONSTANT = 10.0


def regularizing_check(op: ScOperator, f, m: int = 1,
                       residual_tol: float = 1e-8) -> RegularizingResult:
    """Solve T e = f at level 0 and test the level-m finiteness proxy.

    If the least-squares residual exceeds residual_tol * ||f||, the result is
    'no_preimage' (distinct from a regularity failure).  Otherwise the
    preimage is accepted as regular when its level-m domain norm is bounded
    by REGULARITY_CONSTANT times the level-m target norm of f.
    """
    A = op.mats[0]
    if sp.issparse(A):
        A = A.toarray()
    fv = np.asarray(f, dtype=float if op.mode == "real" else complex)
    e, *_ = np.linalg.lstsq(A, fv, rcond=1e-12)
    res = A @ e - fv
    fn = np.linalg.norm(fv)
    rel = np.linalg.norm(res) / fn if fn > 0 else 0.0
    if rel > residual_tol:
        return RegularizingResult("no_preimage", float(rel), 0.0, 0.0, np.inf,
                                  {"residual_rel": float(rel)})
    dom_m = op.domain.get(m, op.domain[max(op.domain)])
    tgt_m = op.target.get(m, op.target[max(op.target)])
    Fd = norm_factor(dom_m, op.grid, op.n_t, pair=op.pair, mode=op.mode)
    Ft = norm_factor(tgt_m, op.grid, op.n_t, pair=op.pair, mode=op.mode)
    en = float(np.linalg.norm(Fd.apply_vec(e)))
    fnm = float(np.linalg.norm(Ft.apply_vec(fv)))
    ratio = en / fnm if fnm > 0 else 0.0
    status = "ok" if ratio <= REGULARITY_CONSTANT else "irregular"
    return RegularizingResult(status, float(rel), en, fnm, float(ratio),
                              {"level": m, "bound": REGULARITY_CONSTANT})


# ---------------------------------------------------------------------------
# splittings
# ---------------------------------------------------------------------------


@dataclass
class Splitting:
    """Kernel/cokernel-complement data extracted from the level-m SVD.

    Pi_C projects onto the cokernel representative C (a subspace of smooth
    vectors complementing the range); Pi_C_perp = I - Pi_C.  X_projector
    projects onto the norm-orthogonal complement of the kernel.
    """

    level: int
    kernel_basis: list
    C_basis: list
    Pi_C: np.ndarray
    Pi_C_perp: np.ndarray
    X_projector: np.ndarray
    report: FredholmReport
    smoothing_angle: float
    smoothed: bool


def _lowpass_basis(op: ScOperator, vecs: np.ndarray) -> np.ndarray:
    """Project columns onto low-frequency modes (the smooth-complement move)."""
    if op.n_t is not None and op.grid is None:
        T = _loop_trig_basis(op.n_t)
        freqs = _loop_row_freqs(op.n_t)
        keep = freqs <= max(1, op.n_t // 4)
        P = T[keep].T @ T[keep]
        return P @ vecs
    g = op.grid
    n = g.n_s * g.n_t
    # separable low-pass: cosine modes in s, Fourier modes in t
    ks = max(2, g.n_s // 4)
    kt = max(1, g.n_t // 4)
    s01 = (g.s + g.s_max) / (2 * g.s_max)
    Bs = np.array([np.cos(np.pi * j * s01) for j in range(ks)]).T
    Bs, _ = np.linalg.qr(Bs)
    Ps = Bs @ Bs.T
    tt = g.t
    Bt = []
    for k in range(-kt, kt + 1):
        Bt.append(np.exp(2j * np.pi * k * tt) / np.sqrt(g.n_t))
    Bt = np.array(Bt).T
    Pt = Bt @ Bt.conj().T

    def apply_block(V):
        out = np.empty_like(V, dtype=complex)
        for c in range(V.shape[1]):
            M = V[:, c].reshape(g.n_s, g.n_t)
            out[:, c] = (Ps @ M @ Pt.T.conj()).ravel()
        return out

    if op.mode == "complex":
        blocks = [vecs[i * n : (i + 1) * n] for i in range(vecs.shape[0] // n)]
        return np.vstack([apply_block(b) for b in blocks])
    # real mode: smooth Re and Im parts separately
    nb = vecs.shape[0] // n
    out = np.vstack([np.real(apply_block(vecs[i * n : (i + 1) * n].astype(complex)))
                     for i in range(nb)])
    return out


SMOOTHING_ANGLE_TOL = 1e-6


def build_splittings(op: ScOperator, m: int = 0, domain_norms: str = "level") -> Splitting:
    """Kernel basis, smooth cokernel complement, and the associated projectors.

    The raw cokernel representatives (left singular vectors of near-zero
    singular values) are projected onto low-frequency modes and
    re-orthonormalized; if the subspace angle to the raw span exceeds
    SMOOTHING_ANGLE_TOL the raw vectors are kept and the report notes it.
    """
    M, Ft, Fd = _weighted_matrix(op, m, domain_norms)
    U, svals, Vh = np.linalg.svd(M)
    rep = fredholm_report(op, m, domain_norms=domain_norms)
    if not rep.trustworthy:
        raise LinopError(f"sv gap failure at level {m}: {rep.note}")
    n_disc = int(np.sum(svals <= rep.sv_threshold)) if (rep.dim_ker or rep.dim_coker) else 0
    n = M.shape[1]
    ker_w = Vh[n - n_disc :].conj().T if n_disc else np.zeros((n, 0))
    cok_w = U[:, M.shape[0] - n_disc :] if n_disc else np.zeros((M.shape[0], 0))

    kernel_coeff = np.column_stack([Fd.solve_vec(ker_w[:, j]) for j in range(ker_w.shape[1])]) \
        if n_disc else np.zeros((n, 0))
    cok_raw = np.column_stack([Ft.solve_vec(cok_w[:, j]) for j in range(cok_w.shape[1])]) \
        if n_disc else np.zeros((M.shape[0], 0))

    smoothed = False
    angle = 0.0
    C_coeff = cok_raw
    if n_disc:
        low = _lowpass_basis(op, cok_raw)
        wlow = np.column_stack([Ft.apply_vec(low[:, j]) for j in range(low.shape[1])])
        qlow, rlow = np.linalg.qr(wlow)
        if np.linalg.matrix_rank(rlow, tol=1e-10) == n_disc:
            qraw, _ = np.linalg.qr(cok_w)
            sv_ang = np.linalg.svd(qraw.conj().T @ qlow, compute_uv=False)
            angle = float(np.sqrt(max(0.0, 1.0 - np.min(sv_ang) ** 2)))
            if angle <= SMOOTHING_ANGLE_TOL:
                cok_w = qlow
                C_coeff = np.column_stack([Ft.solve_vec(qlow[:, j]) for j in range(n_disc)])
                smoothed = True

    # Projector onto C along the (weighted-orthogonal complement of) range.
    if n_disc:
        Uw = cok_w
        PiC_w = Uw @ Uw.conj().T
        PiC = _conjugate_out(PiC_w, Ft)
        Vw = ker_w
        PiK_w = Vw @ Vw.conj().T
        PiK = _conjugate_out(PiK_w, Fd)
    else:
        PiC = np.zeros_like(M)
        PiK = np.zeros((n, n), dtype=M.dtype)
    eye_t = np.eye(M.shape[0], dtype=M.dtype)
    eye_d = np.eye(n, dtype=M.dtype)

    def unflatten_cols(cols):
        out = []
        for j in range(cols.shape[1]):
            if op.pair:
                out.append(op.unflatten_pair(cols[:, j]))
            elif op.grid is not None:
                out.append(op.unflatten_field(cols[:, j]))
            else:
                out.append(np.real(cols[:, j]) if op.mode == "real" else cols[:, j])
        return out

    return Splitting(
        level=m,
        kernel_basis=unflatten_cols(kernel_coeff),
        C_basis=unflatten_cols(C_coeff),
        Pi_C=PiC,
        Pi_C_perp=eye_t - PiC,
        X_projector=eye_d - PiK,
        report=rep,
        smoothing_angle=angle,
        smoothed=smoothed,
    )


def _conjugate_out(P_w: np.ndarray, F: NormFactor) -> np.ndarray:
    """Turn a projector in weighted coordinates into coefficient coordinates:
    P = inv(F) P_w F."""
    n = P_w.shape[0]
    if F.is_diagonal:
        d = F._diag
        return (P_w * d[None, :]) / d[:, None]
    right = F.matmat(np.eye(n, dtype=complex))
    return np.linalg.solve(F._mat, P_w @ right)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_triplets(mat, path) -> None:
    """Sparse triplet text: header line then 'row col re [im]' per entry."""
    A = sp.coo_matrix(mat)
    cplx = np.iscomplexobj(A.data)
    with open(path, "w") as fh:
        fh.write(f"# scfloer-triplets v1 rows={A.shape[0]} cols={A.shape[1]} "
                 f"complex={int(cplx)}\n")
        for r, c, v in zip(A.row, A.col, A.data):
            if cplx:
                fh.write(f"{r} {c} {v.real!r} {v.imag!r}\n")
            else:
                fh.write(f"{r} {c} {v!r}\n")


def report_to_json(rep: FredholmReport) -> str:
    return json.dumps(
        {
            "level": rep.level,
            "dim_ker": rep.dim_ker,
            "dim_coker": rep.dim_coker,
            "index": rep.index,
            "sv_threshold": rep.sv_threshold,
            "sv_gap": rep.sv_gap,
            "sigma_max": rep.sigma_max,
            "trustworthy": rep.trustworthy,
            "note": rep.note,
        },
        sort_keys=True,
    )
