"""Fredholm-property verification suites for the filled section.

The three analytic ingredients are measured here at desk scale:

* (ii a) uniform continuity of the pair-direction differential in the base
  perturbation e, with the Lipschitz-type ratio
  ||(D(r,e) - D(r,e')) xi||_m / (||e - e'||_{m+1} ||xi||_{m+1});
* (ii b) convergence of D(r,0) to D(0,0) as the neck grows: the shifted
  base fields converge to the broken pair in C^m at the rate carried by
  their exponential decay, the coefficient parts of the Q blocks decay at
  the same rate, and the seam-supported beta-derivative blocks stay
  uniformly bounded (they are constant-size cutoff multiplications; their
  vanishing along minimizing sequences is a disjoint-support effect, not
  an operator-norm one, so they are reported but excluded from rate fits);
* (iii) Fredholm index stability across the neck-length sweep, with kernel
  regularity read off fitted decay rates, plus the independent spectral
  flow count of the weighted asymptotic family.

On top of these the contraction-germ normal form is constructed at a
working gluing parameter r0 > 0: with the level splittings of the
linearization at (r0, 0), the transformed map has the shape
(A(v, w), w - B(v, w)) where v collects the gluing-parameter deviation and
the kernel coordinates, and

    B(v, w) = w - (PiC_perp D(r,0))^{-1} PiC_perp (Phi(r, k+w) - Phi(r0, 0)).

The r-dependent inverse (not the base-point inverse) is what makes B a
contraction without a norm shift; theta is estimated by sampling and the
glued trajectory is produced by Picard iteration on w = B(v, w).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import assemble as asm
from .floer import HamiltonianModel, floer_residual, linearize_cr, decay_rate
from .gluing import (
    GluingProfile,
    PairField,
    assemble_DPhi,
    decompose_errors,
    filled_section,
    filled_section_conjugated,
    glued_base_minus,
    glued_base_plus,
    preglue,
)
from .grid import CylinderGrid, Field, weight_eta_prime, margin_audit
from .linop import FredholmReport, build_splittings, fredholm_report, loop_derivative_matrix
from .scales import WeightSequence, cm_norm, pair_weighted_norm, weighted_norm

__all__ = [
    "ContinuityTable",
    "ContractionTable",
    "GermNormalForm",
    "IndexSweepResult",
    "PicardResult",
    "verify_iia",
    "verify_iib",
    "index_vs_r",
    "spectral_flow_index",
    "spectral_flow_of_family",
    "DegenerateAsymptoticsError",
    "build_germ_normal_form",
    "estimate_contraction",
    "picard_glue",
    "random_decaying_pair",
]


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------


def random_decaying_field(
    grid: CylinderGrid, rng, dim: int = 1, decay: float = 0.5, kmax: int | None = None
) -> Field:
    s, t = grid.s, grid.t
    kmax = kmax if kmax is not None else max(1, grid.n_t // 2 - 1)
    vals = np.zeros((grid.n_s, grid.n_t, dim), complex)
    env = np.exp(-decay * np.sqrt(1.0 + s**2))
    for k in range(-kmax, kmax + 1):
        for j in range(3):
            c = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            prof = env * np.cos((j + 1) * np.pi * s / (2.0 * grid.s_max) + 0.3 * j)
            vals += c[None, None, :] * prof[:, None, None] * np.exp(2j * np.pi * k * t)[None, :, None]
    return Field(grid, vals)


def random_decaying_pair(grid: CylinderGrid, rng, dim: int = 1, decay: float = 0.5) -> PairField:
    return PairField(
        random_decaying_field(grid, rng, dim, decay),
        random_decaying_field(grid, rng, dim, decay),
    )


def _scale_pair(pf: PairField, k: int, delta: float, target: float) -> PairField:
    n = pair_weighted_norm(pf, k, delta)
    if n == 0.0:
        return pf
    return pf * (target / n)


# ---------------------------------------------------------------------------
# (ii a): continuity of the differential in e
# ---------------------------------------------------------------------------


@dataclass
class ContinuityTable:
    """Rows of measured Lipschitz ratios for the e-dependence of D(r, e)."""

    rows: list
    fitted_constant: float
    uniform_bound: float
    stable: bool
    meta: dict = dataclass_field(default_factory=dict)

    def csv_rows(self):
        for row in self.rows:
            yield row


def verify_iia(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    ws: WeightSequence,
    m: int,
    sweep,
    r_values=(0.0,),
    n_probes: int = 6,
    seed: int = 7,
) -> ContinuityTable:
    """Measured sup ratios ||(D(r,e)-D(r,e')) xi||_m / (||e-e'||_{m+1} ||xi||_{m+1}).

    ``sweep`` lists the perturbation sizes ||e - e'|| to probe (a decade or
    more); the table asserts the ratio is bounded and size-independent,
    which is the Lipschitz form of the continuity property.  m >= 1: the
    level-0 norm is not an algebra norm and is excluded.
    """
    if m < 1:
        raise ValueError("continuity suite requires m >= 1")
    grid = gamma1.grid
    delta_m = ws[m]
    rng = np.random.default_rng(seed)
    probes = [random_decaying_pair(grid, rng, gamma1.target_dim) for _ in range(n_probes)]
    probe_norms = [pair_weighted_norm(q, m + 1, delta_m) for q in probes]
    e_dir = random_decaying_pair(grid, rng, gamma1.target_dim)
    e_base = random_decaying_pair(grid, rng, gamma1.target_dim)
    e_base = _scale_pair(e_base, m + 1, delta_m, max(sweep))

    rows = []
    for r in r_values:
        p = GluingProfile(r)
        for size in sweep:
            de = _scale_pair(e_dir, m + 1, delta_m, size)
            e2 = e_base + de
            diff_norm = pair_weighted_norm(e2 - e_base, m + 1, delta_m)
            opA = assemble_DPhi(model, gamma1, gamma2, p, e_base, ws, (m,))
            opB = assemble_DPhi(model, gamma1, gamma2, p, e2, ws, (m,))
            if opA.mode != opB.mode:
                opA = assemble_DPhi(model, gamma1, gamma2, p, e_base, ws, (m,), mode="real")
                opB = assemble_DPhi(model, gamma1, gamma2, p, e2, ws, (m,), mode="real")
            Dmat = opB.mats[m] - opA.mats[m]
            best = 0.0
            for q, qn in zip(probes, probe_norms):
                img = opA.unflatten_pair(Dmat @ opA.flatten_pair(q))
                val = pair_weighted_norm(img, m, delta_m)
                if qn > 0 and diff_norm > 0:
                    best = max(best, val / (qn * diff_norm))
            rows.append({"m": m, "r": r, "diff_size": diff_norm, "sup_ratio": best})
    ratios = [row["sup_ratio"] for row in rows]
    fitted = float(np.median(ratios)) if ratios else 0.0
    bound = float(np.max(ratios)) if ratios else 0.0
    if fitted > 0:
        stable = all(abs(x - fitted) <= 0.3 * fitted for x in ratios)
    else:
        stable = all(x <= 1e-12 for x in ratios)
    return ContinuityTable(rows, fitted, bound, stable,
                           meta={"model": model.name, "level": m, "delta_m": delta_m})


# ---------------------------------------------------------------------------
# (ii b): convergence of D(r,0) to D(0,0)
# ---------------------------------------------------------------------------


def _fit_rate(R_values, measured):
    """Exponential rate from a log-linear fit; nan when data degenerate."""
    R = np.asarray(R_values, dtype=float)
    y = np.asarray(measured, dtype=float)
    ok = y > 0
    if np.sum(ok) < 2:
        return float("nan")
    slope = np.polyfit(R[ok], np.log(y[ok]), 1)[0]
    return float(-slope)


@dataclass
class ConvergenceTable:
    rows: list
    rates: dict
    meta: dict = dataclass_field(default_factory=dict)


def verify_iib(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    ws: WeightSequence,
    m: int,
    r_sequence,
    n_probes: int = 5,
    seed: int = 11,
) -> ConvergenceTable:
    """Neck-growth convergence measurements for the e = 0 differential.

    Per neck length R the table records
      gamma_cm:      max of ||gamma_r^- - gamma1||_{C^m}, ||gamma_r^+ - gamma2||_{C^m}
      diag_diff:     sup over probes of the diagonal-block difference action
      q_coeff:       sup over probes of the coefficient part of the Q blocks
      q_beta:        sup over probes of the beta-derivative part (bounded,
                     not rate-fitted)
      s_action:      sup over probes of the S-block action (reported)
    and fits exponential rates in R for the first three columns.
    """
    if m < 1:
        raise ValueError("convergence suite requires m >= 1")
    grid = gamma1.grid
    delta_m = ws[m]
    rng = np.random.default_rng(seed)
    dim = gamma1.target_dim
    probes = [random_decaying_pair(grid, rng, dim, decay=ws.delta_cap) for _ in range(n_probes)]
    probes = [_scale_pair(q, m + 1, delta_m, 1.0) for q in probes]

    l_g1 = linearize_cr(model, gamma1, ws, (m,), edge="ghost", mode="real")
    l_g2 = linearize_cr(model, gamma2, ws, (m,), edge="ghost", mode="real")

    rows = []
    usable = []
    for r in r_sequence:
        p = GluingProfile(r)
        R = p.snapped_R(grid)
        audit = margin_audit(grid, R, ws[0])
        if R + 1.0 > grid.s_max:
            rows.append({"m": m, "r": r, "R": R, "usable": 0})
            continue
        usable.append(R)
        gm = glued_base_minus(gamma1, gamma2, R)
        gp = glued_base_plus(gamma1, gamma2, R)
        gamma_cm = max(cm_norm(gm - gamma1, m), cm_norm(gp - gamma2, m))

        lm = linearize_cr(model, gm, ws, (m,), edge="ghost", mode="real")
        lp = linearize_cr(model, gp, ws, (m,), edge="ghost", mode="real")
        diag1 = lm.mats[m] - l_g1.mats[m]
        diag2 = lp.mats[m] - l_g2.mats[m]

        blocks = decompose_errors(model, gamma1, gamma2, p, ws, mode="real")
        beta1 = blocks.Q1 - blocks.q1_coeff_parts
        beta2 = blocks.Q2 - blocks.q2_coeff_parts

        diag_diff = q_coeff = q_beta = s_act = 0.0
        for q in probes:
            v1 = lm.flatten_field(q.xi1)
            v2 = lm.flatten_field(q.xi2)
            diag_diff = max(
                diag_diff,
                weighted_norm(lm.unflatten_field(diag1 @ v1), m, delta_m),
                weighted_norm(lm.unflatten_field(diag2 @ v2), m, delta_m),
            )
            q_coeff = max(
                q_coeff,
                weighted_norm(lm.unflatten_field(blocks.q1_coeff_parts @ v1), m, delta_m),
                weighted_norm(lm.unflatten_field(blocks.q2_coeff_parts @ v2), m, delta_m),
            )
            q_beta = max(
                q_beta,
                weighted_norm(lm.unflatten_field(beta1 @ v1), m, delta_m),
                weighted_norm(lm.unflatten_field(beta2 @ v2), m, delta_m),
            )
            s_act = max(
                s_act,
                weighted_norm(lm.unflatten_field(blocks.S1 @ v2), m, delta_m),
                weighted_norm(lm.unflatten_field(blocks.S2 @ v1), m, delta_m),
            )
        rows.append(
            {
                "m": m,
                "r": r,
                "R": R,
                "usable": 1,
                "margin_ok": int(audit.ok),
                "gamma_cm": gamma_cm,
                "diag_diff": diag_diff,
                "q_coeff": q_coeff,
                "q_beta": q_beta,
                "s_action": s_act,
            }
        )
    good = [row for row in rows if row.get("usable")]
    rates = {
        "gamma_cm": _fit_rate([r["R"] for r in good], [r["gamma_cm"] for r in good]),
        "diag_diff": _fit_rate([r["R"] for r in good], [r["diag_diff"] for r in good]),
        "q_coeff": _fit_rate([r["R"] for r in good], [r["q_coeff"] for r in good]),
    }
    return ConvergenceTable(rows, rates, meta={"model": model.name, "level": m,
                                               "delta_next": ws[m + 1] if m + 1 < len(ws) else ws.delta_cap})


# ---------------------------------------------------------------------------
# (iii): index sweep and spectral flow
# ---------------------------------------------------------------------------


@dataclass
class IndexSweepResult:
    reports: dict
    slot_reports: list
    kernel_rates: dict
    spectral_flow_r0: int
    consistent: bool
    meta: dict = dataclass_field(default_factory=dict)


def index_vs_r(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    ws: WeightSequence,
    r_list,
    m: int = 0,
    domain_norms: str = "l2",
    kernel_rate_tol: float = 0.9,
) -> IndexSweepResult:
    """Fredholm reports of D(r, 0) across a neck sweep, with kernel decay.

    Asserts that the index is r-independent and equals the sum of the two
    diagonal-block indices at r = 0, and that any kernel representative
    decays at rate >= delta_1 * kernel_rate_tol.  The spectral flow count
    at r = 0 is computed independently.
    """
    grid = gamma1.grid
    reports = {}
    kernel_rates = {}
    for r in r_list:
        p = GluingProfile(r)
        op = assemble_DPhi(model, gamma1, gamma2, p, None, ws, (m,))
        rep = fredholm_report(op, m, domain_norms=domain_norms)
        reports[r] = rep
        if rep.dim_ker > 0:
            split = build_splittings(op, m, domain_norms=domain_norms)
            rates = []
            for kf in split.kernel_basis:
                rates.append(min(decay_rate(kf.xi1), decay_rate(kf.xi2)))
            kernel_rates[r] = rates
    slot_reports = []
    for gam in (gamma1, gamma2):
        lop = linearize_cr(model, gam, ws, (m,), edge="ghost")
        slot_reports.append(fredholm_report(lop, m, domain_norms=domain_norms))
    sf = spectral_flow_index(model, gamma1, ws[0]) + spectral_flow_index(model, gamma2, ws[0])
    idx0 = reports[min(reports, key=lambda r: r)].index if reports else 0
    consistent = all(rep.index == idx0 and rep.trustworthy for rep in reports.values())
    consistent = consistent and (slot_reports[0].index + slot_reports[1].index == idx0)
    consistent = consistent and (sf == idx0)
    delta1 = ws[1] if len(ws) > 1 else ws[0]
    for rates in kernel_rates.values():
        consistent = consistent and all(rate >= kernel_rate_tol * delta1 for rate in rates)
    return IndexSweepResult(reports, slot_reports, kernel_rates, sf, consistent,
                            meta={"model": model.name, "level": m, "delta0": ws[0]})


class DegenerateAsymptoticsError(RuntimeError):
    pass


def spectral_flow_of_family(mats: list, degeneracy_tol: float = 1e-8) -> int:
    """Signed zero crossings of the (real parts of the) eigenvalues along a
    matrix family; upward crossings count +1, downward -1.  Degenerate
    endpoints (eigenvalue within tol of 0) are rejected."""
    eigs = []
    for A in mats:
        ev = np.linalg.eigvals(np.asarray(A))
        eigs.append(np.sort(ev.real))
    eigs = np.array(eigs)
    for label, row in (("start", eigs[0]), ("end", eigs[-1])):
        if np.min(np.abs(row)) < degeneracy_tol:
            raise DegenerateAsymptoticsError(
                f"eigenvalue within {degeneracy_tol} of 0 at the {label} of the path"
            )
    flow = 0
    for j in range(len(eigs) - 1):
        before = eigs[j]
        after = eigs[j + 1]
        flow += int(np.sum((before < 0) & (after >= 0)))
        flow -= int(np.sum((before >= 0) & (after < 0)))
    return flow


def _asymptotic_family(model: HamiltonianModel, gamma: Field, delta: float) -> list:
    """Loop-operator family s -> J(gamma(s,.)) d_t + D(JX)|_gamma(s,.) - delta*eta'(s)."""
    grid = gamma.grid
    n = gamma.target_dim
    Dt = loop_derivative_matrix(grid.n_t)
    etap = weight_eta_prime(grid.s)
    mats = []
    two_n = 2 * n
    dim = grid.n_t * two_n
    for i_s in range(grid.n_s):
        z = gamma.values[i_s]  # (n_t, n)
        J = model.J_real(z)
        DX = model.DX_real(z)
        DJX = np.einsum("tij,tjk->tik", J, DX) + model.DJ_bilinear_real(z, model.X(z))
        A = np.zeros((dim, dim))
        for t1 in range(grid.n_t):
            rows = slice(t1 * two_n, (t1 + 1) * two_n)
            for t2 in range(grid.n_t):
                cols = slice(t2 * two_n, (t2 + 1) * two_n)
                A[rows, cols] += Dt[t1, t2] * J[t1]
            A[rows, rows.start : rows.stop] += DJX[t1]
        A -= delta * etap[i_s] * np.eye(dim)
        mats.append(A)
    return mats


def spectral_flow_index(model: HamiltonianModel, gamma: Field, delta: float) -> int:
    """Signed eigenvalue-crossing count of the weighted asymptotic family
    along the s axis; for the operators built here this equals the Fredholm
    index of the weighted linearization at gamma."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return spectral_flow_of_family(_asymptotic_family(model, gamma, delta))


# ---------------------------------------------------------------------------
# the contraction germ normal form
# ---------------------------------------------------------------------------


class GermError(RuntimeError):
    pass


class GermNormalForm:
    """Normal-form data of the filled section at a working point (r0, 0).

    Parameters v = (dr, kernel coordinates) with k = 1 + dim ker; the bundle
    map uses the r-dependent inverse of PiC_perp D(r, 0) restricted to the
    kernel complement W.  A(v, w) collects the C coordinates of the
    transformed map; B(v, w) its W part, a contraction on small balls.
    """

    def __init__(
        self,
        model: HamiltonianModel,
        gamma1: Field,
        gamma2: Field,
        ws: WeightSequence,
        p0: GluingProfile,
        report_level: int = 0,
        levels=(1, 2),
        n_probes: int = 4,
        seed: int = 23,
        r_range_rel: float = 0.02,
        domain_norms: str = "l2",
        report_mode: str = "estimate",
        edge: str = "onesided",
    ):
        if p0.r <= 0:
            raise GermError("the working point needs r0 > 0")
        self.model = model
        self.gamma1 = gamma1
        self.gamma2 = gamma2
        self.ws = ws
        self.grid = gamma1.grid
        self.r0 = p0.r
        self.R0 = p0.snapped_R(self.grid)
        self.report_level = report_level
        # The solve matrix is assembled with the same one-sided closures the
        # nonlinear evaluation uses, so B is the exact Newton-type map of the
        # discrete filled section; the fixed point itself is D-independent.
        self.edge = edge
        self._lu_cache = {}
        self._op_cache = {}

        op0 = self._op(self.r0)
        if report_mode == "estimate":
            from .linop import fredholm_report_estimate

            self.report = fredholm_report_estimate(op0, report_level)
        else:
            self.report = fredholm_report(op0, report_level, domain_norms=domain_norms)
        if not self.report.trustworthy:
            raise GermError(f"base-point report untrustworthy: {self.report.note}")
        if self.report.dim_ker or self.report.dim_coker:
            split = build_splittings(op0, report_level, domain_norms=domain_norms)
            self.kernel_basis = split.kernel_basis
            self.C_basis = split.C_basis
            self.Pi_C = split.Pi_C
            self.X_projector = split.X_projector
        else:
            self.kernel_basis = []
            self.C_basis = []
            self.Pi_C = None
            self.X_projector = None
        self.kernel_dim = self.report.dim_ker
        self.cokernel_dim = self.report.dim_coker
        self.param_dim = 1 + self.kernel_dim
        self.phi_base = filled_section_conjugated(
            model, gamma1, gamma2, GluingProfile(self.r0),
            PairField.zeros(self.grid, gamma1.target_dim),
        )
        # Stability constants: C_m = sup ||w||_{m+1,delta_m} / ||PiCp D(r,0) w||_{m,delta_m}
        rng = np.random.default_rng(seed)
        self.C_m = {}
        r_lo = self.r0 * (1.0 - r_range_rel)
        r_hi = min(self.r0 * (1.0 + r_range_rel), 0.999 / np.log(42.0))
        self.r_window = (r_lo, r_hi)
        probes = [random_decaying_pair(self.grid, rng, gamma1.target_dim, decay=1.0)
                  for _ in range(n_probes)]
        for m in levels:
            best = 0.0
            for rr in (r_lo, self.r0, r_hi):
                op = self._op(rr)
                for q in probes:
                    qn = pair_weighted_norm(q, m + 1, ws[m])
                    img = op.apply(q, self._level_of(op))
                    img = self._project_perp(op, img)
                    den = pair_weighted_norm(img, m, ws[m])
                    if den > 0:
                        best = max(best, qn / den)
            self.C_m[m] = best
        self.working_radius = None  # set by estimate_contraction

    # -- operator plumbing ---------------------------------------------------

    def _level_of(self, op) -> int:
        return op.levels[0]

    def _op(self, r: float):
        p = GluingProfile(r)
        R = p.snapped_R(self.grid)
        if R not in self._op_cache:
            self._op_cache[R] = assemble_DPhi(
                self.model, self.gamma1, self.gamma2, p, None, self.ws,
                (self.report_level,), edge=self.edge,
            )
        return self._op_cache[R]

    def _solve(self, r: float, rhs_pair: PairField) -> PairField:
        op = self._op(r)
        R = GluingProfile(r).snapped_R(self.grid)
        A = op.mats[self.report_level]
        rhs = op.flatten_pair(rhs_pair)
        if self.cokernel_dim == 0 and self.kernel_dim == 0:
            if R not in self._lu_cache:
                self._lu_cache[R] = spla.splu(A.tocsc())
            sol = self._lu_cache[R].solve(rhs)
        else:
            PiCp = np.eye(A.shape[0]) - self.Pi_C
            sol, *_ = np.linalg.lstsq(PiCp @ A.toarray(), PiCp @ rhs, rcond=1e-12)
            if self.X_projector is not None:
                sol = self.X_projector @ sol
        return op.unflatten_pair(sol)

    def _project_perp(self, op, pair: PairField) -> PairField:
        if self.Pi_C is None:
            return pair
        vec = op.flatten_pair(pair)
        return op.unflatten_pair(vec - self.Pi_C @ vec)

    def _kernel_combo(self, coords) -> PairField:
        out = PairField.zeros(self.grid, self.gamma1.target_dim)
        for c, kf in zip(coords, self.kernel_basis):
            out = out + float(c) * kf
        return out

    def _split_v(self, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if v.size != self.param_dim:
            raise GermError(f"parameter vector must have length {self.param_dim}")
        dr = float(v[0])
        r = self.r0 + dr
        lo, hi = self.r_window
        if not (lo <= r <= hi):
            raise GermError(f"r = r0 + dr = {r} outside the working window {self.r_window}")
        return r, v[1:]

    # -- the normal form -----------------------------------------------------

    def phi_at(self, v, w: PairField) -> PairField:
        r, kc = self._split_v(v)
        xi = self._kernel_combo(kc) + w if len(kc) else w
        return filled_section_conjugated(self.model, self.gamma1, self.gamma2,
                                         GluingProfile(r), xi)

    def A(self, v, w: PairField) -> np.ndarray:
        """C coordinates of the transformed map (empty when coker = 0)."""
        if self.cokernel_dim == 0:
            return np.zeros(0)
        r, _ = self._split_v(v)
        op = self._op(r)
        val = self.phi_at(v, w) - self.phi_base
        vec = op.flatten_pair(val)
        cvec = self.Pi_C @ vec
        coords = []
        for cb in self.C_basis:
            cvecb = op.flatten_pair(cb)
            coords.append(np.vdot(cvecb, cvec) / np.vdot(cvecb, cvecb))
        return np.asarray(coords)

    def B(self, v, w: PairField) -> PairField:
        r, _ = self._split_v(v)
        op = self._op(r)
        val = self.phi_at(v, w) - self.phi_base
        val = self._project_perp(op, val)
        u = self._solve(r, val)
        return w - u

    def glued_field(self, v, w: PairField) -> Field:
        r, kc = self._split_v(v)
        xi = self._kernel_combo(kc) + w if len(kc) else w
        total = PairField(self.gamma1 + xi.xi1, self.gamma2 + xi.xi2)
        return preglue(GluingProfile(r), total)


def build_germ_normal_form(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    ws: WeightSequence,
    p0: GluingProfile,
    levels=(1, 2),
    **kw,
) -> GermNormalForm:
    return GermNormalForm(model, gamma1, gamma2, ws, p0, levels=levels, **kw)


# ---------------------------------------------------------------------------
# contraction estimation and Picard gluing
# ---------------------------------------------------------------------------


@dataclass
class ContractionTable:
    rows: list
    meta: dict = dataclass_field(default_factory=dict)

    def theta(self, m: int, radius: float) -> float:
        for row in self.rows:
            if row["m"] == m and row["radius"] == radius:
                return row["theta"]
        raise KeyError((m, radius))

    def smallest_radius_theta(self, m: int) -> float:
        rows = [row for row in self.rows if row["m"] == m]
        return min(rows, key=lambda row: row["radius"])["theta"]

    def nonincreasing(self, m: int, slack: float = 1.05) -> bool:
        rows = sorted((row for row in self.rows if row["m"] == m),
                      key=lambda row: row["radius"])
        thetas = [row["theta"] for row in rows]
        floor = 1e-12
        return all(a <= slack * b + floor for a, b in zip(thetas, thetas[1:]))


def estimate_contraction(
    germ: GermNormalForm,
    m: int,
    radii,
    n_samples: int = 8,
    seed: int = 5,
) -> ContractionTable:
    """theta(eps) = sup ||B(v,w1) - B(v,w2)||_m / ||w1 - w2||_m over samples
    with |v|, ||w_i||_{W_m} <= eps.  Samples are fixed-seed random decaying
    pairs filtered to the kernel complement; radii shrink geometrically."""
    if m < 1:
        raise ValueError("the contraction suite excludes m = 0")
    rng = np.random.default_rng(seed)
    grid = germ.grid
    delta_m = germ.ws[m]
    dim = germ.gamma1.target_dim
    lo, hi = germ.r_window
    dr_cap = min(germ.r0 - lo, hi - germ.r0)
    # One set of directions, rescaled per radius: theta inherits the
    # monotone-in-radius structure instead of resampling noise.
    directions = []
    for _ in range(n_samples):
        w1 = _scale_pair(random_decaying_pair(grid, rng, dim, decay=1.0), m + 1,
                         delta_m, rng.uniform(0.3, 1.0))
        w2 = _scale_pair(random_decaying_pair(grid, rng, dim, decay=1.0), m + 1,
                         delta_m, rng.uniform(0.3, 1.0))
        if germ.X_projector is not None:
            op = germ._op(germ.r0)
            w1 = op.unflatten_pair(germ.X_projector @ op.flatten_pair(w1))
            w2 = op.unflatten_pair(germ.X_projector @ op.flatten_pair(w2))
        vr = rng.uniform(-1.0, 1.0)
        vk = rng.uniform(-1.0, 1.0, germ.param_dim - 1) if germ.param_dim > 1 else None
        directions.append((vr, vk, w1, w2))
    rows = []
    for eps in radii:
        theta = 0.0
        n_ok = 0
        for vr, vk, w1u, w2u in directions:
            w1 = eps * w1u
            w2 = eps * w2u
            v = np.zeros(germ.param_dim)
            v[0] = vr * min(eps, dr_cap)
            if vk is not None:
                v[1:] = eps * vk
            den = pair_weighted_norm(w1 - w2, m + 1, delta_m)
            if den <= 0:
                continue
            num = pair_weighted_norm(germ.B(v, w1) - germ.B(v, w2), m + 1, delta_m)
            theta = max(theta, num / den)
            n_ok += 1
        if n_ok == 0:
            raise GermError(f"no valid sample pairs at radius {eps}")
        rows.append({"m": m, "radius": eps, "theta": theta, "n_pairs": n_ok})
    table = ContractionTable(rows, meta={"model": germ.model.name, "level": m})
    contracting = [row["radius"] for row in rows if row["theta"] < 1.0]
    germ.working_radius = max(contracting) if contracting else None
    germ.theta_at_working = max(row["theta"] for row in rows if row["theta"] < 1.0) \
        if contracting else np.inf
    return table


@dataclass
class PicardResult:
    glued: Field | None
    w: PairField | None
    residual: float
    increments: list
    converged: bool
    aborted: bool
    reason: str = ""

    @property
    def ratios(self) -> list:
        out = []
        for a, b in zip(self.increments, self.increments[1:]):
            if a > 0:
                out.append(b / a)
        return out


def picard_glue(
    germ: GermNormalForm,
    v,
    tol: float = 1e-12,
    max_iter: int = 60,
    m: int = 1,
    radius_limit: float | None = None,
    w0: PairField | None = None,
) -> PicardResult:
    """Fixed-point iteration w_{n+1} = B(v, w_n), by default from w_0 = 0.

    Returns the glued field preglue(gamma + xi(v, w)) and the weighted
    level-0 interior residual of the Floer operator on it.  A nonzero ``w0``
    probes the contraction trace toward the same fixed point.  Aborts
    (without raising) when |v| exceeds the contraction radius or when an
    increment ratio >= 1 reveals non-contraction."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    limit = radius_limit if radius_limit is not None else germ.working_radius
    if limit is not None and np.linalg.norm(v) > limit:
        return PicardResult(None, None, np.nan, [], False, True,
                            f"|v| = {np.linalg.norm(v):.3e} beyond radius {limit:.3e}")
    grid = germ.grid
    delta_m = germ.ws[m]
    w = PairField.zeros(grid, germ.gamma1.target_dim) if w0 is None else w0
    increments = []
    converged = False
    for it in range(max_iter):
        w_next = germ.B(v, w)
        inc = pair_weighted_norm(w_next - w, m + 1, delta_m)
        increments.append(inc)
        if len(increments) >= 2 and increments[-2] > 0:
            if inc / increments[-2] >= 1.0 and inc > tol:
                return PicardResult(None, None, np.nan, increments, False, True,
                                    f"non-contraction: ratio {inc/increments[-2]:.3f} at iter {it}")
        w = w_next
        if inc < tol:
            converged = True
            break
    glued = germ.glued_field(v, w)
    mask = np.ones((grid.n_s, grid.n_t))
    mask[0] = mask[-1] = 0.0
    res = weighted_norm(floer_residual(germ.model, glued), 0, germ.ws[0], mask=mask)
    return PicardResult(glued, w, float(res), increments, converged, False)
