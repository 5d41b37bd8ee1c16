"""Pregluing, splicing, the filled section, and its linearization.

For a gluing parameter r in (0, 1/ln 42) write R = e^{1/r} > 42 and let
tau_R be the shift (tau_R xi)(s,t) = xi(R+s, t).  With the increasing
cutoff beta (0 left of -1, 1 right of +1) the pregluing and anti-pregluing
of a pair are

    glue(xi1, xi2)     = (1-beta) tau_R xi1 + beta     tau_{-R} xi2,
    antiglue(xi1, xi2) = beta     tau_R xi1 - (1-beta) tau_{-R} xi2,

so the glued field carries xi1 around s = -R and xi2 around s = +R, the
seam sits at s = 0, and the shifted base fields tau_{-R} glue(g1,g2) and
tau_{+R} glue(g1,g2) converge to g1 and g2 as r -> 0.  The pointwise 2x2
coefficient matrix [[1-b, b], [b, -(1-b)]] squares to D = b^2 + (1-b)^2
times the identity, giving the explicit inverse

    xi1 = tau_{-R} [ ((1-beta) z1 + beta z2) / D ],
    xi2 = tau_{+R} [ (beta z1 - (1-beta) z2) / D ].

At r = 0 nothing is glued: the pregluing is the identity on pairs and the
anti-pregluing is zero.

The filled section extends the geometric dbar section by the reference
linearization at the constant trajectory acting on the anti-preglued part:

    Phi(r, xi) = glue_inverse( dbar(glue(gamma + xi)), L0 antiglue(xi) ),
    Phi(0, xi) = ( dbar(gamma1 + xi1), dbar(gamma2 + xi2) ).

Its partial differential in the pair direction is assembled here in the
shift-free derived form

    slot1 = [B1 CR(g-) + B2 CR(0) + B4] xi1
            + [B3 (CRmul(g-) - CRmul(0)) + B5] tau_{-2R} xi2,

(mirrored for slot 2), where the B profiles are built from beta with exact
plateaus, B1 + B2 = 1 identically, and the compactly supported profiles
B3, B4, B5 live on [R-1, R+1].  Conjugating the shifts through analytically
keeps the truncation window honest: only the genuine tau_{-+2R} transports
in the coupling terms move data across the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import assemble as asm
from .floer import HamiltonianModel, cr_coefficient_fields, floer_residual
from .grid import Field, CylinderGrid, cutoff_beta, cutoff_beta_prime, diff_s, diff_t, shift_field
from .linop import ScOperator, SpaceSpec
from .scales import WeightSequence

__all__ = [
    "GluingDomainError",
    "filled_section_conjugated",
    "GluingProfile",
    "PairField",
    "GlueCutoffs",
    "preglue",
    "antiglue",
    "glue_inverse",
    "splicing_projection",
    "splicing_membership",
    "filled_section",
    "assemble_DPhi",
    "decompose_errors",
    "ErrorBlocks",
    "glued_base_minus",
    "glued_base_plus",
    "l0_apply",
    "R_MIN",
]

R_MIN = 42.0
R_MAX_PARAM = 1.0 / np.log(R_MIN)


class GluingDomainError(ValueError):
    pass


@dataclass(frozen=True)
class GluingProfile:
    """Gluing parameter r in [0, 1/ln 42) with neck length R = e^{1/r}.

    r = 0 is the do-not-glue branch (R = infinity); every consumer treats it
    as a distinct case.
    """

    r: float

    def __post_init__(self):
        if not (0.0 <= self.r < R_MAX_PARAM):
            raise GluingDomainError(
                f"gluing parameter r = {self.r} outside [0, 1/ln 42 = {R_MAX_PARAM:.5f})"
            )

    @classmethod
    def from_R(cls, R: float) -> "GluingProfile":
        if R <= R_MIN:
            raise GluingDomainError(f"neck length R = {R} must exceed {R_MIN}")
        return cls(1.0 / np.log(R))

    @property
    def R(self) -> float:
        if self.r == 0.0:
            return np.inf
        return float(np.exp(1.0 / self.r))

    def snapped_R(self, grid: CylinderGrid) -> float:
        R = grid.snap(self.R)
        if R <= R_MIN:
            raise GluingDomainError(f"snapped neck length {R} fell below {R_MIN}")
        return R


@dataclass
class PairField:
    """Two fields on one grid (the broken-pair coordinates)."""

    xi1: Field
    xi2: Field

    def __post_init__(self):
        if self.xi1.grid != self.xi2.grid or self.xi1.target_dim != self.xi2.target_dim:
            raise ValueError("pair slots must share grid and target dimension")

    @property
    def grid(self) -> CylinderGrid:
        return self.xi1.grid

    @property
    def target_dim(self) -> int:
        return self.xi1.target_dim

    @classmethod
    def zeros(cls, grid: CylinderGrid, dim: int = 1) -> "PairField":
        return cls(Field.zeros(grid, dim), Field.zeros(grid, dim))

    def __add__(self, other: "PairField") -> "PairField":
        return PairField(self.xi1 + other.xi1, self.xi2 + other.xi2)

    def __sub__(self, other: "PairField") -> "PairField":
        return PairField(self.xi1 - other.xi1, self.xi2 - other.xi2)

    def __mul__(self, c) -> "PairField":
        return PairField(self.xi1 * c, self.xi2 * c)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(self.xi1.max_abs(), self.xi2.max_abs())


def _require_margin(grid: CylinderGrid, R: float):
    if R + 1.0 > grid.s_max:
        raise GluingDomainError(
            f"neck length R = {R} needs s_max > R + 1 = {R + 1}, "
            f"but the grid has s_max = {grid.s_max}"
        )


def _resolve_R(p: GluingProfile, grid: CylinderGrid, shift_mode: str) -> float:
    R = p.snapped_R(grid) if shift_mode == "snap" else p.R
    _require_margin(grid, R)
    return R


# ---------------------------------------------------------------------------
# the four gluing maps (field level)
# ---------------------------------------------------------------------------


def preglue(p: GluingProfile, xi: PairField, shift_mode: str = "snap") -> Field:
    """(1-beta) tau_R xi1 + beta tau_{-R} xi2; requires r > 0."""
    if p.r == 0.0:
        raise GluingDomainError("preglue needs r > 0; the r = 0 branch keeps the pair")
    grid = xi.grid
    R = _resolve_R(p, grid, shift_mode)
    b = cutoff_beta(grid.s)[:, None, None]
    a1 = shift_field(xi.xi1, R, mode=shift_mode if shift_mode == "interp" else "snap")
    a2 = shift_field(xi.xi2, -R, mode=shift_mode if shift_mode == "interp" else "snap")
    return Field(grid, (1.0 - b) * a1.values + b * a2.values)


def antiglue(p: GluingProfile, zeta: PairField, shift_mode: str = "snap") -> Field:
    """beta tau_R xi1 - (1-beta) tau_{-R} xi2; the r = 0 branch is zero."""
    grid = zeta.grid
    if p.r == 0.0:
        return Field.zeros(grid, zeta.target_dim)
    R = _resolve_R(p, grid, shift_mode)
    b = cutoff_beta(grid.s)[:, None, None]
    a1 = shift_field(zeta.xi1, R, mode=shift_mode if shift_mode == "interp" else "snap")
    a2 = shift_field(zeta.xi2, -R, mode=shift_mode if shift_mode == "interp" else "snap")
    return Field(grid, b * a1.values - (1.0 - b) * a2.values)


def glue_inverse(
    p: GluingProfile, zeta_plus: Field, zeta_minus: Field, shift_mode: str = "snap"
) -> PairField:
    """Explicit inverse of (preglue x antiglue); requires r > 0."""
    if p.r == 0.0:
        raise GluingDomainError("glue_inverse needs r > 0")
    grid = zeta_plus.grid
    R = _resolve_R(p, grid, shift_mode)
    b = cutoff_beta(grid.s)[:, None, None]
    D = b**2 + (1.0 - b) ** 2
    g1 = Field(grid, ((1.0 - b) * zeta_plus.values + b * zeta_minus.values) / D)
    g2 = Field(grid, (b * zeta_plus.values - (1.0 - b) * zeta_minus.values) / D)
    mode = shift_mode if shift_mode == "interp" else "snap"
    return PairField(shift_field(g1, -R, mode=mode), shift_field(g2, R, mode=mode))


def splicing_projection(p: GluingProfile, xi: PairField, shift_mode: str = "snap") -> PairField:
    """pi_r = (glue x antiglue)^{-1} (glue(xi), 0): projection onto ker(antiglue).

    The r = 0 branch is the identity (nothing is spliced)."""
    if p.r == 0.0:
        return PairField(xi.xi1.copy(), xi.xi2.copy())
    glued = preglue(p, xi, shift_mode)
    zero = Field.zeros(xi.grid, xi.target_dim)
    return glue_inverse(p, glued, zero, shift_mode)


def splicing_membership(p: GluingProfile, xi: PairField, shift_mode: str = "snap") -> float:
    """Residual norm of the antigluing; ~0 exactly on the splicing core."""
    return antiglue(p, xi, shift_mode).max_abs()


# ---------------------------------------------------------------------------
# shifted base fields
# ---------------------------------------------------------------------------


def glued_base_minus(g1: Field, g2: Field, R: float) -> Field:
    """Slot-1 base field: tau_{-R} glue(g1, g2) tapered beyond s = R + 1.

    The raw pull-back (1 - beta(s-R)) g1 + beta(s-R) tau_{-2R} g2 equals g1
    exactly for s <= R - 1 but parks the body of g2 at s = 2R.  The
    linearization only consumes this field through cutoffs supported in
    (-inf, R+1], so the returned field is multiplied by the complementary
    ramp 1 - beta(s - R - 2): identical on the consumption window (exact
    plateaus), zero beyond s = R + 3.  This makes the field converge to g1
    in every global C^m norm at the rate carried by the trajectory tails,
    without changing any assembled operator."""
    grid = g1.grid
    b = cutoff_beta(grid.s - R)[:, None, None]
    taper = (1.0 - cutoff_beta(grid.s - R - 2.0))[:, None, None]
    shifted = shift_field(g2, -2.0 * R, mode="snap")
    return Field(grid, taper * ((1.0 - b) * g1.values + b * shifted.values))


def glued_base_plus(g1: Field, g2: Field, R: float) -> Field:
    """Slot-2 base field: tau_{+R} glue(g1, g2) tapered below s = -R - 1.

    Mirror of :func:`glued_base_minus`: beta(s+R) g2 + (1-beta(s+R))
    tau_{+2R} g1, multiplied by beta(s + R + 2); the consumption window is
    [-R-1, inf)."""
    grid = g1.grid
    b = cutoff_beta(grid.s + R)[:, None, None]
    taper = cutoff_beta(grid.s + R + 2.0)[:, None, None]
    shifted = shift_field(g1, 2.0 * R, mode="snap")
    return Field(grid, taper * (b * g2.values + (1.0 - b) * shifted.values))


# ---------------------------------------------------------------------------
# the filled section
# ---------------------------------------------------------------------------


def l0_apply(model: HamiltonianModel, u: Field, edge: str = "onesided") -> Field:
    """Reference linearized operator at the constant trajectory c0 = 0."""
    zero = Field.zeros(u.grid, u.target_dim)
    J0, M0 = cr_coefficient_fields(model, zero, variant="displayed")
    out = diff_s(u, 1, edge=edge).values
    out = out + asm.apply_pointwise(J0, diff_t(u, 1).values)
    out = out + asm.apply_pointwise(M0, u.values)
    return Field(u.grid, out)


def filled_section(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    p: GluingProfile,
    xi: PairField,
    shift_mode: str = "snap",
    call_log: list | None = None,
) -> PairField:
    """The filled section Phi; zero set = genuinely glued trajectories.

    r > 0: glue_inverse( dbar(glue(gamma + xi)), L0 antiglue(xi) ).
    r = 0: the broken pair of residuals (dbar(gamma1+xi1), dbar(gamma2+xi2)).
    Passing a list as ``call_log`` appends one record per evaluation.
    """
    if p.r == 0.0:
        out = PairField(
            floer_residual(model, gamma1 + xi.xi1),
            floer_residual(model, gamma2 + xi.xi2),
        )
    else:
        glued = preglue(p, PairField(gamma1 + xi.xi1, gamma2 + xi.xi2), shift_mode)
        upper = floer_residual(model, glued)
        lower = l0_apply(model, antiglue(p, xi, shift_mode))
        out = glue_inverse(p, upper, lower, shift_mode)
    if call_log is not None:
        call_log.append({"r": p.r, "xi_max": xi.max_abs(), "phi_max": out.max_abs()})
    return out


def filled_section_conjugated(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    p: GluingProfile,
    xi: PairField,
) -> PairField:
    """The filled section evaluated in shift-conjugated form.

    Because the Floer operator is autonomous it commutes with shifts, so
    each slot of glue_inverse(dbar(glue(gamma+xi)), L0 antiglue(xi)) can be
    pulled back through tau_{-+R} analytically:

        slot1 = (1-b)/D dbar(g_m) + b/D L0(a_m),
        slot2 = b'/D' dbar(g_p) - (1-b')/D' L0(a_p),

    with b = beta(s-R), b' = beta(s+R), and the pulled-back fields
    g_m = (1-b)(gamma1+xi1) + b tau_{-2R}(gamma2+xi2),
    a_m = b xi1 - (1-b) tau_{-2R} xi2 (mirrored for the plus side).  On the
    infinite cylinder this is identically the composed formula; on the
    truncated grid only the genuine tau_{-+2R} transports move data, so the
    evaluation matches the derived-form linearization row by row.  Used by
    the contraction-germ machinery, where evaluation and solve matrix must
    be the same discrete object."""
    if p.r == 0.0:
        return PairField(
            floer_residual(model, gamma1 + xi.xi1),
            floer_residual(model, gamma2 + xi.xi2),
        )
    grid = gamma1.grid
    R = p.snapped_R(grid)
    _require_margin(grid, R)
    bm = cutoff_beta(grid.s - R)[:, None, None]
    Dm = bm**2 + (1.0 - bm) ** 2
    g1x = gamma1 + xi.xi1
    g2x = gamma2 + xi.xi2
    g_m = Field(grid, (1.0 - bm) * g1x.values + bm * shift_field(g2x, -2.0 * R, mode="snap").values)
    a_m = Field(grid, bm * xi.xi1.values - (1.0 - bm) * shift_field(xi.xi2, -2.0 * R, mode="snap").values)
    slot1 = Field(grid, ((1.0 - bm) / Dm) * floer_residual(model, g_m).values
                  + (bm / Dm) * l0_apply(model, a_m).values)
    bp = cutoff_beta(grid.s + R)[:, None, None]
    Dp = bp**2 + (1.0 - bp) ** 2
    g_p = Field(grid, bp * g2x.values + (1.0 - bp) * shift_field(g1x, 2.0 * R, mode="snap").values)
    a_p = Field(grid, bp * shift_field(xi.xi1, 2.0 * R, mode="snap").values - (1.0 - bp) * xi.xi2.values)
    slot2 = Field(grid, (bp / Dp) * floer_residual(model, g_p).values
                  - ((1.0 - bp) / Dp) * l0_apply(model, a_p).values)
    return PairField(slot1, slot2)


# ---------------------------------------------------------------------------
# cutoff coefficient profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GlueCutoffs:
    """s-profiles entering the derived linearization at neck length R.

    Supports (exact, from the beta plateaus):
      B1  (-inf, R+1],   B2  [R-1, inf),    B3, B4, B5  [R-1, R+1]
    and mirrored for the primed family around s = -R.
    B1 + B2 = 1 and B1p + B2p = 1 identically.
    """

    R: float
    B1: np.ndarray
    B2: np.ndarray
    B3: np.ndarray
    B4: np.ndarray
    B5: np.ndarray
    B1p: np.ndarray
    B2p: np.ndarray
    B3p: np.ndarray
    B4p: np.ndarray
    B5p: np.ndarray


def glue_cutoffs(grid: CylinderGrid, R: float) -> GlueCutoffs:
    s = grid.s
    bm = cutoff_beta(s - R)
    bpm = cutoff_beta_prime(s - R)
    Dm = bm**2 + (1.0 - bm) ** 2
    bp = cutoff_beta(s + R)
    bpp = cutoff_beta_prime(s + R)
    Dp = bp**2 + (1.0 - bp) ** 2
    return GlueCutoffs(
        R=R,
        B1=(1.0 - bm) ** 2 / Dm,
        B2=bm**2 / Dm,
        B3=bm * (1.0 - bm) / Dm,
        B4=(2.0 * bm - 1.0) * bpm / Dm,
        B5=bpm / Dm,
        B1p=bp**2 / Dp,
        B2p=(1.0 - bp) ** 2 / Dp,
        B3p=bp * (1.0 - bp) / Dp,
        B4p=(2.0 * bp - 1.0) * bpp / Dp,
        B5p=bpp / Dp,
    )


# ---------------------------------------------------------------------------
# the linearization of the filled section
# ---------------------------------------------------------------------------


def _cr_matrices(model, base: Field, variant: str, edge: str, mode: str):
    """(full CR matrix, multiplication-part matrix) at a base field."""
    grid = base.grid
    n = base.target_dim
    J, M = cr_coefficient_fields(model, base, variant)
    DT = asm.dt_matrix(grid, n, mode, 1)
    MJ = asm.mult_matrix(J, grid, n, mode)
    MM = asm.mult_matrix(M, grid, n, mode)
    parts = (MJ @ DT + MM).tocsr()
    DS = asm.ds_matrix(grid, n, mode, 1, edge)
    return (DS + parts).tocsr(), parts


def _resolve_mode(model, fields, mode: str) -> str:
    if mode != "auto":
        return mode
    for f in fields:
        J, M = cr_coefficient_fields(model, f, "full")
        if not (asm.is_complex_structured(J) and asm.is_complex_structured(M)):
            return "real"
    return "complex"


def _pair_specs(ws: WeightSequence | None, levels):
    deltas = {m: (ws[m] if ws is not None else 0.0) for m in levels}
    domain = {m: SpaceSpec("cyl", 1 + m, deltas[m]) for m in levels}
    target = {m: SpaceSpec("cyl", m, deltas[m]) for m in levels}
    return domain, target


def assemble_DPhi(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    p: GluingProfile,
    e: PairField | None = None,
    ws: WeightSequence | None = None,
    levels=(0,),
    variant: str = "full",
    edge: str = "ghost",
    mode: str = "auto",
) -> ScOperator:
    """Pair-block matrix of the partial differential of the filled section.

    Assembled by composing the constituent matrices of the derived form
    (cutoff multiplications, frozen-coefficient CR blocks, the tau_{-+2R}
    transports); the r = 0 branch is the uncoupled diagonal of the two
    linearizations at gamma_i + e_i.
    """
    grid = gamma1.grid
    n = gamma1.target_dim
    if e is None:
        e = PairField.zeros(grid, n)
    g1e = gamma1 + e.xi1
    g2e = gamma2 + e.xi2
    if p.r == 0.0:
        from .floer import linearize_cr

        op1 = linearize_cr(model, g1e, ws, levels, variant, edge, mode)
        op2 = linearize_cr(model, g2e, ws, levels, variant, edge, mode)
        use_mode = op1.mode if op1.mode == op2.mode else "real"
        if (op1.mode, op2.mode) != (use_mode, use_mode):
            op1 = linearize_cr(model, g1e, ws, levels, variant, edge, use_mode)
            op2 = linearize_cr(model, g2e, ws, levels, variant, edge, use_mode)
        A = sp.block_diag([op1.mats[levels[0]], op2.mats[levels[0]]], format="csr")
        domain, target = _pair_specs(ws, levels)
        return ScOperator({m: A for m in levels}, domain, target, grid=grid,
                          mode=use_mode, pair=True, order=1,
                          meta={"r": 0.0, "R": np.inf, "variant": variant, "edge": edge})

    R = p.snapped_R(grid)
    _require_margin(grid, R)
    gm = glued_base_minus(g1e, g2e, R)
    gp = glued_base_plus(g1e, g2e, R)
    zero = Field.zeros(grid, n)
    use_mode = _resolve_mode(model, (gm, gp, zero), mode)
    cut = glue_cutoffs(grid, R)

    CRm, CRm_parts = _cr_matrices(model, gm, variant, edge, use_mode)
    CRp, CRp_parts = _cr_matrices(model, gp, variant, edge, use_mode)
    CR0, CR0_parts = _cr_matrices(model, zero, variant, edge, use_mode)

    def prof(v):
        return asm.scalar_mult_matrix(v, grid, n, use_mode)

    Sm2 = asm.shift_matrix(grid, -2.0 * R, n, use_mode)
    Sp2 = asm.shift_matrix(grid, 2.0 * R, n, use_mode)

    slot11 = (prof(cut.B1) @ CRm + prof(cut.B2) @ CR0 + prof(cut.B4)).tocsr()
    slot12 = ((prof(cut.B3) @ (CRm_parts - CR0_parts) + prof(cut.B5)) @ Sm2).tocsr()
    slot22 = (prof(cut.B1p) @ CRp + prof(cut.B2p) @ CR0 + prof(cut.B4p)).tocsr()
    slot21 = ((prof(cut.B3p) @ (CRp_parts - CR0_parts) - prof(cut.B5p)) @ Sp2).tocsr()

    A = asm.block_pair(slot11, slot12, slot21, slot22)
    domain, target = _pair_specs(ws, levels)
    return ScOperator({m: A for m in levels}, domain, target, grid=grid,
                      mode=use_mode, pair=True, order=1,
                      meta={"r": p.r, "R": R, "variant": variant, "edge": edge})


@dataclass
class ErrorBlocks:
    """The coupling decomposition at e = 0: E1 = Q1 xi1 - S1 xi2, mirrored."""

    Q1: sp.csr_matrix
    Q2: sp.csr_matrix
    S1: sp.csr_matrix
    S2: sp.csr_matrix
    cutoffs: GlueCutoffs
    diag_minus: sp.csr_matrix
    diag_plus: sp.csr_matrix
    mode: str
    q1_coeff_parts: sp.csr_matrix
    q2_coeff_parts: sp.csr_matrix


def decompose_errors(
    model: HamiltonianModel,
    gamma1: Field,
    gamma2: Field,
    p: GluingProfile,
    ws: WeightSequence | None = None,
    variant: str = "full",
    edge: str = "ghost",
    mode: str = "auto",
) -> ErrorBlocks:
    """Split the e = 0 linearization couplings into first-order blocks on the
    own slot (Q) and shift blocks on the other slot (S)."""
    if p.r == 0.0:
        raise GluingDomainError("the error decomposition lives on the r > 0 branch")
    grid = gamma1.grid
    n = gamma1.target_dim
    R = p.snapped_R(grid)
    _require_margin(grid, R)
    gm = glued_base_minus(gamma1, gamma2, R)
    gp = glued_base_plus(gamma1, gamma2, R)
    zero = Field.zeros(grid, n)
    use_mode = _resolve_mode(model, (gm, gp, zero), mode)
    cut = glue_cutoffs(grid, R)
    CRm, CRm_parts = _cr_matrices(model, gm, variant, edge, use_mode)
    CRp, CRp_parts = _cr_matrices(model, gp, variant, edge, use_mode)
    _, CR0_parts = _cr_matrices(model, zero, variant, edge, use_mode)

    def prof(v):
        return asm.scalar_mult_matrix(v, grid, n, use_mode)

    Sm2 = asm.shift_matrix(grid, -2.0 * R, n, use_mode)
    Sp2 = asm.shift_matrix(grid, 2.0 * R, n, use_mode)

    q1_coeff = (prof(cut.B2) @ (CR0_parts - CRm_parts)).tocsr()
    q2_coeff = (prof(cut.B2p) @ (CR0_parts - CRp_parts)).tocsr()
    Q1 = (q1_coeff + prof(cut.B4)).tocsr()
    Q2 = (q2_coeff + prof(cut.B4p)).tocsr()
    S1 = (-(prof(cut.B3) @ (CRm_parts - CR0_parts) + prof(cut.B5)) @ Sm2).tocsr()
    S2 = ((-prof(cut.B3p) @ (CRp_parts - CR0_parts) + prof(cut.B5p)) @ Sp2).tocsr()
    return ErrorBlocks(
        Q1=Q1, Q2=Q2, S1=S1, S2=S2, cutoffs=cut,
        diag_minus=CRm, diag_plus=CRp, mode=use_mode,
        q1_coeff_parts=q1_coeff, q2_coeff_parts=q2_coeff,
    )
