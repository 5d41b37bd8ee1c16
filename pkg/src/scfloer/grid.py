"""Truncated-cylinder grids and the fields living on them.

The computational domain is the rectangle [-s_max, s_max] x S^1 standing in
for the infinite cylinder R x S^1, with S^1 = R/Z.  The s direction is
truncated and sampled uniformly (n_s nodes, n_s odd so that s = 0 is a node);
the t direction is periodic and sampled uniformly (n_t nodes, no duplicate
endpoint).  Everything beyond |s| = s_max is treated as identically zero
("zero extension"), which is the convention every operator and shift in this
package adheres to.

This module also provides the two fixed profile functions used throughout:

* ``cutoff_beta``   -- a smooth step, exactly 0 on (-inf, -1] and exactly 1 on
  [1, inf), symmetric so that beta(0) = 1/2 and beta(s) + beta(-s) = 1.
* ``weight_eta``    -- a smooth even weight with eta(s) = |s| for |s| >= 1/2
  (in particular for |s| >= 1) and 0 < eta(0) < 1/2, obtained by mollifying
  |s| with a C-infinity bump of radius 1/2.

Derivatives are spectral in t (the direction is exactly periodic) and
4th-order finite differences in s with one-sided closures at the truncation
edge.
"""

from __future__ import annotations

import functools
import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GridError",
    "CylinderGrid",
    "Field",
    "MarginAudit",
    "make_grid",
    "cutoff_beta",
    "cutoff_beta_prime",
    "weight_eta",
    "weight_eta_prime",
    "shift_field",
    "diff_s",
    "diff_t",
    "s_derivative_matrix",
    "t_derivative_factors",
    "quadrature_weights",
    "margin_audit",
    "save_field",
    "load_field",
]

#: Highest s-derivative order realized by the finite-difference scheme.
MAX_S_DERIV_ORDER = 4
#: Highest t-derivative order realized spectrally.
MAX_T_DERIV_ORDER = 8

#: File format version written by :func:`save_field`.
FIELD_FORMAT_VERSION = 1


class GridError(ValueError):
    """Invalid grid parameters or incompatible grids."""


@dataclass(frozen=True)
class CylinderGrid:
    """Uniform truncation of R x S^1.

    h_s = 2 * s_max / (n_s - 1) and h_t = 1 / n_t; the s nodes include both
    endpoints -s_max and +s_max, the t nodes are {0, h_t, ..., 1 - h_t}.
    """

    s_max: float
    n_s: int
    n_t: int

    def __post_init__(self):
        if self.s_max <= 0:
            raise GridError(f"s_max must be positive, got {self.s_max}")
        if self.n_s < 3 or self.n_s % 2 == 0:
            raise GridError(f"n_s must be odd and >= 3, got {self.n_s}")
        if self.n_t < 4:
            raise GridError(f"n_t must be >= 4, got {self.n_t}")

    @property
    def h_s(self) -> float:
        return 2.0 * self.s_max / (self.n_s - 1)

    @property
    def h_t(self) -> float:
        return 1.0 / self.n_t

    @property
    def s(self) -> np.ndarray:
        return np.linspace(-self.s_max, self.s_max, self.n_s)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_t) / self.n_t

    def snap(self, R: float) -> float:
        """Nearest grid multiple of h_s (used to make shifts exact)."""
        return round(R / self.h_s) * self.h_s

    def is_grid_multiple(self, R: float, tol: float = 1e-12) -> bool:
        return abs(R - self.snap(R)) <= tol * max(1.0, abs(R))


def make_grid(s_max: float, n_s: int, n_t: int) -> CylinderGrid:
    """Build a grid, rejecting even n_s, n_t < 4 and s_max <= 0."""
    return CylinderGrid(float(s_max), int(n_s), int(n_t))


class Field:
    """Complex-valued grid function with values indexed (i_s, i_t, component).

    Values are a complex array of shape (n_s, n_t, target_dim).  Fields are
    value-semantics containers; all operations return new fields.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: CylinderGrid, values: np.ndarray):
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim == 2:
            values = values[:, :, None]
        if values.shape[:2] != (grid.n_s, grid.n_t):
            raise GridError(
                f"value shape {values.shape} does not match grid "
                f"({grid.n_s}, {grid.n_t}, dim)"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("field values must be finite")
        self.grid = grid
        self.values = values

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, grid: CylinderGrid, dim: int = 1) -> "Field":
        return cls(grid, np.zeros((grid.n_s, grid.n_t, dim), dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: CylinderGrid, func, dim: int = 1) -> "Field":
        """Sample ``func(s, t) -> complex array broadcast over (s, t)``."""
        ss, tt = np.meshgrid(grid.s, grid.t, indexing="ij")
        vals = np.asarray(func(ss, tt), dtype=np.complex128)
        if vals.ndim == 2:
            vals = vals[:, :, None]
        if vals.shape[2] != dim:
            raise GridError(f"function produced dim {vals.shape[2]}, expected {dim}")
        return cls(grid, vals)

    @property
    def target_dim(self) -> int:
        return self.values.shape[2]

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Field"):
        if other.grid != self.grid or other.target_dim != self.target_dim:
            raise GridError("fields live on different grids or target dims")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c) -> "Field":
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


# ---------------------------------------------------------------------------
# cutoff beta
# ---------------------------------------------------------------------------


def _g(x: np.ndarray) -> np.ndarray:
    """exp(-1/x) for x > 0, else 0; the standard smooth-step ingredient."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def cutoff_beta(s) -> np.ndarray:
    """Smooth step: exactly 0 for s <= -1, exactly 1 for s >= 1, beta(0)=1/2."""
    s = np.asarray(s, dtype=float)
    gp = _g(1.0 + s)
    gm = _g(1.0 - s)
    den = gp + gm
    # den vanishes only where both plateaus meet, which cannot happen.
    out = np.where(den > 0, gp / np.where(den > 0, den, 1.0), 0.0)
    out = np.where(s >= 1.0, 1.0, out)
    out = np.where(s <= -1.0, 0.0, out)
    return out if out.ndim else float(out)


def cutoff_beta_prime(s) -> np.ndarray:
    """Analytic derivative of :func:`cutoff_beta`; exactly 0 outside (-1, 1)."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s1 = np.atleast_1d(s)
    inside = (s1 > -1.0) & (s1 < 1.0)
    out = np.zeros_like(s1)
    si = s1[inside]
    gp = _g(1.0 + si)
    gm = _g(1.0 - si)
    dgp = gp / (1.0 + si) ** 2
    dgm = gm / (1.0 - si) ** 2
    den = gp + gm
    out[inside] = (dgp * gm + gp * dgm) / den**2
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# weight eta (mollified |s|)
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=1)
def _eta_tables():
    # Mollifier phi of radius 1/2: c * exp(-1/(1-(2u)^2)) on |u| < 1/2.
    n = 1 << 16
    u = np.linspace(-0.5, 0.5, n + 1)
    inner = 1.0 - (2.0 * u) ** 2
    phi = np.zeros_like(u)
    ok = inner > 0
    phi[ok] = np.exp(-1.0 / inner[ok])
    du = u[1] - u[0]
    mass = np.trapezoid(phi, dx=du)
    phi /= mass
    # Cumulative moments Phi0(s) = int_{-1/2}^s phi, Phi1(s) = int u phi.
    phi0 = np.concatenate([[0.0], np.cumsum((phi[1:] + phi[:-1]) * 0.5 * du)])
    uphi = u * phi
    phi1 = np.concatenate([[0.0], np.cumsum((uphi[1:] + uphi[:-1]) * 0.5 * du)])
    return u, phi0, phi1


def weight_eta(s) -> np.ndarray:
    """Smooth even weight equal to |s| for |s| >= 1/2, with eta(0) in (0, 1/2).

    Realized as the convolution of |s| with a symmetric smooth bump of radius
    1/2, for which closed cumulative-moment formulas apply:
    eta(s) = s*(2*Phi0(s) - 1) - 2*Phi1(s) on |s| < 1/2.
    """
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s1 = np.atleast_1d(s)
    out = np.abs(s1).astype(float)
    inner = np.abs(s1) < 0.5
    if np.any(inner):
        u, phi0, phi1 = _eta_tables()
        si = s1[inner]
        p0 = np.interp(si, u, phi0)
        p1 = np.interp(si, u, phi1)
        out[inner] = si * (2.0 * p0 - 1.0) - 2.0 * p1
    return float(out[0]) if scalar else out


def weight_eta_prime(s) -> np.ndarray:
    """Derivative of eta: equals sign(s) for |s| >= 1/2, smooth through 0."""
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s1 = np.atleast_1d(s)
    out = np.sign(s1).astype(float)
    inner = np.abs(s1) < 0.5
    if np.any(inner):
        u, phi0, _ = _eta_tables()
        out[inner] = 2.0 * np.interp(s1[inner], u, phi0) - 1.0
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# shifts
# ---------------------------------------------------------------------------


def _cubic_weights(frac: float) -> np.ndarray:
    """Lagrange cubic weights for nodes {-1, 0, 1, 2} at offset frac."""
    x = frac
    return np.array(
        [
            -x * (x - 1.0) * (x - 2.0) / 6.0,
            (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0,
            -(x + 1.0) * x * (x - 2.0) / 2.0,
            (x + 1.0) * x * (x - 1.0) / 6.0,
        ]
    )


def shift_field(xi: Field, R: float, mode: str = "auto") -> Field:
    """Shift action (tau_R xi)(s, t) = xi(R + s, t), zero-extended.

    Values referencing points beyond the truncation are zero.  When R is a
    grid multiple the shift is an exact index shift; otherwise the samples
    are interpolated (cubic in s; nothing moves in t).  ``mode`` is one of
    ``auto`` (snap when R is within 1e-12 of a grid multiple, else
    interpolate), ``snap`` (force nearest grid multiple), ``interp``.
    """
    grid = xi.grid
    if mode not in ("auto", "snap", "interp"):
        raise ValueError(f"unknown shift mode {mode!r}")
    if mode == "snap":
        R = grid.snap(R)
    exact = grid.is_grid_multiple(R)
    out = np.zeros_like(xi.values)
    if exact or mode == "snap":
        j = round(R / grid.h_s)
        if abs(j) < grid.n_s:
            if j >= 0:
                out[: grid.n_s - j] = xi.values[j:]
            else:
                out[-j:] = xi.values[: grid.n_s + j]
        return Field(grid, out)
    # Fractional shift: cubic interpolation against zero-extended samples.
    pos = (grid.s + R + grid.s_max) / grid.h_s
    base = np.floor(pos).astype(int)
    frac = pos - base
    padded = np.zeros((grid.n_s + 6, grid.n_t, xi.target_dim), dtype=np.complex128)
    padded[3 : 3 + grid.n_s] = xi.values
    for k in range(4):
        idx = base + (k - 1) + 3
        valid = (idx >= 0) & (idx < grid.n_s + 6)
        idx = np.clip(idx, 0, grid.n_s + 5)
        w = np.array([_cubic_weights(f)[k] for f in frac])
        w = np.where(valid, w, 0.0)
        out += w[:, None, None] * padded[idx]
    return Field(grid, out)


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _d1_matrix(n_s: int, h_s: float, edge: str) -> sp.csr_matrix:
    """4th-order first-derivative matrix in s."""
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h_s)
    rows, cols, vals = [], [], []
    for i in range(n_s):
        if 2 <= i <= n_s - 3 or edge == "ghost":
            for k, ck in enumerate(c):
                j = i + k - 2
                if 0 <= j < n_s and ck != 0.0:
                    rows.append(i)
                    cols.append(j)
                    vals.append(ck)
        elif i < 2:
            # 4th-order one-sided / skewed closures.
            if i == 0:
                st = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h_s)
                off = 0
            else:
                st = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12.0 * h_s)
                off = -1
            for k, ck in enumerate(st):
                rows.append(i)
                cols.append(i + off + k)
                vals.append(ck)
        else:
            if i == n_s - 1:
                st = -np.array([-25.0, 48.0, -36.0, 16.0, -3.0])[::-1] / (12.0 * h_s)
                off = -4
            else:
                st = -np.array([-3.0, -10.0, 18.0, -6.0, 1.0])[::-1] / (12.0 * h_s)
                off = -3
            for k, ck in enumerate(st):
                rows.append(i)
                cols.append(i + off + k)
                vals.append(ck)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_s, n_s))


@functools.lru_cache(maxsize=64)
def _d2_matrix(n_s: int, h_s: float, edge: str) -> sp.csr_matrix:
    """4th-order second-derivative matrix in s."""
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h_s**2)
    rows, cols, vals = [], [], []
    fwd = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / (12.0 * h_s**2)
    skew = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / (12.0 * h_s**2)
    for i in range(n_s):
        if 2 <= i <= n_s - 3 or edge == "ghost":
            for k, ck in enumerate(c):
                j = i + k - 2
                if 0 <= j < n_s and ck != 0.0:
                    rows.append(i)
                    cols.append(j)
                    vals.append(ck)
        elif i < 2:
            st, off = (fwd, 0) if i == 0 else (skew, -1)
            for k, ck in enumerate(st):
                rows.append(i)
                cols.append(i + off + k)
                vals.append(ck)
        else:
            st, off = (fwd[::-1], -5) if i == n_s - 1 else (skew[::-1], -4)
            for k, ck in enumerate(st):
                rows.append(i)
                cols.append(i + off + k)
                vals.append(ck)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_s, n_s))


def s_derivative_matrix(grid: CylinderGrid, order: int, edge: str = "onesided") -> sp.csr_matrix:
    """Sparse matrix realizing d^order/ds^order on s-profiles.

    ``edge='onesided'`` uses one-sided closures at the truncation edge (the
    field-differentiation convention); ``edge='ghost'`` uses the interior
    stencil with zero ghost values everywhere (the zero-extension convention
    used when assembling operators whose kernels must respect decay).
    Orders above 2 are composed from the first- and second-derivative
    stencils; orders above MAX_S_DERIV_ORDER are rejected.
    """
    if order < 1 or order > MAX_S_DERIV_ORDER:
        raise GridError(f"s-derivative order {order} outside 1..{MAX_S_DERIV_ORDER}")
    if edge not in ("onesided", "ghost"):
        raise ValueError(f"unknown edge policy {edge!r}")
    if order == 1:
        return _d1_matrix(grid.n_s, grid.h_s, edge)
    if order == 2:
        return _d2_matrix(grid.n_s, grid.h_s, edge)
    return (
        _d2_matrix(grid.n_s, grid.h_s, edge) @ s_derivative_matrix(grid, order - 2, edge)
    ).tocsr()


def t_derivative_factors(n_t: int, order: int) -> np.ndarray:
    """Fourier multipliers (2*pi*i*k)^order in numpy fft layout.

    The Nyquist mode is zeroed for odd orders (standard real-consistency
    choice on even grids).
    """
    if order < 1 or order > MAX_T_DERIV_ORDER:
        raise GridError(f"t-derivative order {order} outside 1..{MAX_T_DERIV_ORDER}")
    k = np.fft.fftfreq(n_t, d=1.0 / n_t)
    fac = (2j * np.pi * k) ** order
    if n_t % 2 == 0 and order % 2 == 1:
        fac[n_t // 2] = 0.0
    return fac


def diff_s(u: Field, order: int = 1, edge: str = "onesided") -> Field:
    """Finite-difference s-derivative of a field (4th order)."""
    D = s_derivative_matrix(u.grid, order, edge)
    flat = u.values.reshape(u.grid.n_s, -1)
    return Field(u.grid, (D @ flat).reshape(u.values.shape))


def diff_t(u: Field, order: int = 1) -> Field:
    """Spectral t-derivative of a field (exact on the Fourier grid)."""
    fac = t_derivative_factors(u.grid.n_t, order)
    vhat = np.fft.fft(u.values, axis=1)
    vhat *= fac[None, :, None]
    return Field(u.grid, np.fft.ifft(vhat, axis=1))


# ---------------------------------------------------------------------------
# quadrature, margins
# ---------------------------------------------------------------------------


def quadrature_weights(grid: CylinderGrid) -> np.ndarray:
    """Tensor quadrature weights (n_s, n_t): trapezoid in s, exact in t."""
    ws = np.full(grid.n_s, grid.h_s)
    ws[0] = ws[-1] = 0.5 * grid.h_s
    return ws[:, None] * np.full((1, grid.n_t), grid.h_t)


@dataclass(frozen=True)
class MarginAudit:
    """Truncation-margin report: margin = s_max - (R + 1) must be >= 5/delta0."""

    s_max: float
    R: float
    delta0: float
    margin: float
    required: float
    ok: bool


def margin_audit(grid: CylinderGrid, R: float, delta0: float) -> MarginAudit:
    margin = grid.s_max - (R + 1.0)
    required = 5.0 / delta0 if delta0 > 0 else np.inf
    return MarginAudit(grid.s_max, R, delta0, margin, required, margin >= required)


# ---------------------------------------------------------------------------
# serialization (versioned CSV)
# ---------------------------------------------------------------------------


def save_field(field: Field, path) -> None:
    """Write a field as CSV: header comments then rows s,t,re_c,im_c per component.

    Header lines: ``# scfloer-field v<version>`` and
    ``# s_max=<..> n_s=<..> n_t=<..> target_dim=<..>``.
    """
    g = field.grid
    d = field.target_dim
    buf = io.StringIO()
    buf.write(f"# scfloer-field v{FIELD_FORMAT_VERSION}\n")
    buf.write(f"# s_max={g.s_max!r} n_s={g.n_s} n_t={g.n_t} target_dim={d}\n")
    cols = "s,t," + ",".join(f"re{c},im{c}" for c in range(d))
    buf.write(cols + "\n")
    ss = g.s
    tt = g.t
    for i in range(g.n_s):
        for j in range(g.n_t):
            row = [f"{ss[i]!r}", f"{tt[j]!r}"]
            for c in range(d):
                v = field.values[i, j, c]
                row.append(f"{v.real!r}")
                row.append(f"{v.imag!r}")
            buf.write(",".join(row) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def load_field(path) -> Field:
    with open(path) as fh:
        ver_line = fh.readline().strip()
        if not ver_line.startswith("# scfloer-field v"):
            raise GridError(f"not a field file: {ver_line!r}")
        version = int(ver_line.rsplit("v", 1)[1])
        if version != FIELD_FORMAT_VERSION:
            raise GridError(f"unsupported field format version {version}")
        meta = dict(kv.split("=") for kv in fh.readline().strip("#\n ").split())
        fh.readline()  # column names
        g = make_grid(float(meta["s_max"]), int(meta["n_s"]), int(meta["n_t"]))
        d = int(meta["target_dim"])
        data = np.loadtxt(fh, delimiter=",").reshape(g.n_s, g.n_t, 2 + 2 * d)
    vals = data[:, :, 2::2] + 1j * data[:, :, 3::2]
    return Field(g, vals)
