"""Matrix builders shared by the Floer and gluing operators.

Flattened coefficient conventions: a field value array (n_s, n_t, n) is
flattened C-order to length N = n_s*n_t*n.  Complex-linear operators are
stored as complex N x N sparse matrices.  Real-linear (but not complex
linear) operators act on the stacked real vector [Re flat; Im flat] of
length 2N.  Pointwise coefficients are per-point real 2n x 2n matrices in
the basis (Re z_0,...,Re z_{n-1}, Im z_0,...,Im z_{n-1}); such a matrix
field is complex linear exactly when its blocks satisfy A == D, B == -C,
in which case it equals multiplication by the complex matrix A + iC.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .grid import CylinderGrid, Field, s_derivative_matrix, t_derivative_factors

__all__ = [
    "field_to_real",
    "real_to_field_values",
    "complex_pair_matrix",
    "apply_pointwise",
    "is_complex_structured",
    "complex_from_blocks",
    "mult_matrix",
    "ds_matrix",
    "dt_matrix",
    "shift_matrix",
    "real_embed",
    "block_pair",
]


def field_to_real(values: np.ndarray) -> np.ndarray:
    flat = values.ravel()
    return np.concatenate([flat.real, flat.imag])


def real_to_field_values(vec: np.ndarray, shape) -> np.ndarray:
    n = vec.size // 2
    return (vec[:n] + 1j * vec[n:]).reshape(shape)


def complex_pair_matrix(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Real 2x2 matrices for the map xi -> alpha*xi + beta*conj(xi) (n = 1)."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    out = np.empty(alpha.shape + (2, 2))
    out[..., 0, 0] = alpha.real + beta.real
    out[..., 0, 1] = -alpha.imag + beta.imag
    out[..., 1, 0] = alpha.imag + beta.imag
    out[..., 1, 1] = alpha.real - beta.real
    return out


def apply_pointwise(M: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Apply per-point real 2n x 2n matrices to complex field values."""
    n = values.shape[-1]
    r = np.concatenate([values.real, values.imag], axis=-1)
    out = np.einsum("...ij,...j->...i", M, r)
    return out[..., :n] + 1j * out[..., n:]


def is_complex_structured(M: np.ndarray, tol: float = 0.0) -> bool:
    n = M.shape[-1] // 2
    A = M[..., :n, :n]
    B = M[..., :n, n:]
    C = M[..., n:, :n]
    D = M[..., n:, n:]
    if tol == 0.0:
        return bool(np.array_equal(A, D) and np.array_equal(B, -C))
    scale = max(1.0, float(np.max(np.abs(M))))
    return bool(np.max(np.abs(A - D)) <= tol * scale and np.max(np.abs(B + C)) <= tol * scale)


def complex_from_blocks(M: np.ndarray) -> np.ndarray:
    n = M.shape[-1] // 2
    return M[..., :n, :n] + 1j * M[..., n:, :n]


def mult_matrix(M: np.ndarray, grid: CylinderGrid, n: int, mode: str):
    """Sparse matrix of pointwise multiplication by a real 2n x 2n matrix field.

    M has shape (n_s, n_t, 2n, 2n).  In complex mode (requires complex
    structure) the result is N x N complex; in real mode 2N x 2N real.
    """
    pts = grid.n_s * grid.n_t
    Mf = M.reshape(pts, 2 * n, 2 * n)
    N = pts * n
    if mode == "complex":
        if not is_complex_structured(Mf, tol=0.0):
            raise ValueError("coefficient field is not complex linear")
        C = complex_from_blocks(Mf)  # (pts, n, n)
        if n == 1:
            return sp.diags(C[:, 0, 0]).tocsr()
        rows, cols, vals = [], [], []
        for c in range(n):
            for cp in range(n):
                rows.append(np.arange(pts) * n + c)
                cols.append(np.arange(pts) * n + cp)
                vals.append(C[:, c, cp])
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(N, N),
        )
    A = Mf[:, :n, :n]
    B = Mf[:, :n, n:]
    Cb = Mf[:, n:, :n]
    D = Mf[:, n:, n:]

    def blk(X):
        if n == 1:
            return sp.diags(X[:, 0, 0])
        rows, cols, vals = [], [], []
        for c in range(n):
            for cp in range(n):
                rows.append(np.arange(pts) * n + c)
                cols.append(np.arange(pts) * n + cp)
                vals.append(X[:, c, cp])
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(N, N),
        )

    return sp.bmat([[blk(A), blk(B)], [blk(Cb), blk(D)]], format="csr")


def scalar_mult_matrix(prof: np.ndarray, grid: CylinderGrid, n: int, mode: str):
    """Multiplication by a real s-profile (broadcast over t and components)."""
    vals = np.repeat(np.asarray(prof, dtype=float), grid.n_t * n)
    M = sp.diags(vals).tocsr()
    if mode == "real":
        return sp.block_diag([M, M], format="csr")
    return M.astype(complex)


def ds_matrix(grid: CylinderGrid, n: int, mode: str, order: int = 1, edge: str = "ghost"):
    D = s_derivative_matrix(grid, order, edge)
    full = sp.kron(D, sp.identity(grid.n_t * n, format="csr"), format="csr")
    if mode == "real":
        return sp.block_diag([full, full], format="csr")
    return full.astype(complex)


def dt_matrix(grid: CylinderGrid, n: int, mode: str, order: int = 1):
    fac = t_derivative_factors(grid.n_t, order)
    F = np.fft.fft(np.eye(grid.n_t), axis=0)
    Dt = np.real(np.fft.ifft(fac[:, None] * F, axis=0))
    full = sp.kron(
        sp.identity(grid.n_s, format="csr"),
        sp.kron(sp.csr_matrix(Dt), sp.identity(n, format="csr"), format="csr"),
        format="csr",
    )
    if mode == "real":
        return sp.block_diag([full, full], format="csr")
    return full.astype(complex)


def shift_matrix(grid: CylinderGrid, R: float, n: int, mode: str):
    """Matrix of the shift (tau_R u)(s) = u(R + s), zero extension.

    R must be a grid multiple (snap first); this keeps shifts exact and the
    matrix a plain offset of the identity.
    """
    j = round(R / grid.h_s)
    if abs(R - j * grid.h_s) > 1e-9 * max(1.0, abs(R)):
        raise ValueError(f"shift {R} is not a grid multiple (h_s = {grid.h_s})")
    ns = grid.n_s
    rows = []
    cols = []
    for i in range(ns):
        srcrow = i + j
        if 0 <= srcrow < ns:
            rows.append(i)
            cols.append(srcrow)
    block = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(ns, ns))
    full = sp.kron(block, sp.identity(grid.n_t * n, format="csr"), format="csr")
    if mode == "real":
        return sp.block_diag([full, full], format="csr")
    return full.astype(complex)


def real_embed(A) -> sp.csr_matrix:
    """Complex N x N matrix as real 2N x 2N on stacked [Re; Im]."""
    A = sp.csr_matrix(A)
    Ar = A.real
    Ai = A.imag
    return sp.bmat([[Ar, -Ai], [Ai, Ar]], format="csr")


def block_pair(B11, B12, B21, B22) -> sp.csr_matrix:
    return sp.bmat([[B11, B12], [B21, B22]], format="csr")
