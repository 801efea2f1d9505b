"""Per-column convex subproblems of the sequential decorrelation loop.

Every builder returns a :class:`~incoherent_frames.conic.ConeProgram` whose
variables are laid out as

* real variants:    ``[f (m), t, a (m, l1 only)]``
* complex variants: ``[Re f (m), Im f (m), t, a (m, l1 only)]``

``t`` is the epigraph variable of the largest correlation and ``a`` bounds
the entry magnitudes for the l1 penalty.
"""

from __future__ import annotations

import numpy as np

from .conic import ConeBlock, ConeProgram

REAL_KINDS = ("real", "nonneg_real", "sparse_real")
COMPLEX_KINDS = ("complex", "unital", "nonneg_complex", "sparse_complex")
KINDS = REAL_KINDS + COMPLEX_KINDS


def is_complex_kind(kind: str) -> bool:
    if kind not in KINDS:
        raise ValueError(f"unknown variant kind {kind!r}")
    return kind in COMPLEX_KINDS


def build_sidco_subproblem(reference: np.ndarray, column_index: int, variant, trust_radius: float,
                           zero_rows=None, l1_weight: float | None = None) -> ConeProgram:
    """Canonical cone program for updating one column of ``reference``.

    Parameters
    ----------
    reference : ndarray, shape (m, n)
        Current frame with unit-norm columns.
    column_index : int
        Column being updated.
    variant : VariantSpec
        Constraint family; see :class:`incoherent_frames.sidco.VariantSpec`.
    trust_radius : float
        Squared radius ``T`` of the trust region around the current column.
        The unital variant applies ``variant.radius_scale(m) * T`` to each
        entry separately.
    zero_rows : array of int, optional
        Entries of the new column forced to zero (fixed support, polishing).
    l1_weight : float, optional
        Override for the (already scaled) l1 weight; ``0`` switches the
        penalty off.  Defaults to ``variant.l1_weight(m)``.
    """
    m, n = reference.shape
    if n < 2:
        raise ValueError("empty competitor set: need at least two columns")
    if trust_radius <= 0:
        raise ValueError("trust radius must be positive")
    kind = variant.kind
    cplx = is_complex_kind(kind)
    if l1_weight is None:
        l1_weight = 0.0 if variant.fixed_support else variant.l1_weight(m)
    lam = l1_weight
    use_l1 = kind.startswith("sparse") and lam > 0

    h = reference[:, column_index]
    others = np.delete(reference, column_index, axis=1)
    nf = 2 * m if cplx else m
    t_idx = nf
    nv = nf + 1 + (m if use_l1 else 0)

    c = np.zeros(nv)
    c[t_idx] = 1.0
    if use_l1:
        c[nf + 1:] = lam

    blocks = []
    k = n - 1
    if cplx:
        ar, ai = others.real.T, others.imag.T  # (k, m)
        A = np.zeros((k, 3, nv))
        A[:, 0, t_idx] = 1.0
        # h_j^H f = (ar - i ai)^T (u + i v)
        A[:, 1, :m] = ar
        A[:, 1, m:2 * m] = ai
        A[:, 2, :m] = -ai
        A[:, 2, m:2 * m] = ar
        blocks.append(ConeBlock.soc(A, np.zeros((k, 3))))
    else:
        a = others.real.T
        A = np.zeros((2 * k, nv))
        A[:, t_idx] = 1.0
        A[:k, :m] = -a
        A[k:, :m] = a
        blocks.append(ConeBlock.nonneg(A, np.zeros(2 * k)))

    if kind == "unital":
        radius = np.sqrt(variant.radius_scale(m) * trust_radius)
        # |f_k - h_k| <= radius
        A = np.zeros((m, 3, nv))
        A[np.arange(m), 1, np.arange(m)] = 1.0
        A[np.arange(m), 2, m + np.arange(m)] = 1.0
        b = np.zeros((m, 3))
        b[:, 0] = radius
        b[:, 1] = -h.real
        b[:, 2] = -h.imag
        blocks.append(ConeBlock.soc(A, b))
        # |f_k| <= m^{-1/2} + gamma
        A2 = A.copy()
        b2 = np.zeros((m, 3))
        b2[:, 0] = m ** -0.5 + variant.gamma
        blocks.append(ConeBlock.soc(A2, b2))
    else:
        A = np.zeros((nf + 1, nv))
        A[1:, :nf] = np.eye(nf)
        b = np.empty(nf + 1)
        b[0] = np.sqrt(trust_radius)
        if cplx:
            b[1:m + 1] = -h.real
            b[m + 1:] = -h.imag
        else:
            b[1:] = -h.real
        blocks.append(ConeBlock.soc(A, b))

    if kind.startswith("nonneg"):
        blocks.append(ConeBlock.nonneg(np.eye(nf, nv), np.zeros(nf)))

    if use_l1:
        aux = nf + 1 + np.arange(m)
        if cplx:
            A = np.zeros((m, 3, nv))
            A[np.arange(m), 0, aux] = 1.0
            A[np.arange(m), 1, np.arange(m)] = 1.0
            A[np.arange(m), 2, m + np.arange(m)] = 1.0
            blocks.append(ConeBlock.soc(A, np.zeros((m, 3))))
        else:
            A = np.zeros((2 * m, nv))
            r = np.arange(m)
            # a_k - f_k >= 0 and a_k + f_k >= 0
            A[r, aux] = 1.0
            A[r, r] = -1.0
            A[m + r, aux] = 1.0
            A[m + r, r] = 1.0
            blocks.append(ConeBlock.nonneg(A, np.zeros(2 * m)))

    eq = None
    rhs = None
    if zero_rows is not None and len(zero_rows):
        zr = np.asarray(zero_rows, dtype=int)
        cols = np.concatenate([zr, zr + m]) if cplx else zr
        eq = np.zeros((cols.size, nv))
        eq[np.arange(cols.size), cols] = 1.0
        rhs = np.zeros(cols.size)
    return ConeProgram.build(c, blocks, eq, rhs)


def column_from_solution(x: np.ndarray, m: int, kind: str) -> np.ndarray:
    if is_complex_kind(kind):
        return x[:m] + 1j * x[m:2 * m]
    return x[:m].copy()


def reference_point(reference: np.ndarray, column_index: int, kind: str, use_l1: bool = False) -> np.ndarray:
    """Variable vector corresponding to leaving the column unchanged."""
    m = reference.shape[0]
    h = reference[:, column_index]
    corr = np.abs(np.delete(reference, column_index, axis=1).conj().T @ h).max()
    parts = [h.real, h.imag] if is_complex_kind(kind) else [h.real]
    parts.append([corr])
    if use_l1:
        parts.append(np.abs(h))
    return np.concatenate(parts)
