"""Small dense cone-program solver over nonnegative orthants and second-order cones.

Programs are written as::

    minimize    c^T x + constant
    subject to  E x = d
                A_k x + b_k  in  K_k      for every cone block k

where each ``K_k`` is either a nonnegative orthant or a stack of second-order
cones ``{(r, v) : ||v|| <= r}`` of equal dimension.  The solver is a
primal-dual path-following method on the homogeneous self-dual embedding with
Nesterov-Todd scaling and Mehrotra predictor-corrector steps.  Everything is
dense; the intended sizes are tens to a few hundred variables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _ipm

NONNEG = "nonneg"
SOC = "soc"

OPTIMAL = "optimal"
MAX_ITERS = "max_iters"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"


class ConeProgramError(ValueError):
    pass


@dataclass(frozen=True)
class ConeBlock:
    """``A x + b`` constrained to a cone.

    For ``kind == "soc"`` the block may hold a stack of ``count`` cones of the
    same dimension: ``A`` has shape ``(count, dim, num_vars)`` and ``b`` has
    shape ``(count, dim)``.  Coordinate 0 of every cone is the radius.  For
    ``kind == "nonneg"`` ``A`` is ``(rows, num_vars)`` and ``b`` is ``(rows,)``.
    """

    kind: str
    A: np.ndarray
    b: np.ndarray

    @staticmethod
    def nonneg(A, b) -> "ConeBlock":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        return ConeBlock(NONNEG, A, b)

    @staticmethod
    def soc(A, b) -> "ConeBlock":
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim == 2:
            A, b = A[None], b.reshape(1, -1)
        return ConeBlock(SOC, A, b)

    @property
    def dim(self) -> int:
        return self.A.shape[-2] if self.kind == SOC else self.A.shape[0]

    @property
    def count(self) -> int:
        return self.A.shape[0] if self.kind == SOC else 1

    @property
    def rows(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class ConeProgram:
    num_vars: int
    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    blocks: tuple[ConeBlock, ...]
    constant: float = 0.0

    def __post_init__(self):
        n = self.num_vars
        if self.objective.shape != (n,):
            raise ConeProgramError("objective has wrong length")
        if self.eq_matrix.shape != (self.eq_rhs.size, n):
            raise ConeProgramError("equality constraints do not match num_vars")
        for blk in self.blocks:
            if blk.A.shape[-1] != n:
                raise ConeProgramError("cone block references invalid variables")
            if blk.kind == SOC and blk.A.shape[-2] < 2:
                raise ConeProgramError("second-order cone blocks need dim >= 2")
            if blk.kind not in (NONNEG, SOC):
                raise ConeProgramError(f"unknown cone kind {blk.kind!r}")

    @staticmethod
    def build(objective, blocks, eq_matrix=None, eq_rhs=None, constant=0.0) -> "ConeProgram":
        c = np.asarray(objective, dtype=float)
        n = c.size
        if eq_matrix is None or len(eq_matrix) == 0:
            E, d = np.zeros((0, n)), np.zeros(0)
        else:
            E = np.atleast_2d(np.asarray(eq_matrix, dtype=float))
            d = np.asarray(eq_rhs, dtype=float).reshape(-1)
        return ConeProgram(n, c, E, d, tuple(blocks), float(constant))

    def cone_counts(self) -> dict:
        """Number of nonnegative rows and of second-order cones per dimension."""
        out = {"nonneg": 0, "soc": {}}
        for blk in self.blocks:
            if blk.kind == NONNEG:
                out["nonneg"] += blk.rows
            else:
                out["soc"][blk.dim] = out["soc"].get(blk.dim, 0) + blk.count
        return out

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.objective @ x + self.constant)

    def residual(self, x: np.ndarray) -> float:
        """Largest violation of any equality or cone constraint at ``x``."""
        viol = 0.0
        if self.eq_rhs.size:
            viol = float(np.max(np.abs(self.eq_matrix @ x - self.eq_rhs)))
        for blk in self.blocks:
            v = blk.A @ x + blk.b
            if blk.kind == NONNEG:
                viol = max(viol, float(np.max(-v, initial=0.0)))
            else:
                gap = np.linalg.norm(v[:, 1:], axis=1) - v[:, 0]
                viol = max(viol, float(np.max(gap, initial=0.0)))
        return viol

    def to_json(self) -> str:
        """Canonical form as JSON, for debugging and for the oracle tests."""
        return json.dumps({
            "num_vars": self.num_vars,
            "objective": self.objective.tolist(),
            "constant": self.constant,
            "eq_matrix": self.eq_matrix.tolist(),
            "eq_rhs": self.eq_rhs.tolist(),
            "blocks": [{"kind": b.kind, "A": b.A.tolist(), "b": b.b.tolist()} for b in self.blocks],
        })

    @staticmethod
    def from_json(text: str) -> "ConeProgram":
        d = json.loads(text)
        blocks = []
        for b in d["blocks"]:
            if b["kind"] == NONNEG:
                blocks.append(ConeBlock.nonneg(np.array(b["A"]).reshape(-1, d["num_vars"]), b["b"]))
            else:
                blocks.append(ConeBlock.soc(np.array(b["A"]), np.array(b["b"])))
        return ConeProgram.build(d["objective"], blocks,
                                 np.array(d["eq_matrix"]).reshape(-1, d["num_vars"]),
                                 d["eq_rhs"], d["constant"])


@dataclass
class ConeSolution:
    primal: np.ndarray
    dual: np.ndarray
    objective_value: float
    status: str
    gap: float
    iterations: int = 0
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    certificate: str | None = None
    eq_dual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dual_objective: float = np.nan


# --------------------------------------------------------------------------
# presolve: fix variables pinned by single-entry equality rows, stack cone rows


@dataclass
class _Reduced:
    keep: np.ndarray
    fixed_idx: np.ndarray
    fixed_val: np.ndarray
    c: np.ndarray
    E: np.ndarray
    d: np.ndarray
    G: np.ndarray  # standard form: G x + s = h, s in K
    h: np.ndarray
    ctype: np.ndarray
    cstart: np.ndarray
    cdim: np.ndarray


def _presolve(prog: ConeProgram) -> _Reduced:
    n = prog.num_vars
    E = prog.eq_matrix.copy()
    d = prog.eq_rhs.copy()
    fixed = np.full(n, np.nan)
    active = np.ones(E.shape[0], dtype=bool)
    changed = True
    while changed:
        changed = False
        for r in np.flatnonzero(active):
            nz = np.flatnonzero(E[r])
            if nz.size == 1:
                j = nz[0]
                val = d[r] / E[r, j]
                if not np.isnan(fixed[j]) and abs(fixed[j] - val) > 1e-12 * max(1.0, abs(val)):
                    raise ConeProgramError("inconsistent fixed variables")
                fixed[j] = val
                d -= E[:, j] * val
                E[:, j] = 0.0
                active[r] = False
                changed = True
            elif nz.size == 0:
                if abs(d[r]) > 1e-12:
                    raise ConeProgramError("inconsistent equality constraints")
                active[r] = False
    fixed_mask = ~np.isnan(fixed)
    keep = np.flatnonzero(~fixed_mask)
    fixed_idx = np.flatnonzero(fixed_mask)
    fixed_val = fixed[fixed_mask]

    A_parts, b_parts, types, dims = [], [], [], []
    for blk in prog.blocks:
        if blk.kind == NONNEG:
            A_parts.append(blk.A)
            b_parts.append(blk.b)
            types.append(np.zeros(blk.rows, dtype=np.int64))
            dims.append(np.ones(blk.rows, dtype=np.int64))
        else:
            k, dim = blk.A.shape[0], blk.A.shape[1]
            A_parts.append(blk.A.reshape(k * dim, n))
            b_parts.append(blk.b.reshape(-1))
            types.append(np.ones(k, dtype=np.int64))
            dims.append(np.full(k, dim, dtype=np.int64))
    if A_parts:
        A_all = np.vstack(A_parts)
        b_all = np.concatenate(b_parts)
        ctype = np.concatenate(types)
        cdim = np.concatenate(dims)
    else:
        A_all, b_all = np.zeros((0, n)), np.zeros(0)
        ctype = cdim = np.zeros(0, dtype=np.int64)
    cstart = np.concatenate([[0], np.cumsum(cdim)[:-1]]).astype(np.int64) if cdim.size else cdim
    b_all = b_all + A_all[:, fixed_idx] @ fixed_val
    return _Reduced(keep, fixed_idx, fixed_val, prog.objective[keep].copy(),
                    np.ascontiguousarray(E[active][:, keep]), d[active].copy(),
                    np.ascontiguousarray(-A_all[:, keep]), b_all, ctype, cstart, cdim)


_STATUS = {
    _ipm.OPTIMAL: (OPTIMAL, None),
    _ipm.MAX_ITERS: (MAX_ITERS, None),
    _ipm.INFEASIBLE_PRIMAL: (INFEASIBLE, "primal"),
    _ipm.INFEASIBLE_DUAL: (INFEASIBLE, "dual"),
    _ipm.NUMERICAL_FAILURE: (NUMERICAL_FAILURE, None),
}


def solve(program: ConeProgram, tol: float = 1e-8, max_iters: int = 200,
          inf_tol: float = 1e-9, refine: int = 2) -> ConeSolution:
    """Solve a cone program with a homogeneous self-dual interior-point method.

    ``status == "optimal"`` means the relative primal residual, the relative
    dual residual and the duality gap (absolute, or relative to the objective
    when it exceeds one in magnitude) are all below ``tol``.  The iteration
    schedule has no randomness, so identical inputs give identical outputs.
    ``dual_objective`` is the matching dual value; by weak duality it bounds
    the optimum from below up to the dual residual.
    With ``status == "infeasible"`` the ``certificate`` field says whether the
    primal ("primal") or the dual ("dual", i.e. unbounded primal) failed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    red = _presolve(program)
    M = red.h.size
    if red.c.size == 0:
        v = red.h
        ok = True
        for t, a, dim in zip(red.ctype, red.cstart, red.cdim):
            if t == 0:
                ok &= v[a] >= -tol
            else:
                ok &= np.linalg.norm(v[a + 1:a + dim]) <= v[a] + tol
        x, y, z = np.zeros(0), np.zeros(red.d.size), np.zeros(M)
        code, it, gap, pres, dres = (_ipm.OPTIMAL if ok else _ipm.INFEASIBLE_PRIMAL), 0, 0.0, 0.0, 0.0
    else:
        x, y, z, _, code, it, gap, pres, dres = _ipm.hsde(
            red.c, red.E, red.d, red.G, red.h, red.ctype, red.cstart, red.cdim,
            float(tol), float(inf_tol), int(max_iters), int(refine))
    status, certificate = _STATUS[code]
    x_full = np.empty(program.num_vars)
    x_full[red.keep] = x
    x_full[red.fixed_idx] = red.fixed_val
    fixed_part = float(program.objective[red.fixed_idx] @ red.fixed_val) + program.constant
    dual_obj = -(float(red.d @ y) + float(red.h @ z)) + fixed_part
    return ConeSolution(
        primal=x_full,
        dual=z,
        objective_value=float(program.objective @ x_full + program.constant),
        status=status,
        gap=float(gap),
        iterations=int(it),
        primal_residual=float(pres),
        dual_residual=float(dres),
        certificate=certificate,
        eq_dual=y,
        dual_objective=dual_obj,
    )
