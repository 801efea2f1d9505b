"""Sequential iterative decorrelation by convex optimization (SIDCO).

Each sweep visits the columns in a random order and replaces column ``i`` by
the normalized solution of a convex problem: minimize the largest correlation
with the other columns over a trust region around the current column, under
the constraints of the chosen variant.  When a sweep stops making progress a
variant-specific restart heuristic is applied (tight-frame retraction,
unit-modulus projection, or a small random perturbation).
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import conic
from .frame import (FrameError, mutual_coherence, normalize_columns, polar_retraction,
                    unit_modulus, welch_bound)
from .subproblem import (KINDS, build_sidco_subproblem, column_from_solution, is_complex_kind)

log = logging.getLogger(__name__)

DESCENT_KINDS = ("real", "complex", "nonneg_real", "nonneg_complex")


class SolverFailure(RuntimeError):
    def __init__(self, column_index: int, status: str):
        super().__init__(f"column {column_index}: subproblem solver returned {status}")
        self.column_index = column_index
        self.status = status


@dataclass
class VariantSpec:
    """Constraint family of a design run.

    ``gamma`` is the modulus slack of the unital variant, ``lam`` the l1 weight
    of the sparse variants, ``delta`` the perturbation size used by the
    nonnegative variants when they stall.  ``unital_radius_scale`` multiplies
    the trust radius applied to each entry in the unital variant.
    """

    kind: str = "complex"
    gamma: float = 0.01
    lam: float = 0.0
    sparsity_mode: str = "l1_penalty"
    support_mask: np.ndarray | None = None
    epsilon_support: float = 1e-4
    delta: float = 1e-3
    unital_radius_scale: float | None = None
    l1_scaling: str = "per_dimension"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variant kind {self.kind!r}")
        if self.kind == "unital" and not 0 < self.gamma < 1:
            raise ValueError("unital variant needs 0 < gamma << 1")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.sparsity_mode not in ("l1_penalty", "fixed_support"):
            raise ValueError(f"unknown sparsity mode {self.sparsity_mode!r}")
        if self.l1_scaling not in ("per_dimension", "literal"):
            raise ValueError(f"unknown l1 scaling {self.l1_scaling!r}")

    @property
    def is_sparse(self) -> bool:
        return self.kind.startswith("sparse")

    @property
    def fixed_support(self) -> bool:
        return self.is_sparse and self.sparsity_mode == "fixed_support"

    @property
    def has_descent(self) -> bool:
        return self.kind in DESCENT_KINDS or self.fixed_support

    def l1_weight(self, m: int) -> float:
        """Weight applied to ``||f||_1`` in the subproblem.

        ``||f||_1`` of a unit vector grows like ``sqrt(m)`` while the
        correlations shrink like ``1/sqrt(m)``, so by default ``lam`` is divided
        by ``m`` to make it comparable across dimensions.
        """
        return self.lam / m if self.l1_scaling == "per_dimension" else self.lam

    def radius_scale(self, m: int) -> float:
        if self.unital_radius_scale is not None:
            return self.unital_radius_scale
        return 1.0 / m

    def short(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "support_mask"}
        d["has_support_mask"] = self.support_mask is not None
        return d


@dataclass
class SidcoConfig:
    """Outer-loop parameters.

    A sweep whose relative coherence decrease is below ``convergence_tol``
    counts as converged and triggers the restart heuristic, at most
    ``retraction_budget`` times (``None``: no cap within ``max_iterations``).
    With ``stop_when_stalled`` the run ends at the first converged sweep that
    cannot be followed by a restart.  With ``stop_at_bound`` it ends as soon as
    the coherence meets the Welch bound, which no frame can beat.
    """

    max_iterations: int = 2000
    rng_seed: int = 0
    convergence_tol: float = 1e-3
    retraction_budget: int | None = None
    track_best: bool = True
    stop_when_stalled: bool = True
    stop_at_bound: bool = True
    polish_sweeps: int = 200
    solver_tol: float = 1e-8
    solver_max_iters: int = 200

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class DesignReport:
    best_frame: np.ndarray
    best_coherence: float
    trajectory: list
    iterations_run: int
    retractions_applied: int
    seed: int
    sweep_start: list = field(default_factory=list)
    retraction_iterations: list = field(default_factory=list)
    solver_failures: int = 0
    rejected_updates: int = 0
    final_frame: np.ndarray | None = None
    variant: dict = field(default_factory=dict)
    polish_sweeps: int = 0

    def to_dict(self) -> dict:
        return {
            "best_coherence": self.best_coherence,
            "trajectory": [float(v) for v in self.trajectory],
            "sweep_start": [float(v) for v in self.sweep_start],
            "iterations_run": self.iterations_run,
            "retractions_applied": self.retractions_applied,
            "retraction_iterations": list(self.retraction_iterations),
            "solver_failures": self.solver_failures,
            "rejected_updates": self.rejected_updates,
            "seed": self.seed,
            "polish_sweeps": self.polish_sweeps,
            "variant": self.variant,
            "m": int(self.best_frame.shape[0]),
            "n": int(self.best_frame.shape[1]),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def trajectory_csv(self) -> str:
        lines = ["iteration,coherence"]
        lines += [f"{k + 1},{v:.17g}" for k, v in enumerate(self.trajectory)]
        return "\n".join(lines) + "\n"


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def make_fixed_support(m: int, n: int, per_column_zeros: int, seed=None) -> np.ndarray:
    """Boolean ``(m, n)`` mask, True where an entry is forced to zero.

    Every column gets exactly ``per_column_zeros`` zeros at uniformly random rows.
    """
    if not 0 <= per_column_zeros < m:
        raise ValueError("per_column_zeros must satisfy 0 <= zeros < m")
    rng = _rng(seed)
    mask = np.zeros((m, n), dtype=bool)
    for j in range(n):
        mask[rng.choice(m, size=per_column_zeros, replace=False), j] = True
    return mask


def _clamp_nonneg(frame: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(frame):
        return np.maximum(frame.real, 0) + 1j * np.maximum(frame.imag, 0)
    return np.maximum(frame, 0)


def _abs_parts(frame: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(frame):
        return np.abs(frame.real) + 1j * np.abs(frame.imag)
    return np.abs(frame)


def initialize(m: int, n: int, variant: VariantSpec, seed=None) -> np.ndarray:
    """Random starting frame for a design run.

    Gaussian entries, normalized, replaced by the nearest tight frame and
    normalized again.  The unital variant then projects every entry to modulus
    ``m**-0.5``; the nonnegative variants take absolute values (per component)
    and renormalize; fixed-support sparse variants zero the masked entries.
    """
    if not n > m >= 1:
        raise ValueError("need n > m >= 1")
    rng = _rng(seed)
    if is_complex_kind(variant.kind):
        H = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    else:
        H = rng.standard_normal((m, n))
    H = normalize_columns(H)
    H = polar_retraction(H)
    if variant.kind == "unital":
        H = unit_modulus(H)
    elif variant.kind.startswith("nonneg"):
        H = normalize_columns(_abs_parts(H))
    elif variant.fixed_support and variant.support_mask is not None:
        H = normalize_columns(np.where(variant.support_mask, 0, H))
    return H


def trust_radius(frame: np.ndarray, column_index: int) -> float:
    """Largest squared trust-region radius ``1 - max_j |<f_j, f_i>|^2`` that keeps descent."""
    corr = np.abs(frame.conj().T @ frame[:, column_index])
    corr[column_index] = 0.0
    mx = corr.max()
    radius = 1.0 - mx * mx
    if radius <= 1e-14:
        raise FrameError("coincident columns, radius zero")
    return float(radius)


def update_column(frame: np.ndarray, column_index: int, variant: VariantSpec, radius: float,
                  zero_rows=None, l1_weight=None, tol: float = 1e-8, max_iters: int = 200):
    """Solve the subproblem for one column and return ``(normalized column, objective)``.

    Raises :class:`SolverFailure` if the interior-point solver does not reach
    an optimal status.
    """
    m = frame.shape[0]
    if zero_rows is None and variant.fixed_support and variant.support_mask is not None:
        zero_rows = np.flatnonzero(variant.support_mask[:, column_index])
    if l1_weight is None and variant.is_sparse and not variant.fixed_support:
        l1_weight = variant.l1_weight(m)
    prog = build_sidco_subproblem(frame, column_index, variant, radius, zero_rows=zero_rows,
                                  l1_weight=l1_weight)
    sol = conic.solve(prog, tol=tol, max_iters=max_iters)
    if sol.status != conic.OPTIMAL:
        raise SolverFailure(column_index, sol.status)
    f = column_from_solution(sol.primal, m, variant.kind)
    if zero_rows is not None and len(zero_rows):
        f[np.asarray(zero_rows, dtype=int)] = 0.0
    if variant.kind == "unital":
        f = unit_modulus(f[:, None])[:, 0]
    else:
        if variant.kind.startswith("nonneg"):
            f = _clamp_nonneg(f)
        nrm = np.linalg.norm(f)
        if nrm == 0:
            raise SolverFailure(column_index, "zero column")
        f = f / nrm
    return f, sol.objective_value


def _max_corr(frame, i, col):
    c = np.abs(frame.conj().T @ col)
    c[i] = 0.0
    return c.max()


def _sweep(H, order, variant, cfg, stats, zero_rows_fn=None, l1_weight=None, guard=True):
    for i in order:
        try:
            radius = trust_radius(H, i)
        except FrameError:
            stats["failures"] += 1
            continue
        zero_rows = zero_rows_fn(i) if zero_rows_fn else None
        try:
            f, _ = update_column(H, i, variant, radius, zero_rows=zero_rows, l1_weight=l1_weight,
                                 tol=cfg.solver_tol, max_iters=cfg.solver_max_iters)
        except SolverFailure as exc:
            log.debug("%s; keeping previous column", exc)
            stats["failures"] += 1
            continue
        if guard and _max_corr(H, i, f) > _max_corr(H, i, H[:, i]):
            # only possible through solver round-off; the exact update never increases it
            stats["rejected"] += 1
            continue
        H[:, i] = f


def _restart_step(H, variant, rng):
    kind = variant.kind
    if kind in ("real", "complex"):
        return polar_retraction(H)
    if kind == "unital":
        return unit_modulus(polar_retraction(H, normalize=False))
    if kind.startswith("nonneg"):
        if np.iscomplexobj(H):
            R = rng.standard_normal(H.shape) + 1j * rng.standard_normal(H.shape)
        else:
            R = rng.standard_normal(H.shape)
        return normalize_columns(_clamp_nonneg(H + variant.delta * R))
    return None


def polish(frame: np.ndarray, variant: VariantSpec, cfg: SidcoConfig | None = None):
    """Fix the support of the l1 design and decorrelate on it.

    Entries with ``|h_ki| <= epsilon_support`` are set to zero and kept there;
    the remaining entries are updated by the plain (no l1 term) subproblem.
    The first sweep is the single polishing pass; further sweeps (up to
    ``cfg.polish_sweeps``) continue the fixed-support descent until it stalls.

    Returns the polished frame, the support mask and the number of sweeps.
    """
    cfg = cfg or SidcoConfig()
    H = frame.copy()
    mask = np.abs(H) <= variant.epsilon_support
    H[mask] = 0.0
    H = normalize_columns(H)
    stats = {"failures": 0, "rejected": 0}
    coh = mutual_coherence(H)
    sweeps = 0
    for _ in range(max(cfg.polish_sweeps, 1)):
        start = coh
        _sweep(H, range(H.shape[1]), variant, cfg, stats,
               zero_rows_fn=lambda i: np.flatnonzero(mask[:, i]), l1_weight=0.0)
        coh = mutual_coherence(H)
        sweeps += 1
        if start - coh < cfg.convergence_tol * start:
            break
    return H, mask, sweeps


def run(m: int, n: int, variant: VariantSpec | None = None, config: SidcoConfig | None = None,
        initial_frame: np.ndarray | None = None) -> DesignReport:
    """Design an ``m x n`` incoherent frame.

    Parameters
    ----------
    variant : VariantSpec
        Constraint family; defaults to unconstrained complex frames.
    config : SidcoConfig
        Iteration budget, seed and stopping parameters.
    initial_frame : ndarray, optional
        Starting frame (e.g. a previously designed general frame for the
        sparse variants).  Its columns are normalized first.

    Returns
    -------
    DesignReport
        Best frame found, its coherence and the per-iteration trajectory.
    """
    variant = variant or VariantSpec()
    cfg = config or SidcoConfig()
    rng = np.random.default_rng(cfg.rng_seed)
    if variant.fixed_support and variant.support_mask is None:
        raise ValueError("fixed_support mode needs a support_mask (see make_fixed_support)")
    if initial_frame is None:
        H = initialize(m, n, variant, rng)
    else:
        H = normalize_columns(np.array(initial_frame, dtype=complex if is_complex_kind(variant.kind) else float))
        if H.shape != (m, n):
            raise ValueError("initial frame has the wrong shape")
        if variant.fixed_support:
            H = normalize_columns(np.where(variant.support_mask, 0, H))
    track_best = cfg.track_best or variant.kind == "unital"
    l1_mode = variant.is_sparse and not variant.fixed_support
    guard = variant.has_descent

    stats = {"failures": 0, "rejected": 0}
    trajectory, sweep_start, retraction_iters = [], [], []
    iterations = 0
    coh = mutual_coherence(H)
    best_frame, best_coh = H.copy(), coh
    retractions = 0
    wb = welch_bound(m, n)
    for it in range(cfg.max_iterations):
        start = coh
        sweep_start.append(start)
        _sweep(H, rng.permutation(n), variant, cfg, stats, guard=guard)
        coh = mutual_coherence(H)
        trajectory.append(coh)
        iterations += 1
        if coh < best_coh:
            best_frame, best_coh = H.copy(), coh
        if cfg.stop_at_bound and best_coh <= wb + 1e-12:
            break
        if l1_mode:
            converged = abs(start - coh) < cfg.convergence_tol * start
        else:
            converged = (start - coh) < cfg.convergence_tol * start
        if not converged:
            continue
        budget_left = cfg.retraction_budget is None or retractions < cfg.retraction_budget
        if not variant.is_sparse and budget_left:
            H = _restart_step(H, variant, rng)
            coh = mutual_coherence(H)
            retractions += 1
            retraction_iters.append(it)
        elif cfg.stop_when_stalled:
            break

    polish_sweeps = 0
    if l1_mode:
        H, _, polish_sweeps = polish(H, variant, cfg)
        best_frame, best_coh = H.copy(), mutual_coherence(H)
    elif not track_best:
        best_frame, best_coh = H.copy(), coh
    return DesignReport(
        best_frame=best_frame,
        best_coherence=float(best_coh),
        trajectory=trajectory,
        iterations_run=iterations,
        retractions_applied=retractions,
        seed=cfg.rng_seed,
        sweep_start=sweep_start,
        retraction_iterations=retraction_iters,
        solver_failures=stats["failures"],
        rejected_updates=stats["rejected"],
        final_frame=H,
        variant=variant.short(),
        polish_sweeps=polish_sweeps,
    )
