"""
Block coordinate descent for transform-blind compressed sensing

Each outer iteration:
    1) form X from the patches of x; for A1/A3 compute L^-1 once
    2) alternate `inner` times: transform update, then sparse coding
    3) image update

Objectives (lam = lambda0 * N):
    A1: sum_j ||W P_j x - b_j||^2 + nu ||Ax - y||^2 + lam Q(W)          s.t. ||B||_0 <= s, ||x|| <= C
    A2: sum_j ||W P_j x - b_j||^2 + nu ||Ax - y||^2                     s.t. ||B||_0 <= s, W^H W = I, ||x|| <= C
    A3: sum_j ||W P_j x - b_j||^2 + nu ||Ax - y||^2 + lam Q(W) + eta^2 ||B||_0    s.t. ||x|| <= C

nu here is params.nu * A.fidelity_scale (p for Fourier sampling, 1 for dense
matrices). The objective never increases; every sub-step is checked.
"""

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.fft import dct

from errors import ArgumentError, FeasibilityError, InvariantError
from image_update import build_bccb_spectrum, generic_image_update, mri_image_update
from metrics import hfen, psnr
from patches import PatchConfig, extract_patches, num_patches
from sensing import FourierSampling, SensingOperator, dft_grid_data
from sparse_coding import hard_threshold, project_s_l0, sparsity
from transform_update import (condition_number, eval_Q, unitarity_error, update_transform_unitary,
                              update_transform_wellcond, wellcond_factor)

logger = logging.getLogger(__name__)

ALGORITHMS = ('a1', 'a2', 'a3')
SCHEDULE_START = 0.6


@dataclass
class SolverParams:
    algo: str = 'a1'
    nu: float = 3.81
    lambda0: float = 0.2
    s: Optional[int] = None
    s_frac: Optional[float] = None
    eta: Optional[float] = None
    C: float = 1e5
    inner: int = 1
    outer: int = 40
    schedule: bool = False
    early_stop: Optional[float] = None
    subtract_offset: bool = False
    check_monotone: bool = True
    monotone_rtol: float = 1e-9
    l_factor: str = 'cholesky'

    def validate(self) -> None:
        """
        Raises:
            ArgumentError: On an invalid parameter combination.
        """
        if self.algo not in ALGORITHMS:
            raise ArgumentError(f"Unknown algorithm {self.algo!r}, expected one of {ALGORITHMS}")
        if self.algo in ('a1', 'a2'):
            if (self.s is None) == (self.s_frac is None):
                raise ArgumentError(f"{self.algo.upper()} needs exactly one of s or s_frac")
            if self.s is not None and self.s < 0:
                raise ArgumentError(f"Sparsity s must be >= 0, got {self.s}")
            if self.s_frac is not None and not 0 <= self.s_frac <= 1:
                raise ArgumentError(f"Sparsity fraction must be in [0, 1], got {self.s_frac}")
        elif self.eta is None or not self.eta > 0:
            raise ArgumentError(f"A3 needs a positive eta, got {self.eta}")
        for name in ('nu', 'lambda0', 'C'):
            if not getattr(self, name) > 0:
                raise ArgumentError(f"{name} must be positive, got {getattr(self, name)}")
        if self.inner < 1:
            raise ArgumentError(f"inner must be >= 1, got {self.inner}")
        if self.outer < 0:
            raise ArgumentError(f"outer must be >= 0, got {self.outer}")

    def budget(self, n: int, N: int, t: int = 1) -> Optional[int]:
        """
        Sparsity budget for outer iteration t (None for A3).

        With the schedule on, the budget ramps linearly from 60% to 100% of
        the target over the first half of the outer iterations.
        """
        if self.algo == 'a3':
            return None
        target = self.s if self.s is not None else int(round(self.s_frac * n * N))
        target = min(int(target), n * N)
        if not self.schedule or self.outer < 2:
            return target
        half = max(1, self.outer // 2)
        frac = min(1.0, SCHEDULE_START + (1.0 - SCHEDULE_START) * (max(t, 1) - 1) / half)
        return int(round(frac * target))


@dataclass
class ObjectiveBreakdown:
    sparsification_error: float
    fidelity: float
    regularizer: float
    sparsity_penalty: float

    @property
    def total(self) -> float:
        return self.sparsification_error + self.fidelity + self.regularizer + self.sparsity_penalty


@dataclass
class TraceRow:
    iter: int
    breakdown: ObjectiveBreakdown
    dx: float
    kappa: float
    sparsity_fraction: float
    bounds_ok: bool = True
    psnr: float = np.nan
    hfen: float = np.nan


CSV_COLUMNS = ['iter', 'objective', 'sparsification_error', 'fidelity', 'regularizer',
               'sparsity_penalty', 'dx', 'kappa', 'psnr', 'hfen']


@dataclass
class IterationTrace:
    rows: list = field(default_factory=list)
    substeps: list = field(default_factory=list)  # (iter, stage, objective)
    offset: float = 0.0

    @property
    def objective(self) -> np.ndarray:
        return np.array([row.breakdown.total for row in self.rows])

    @property
    def dx(self) -> np.ndarray:
        return np.array([row.dx for row in self.rows])

    def to_csv(self, path: str) -> None:
        """Write one line per outer iteration (row 0 is the initialization)."""
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                b = row.breakdown
                values = [b.total - self.offset, b.sparsification_error, b.fidelity, b.regularizer,
                          b.sparsity_penalty, row.dx, row.kappa, row.psnr, row.hfen]
                writer.writerow([row.iter] + [repr(float(v)) for v in values])


@dataclass
class SolverState:
    iteration: int
    x: np.ndarray
    W: np.ndarray
    B: np.ndarray
    breakdown: ObjectiveBreakdown
    trace: IterationTrace


class SolveResult(NamedTuple):
    x: np.ndarray
    W: np.ndarray
    B: np.ndarray
    trace: IterationTrace


# ==============================================================================
# Objective
# ==============================================================================

def eval_objective(W: np.ndarray, B: np.ndarray, x: np.ndarray, A: SensingOperator, y: np.ndarray,
                   params: SolverParams, cfg: PatchConfig, budget: int = None,
                   X: np.ndarray = None) -> ObjectiveBreakdown:
    """
    Evaluate the objective of the chosen formulation at a feasible point.

    Args:
        W, B, x: Transform, sparse codes, image
        A, y: Sensing operator and measurements
        params: Solver parameters (selects the formulation)
        cfg: Patch geometry
        budget: Sparsity budget for A1/A2 (defaults to the full target)
        X: Patch matrix of x, if already computed

    Returns:
        ObjectiveBreakdown

    Raises:
        FeasibilityError: Naming the violated constraint.
    """
    n = cfg.n
    N = B.shape[1]
    if X is None:
        X = extract_patches(x, cfg)

    x_norm = np.linalg.norm(x)
    if x_norm > params.C * (1 + 1e-9):
        raise FeasibilityError(f"Energy bound violated: ||x||_2 = {x_norm:.6e} > C = {params.C:.6e}")
    nnz = sparsity(B)
    if params.algo in ('a1', 'a2'):
        budget = params.budget(n, N, params.outer) if budget is None else budget
        if nnz > budget:
            raise FeasibilityError(f"Sparsity budget violated: ||B||_0 = {nnz} > s = {budget}")

    lam = params.lambda0 * N
    if params.algo == 'a2':
        err = unitarity_error(W)
        if err > 1e-10 * n:
            raise FeasibilityError(f"Unitary constraint violated: ||W^H W - I||_F = {err:.3e}")
        regularizer = 0.0
    else:
        q = eval_Q(W)
        if not np.isfinite(q):
            raise FeasibilityError("Transform is singular: Q(W) = inf")
        regularizer = lam * q

    return ObjectiveBreakdown(
        sparsification_error=float(np.linalg.norm(W @ X - B, 'fro') ** 2),
        fidelity=float(params.nu * A.fidelity_scale * np.linalg.norm(A.apply(x) - y) ** 2),
        regularizer=float(regularizer),
        sparsity_penalty=float(params.eta ** 2 * nnz) if params.algo == 'a3' else 0.0,
    )


# ==============================================================================
# Initialization
# ==============================================================================

def dct_transform(side: int) -> np.ndarray:
    """n x n 2D DCT for column-major vectorized side x side patches."""
    D = dct(np.eye(side), norm='ortho', axis=0)
    return np.kron(D, D).astype(complex)


def sparse_code(Z: np.ndarray, params: SolverParams, budget: Optional[int]) -> np.ndarray:
    if params.algo == 'a3':
        return hard_threshold(Z, params.eta)
    return project_s_l0(Z, budget)


def initialize(y: np.ndarray, A: SensingOperator, params: SolverParams, cfg: PatchConfig) -> tuple:
    """
    Initial (W0, B0, x0): 2D DCT, sparse codes for (W0, x0), and the
    pseudo-inverse image A^+ y rescaled onto the energy ball.
    """
    x0 = A.pseudo_inverse(y)
    norm = np.linalg.norm(x0)
    if norm > params.C:
        x0 = x0 * (params.C / norm)
    W0 = dct_transform(cfg.side)
    X0 = extract_patches(x0, cfg)
    B0 = sparse_code(W0 @ X0, params, params.budget(cfg.n, X0.shape[1], 1))
    return W0, B0, x0


# ==============================================================================
# Outer loop
# ==============================================================================

def _image_updater(A: SensingOperator, y: np.ndarray, params: SolverParams, cfg: PatchConfig) -> Callable:
    nu = params.nu * A.fidelity_scale
    if isinstance(A, FourierSampling) and cfg.circulant:
        S0, omega = dft_grid_data(A.to_kspace(y), A.mask)

        def update(W, B):
            gamma = build_bccb_spectrum(W, cfg, A.shape)
            return mri_image_update(W, B, S0, omega, nu, params.C, gamma, cfg)
        return update

    def update(W, B):
        return generic_image_update(W, B, A, y, nu, params.C, cfg)
    return update


def solve(y: np.ndarray, A: SensingOperator, params: SolverParams, cfg: PatchConfig,
          x0: np.ndarray = None, W0: np.ndarray = None, B0: np.ndarray = None,
          reference: np.ndarray = None, callbacks: tuple = ()) -> SolveResult:
    """
    Run Algorithm A1, A2 or A3.

    Args:
        y: Measurement vector
        A: Sensing operator
        params: Solver parameters
        cfg: Patch geometry
        x0, W0, B0: Optional warm start (all three, or none)
        reference: Optional reference image for PSNR / HFEN columns
        callbacks: Callables invoked with a SolverState after each outer iteration

    Returns:
        SolveResult(x, W, B, trace)
    """
    params.validate()
    shape = tuple(A.shape)
    cfg.validate(shape)
    n, N = cfg.n, num_patches(cfg, shape)
    lam = params.lambda0 * N

    given = sum(v is not None for v in (x0, W0, B0))
    if given not in (0, 3):
        raise ArgumentError("A warm start needs all of x0, W0 and B0")
    if given == 0:
        W, B, x = initialize(y, A, params, cfg)
    else:
        W, B, x = np.asarray(W0, dtype=complex), np.asarray(B0, dtype=complex), np.asarray(x0, dtype=complex)
    image_update = _image_updater(A, y, params, cfg)

    trace = IterationTrace(offset=lam * n / 2 if params.subtract_offset and params.algo != 'a2' else 0.0)
    current = eval_objective(W, B, x, A, y, params, cfg, budget=params.budget(n, N, 1))
    g0 = current.total
    trace.rows.append(_trace_row(0, current, W, B, x, reference, np.nan, True))
    logger.info(f"iter 0: objective {g0:.6e}")

    def check(stage: str, t: int, new: ObjectiveBreakdown, old: ObjectiveBreakdown) -> None:
        trace.substeps.append((t, stage, new.total))
        slack = params.monotone_rtol * max(abs(old.total), 1.0)
        if params.check_monotone and new.total > old.total + slack:
            raise InvariantError(
                f"Objective increased after {stage} step of iteration {t}: {old.total:.12e} -> {new.total:.12e}")

    for t in range(1, params.outer + 1):
        start = current
        budget = params.budget(n, N, t)
        X = extract_patches(x, cfg)
        factor = wellcond_factor(X, lam, params.l_factor) if params.algo != 'a2' else None

        for _ in range(params.inner):
            if params.algo == 'a2':
                W = update_transform_unitary(X, B)
            else:
                W = update_transform_wellcond(X, B, lam, factor=factor)
            after = eval_objective(W, B, x, A, y, params, cfg, budget=budget, X=X)
            check('transform', t, after, current)
            current = after

            B = sparse_code(W @ X, params, budget)
            after = eval_objective(W, B, x, A, y, params, cfg, budget=budget, X=X)
            check('sparse', t, after, current)
            current = after

        bounds_ok = bool(np.linalg.norm(B) <= np.linalg.norm(W, 2) * np.linalg.norm(X) * (1 + 1e-12))
        if params.algo != 'a2':
            bounds_ok = bounds_ok and eval_Q(W) <= g0 / lam * (1 + 1e-12)

        x_new = image_update(W, B)
        dx = float(np.linalg.norm(x_new - x))
        x = x_new
        after = eval_objective(W, B, x, A, y, params, cfg, budget=budget)
        check('image', t, after, current)
        current = after

        row = _trace_row(t, current, W, B, x, reference, dx, bounds_ok)
        trace.rows.append(row)
        logger.info(f"iter {t}: objective {current.total:.6e}, dx {dx:.3e}, kappa {row.kappa:.4f}")
        for callback in callbacks:
            callback(SolverState(iteration=t, x=x, W=W, B=B, breakdown=current, trace=trace))

        if params.early_stop is not None and \
                abs(start.total - current.total) <= params.early_stop * abs(start.total):
            logger.info(f"Relative objective change below {params.early_stop:g}, stopping at iteration {t}")
            break

    return SolveResult(x=x, W=W, B=B, trace=trace)


def _trace_row(t, breakdown, W, B, x, reference, dx, bounds_ok) -> TraceRow:
    row = TraceRow(iter=t, breakdown=breakdown, dx=dx, kappa=condition_number(W),
                   sparsity_fraction=sparsity(B) / B.size, bounds_ok=bounds_ok)
    if reference is not None:
        row.psnr = psnr(x, reference)
        row.hfen = hfen(x, reference)
    return row
