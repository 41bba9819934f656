"""Linear-system assembly and non-negative least squares.

A target ratio ``num/den = v`` over the combined program linearizes to the
homogeneous row ``sum_j (num_j - v * den_j) * x_j = 0`` with ``x_j = N_j/n0``.
One extra row pins the total instruction budget.  The weighted system is
solved for ``x >= 0`` with the Lawson-Hanson active-set scheme: the passive
set grows by the most positive dual component and each inner least-squares
subproblem is solved by orthogonal factorization.

Rows are weighted so one unit of weighted residual means the same thing on
every row: a metric row is scaled by ``1/(target * expected denominator
count)``, making its residual the relative error of the achieved metric, and
the budget row by ``q/budget`` (q metric rows) so the solver can neither
satisfy the homogeneous rows by driving the solution toward zero nor trade
the instruction budget away.  Normalizing by coefficient magnitude instead
is unstable: when every block's own metric sits at the target, the row's
coefficients vanish and its weight diverges, and the solver then chases
measurement noise on that row with astronomical execution counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptySelectionError,
    IncompleteProfileError,
    InvalidSystemError,
)
from .events import MeasurementResult, TargetMetrics

BUDGET_ROW = "budget"


@dataclass(frozen=True)
class LinearSystem:
    matrix: np.ndarray  # (q+1) x m
    rhs: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    row_weights: np.ndarray

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if not (len(self.rhs) == len(self.row_labels) == len(self.row_weights) == rows):
            raise InvalidSystemError("row dimensions are inconsistent")
        if len(self.col_labels) != cols:
            raise InvalidSystemError("column dimensions are inconsistent")
        if not np.all(self.row_weights > 0):
            raise InvalidSystemError("row weights must be positive")


@dataclass(frozen=True)
class NnlsSolution:
    x: np.ndarray
    residual_norm: float
    iterations: int
    certified: bool = True


def _profile_count(spec, event: str, metric_id: str) -> float:
    count = spec.profile.counts.get(event) if spec.profile is not None else None
    if count is None:
        raise IncompleteProfileError(
            f"block {spec.id} lacks event {event} needed by metric {metric_id}"
        )
    return count


def _metric_rows(library, targets: TargetMetrics):
    definitions = targets.definitions()
    cols = library.ids()
    matrix = np.zeros((len(definitions) + 1, len(cols)))
    for i, definition in enumerate(definitions):
        value = targets.targets[definition.id]
        for j, block_id in enumerate(cols):
            spec = library.blocks[block_id]
            num = _profile_count(spec, definition.numerator, definition.id)
            den = _profile_count(spec, definition.denominator, definition.id)
            matrix[i, j] = num - value * den
    for j, block_id in enumerate(cols):
        matrix[-1, j] = _profile_count(library.blocks[block_id], "instructions", BUDGET_ROW)
    labels = tuple(d.id for d in definitions) + (BUDGET_ROW,)
    return matrix, labels, cols, definitions


def _row_weights(targets, definitions, denominators, budget: float) -> np.ndarray:
    """1/(target * denominator estimate) per metric row, q/budget for the
    budget row; weighted residuals are then relative errors."""
    weights = np.ones(len(definitions) + 1)
    for i, definition in enumerate(definitions):
        scale = targets.targets[definition.id] * denominators[i]
        if scale > 0:
            weights[i] = 1.0 / scale
    weights[-1] = max(len(definitions), 1) / max(abs(budget), 1.0)
    return weights


def assemble_initial_system(library, targets: TargetMetrics, ins1: float) -> LinearSystem:
    """Equation system for the first solve: homogeneous metric rows plus the
    instruction-budget row with right-hand side ``ins1``.

    Denominator estimates for the row weights assume the instruction budget
    is spread evenly over the library.
    """
    if ins1 <= 0:
        raise InvalidSystemError(f"ins1 must be > 0, got {ins1}")
    matrix, labels, cols, definitions = _metric_rows(library, targets)
    rhs = np.zeros(len(labels))
    rhs[-1] = float(ins1)
    denominators = []
    for definition in definitions:
        per_instruction = [
            _profile_count(spec, definition.denominator, definition.id)
            / spec.profile.counts["instructions"]
            for spec in library.blocks.values()
        ]
        denominators.append(ins1 * sum(per_instruction) / len(per_instruction))
    weights = _row_weights(targets, definitions, denominators, float(ins1))
    return LinearSystem(matrix, rhs, labels, tuple(cols), weights)


def assemble_incremental_system(
    library,
    targets: TargetMetrics,
    measured: MeasurementResult,
    delta_ins: float,
) -> LinearSystem:
    """Equation system for one refinement round.

    The unknowns are nonnegative execution-count increases; each metric row's
    right-hand side is the gap ``v * den(measured) - num(measured)`` left by
    the measured counts, and the budget row asks for ``delta_ins`` more
    instructions.
    """
    if delta_ins < 0:
        raise InvalidSystemError(f"delta_ins must be >= 0, got {delta_ins}")
    matrix, labels, cols, definitions = _metric_rows(library, targets)
    rhs = np.zeros(len(labels))
    denominators = []
    for i, definition in enumerate(definitions):
        value = targets.targets[definition.id]
        num = measured.counts.get(definition.numerator)
        den = measured.counts.get(definition.denominator)
        if num is None or den is None:
            raise IncompleteProfileError(
                f"measurement lacks events for metric {definition.id}"
            )
        rhs[i] = value * den - num
        denominators.append(den)
    rhs[-1] = float(delta_ins)
    weights = _row_weights(targets, definitions, denominators, float(delta_ins))
    return LinearSystem(matrix, rhs, labels, tuple(cols), weights)


def unreachable_rows(system: LinearSystem) -> tuple[str, ...]:
    """Metric rows whose right-hand side cannot be approached with x >= 0."""
    flagged = []
    for i, label in enumerate(system.row_labels):
        if label == BUDGET_ROW:
            continue
        row, target = system.matrix[i], system.rhs[i]
        if (target > 0 and np.all(row <= 0)) or (target < 0 and np.all(row >= 0)):
            flagged.append(label)
    return tuple(flagged)


def nnls(system: LinearSystem, tol: float = 1e-10, max_iter: int | None = None) -> NnlsSolution:
    """Minimize ``||W(Ax - b)||`` subject to ``x >= 0`` (Lawson-Hanson).

    Exceeding ``max_iter`` returns the best solution found so far with
    ``certified=False``; a certified solution satisfies the KKT conditions at
    ``tol * scale`` where ``scale = max(1, ||(WA)^T Wb||_inf)``.
    """
    if tol <= 0:
        raise InvalidSystemError(f"tol must be > 0, got {tol}")
    if not (np.all(np.isfinite(system.matrix)) and np.all(np.isfinite(system.rhs))):
        raise InvalidSystemError("system contains NaN or Inf entries")

    a = system.matrix * system.row_weights[:, None]
    b = system.rhs * system.row_weights
    rows, cols = a.shape
    if max_iter is None:
        max_iter = 3 * cols + 30

    x = np.zeros(cols)
    passive = np.zeros(cols, dtype=bool)
    scale = max(1.0, float(np.max(np.abs(a.T @ b))) if cols else 1.0)
    threshold = tol * scale

    iterations = 0
    certified = False
    while iterations < max_iter:
        dual = a.T @ (b - a @ x)
        dual[passive] = -np.inf
        if not np.any(~passive) or np.max(dual) <= threshold:
            certified = True
            break
        passive[int(np.argmax(dual))] = True
        iterations += 1

        while True:
            z = np.zeros(cols)
            z[passive], *_ = np.linalg.lstsq(a[:, passive], b, rcond=None)
            if np.min(z[passive]) > 0:
                x = z
                break
            # step back to the boundary and drop the blocking components
            mask = passive & (z <= 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(mask, x / (x - z), np.inf)
            alpha = float(np.min(ratios))
            if not math.isfinite(alpha):
                alpha = 0.0  # blocking components already sit at zero
            x = x + alpha * (z - x)
            passive &= x > 0
            x[~passive] = 0.0

    x = np.where(x > 0, x, 0.0)  # exact zeros, never -0.0
    residual = float(np.linalg.norm(a @ x - b))
    return NnlsSolution(x, residual, iterations, certified)


def select_blocks(solution: NnlsSolution, library, eps: float):
    """Sub-library of blocks whose solved execution share exceeds ``eps``."""
    ids = library.ids()
    if len(solution.x) != len(ids):
        raise InvalidSystemError(
            f"solution size {len(solution.x)} != library size {len(ids)}"
        )
    if eps < 0:
        raise InvalidSystemError(f"eps must be >= 0, got {eps}")
    keep = [block_id for block_id, value in zip(ids, solution.x) if value > eps]
    if not keep:
        raise EmptySelectionError(
            "every block was pruned; relax eps or enlarge the library"
        )
    return library.subset(keep)


def counts_from_solution(solution: NnlsSolution, n0: int) -> list[int]:
    """Execution counts ``round(x_j * n0)``, rounding half up."""
    return [int(math.floor(value * n0 + 0.5)) for value in solution.x]


def dump_system(system: LinearSystem) -> str:
    """Matrix file for external verification: one row per line as
    ``label<TAB>coefficients...<TAB>| rhs weight``."""
    lines = ["# columns: " + " ".join(system.col_labels)]
    for i, label in enumerate(system.row_labels):
        coeffs = "\t".join(repr(float(v)) for v in system.matrix[i])
        lines.append(
            f"{label}\t{coeffs}\t|\t{float(system.rhs[i])!r}\t{float(system.row_weights[i])!r}"
        )
    return "\n".join(lines) + "\n"
