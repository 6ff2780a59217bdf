"""Nonlinear least-squares search for flat structures.

The unknowns are structure constants (full mode: independent entries of
C plus all of D; parallel-frame mode: independent torsion entries, with
C = 2(s-1) T and D = -s T induced).  The residual stacks the real and
imaginary parts of every Jacobi identity and every curvature entry at
the chosen parameter, optionally extended by a soft hinge
sqrt(w) * max(0, tau - |T|) that pushes the torsion norm up when
hunting for non-Kahler candidates.

Apart from the hinge, every residual entry is a homogeneous quadratic
polynomial in the unknowns, so the exact Jacobian is assembled once per
problem from the bilinear structure (polarization) and evaluated as
J(x) = L + 2 B x.  Levenberg-Marquardt then runs with the fixed
damping schedule: reject doubles the damping, accept halves it.

Restart seeds are preassigned (problem.seed + restart index), so the
summary of a multistart run is deterministic no matter how restarts
would be scheduled.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .core import (
    UnitaryStructure,
    chern_torsion,
    curvature,
    jacobi_residual_tensors,
)
from .exceptions import DimensionMismatchError
from .tensors import antisymmetrize_lower

FULL = "full"
PARALLEL_FRAME = "parallel_frame"

CONVERGED_KAHLER = "converged_kahler"
CONVERGED_NONKAHLER = "converged_nonkahler"
NOT_CONVERGED = "not_converged"

_INITIAL_DAMPING = 1e-3
_DAMPING_CEILING = 1e12
_STEP_FLOOR = 1e-15


@dataclass(frozen=True)
class SearchProblem:
    """Least-squares formulation of "find a flat structure at parameter s".

    torsion_reward > 0 turns on the counterexample hunt: the residual
    gains the hinge sqrt(torsion_reward) * max(0, torsion_target - |T|).
    tol is the convergence threshold on the residual 2-norm and also
    the classification threshold on the re-validated residuals;
    kahler_tol classifies the torsion norm.
    """

    n: int
    s: float
    mode: str = FULL
    jacobi_weight: float = 1.0
    flatness_weight: float = 1.0
    torsion_reward: float = 0.0
    torsion_target: float = 0.5
    restarts: int = 1
    seed: int = 0
    max_iters: int = 300
    tol: float = 1e-10
    kahler_tol: float = 1e-6

    def __post_init__(self):
        if self.mode not in (FULL, PARALLEL_FRAME):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n < 1 or self.restarts < 1 or self.max_iters < 1:
            raise ValueError("n, restarts and max_iters must be positive")
        if min(self.jacobi_weight, self.flatness_weight, self.torsion_reward) < 0:
            raise ValueError("weights must be nonnegative")


@dataclass(frozen=True)
class SearchResult:
    best_point: UnitaryStructure
    final_jacobi: float
    final_flatness: float
    torsion_norm: float
    classification: str
    iterations: int
    seed_used: int
    residual_norm: float
    used_gradient_fallback: bool = False
    residual_history: tuple = ()  # norm after each accepted step, start included


@dataclass(frozen=True)
class MultistartSummary:
    problem: SearchProblem
    results: tuple
    counts: dict

    def count(self, classification: str) -> int:
        return self.counts.get(classification, 0)


# ---------------------------------------------------------------------------
# unknown vector layout


def _independent_pairs(n: int):
    return [(i, k) for i in range(n) for k in range(i + 1, n)]


def unknown_count(problem: SearchProblem) -> int:
    n = problem.n
    m = n * len(_independent_pairs(n))  # complex freedoms of an antisymmetric tensor
    if problem.mode == FULL:
        return 2 * m + 2 * n**3
    return 2 * m


def _antisym_from_vector(x, n: int) -> np.ndarray:
    out = np.zeros((n, n, n), dtype=complex)
    pos = 0
    for j in range(n):
        for (i, k) in _independent_pairs(n):
            out[j, i, k] = x[pos] + 1j * x[pos + 1]
            out[j, k, i] = -out[j, i, k]
            pos += 2
    return out


def _antisym_to_vector(X: np.ndarray, x, n: int) -> None:
    pos = 0
    for j in range(n):
        for (i, k) in _independent_pairs(n):
            x[pos] = X[j, i, k].real
            x[pos + 1] = X[j, i, k].imag
            pos += 2


def structure_from_point(problem: SearchProblem, x: np.ndarray) -> UnitaryStructure:
    """Decode an unknown vector into the structure it describes."""
    n = problem.n
    x = np.asarray(x, dtype=float)
    if x.shape != (unknown_count(problem),):
        raise DimensionMismatchError(
            f"point has {x.shape}, problem wants ({unknown_count(problem)},)"
        )
    m = 2 * n * len(_independent_pairs(n))
    if problem.mode == FULL:
        C = _antisym_from_vector(x[:m], n)
        D = x[m::2].reshape(n, n, n) + 1j * x[m + 1 :: 2].reshape(n, n, n)
        return UnitaryStructure(n=n, C=C, D=D)
    T = _antisym_from_vector(x, n)
    return UnitaryStructure(n=n, C=2 * (problem.s - 1) * T, D=-problem.s * T)


def point_from_structure(problem: SearchProblem, U: UnitaryStructure) -> np.ndarray:
    """Encode a structure as an unknown vector (full mode) exactly."""
    if problem.mode != FULL:
        raise ValueError("only full mode can encode an arbitrary structure")
    n = problem.n
    x = np.zeros(unknown_count(problem))
    m = 2 * n * len(_independent_pairs(n))
    _antisym_to_vector(U.C, x[:m], n)
    x[m::2] = U.D.real.ravel()
    x[m + 1 :: 2] = U.D.imag.ravel()
    return x


def point_from_torsion(problem: SearchProblem, T: np.ndarray) -> np.ndarray:
    """Encode a torsion tensor as a parallel-frame unknown vector."""
    if problem.mode != PARALLEL_FRAME:
        raise ValueError("torsion points belong to parallel_frame mode")
    n = problem.n
    x = np.zeros(unknown_count(problem))
    _antisym_to_vector(antisymmetrize_lower(np.asarray(T, complex)), x, n)
    return x


# ---------------------------------------------------------------------------
# residuals


def _torsion_linear_map(problem: SearchProblem) -> np.ndarray:
    """Real matrix M with (T entries as interleaved re/im) = M @ x."""
    d = unknown_count(problem)
    n = problem.n
    M = np.zeros((2 * n**3, d))
    for col in range(d):
        x = np.zeros(d)
        x[col] = 1.0
        T = chern_torsion(structure_from_point(problem, x)).T
        M[0::2, col] = T.real.ravel()
        M[1::2, col] = T.imag.ravel()
    return M


def _quadratic_part(x: np.ndarray, problem: SearchProblem) -> np.ndarray:
    """All polynomial residual entries (Jacobi then curvature), weighted."""
    U = structure_from_point(problem, x)
    wj = np.sqrt(problem.jacobi_weight)
    wf = np.sqrt(problem.flatness_weight)
    parts = []
    for fam in jacobi_residual_tensors(U.C, U.D):
        flat = fam.ravel()
        parts.append(wj * flat.real)
        parts.append(wj * flat.imag)
    rep = curvature(U, problem.s)
    for key in sorted(rep.blocks):
        block = rep.blocks[key].ravel()
        parts.append(wf * block.real)
        parts.append(wf * block.imag)
    return np.concatenate(parts)


def _hinge(x: np.ndarray, problem: SearchProblem):
    """Hinge value and its gradient row (zero when inactive)."""
    w = np.sqrt(problem.torsion_reward)
    M = _torsion_model(problem)
    t = M @ x
    norm = float(np.linalg.norm(t))
    if norm >= problem.torsion_target:
        return 0.0, np.zeros_like(x)
    if norm == 0.0:
        return w * problem.torsion_target, np.zeros_like(x)
    grad = -w * (M.T @ t) / norm
    return w * (problem.torsion_target - norm), grad


def residual_vector(x, problem: SearchProblem) -> np.ndarray:
    """Weighted residual entries at the point x (definition, not the model).

    Layout: re/im of the three Jacobi families (all index tuples), then
    re/im of every curvature block entry at parameter s in sorted block
    order, then the torsion hinge when torsion_reward > 0.
    """
    x = np.asarray(x, dtype=float)
    r = _quadratic_part(x, problem)
    if problem.torsion_reward > 0:
        value, _ = _hinge(x, problem)
        r = np.append(r, value)
    return r


class _QuadraticModel:
    """Exact (r0, L, B) of a quadratic residual map, via polarization."""

    def __init__(self, r0, L, B):
        self.r0 = r0
        self.L = L
        self.B = B

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.r0 + self.L @ x + (self.B @ x) @ x

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return self.L + 2.0 * (self.B @ x)

    @classmethod
    def build(cls, fn, d: int):
        r0 = fn(np.zeros(d))
        m = r0.shape[0]
        L = np.zeros((m, d))
        Q = np.zeros((d, m))  # pure quadratic values on basis vectors
        for i in range(d):
            e = np.zeros(d)
            e[i] = 1.0
            plus = fn(e)
            minus = fn(-e)
            L[:, i] = 0.5 * (plus - minus)
            Q[i] = 0.5 * (plus + minus) - r0
        B = np.zeros((m, d, d))
        for i in range(d):
            B[:, i, i] = Q[i]
        for i in range(d):
            e_i = np.zeros(d)
            e_i[i] = 1.0
            for j in range(i + 1, d):
                e_j = np.zeros(d)
                e_j[j] = 1.0
                mixed = fn(e_i + e_j) - r0 - L @ (e_i + e_j) - Q[i] - Q[j]
                B[:, i, j] = 0.5 * mixed
                B[:, j, i] = 0.5 * mixed
        return cls(r0, L, B)


@functools.lru_cache(maxsize=8)
def _polynomial_model(problem: SearchProblem) -> _QuadraticModel:
    d = unknown_count(problem)
    return _QuadraticModel.build(lambda x: _quadratic_part(x, problem), d)


@functools.lru_cache(maxsize=8)
def _torsion_model(problem: SearchProblem) -> np.ndarray:
    return _torsion_linear_map(problem)


def jacobian(x, problem: SearchProblem) -> np.ndarray:
    """Exact derivative of residual_vector at x.

    Every polynomial entry has degree <= 2, so the derivative is
    L + 2 B x from the polarized bilinear structure; the hinge row is
    differentiated analytically.  Central finite differences of
    residual_vector reproduce this to rounding.
    """
    x = np.asarray(x, dtype=float)
    J = _polynomial_model(problem).jacobian(x)
    if problem.torsion_reward > 0:
        _, grad = _hinge(x, problem)
        J = np.vstack([J, grad])
    return J


def _model_residual(x: np.ndarray, problem: SearchProblem) -> np.ndarray:
    r = _polynomial_model(problem)(x)
    if problem.torsion_reward > 0:
        value, _ = _hinge(x, problem)
        r = np.append(r, value)
    return r


# ---------------------------------------------------------------------------
# Levenberg-Marquardt


def lm_minimize(problem: SearchProblem, start, seed_used: int = -1) -> SearchResult:
    """Damped least squares from one start point.

    Damping doubles on a rejected step and halves on an accepted one,
    starting from 1e-3; iteration stops when the residual 2-norm
    reaches problem.tol, the step collapses, the damping blows up, or
    max_iters is hit.  Accepted steps never increase the residual norm.
    Singular or non-finite normal equations fall back to a small
    gradient step and are flagged on the result.
    """
    x = np.asarray(start, dtype=float).copy()
    r = _model_residual(x, problem)
    norm = float(np.linalg.norm(r))
    mu = _INITIAL_DAMPING
    iterations = 0
    fallback = False
    history = [norm]

    while norm > problem.tol and iterations < problem.max_iters and mu < _DAMPING_CEILING:
        iterations += 1
        J = jacobian(x, problem)
        g = J.T @ r
        H = J.T @ J
        try:
            step = np.linalg.solve(H + mu * np.eye(H.shape[0]), -g)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError("non-finite step")
        except np.linalg.LinAlgError:
            fallback = True
            gn = float(np.linalg.norm(g))
            step = -g * (1e-3 / (1.0 + gn))
        cand = x + step
        cand_r = _model_residual(cand, problem)
        cand_norm = float(np.linalg.norm(cand_r))
        if cand_norm <= norm:
            x, r, norm = cand, cand_r, cand_norm
            history.append(norm)
            mu *= 0.5
            if float(np.linalg.norm(step)) <= _STEP_FLOOR * (1.0 + float(np.linalg.norm(x))):
                break
        else:
            mu *= 2.0

    return _classify(problem, x, iterations, seed_used, norm, fallback, tuple(history))


def _classify(
    problem: SearchProblem,
    x: np.ndarray,
    iterations: int,
    seed_used: int,
    residual_norm: float,
    fallback: bool,
    history: tuple = (),
) -> SearchResult:
    # hinge-free re-validation: reported residuals are pure Jacobi + flatness
    U = structure_from_point(problem, x)
    jac = float(
        np.sqrt(sum(np.sum(np.abs(f) ** 2) for f in jacobi_residual_tensors(U.C, U.D)))
    )
    flat = curvature(U, problem.s).frobenius
    torsion = chern_torsion(U).norm
    if max(jac, flat) <= problem.tol:
        cls = CONVERGED_KAHLER if torsion <= problem.kahler_tol else CONVERGED_NONKAHLER
    else:
        cls = NOT_CONVERGED
    return SearchResult(
        best_point=U,
        final_jacobi=jac,
        final_flatness=flat,
        torsion_norm=torsion,
        classification=cls,
        iterations=iterations,
        seed_used=seed_used,
        residual_norm=residual_norm,
        used_gradient_fallback=fallback,
        residual_history=history,
    )


def random_start(problem: SearchProblem, seed: int) -> np.ndarray:
    """Unit complex-Gaussian start (antisymmetrized through the layout)."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(unknown_count(problem))


def multistart_search(problem: SearchProblem) -> MultistartSummary:
    """Run lm_minimize from `restarts` seeded random starts serially.

    Restart k draws its start from seed problem.seed + k; the summary
    counts classifications.  Non-convergence is counted, never dropped:
    absence of non-Kahler solutions is evidence about this search, not
    a proof, and the bookkeeping keeps that explicit.
    """
    results = []
    for k in range(problem.restarts):
        seed_k = problem.seed + k
        start = random_start(problem, seed_k)
        results.append(lm_minimize(problem, start, seed_used=seed_k))
    counts: dict = {}
    for res in results:
        counts[res.classification] = counts.get(res.classification, 0) + 1
    return MultistartSummary(problem=problem, results=tuple(results), counts=counts)
