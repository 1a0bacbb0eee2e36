"""Compressive measurement and sparse reconstruction over the parity dictionary.

The solver minimizes the unnormalized objective

    ||y - A x||_2^2 + lam * ||x||_1

by cyclic coordinate descent with closed-form soft-thresholding.  Columns are
raw +-1 parity values and are never rescaled, so lam is calibrated against
this exact objective.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import FourierExpansion, ParityIndex, Restriction, fwht
from .validation import check_encodings, check_values

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

MINIMIZER_VARIABLE_CAP = 24

# Above this column count the Gram matrix no longer fits comfortably in
# memory, so the solver falls back to residual updates.
_GRAM_MODE_MAX_COLUMNS = 4096


@dataclass(frozen=True)
class RecoveryConfig:
    """Knobs of one measure-and-recover pass.

    p is the probability that a sampled encoding bit is +1; m is the number of
    measurements; sparsity is the number of recovered terms kept.
    """

    lam: float = 1.0
    sparsity: int = 10
    degree: int = 2
    p: float = 0.25
    m: int = 1000
    tol: float = 1e-8
    max_iter: int = 10000

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lam must be nonnegative")
        if self.sparsity < 1:
            raise ValueError("sparsity must be at least 1")
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class MeasurementSet:
    """Sampled encodings paired with their measured values."""

    encodings: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        encodings = check_encodings(self.encodings)
        values = check_values(self.values, expected=encodings.shape[0])
        object.__setattr__(self, "encodings", encodings)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]


def sample_encodings(n: int, p: float, m: int, seed) -> np.ndarray:
    """m independent encodings with each bit +1 with probability p, else -1.

    The whole batch comes from one sequential pass over a single seeded
    stream, so downstream evaluation order cannot change it.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = np.random.default_rng(seed)
    return np.where(rng.random((m, n)) < p, 1, -1).astype(np.int8)


def build_sampling_matrix(encodings, parities: list[ParityIndex]) -> np.ndarray:
    """Dense +-1 matrix with entry (l, k) the k-th parity at the l-th encoding.

    The parity list must be in canonical order; it defines the column order.
    """
    if not parities:
        raise ValueError("parity list must be nonempty")
    X = check_encodings(encodings).astype(np.float64)
    m = X.shape[0]
    A = np.empty((m, len(parities)), dtype=np.float64, order="F")
    for k, s in enumerate(parities):
        if s:
            A[:, k] = np.prod(X[:, list(s)], axis=1)
        else:
            A[:, k] = 1.0
    return A


@dataclass
class LassoSolution:
    coefficients: np.ndarray
    iterations: int
    objective: float
    kkt_residual: float
    converged: bool

    def to_json_dict(self, sparse_tolerance: float = 1e-12) -> dict:
        kept = np.flatnonzero(np.abs(self.coefficients) > sparse_tolerance)
        return {
            "coefficients": [[int(k), float(self.coefficients[k])] for k in kept],
            "iterations": int(self.iterations),
            "objective": float(self.objective),
            "kkt_residual": float(self.kkt_residual),
            "converged": bool(self.converged),
        }


def lasso_objective(A, y, lam: float, x) -> float:
    """The unnormalized objective ||y - A x||^2 + lam * ||x||_1."""
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    r = y - A @ x
    return float(r @ r + lam * np.abs(x).sum())


def kkt_residual(A, y, lam: float, x) -> float:
    """Max stationarity violation of x for the objective above; 0 at an optimum.

    For each coordinate j with gradient term g_j = a_j^T (y - A x), the
    violation is max(0, |2 g_j| - lam) when x_j = 0 and |2 g_j - lam sign(x_j)|
    otherwise.
    """
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    twog = 2.0 * (A.T @ (y - A @ x))
    at_zero = np.maximum(np.abs(twog) - lam, 0.0)
    off_zero = np.abs(twog - lam * np.sign(x))
    violations = np.where(x == 0.0, at_zero, off_zero)
    return float(violations.max()) if violations.size else 0.0


def _soft_threshold(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


# The loop kernels below and their numpy twins must perform the identical
# sequence of coordinate updates; only the inner-product/axpy vectorization
# differs.  Each returns (sweeps used, last sweep's max coordinate change)
# and stops early once that change drops below tol.

def _sweep_gram_loops(x, v, G, norms2, threshold, tol, max_sweeps):
    p = x.shape[0]
    sweeps = 0
    max_delta = tol
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in range(p):
            nj = norms2[j]
            if nj == 0.0:
                continue
            rho = v[j] + nj * x[j]
            if rho > threshold:
                new = (rho - threshold) / nj
            elif rho < -threshold:
                new = (rho + threshold) / nj
            else:
                new = 0.0
            delta = new - x[j]
            if delta != 0.0:
                x[j] = new
                # G is symmetric, so row j doubles as column j.
                for k in range(p):
                    v[k] -= G[j, k] * delta
                if delta < 0.0:
                    delta = -delta
                if delta > max_delta:
                    max_delta = delta
        if max_delta < tol:
            break
    return sweeps, max_delta


def _sweep_residual_loops(x, r, A, norms2, threshold, tol, max_sweeps):
    m, p = A.shape
    sweeps = 0
    max_delta = tol
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in range(p):
            nj = norms2[j]
            if nj == 0.0:
                continue
            rho = nj * x[j]
            for i in range(m):
                rho += A[i, j] * r[i]
            if rho > threshold:
                new = (rho - threshold) / nj
            elif rho < -threshold:
                new = (rho + threshold) / nj
            else:
                new = 0.0
            delta = new - x[j]
            if delta != 0.0:
                x[j] = new
                for i in range(m):
                    r[i] -= A[i, j] * delta
                if delta < 0.0:
                    delta = -delta
                if delta > max_delta:
                    max_delta = delta
        if max_delta < tol:
            break
    return sweeps, max_delta


def _sweep_gram_numpy(x, v, G, norms2, threshold, tol, max_sweeps):
    p = x.shape[0]
    sweeps = 0
    max_delta = tol
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in range(p):
            nj = norms2[j]
            if nj == 0.0:
                continue
            rho = v[j] + nj * x[j]
            new = _soft_threshold(rho, threshold) / nj
            delta = new - x[j]
            if delta != 0.0:
                x[j] = new
                v -= G[j] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if max_delta < tol:
            break
    return sweeps, max_delta


def _sweep_residual_numpy(x, r, A, norms2, threshold, tol, max_sweeps):
    p = A.shape[1]
    sweeps = 0
    max_delta = tol
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in range(p):
            nj = norms2[j]
            if nj == 0.0:
                continue
            rho = A[:, j] @ r + nj * x[j]
            new = _soft_threshold(rho, threshold) / nj
            delta = new - x[j]
            if delta != 0.0:
                x[j] = new
                r -= A[:, j] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if max_delta < tol:
            break
    return sweeps, max_delta


if njit is not None:
    _gram_kernel = njit(cache=True)(_sweep_gram_loops)
    _residual_kernel = njit(cache=True)(_sweep_residual_loops)
else:  # pragma: no cover - exercised only without numba
    _gram_kernel = _sweep_gram_numpy
    _residual_kernel = _sweep_residual_numpy


def lasso_solve(
    A,
    y,
    lam: float,
    tol: float = 1e-8,
    max_iter: int = 10000,
    *,
    gram: bool | None = None,
) -> LassoSolution:
    """Cyclic coordinate descent with soft-thresholding, started from zero.

    A sweep updates every coordinate once, in column order.  The solve stops
    once the largest coordinate change in a sweep falls below tol and the KKT
    residual is at most 10 * tol; hitting max_iter sweeps first returns the
    current iterate flagged as not converged.

    gram selects between Gram-matrix updates and residual updates; both run
    the identical iteration and the default picks by column count.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    y = check_values(y, expected=A.shape[0])
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")

    m, p = A.shape
    norms2 = np.einsum("ij,ij->j", A, A)
    threshold = lam / 2.0
    x = np.zeros(p)
    use_gram = p <= _GRAM_MODE_MAX_COLUMNS if gram is None else bool(gram)
    if use_gram:
        G = np.ascontiguousarray(A.T @ A)
        aty = A.T @ y
        v = aty.copy()  # tracks A^T (y - A x)
    else:
        A_cols = np.asfortranarray(A)
        r = y.copy()

    sweeps = 0
    converged = False
    while sweeps < max_iter:
        if use_gram:
            used, max_delta = _gram_kernel(x, v, G, norms2, threshold, tol, max_iter - sweeps)
        else:
            used, max_delta = _residual_kernel(x, r, A_cols, norms2, threshold, tol, max_iter - sweeps)
        sweeps += used
        if max_delta >= tol:
            break  # sweep budget exhausted mid-descent
        # Refresh the tracked gradient/residual before certifying, so
        # accumulated floating-point drift cannot fake convergence; if the
        # certificate fails, descent resumes from the refreshed state.
        if use_gram:
            v[:] = aty - G @ x
        else:
            r[:] = y - A @ x
        if kkt_residual(A, y, lam, x) <= 10.0 * tol:
            converged = True
            break

    return LassoSolution(
        coefficients=x,
        iterations=sweeps,
        objective=lasso_objective(A, y, lam, x),
        kkt_residual=kkt_residual(A, y, lam, x),
        converged=converged,
    )


def truncate_top_s(solution, parities: list[ParityIndex], sparsity: int, n: int) -> FourierExpansion:
    """Expansion of the sparsity absolutely largest coefficients.

    Ties break toward the canonically earlier parity; with fewer than sparsity
    nonzeros, all nonzeros are kept.  The parity list must be in canonical
    order and match the coefficient vector.
    """
    coefficients = solution.coefficients if isinstance(solution, LassoSolution) else np.asarray(solution, dtype=np.float64)
    if sparsity < 1:
        raise ValueError("sparsity must be at least 1")
    if len(coefficients) != len(parities):
        raise ValueError(f"{len(coefficients)} coefficients for {len(parities)} parities")
    nonzero = [k for k in range(len(parities)) if coefficients[k] != 0.0]
    nonzero.sort(key=lambda k: (-abs(coefficients[k]), k))
    kept = nonzero[:sparsity]
    return FourierExpansion(n, {parities[k]: float(coefficients[k]) for k in kept})


def _lex_smallest(candidates: np.ndarray, v: int) -> int:
    """Candidate index whose assignment is lexicographically smallest (-1 before +1).

    Coordinate t maps to bit t, with bit 1 meaning -1, so the comparison key
    makes earlier coordinates most significant and prefers set bits.
    """
    shifts = np.arange(v, dtype=np.int64)
    weights = np.int64(1) << (v - 1 - shifts)
    best_key = None
    best = None
    for start in range(0, candidates.shape[0], 1 << 20):
        chunk = candidates[start : start + (1 << 20)].astype(np.int64)
        bits = (chunk[:, None] >> shifts) & 1
        keys = ((1 - bits) * weights).sum(axis=1)
        pos = int(np.argmin(keys))
        if best_key is None or keys[pos] < best_key:
            best_key = keys[pos]
            best = int(chunk[pos])
    return best


def minimize_over_support(
    g: FourierExpansion, cap: int = MINIMIZER_VARIABLE_CAP
) -> tuple[Restriction, float]:
    """Exhaustive minimizer of g over all assignments of its support variables.

    Returns a restriction fixing exactly the variables appearing in g (others
    stay free) and the minimum value.  Ties break toward the lexicographically
    smallest assignment with -1 ordered before +1.
    """
    variables = g.variables()
    if not variables:
        return Restriction.empty(g.n), float(g.terms.get((), 0.0))
    v = len(variables)
    if v > cap:
        raise ValueError(
            f"{v} support variables exceed the enumeration cap {cap}; reduce sparsity"
        )
    position = {coord: t for t, coord in enumerate(variables)}
    coeffs = np.zeros(1 << v)
    for s, c in g.terms.items():
        mask = 0
        for i in s:
            mask |= 1 << position[i]
        coeffs[mask] += c
    values = fwht(coeffs)
    best_value = float(values.min())
    candidates = np.flatnonzero(values == values.min())
    chosen = _lex_smallest(candidates, v)
    assignment = {
        coord: (1 if (chosen >> t) & 1 == 0 else -1) for coord, t in position.items()
    }
    return Restriction(g.n, assignment), best_value
