"""Dense linear algebra kernels: norms, singular values, dominant eigenpairs.

Singular values go through the Gram matrix of the smaller dimension and a
cyclic Jacobi eigensolver, so a tall-and-thin feature matrix (the common case
here) costs one small dense eigenproblem. The Jacobi sweeps use a round-robin
tournament ordering: every sweep visits each index pair exactly once, and the
rotations inside one round act on disjoint pairs, so they commute and can be
applied together as a single orthogonal update.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceFailure, DegenerateSpectrum, InvalidParameter
from .validation import as_matrix, as_square_matrix, as_vector, require_length

JACOBI_SWEEP_LIMIT = 60
# Off-diagonal Frobenius mass below this multiple of the diagonal mass counts
# as converged.
JACOBI_OFF_TOL = 1e-14

POWER_TOL = 1e-12
POWER_MAX_ITER = 100_000


def frobenius_norm(m) -> float:
    """Square root of the sum of squared entries."""
    m = as_matrix(m)
    return math.sqrt(float(np.sum(m * m)))


def _vec_norm(v: np.ndarray) -> float:
    return math.sqrt(float(v @ v))


def pow2_scale(m) -> float:
    """Power of two bracketing the largest entry magnitude (1.0 for zero).

    Division by this scale is exact in IEEE-754, so scale-invariant
    quantities computed from the scaled matrix are bitwise identical to the
    unscaled computation whenever the latter stays in range, and remain
    finite when it does not.
    """
    peak = float(np.max(np.abs(m)))
    if peak == 0.0:
        return 1.0
    return math.ldexp(1.0, min(math.frexp(peak)[1], 1023))


def _round_robin_rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # Circle-method tournament schedule. For odd n a bye slot is added and
    # pairs touching it are dropped, so every round still holds disjoint
    # pairs and a full cycle of rounds covers each pair exactly once.
    m = n if n % 2 == 0 else n + 1
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigenvalues(sym, sweep_limit: int = JACOBI_SWEEP_LIMIT) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, descending.

    Raises ConvergenceFailure if the off-diagonal mass has not dropped below
    ``JACOBI_OFF_TOL`` times the diagonal mass within ``sweep_limit`` sweeps.
    """
    a = as_square_matrix(sym, "symmetric matrix").copy()
    n = a.shape[0]
    if n == 1:
        return a[0, :1].copy()
    rounds = _round_robin_rounds(n)
    eye_mask = np.eye(n, dtype=bool)
    for _ in range(sweep_limit):
        diag = np.diag(a)
        off_sq = float(np.sum(a[~eye_mask] ** 2))
        diag_sq = float(diag @ diag)
        if math.sqrt(off_sq) <= JACOBI_OFF_TOL * math.sqrt(diag_sq):
            return np.sort(diag)[::-1].copy()
        for ps, qs in rounds:
            apq = a[ps, qs]
            live = apq != 0.0
            if not live.all():
                if not live.any():
                    continue
                ps, qs, apq = ps[live], qs[live], apq[live]
            diag = a.diagonal()
            tau = (diag[qs] - diag[ps]) / (2.0 * apq)
            t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # One orthogonal update per round: the disjoint 2x2 rotations
            # form a single plane-rotation matrix.
            j = np.eye(n)
            j[ps, ps] = c
            j[qs, qs] = c
            j[ps, qs] = s
            j[qs, ps] = -s
            a = (j.T @ a) @ j
        a = (a + a.T) * 0.5
    raise ConvergenceFailure(
        f"Jacobi eigensolver did not converge within {sweep_limit} sweeps"
    )


def singular_values(m) -> np.ndarray:
    """All singular values, descending.

    Computed as square roots of the eigenvalues of the smaller Gram matrix;
    eigenvalues pushed slightly negative by rounding are clamped to zero.
    The matrix is prescaled by an exact power of two so the squared entries
    of the Gram matrix cannot overflow for huge feature values.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    scale = pow2_scale(m)
    if scale != 1.0:
        m = m / scale
    gram = m @ m.T if rows <= cols else m.T @ m
    gram = (gram + gram.T) * 0.5
    vals = jacobi_eigenvalues(gram)
    return np.sqrt(np.maximum(vals, 0.0)) * scale


def spectral_norm(m) -> float:
    """Largest singular value."""
    return float(singular_values(m)[0])


def _sign_fix(v: np.ndarray) -> np.ndarray:
    for x in v:
        if x != 0.0:
            return -v if x < 0.0 else v
    return v


def power_iteration(
    a,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    start=None,
) -> tuple[float, np.ndarray]:
    """Dominant eigenpair by normalized power iteration.

    Returns ``(eigenvalue, unit eigenvector)`` once the Rayleigh residual
    satisfies ``||A v - lambda v|| <= tol * |lambda|``; the eigenvector's
    first nonzero component is made positive. The default start is the
    normalized all-ones vector; if the iterate is ever annihilated exactly,
    the iteration restarts from the next standard basis vector (a zero matrix
    legitimately returns eigenvalue 0). Requires a real dominant eigenvalue,
    simple in magnitude; complex or tied dominant pairs exhaust ``max_iter``.
    """
    a = as_square_matrix(a)
    n = a.shape[0]
    if not tol >= 0.0:
        raise InvalidParameter(f"tol must be >= 0, got {tol}")
    if max_iter < 1:
        raise InvalidParameter(f"max_iter must be >= 1, got {max_iter}")
    if start is None:
        v = np.full(n, 1.0 / math.sqrt(n))
    else:
        v = as_vector(start, "start")
        require_length(v, n, "start")
        nv = _vec_norm(v)
        if nv == 0.0:
            raise InvalidParameter("start vector must be nonzero")
        v = v / nv
    next_basis = 0
    for _ in range(max_iter):
        w = a @ v
        nw = _vec_norm(w)
        if nw == 0.0:
            while next_basis < n:
                e = np.zeros(n)
                e[next_basis] = 1.0
                next_basis += 1
                if _vec_norm(a @ e) != 0.0:
                    v = e
                    break
            else:
                # Every basis vector is annihilated: the matrix is zero and
                # (0, v) is an exact eigenpair.
                return 0.0, _sign_fix(v)
            continue
        lam = float(v @ w)
        if _vec_norm(w - lam * v) <= tol * abs(lam):
            return lam, _sign_fix(v)
        v = w / nw
    raise ConvergenceFailure(
        f"power iteration did not meet tol={tol} within {max_iter} iterations"
    )


def spectral_gap(a, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """|second eigenvalue| / |dominant eigenvalue|, via one deflation step.

    The dominant right and left eigenpairs are found by power iteration, the
    dominant term ``lambda1 * u v^T`` (with ``v^T u = 1``) is subtracted, and
    power iteration runs again on the deflated matrix from an alternating
    start vector (the all-ones start is annihilated exactly when the
    dominant right eigenvector is constant, as for row-stochastic matrices).
    A deflated matrix with negligible mass means the spectrum past the
    dominant eigenvalue is zero, so the gap is 0.
    """
    a = as_square_matrix(a)
    n = a.shape[0]
    lam1, u = power_iteration(a, tol, max_iter)
    if lam1 == 0.0:
        raise DegenerateSpectrum("dominant eigenvalue is zero; gap undefined")
    if n == 1:
        return 0.0
    lam_left, v_left = power_iteration(a.T, tol, max_iter)
    dot = float(v_left @ u)
    if abs(dot) < 1e-300:
        raise DegenerateSpectrum("left and right dominant eigenvectors are orthogonal")
    v = v_left / dot
    b = a - lam1 * np.outer(u, v)
    if frobenius_norm(b) <= 1e-12 * abs(lam1):
        return 0.0
    alt = np.empty(n)
    alt[0::2] = 1.0
    alt[1::2] = -1.0
    alt /= _vec_norm(alt)
    lam2, _ = power_iteration(b, tol, max_iter, start=alt)
    return abs(lam2) / abs(lam1)
