"""Dense real linear-algebra kernel used throughout the toolkit.

Eigenvalues, definiteness tests, Lyapunov and Riccati solves, the matrix
exponential, and symmetric generalized eigenvalue extraction, all as pure
functions over numpy arrays.  Every solver verifies its own output (residual
or spectrum check) before returning, so downstream synthesis code can treat
a returned matrix as a certificate.

The heavy lifting is delegated to LAPACK through numpy/scipy; this module
adds the input contracts, the residual verification, and a Newton-Kleinman
polish for the Riccati solve.
"""

import numpy as np
import scipy.linalg as sla

# Relative asymmetry accepted before an input is rejected as non-symmetric.
SYMMETRY_RTOL = 1e-9
# Tolerance for the eigenvalue-pair condition of the Lyapunov equation.
EIG_PAIR_TOL = 1e-8
# Residual acceptance thresholds, relative to 1 + ||rhs||_max.
LYAPUNOV_RESIDUAL_RTOL = 1e-8
CARE_RESIDUAL_RTOL = 1e-7
# PBH rank cutoff: smallest singular value below this fraction of the largest
# marks a mode as uncontrollable.
PBH_RTOL = 1e-8

__all__ = [
    "eigenvalues",
    "expm",
    "is_positive_definite",
    "max_generalized_eigenvalue",
    "solve_care",
    "solve_lyapunov",
    "uncontrollable_modes",
]


def _as_square(m, name="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _as_matrix(m, name="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _symmetrize(m, name="matrix"):
    """Return the symmetric part of `m`, rejecting asymmetry beyond tolerance."""
    m = _as_square(m, name)
    scale = max(1.0, np.abs(m).max())
    asym = np.abs(m - m.T).max()
    if asym > SYMMETRY_RTOL * scale:
        raise ValueError(
            f"{name} is not symmetric: max asymmetry {asym:.3e} "
            f"exceeds {SYMMETRY_RTOL:.1e} * {scale:.3e}"
        )
    return (m + m.T) / 2.0


def eigenvalues(m):
    """All eigenvalues of a square real matrix, with multiplicity.

    Returns a complex ndarray of length n.  Ordering is unspecified;
    consumers must use order-insensitive reductions (min real part,
    max modulus, sorted comparison).
    """
    m = _as_square(m)
    try:
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:  # QR iteration failed to converge
        raise ValueError(f"eigenvalue iteration did not converge: {exc}") from exc


def is_positive_definite(m):
    """Test a symmetric matrix for positive definiteness.

    Returns ``(verdict, certificate)`` where the certificate is the smallest
    eigenvalue of the symmetrized input (positive iff the verdict is True).
    Raises ValueError if the input is asymmetric beyond tolerance.
    """
    m = _symmetrize(m)
    certificate = float(np.linalg.eigvalsh(m)[0])
    try:
        np.linalg.cholesky(m)
        verdict = True
    except np.linalg.LinAlgError:
        verdict = False
    return verdict, certificate


def solve_lyapunov(a, c):
    """Solve the Lyapunov equation  a^T X + X a = c  for symmetric c.

    The solution exists and is unique iff no two eigenvalues of `a` sum to
    zero; that condition is checked up front.  The result is symmetrized and
    its residual verified against ``LYAPUNOV_RESIDUAL_RTOL * (1 + ||c||)``
    in the entrywise max norm.
    """
    a = _as_square(a, "a")
    c = _symmetrize(c, "c")
    if a.shape != c.shape:
        raise ValueError(f"dimension mismatch: a is {a.shape}, c is {c.shape}")
    lam = eigenvalues(a)
    scale = 1.0 + np.abs(lam).max()
    pair_sums = np.abs(lam[:, None] + lam[None, :])
    if pair_sums.min() <= EIG_PAIR_TOL * scale:
        raise ValueError(
            "Lyapunov equation is singular: eigenvalues of `a` contain a pair "
            "summing to zero (solution not unique)"
        )
    # scipy solves a x + x a^H = q; transpose to get a^T X + X a = c.
    x = sla.solve_continuous_lyapunov(a.T, c)
    x = (x + x.T) / 2.0
    residual = np.abs(a.T @ x + x @ a - c).max()
    bound = LYAPUNOV_RESIDUAL_RTOL * (1.0 + np.abs(c).max())
    if residual > bound:
        raise ValueError(
            f"Lyapunov residual {residual:.3e} exceeds {bound:.3e}; "
            "input is numerically pathological"
        )
    return x


def uncontrollable_modes(a, b, rtol=PBH_RTOL):
    """Uncontrollable eigenvalues of the pair (a, b) by the PBH test.

    For each eigenvalue lambda of `a` the smallest singular value of
    ``[lambda I - a, b]`` is compared against ``rtol`` times the largest;
    eigenvalues failing the rank test are returned (with multiplicity).
    """
    a = _as_square(a, "a")
    b = _as_matrix(b, "b")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: a is {a.shape}, b is {b.shape}")
    n = a.shape[0]
    modes = []
    for lam in eigenvalues(a):
        pencil = np.hstack([lam * np.eye(n) - a, b.astype(complex)])
        sv = np.linalg.svd(pencil, compute_uv=False)
        if sv[-1] < rtol * sv[0]:
            modes.append(complex(lam))
    return modes


def solve_care(a, b, w, newton_steps=8):
    """Stabilizing solution of  a^T X + X a - X b b^T X + w = 0.

    `w` must be symmetric positive definite and (a, b) stabilizable.  The
    Schur-based scipy solution is polished by Newton-Kleinman iteration
    (one Lyapunov solve per step) until the entrywise-max residual drops
    below ``CARE_RESIDUAL_RTOL * (1 + ||w||)``.  The returned X is verified
    symmetric positive definite with ``a - b b^T X`` Hurwitz.
    """
    a = _as_square(a, "a")
    b = _as_matrix(b, "b")
    w = _symmetrize(w, "w")
    if b.shape[0] != a.shape[0] or w.shape != a.shape:
        raise ValueError(
            f"dimension mismatch: a is {a.shape}, b is {b.shape}, w is {w.shape}"
        )
    ok, cert = is_positive_definite(w)
    if not ok:
        raise ValueError(f"w is not positive definite (smallest eigenvalue {cert:.3e})")
    unstable = [m for m in uncontrollable_modes(a, b) if m.real >= 0]
    if unstable:
        raise ValueError(
            f"(a, b) is not stabilizable: uncontrollable unstable modes {unstable}; "
            "no stabilizing Riccati solution exists"
        )
    try:
        x = sla.solve_continuous_are(a, b, w, np.eye(b.shape[1]))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ValueError(f"Riccati solve failed: {exc}") from exc
    x = (x + x.T) / 2.0
    bbt = b @ b.T
    bound = CARE_RESIDUAL_RTOL * (1.0 + np.abs(w).max())
    for _ in range(newton_steps):
        residual = np.abs(a.T @ x + x @ a - x @ bbt @ x + w).max()
        if residual <= 0.01 * bound:
            break
        acl = a - bbt @ x
        # Newton-Kleinman step: acl^T X+ + X+ acl = -(w + X bbt X).
        x = solve_lyapunov(acl, -(w + x @ bbt @ x))
    residual = np.abs(a.T @ x + x @ a - x @ bbt @ x + w).max()
    if residual > bound:
        raise ValueError(
            f"Riccati residual {residual:.3e} exceeds {bound:.3e} after refinement"
        )
    ok, cert = is_positive_definite(x)
    if not ok:
        raise ValueError(
            f"Riccati solution is not positive definite (smallest eigenvalue {cert:.3e})"
        )
    closed_loop = eigenvalues(a - bbt @ x)
    if closed_loop.real.max() >= 0:
        raise ValueError(
            "Riccati solution is not stabilizing: closed-loop spectral abscissa "
            f"{closed_loop.real.max():.3e} >= 0"
        )
    return x


def expm(m):
    """Matrix exponential via scaling-and-squaring with Pade approximants."""
    m = _as_square(m)
    with np.errstate(over="ignore", invalid="ignore"):
        result = sla.expm(m)
    if not np.all(np.isfinite(result)):
        raise OverflowError(
            f"matrix exponential overflowed for input with max-norm {np.abs(m).max():.3e}"
        )
    return result


def max_generalized_eigenvalue(q1, q2):
    """Largest lambda with  q2 v = lambda q1 v  for SPD q1, q2.

    Equals the largest eigenvalue of ``inv(q1) @ q2``.  Computed by Cholesky
    reduction of the symmetric-definite pencil (factor q1, transform q2), so
    the result is a real positive scalar with no complex round-off.
    """
    q1 = _symmetrize(q1, "q1")
    q2 = _symmetrize(q2, "q2")
    if q1.shape != q2.shape:
        raise ValueError(f"dimension mismatch: q1 is {q1.shape}, q2 is {q2.shape}")
    for name, q in (("q1", q1), ("q2", q2)):
        ok, cert = is_positive_definite(q)
        if not ok:
            raise ValueError(
                f"{name} is not positive definite (smallest eigenvalue {cert:.3e})"
            )
    return float(sla.eigh(q2, q1, eigvals_only=True)[-1])
