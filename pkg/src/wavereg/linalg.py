"""Dense complex linear algebra shared by the plant, synthesis and simulation code.

Contract-checked wrappers around numpy/scipy dense kernels (solve, eig, SVD,
pseudoinverse, matrix exponential) plus the two Sylvester solvers used for
the regulator equations: a columnwise resolvent solver for diagonal harmonic
generators and an independent Kronecker-product oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

# Relative threshold below which singular values count as zero (rank tests,
# pseudoinverses).
RANK_RTOL = 1e-10

# Relative threshold on LU pivots below which a solve is refused as singular.
PIVOT_RTOL = 1e-13

# Commutator threshold certifying a matrix as normal, relative to ||A||_F^2.
NORMALITY_RTOL = 1e-12


class LinearAlgebraError(Exception):
    """Base class for numerical failures in this module."""


class SingularMatrixError(LinearAlgebraError):
    """A dense solve hit a pivot below the singularity threshold."""


class ResonanceError(LinearAlgebraError):
    """A shifted solve (i*omega - A) was numerically singular, i.e. i*omega
    lies in the spectrum of A."""

    def __init__(self, omega, message=None):
        self.omega = omega
        super().__init__(message or f"i*omega with omega={omega} is in the spectrum")


class ConvergenceError(LinearAlgebraError):
    """An iterative kernel failed to meet its residual contract."""


class OverflowCapError(LinearAlgebraError):
    """A matrix exponential or trajectory exceeded the configured growth cap."""


def as_matrix(A, name="matrix"):
    """Return ``A`` as a 2-D complex array, rejecting non-finite entries."""
    M = np.atleast_2d(np.asarray(A, dtype=complex))
    if M.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return M


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a square matrix together with the spectral abscissa.

    A negative abscissa is the finite-dimensional certificate of exponential
    stability used throughout the synthesis and simulation code.
    """

    eigenvalues: np.ndarray
    abscissa: float

    def __post_init__(self):
        if self.eigenvalues.size == 0:
            raise ValueError("empty spectrum")
        if not np.isclose(self.abscissa, np.max(self.eigenvalues.real)):
            raise ValueError("abscissa does not match the eigenvalue real parts")

    @property
    def is_stable(self):
        return self.abscissa < 0.0


@dataclass(frozen=True)
class SvdResult:
    """Singular value decomposition A = U @ diag(s) @ Vh with s nonincreasing."""

    u: np.ndarray
    singular_values: np.ndarray
    vh: np.ndarray

    def __post_init__(self):
        s = self.singular_values
        if np.any(s < 0) or np.any(np.diff(s) > 0):
            raise ValueError("singular values must be nonnegative and nonincreasing")

    def rank(self, rtol=RANK_RTOL):
        """Number of singular values above ``rtol`` times the largest one."""
        s = self.singular_values
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.count_nonzero(s > rtol * s[0]))


def svd(A):
    """Compute a validated reduced SVD of ``A``.

    Raises
    ------
    ConvergenceError
        If the reconstruction ``U s Vh`` misses ``A`` by more than
        ``RANK_RTOL`` times the largest singular value.
    """
    M = as_matrix(A)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    err = np.linalg.norm(u @ (s[:, None] * vh) - M)
    if err > RANK_RTOL * max(scale, 1.0) * max(M.shape):
        raise ConvergenceError(f"SVD reconstruction error {err:.3e} out of tolerance")
    return SvdResult(u, s, vh)


def solve_dense(A, B):
    """Solve the dense linear system ``A X = B``.

    Parameters
    ----------
    A : (n, n) array_like
        Square coefficient matrix.
    B : (n,) or (n, m) array_like
        Right-hand side vector or matrix.

    Returns
    -------
    X : ndarray
        Solution with the same trailing shape as ``B``.

    Raises
    ------
    SingularMatrixError
        If an LU pivot falls below ``PIVOT_RTOL`` times the largest pivot.
        In resolvent applications this signals that the shift lies in the
        spectrum of the matrix.
    """
    M = as_matrix(A, "A")
    n, m = M.shape
    if n != m:
        raise ValueError(f"A must be square, got shape {M.shape}")
    rhs = np.asarray(B, dtype=complex)
    if rhs.shape[0] != n:
        raise ValueError(f"B has {rhs.shape[0]} rows, expected {n}")
    with warnings.catch_warnings():
        # singularity is detected via the pivot threshold below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.max() == 0.0 or pivots.min() <= PIVOT_RTOL * pivots.max():
        ratio = pivots.min() / pivots.max() if pivots.max() > 0 else 0.0
        raise SingularMatrixError(f"matrix numerically singular (pivot ratio {ratio:.3e})")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def pinv(A, rtol=RANK_RTOL, return_rank=False):
    """Moore-Penrose pseudoinverse with relative singular value cutoff.

    Singular values below ``rtol`` times the largest one are treated as zero.
    For a surjective ``A`` the result is the minimum-norm right inverse.

    Parameters
    ----------
    A : (m, n) array_like
    rtol : float
        Relative cutoff; must be positive.
    return_rank : bool
        If True, also return the effective rank used in the inversion.
    """
    if rtol <= 0:
        raise ValueError("rtol must be positive")
    res = svd(A)
    s = res.singular_values
    rank = res.rank(rtol)
    inv_s = np.zeros_like(s)
    inv_s[:rank] = 1.0 / s[:rank]
    P = (res.vh.conj().T * inv_s) @ res.u.conj().T
    if return_rank:
        return P, rank
    return P


def effective_rank(A, rtol=RANK_RTOL):
    """Numerical rank of ``A`` relative to its largest singular value."""
    return svd(A).rank(rtol)


def eig(A):
    """Eigenvalues of a square matrix as a :class:`Spectrum`.

    The eigenpair residual ``||A v - lambda v||`` is verified against
    ``1e-8 ||A||_F`` for every returned pair.

    Raises
    ------
    ConvergenceError
        If the QR iteration fails or the residual contract is violated.
    """
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    scale = np.linalg.norm(M)
    if scale > 0:
        resid = np.linalg.norm(M @ V - V * w, axis=0).max()
        if resid > 1e-8 * scale:
            raise ConvergenceError(
                f"eigenpair residual {resid:.3e} exceeds 1e-8*||A|| = {1e-8 * scale:.3e}"
            )
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    return Spectrum(eigenvalues=w, abscissa=float(w.real.max()))


def is_normal(A, rtol=NORMALITY_RTOL):
    """Whether ``A`` commutes with its adjoint to within ``rtol``*||A||_F^2."""
    M = as_matrix(A)
    scale = np.linalg.norm(M) ** 2
    if scale == 0.0:
        return True
    return np.linalg.norm(M @ M.conj().T - M.conj().T @ M) < rtol * scale


def expm(A, t=1.0, norm_cap=1e6):
    """Matrix exponential ``exp(A t)``.

    Matrices certified normal take a unitary Schur path (diagonalize, scale
    the eigenvalues, transform back), which preserves norms of skew-adjoint
    generators to roundoff. Everything else goes through scipy's
    scaling-and-squaring Pade code.

    Raises
    ------
    OverflowCapError
        If ``||A t||_F`` exceeds ``norm_cap`` or the result is non-finite.
    """
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if np.linalg.norm(M) * abs(t) > norm_cap:
        raise OverflowCapError(f"||A t|| exceeds the cap {norm_cap:.3e}")
    if is_normal(M):
        T, Z = scipy.linalg.schur(M, output="complex")
        E = (Z * np.exp(np.diag(T) * t)) @ Z.conj().T
    else:
        E = scipy.linalg.expm(M * t)
    if not np.all(np.isfinite(E)):
        raise OverflowCapError("matrix exponential overflowed")
    return E


def sylvester_diag(Ae, Be, omegas):
    """Solve ``Sigma S = Ae Sigma + Be`` for ``S = diag(i*omega_k)``.

    Applied to the k-th Euclidean basis vector the equation decouples into
    the resolvent solves ``(i*omega_k - Ae) Sigma_k = Be_k``, which is how
    the columns are computed here.

    Parameters
    ----------
    Ae : (n, n) array_like
    Be : (n, q) array_like
        One column per frequency.
    omegas : sequence of float
        Real frequencies; ``i*omega_k`` must avoid the spectrum of ``Ae``.

    Returns
    -------
    Sigma : (n, q) ndarray

    Raises
    ------
    ResonanceError
        If some ``i*omega_k - Ae`` is numerically singular.
    ConvergenceError
        If the assembled residual violates
        ``1e-8 (||Ae|| ||Sigma|| + ||Be||)``.
    """
    M = as_matrix(Ae, "Ae")
    R = as_matrix(Be, "Be")
    om = np.asarray(omegas, dtype=float)
    if R.shape != (M.shape[0], om.size):
        raise ValueError(f"Be must have shape {(M.shape[0], om.size)}, got {R.shape}")
    n = M.shape[0]
    Sigma = np.empty((n, om.size), dtype=complex)
    eye = np.eye(n)
    for k, w in enumerate(om):
        try:
            Sigma[:, k] = solve_dense(1j * w * eye - M, R[:, k])
        except SingularMatrixError as exc:
            raise ResonanceError(w) from exc
    resid = np.linalg.norm(Sigma * (1j * om) - M @ Sigma - R)
    bound = 1e-8 * (np.linalg.norm(M) * np.linalg.norm(Sigma) + np.linalg.norm(R))
    if resid > bound:
        raise ConvergenceError(
            f"Sylvester residual {resid:.3e} exceeds scaled tolerance {bound:.3e}"
        )
    return Sigma


def sylvester_kron(Ae, Be, omegas):
    """Brute-force Kronecker-product solve of ``Sigma S = Ae Sigma + Be``.

    Vectorizes the equation into ``(S kron I - I kron Ae) vec(Sigma) =
    vec(Be)`` and solves it as one dense system. Only intended for tests and
    small instances; serves as the independent oracle for
    :func:`sylvester_diag`.
    """
    M = as_matrix(Ae, "Ae")
    R = as_matrix(Be, "Be")
    om = np.asarray(omegas, dtype=float)
    if R.shape != (M.shape[0], om.size):
        raise ValueError(f"Be must have shape {(M.shape[0], om.size)}, got {R.shape}")
    n, q = R.shape
    S = np.diag(1j * om)
    big = np.kron(S, np.eye(n)) - np.kron(np.eye(q), M)
    try:
        vec = solve_dense(big, R.flatten(order="F"))
    except SingularMatrixError as exc:
        raise ResonanceError(om, "some i*omega_k is in the spectrum of Ae") from exc
    return vec.reshape((n, q), order="F")


def match_spectra(first, second):
    """Largest pairwise distance of two eigenvalue multisets under optimal
    matching (Hungarian assignment on absolute differences).

    Sorting complex eigenvalues is unreliable when real parts are nearly
    degenerate, so similarity-invariance checks go through the assignment.
    """
    a = np.asarray(first, dtype=complex).ravel()
    b = np.asarray(second, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError("eigenvalue multisets must have equal size")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def operator_norm(A):
    """Largest singular value of ``A`` and a maximizing unit input vector.

    Returns
    -------
    sigma_max : float
    v_max : ndarray
        Unit vector with ``||A v_max|| = sigma_max``.
    """
    M = as_matrix(A)
    if not M.any():
        raise ValueError("operator_norm of the zero matrix is ill-posed")
    res = svd(M)
    return float(res.singular_values[0]), res.vh[0].conj()
