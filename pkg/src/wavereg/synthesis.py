"""Internal-model controller synthesis and verification.

Implements the three controller families for the pre-stabilized plant: the
minimal regulating controller (one internal-model copy per frequency, no
robustness), the finite-dimensional approximate robust controller (internal
model on a truncated output space Y_N), and the robust controller (internal
model on the full discretized output space). Also provides the transfer
function evaluation all syntheses are driven by, the algebraic internal-model
test (trivial kernel of G2, trivial range intersections with i w - G1), the
regulator-equation solver and the asymptotic tracking-error bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import ResonanceError, SingularMatrixError

# A frequency response P_N P_s(i w) counts as surjective when its smallest
# singular value exceeds this fraction of the largest.
SURJECTIVITY_RTOL = 1e-8


class RangeViolationError(RuntimeError):
    """The target vector y_k is not in the range of P_s(i w_k); the
    regulation problem is unsolvable for this plant/exosystem pair."""


class RankDeficiencyError(RuntimeError):
    """P_N P_s(i w_k) is not surjective onto the truncated output space."""


@dataclass(frozen=True)
class Controller:
    """Internal-model error-feedback controller (G1, G2, K, Q).

    The dynamics are z' = G1 z + G2 (y - y_ref), u = K z - Q (y - y_ref).
    ``G1`` is block diagonal with blocks i w_k I of size ``block_dim`` and
    ``K = eps * K0`` with the unscaled gain ``K0`` kept for diagnostics.
    ``selector`` maps output coefficients onto the internal-model copy space
    Y_N (None for the minimal regulating controller whose copies are scalar).
    """

    kind: str
    omegas: np.ndarray
    block_dim: int
    G1: np.ndarray
    G2: np.ndarray
    K: np.ndarray
    K0: np.ndarray
    Q: np.ndarray
    eps: float
    selector: np.ndarray | None = None

    def __post_init__(self):
        q = self.omegas.size
        dim_z = q * self.block_dim
        if self.G1.shape != (dim_z, dim_z):
            raise ValueError(f"G1 must be {dim_z}x{dim_z}")
        expected = np.zeros((dim_z, dim_z), dtype=complex)
        for k, w in enumerate(self.omegas):
            blk = slice(k * self.block_dim, (k + 1) * self.block_dim)
            expected[blk, blk] = 1j * w * np.eye(self.block_dim)
        if not np.array_equal(self.G1, expected):
            raise ValueError("G1 must be exactly block diagonal with blocks i*w_k*I")
        if self.G2.shape[0] != dim_z or self.K.shape[1] != dim_z:
            raise ValueError("G2/K dimensions inconsistent with G1")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    @property
    def dim_z(self):
        return self.G1.shape[0]

    @property
    def dim_y(self):
        return self.G2.shape[1]

    def projector(self):
        """Orthogonal projector of Y onto Y_N (identity for full-space copies)."""
        if self.selector is None:
            return np.eye(self.dim_y)
        return self.selector.T @ self.selector


@dataclass(frozen=True)
class GReport:
    """Result of the internal-model (G-condition) test."""

    kernel_dim_G2: int
    max_range_intersection_dim: int
    passed: bool


@dataclass(frozen=True)
class RegulatorSolution:
    """Solution Sigma = (Pi, Gamma) of the Sylvester regulator equation.

    ``residual1`` is the defect of Sigma S = A_e Sigma + B_e and
    ``residual2`` the spectral norm of C_e Sigma + D_e, which vanishes
    exactly when the controller regulates (on Y) and whose square is the
    asymptotic windowed-error bound otherwise.
    """

    Sigma: np.ndarray
    Pi: np.ndarray
    Gamma: np.ndarray
    residual1: float
    residual2: float


@dataclass(frozen=True)
class ErrorBound:
    """Asymptotic windowed tracking-error bound.

    ``delta`` is the squared operator norm of C_e Sigma + D_e achieved by the
    unit vector ``v_max``; ``delta_coarse`` is the per-frequency upper bound
    that avoids the maximizer.
    """

    delta: float
    v_max: np.ndarray
    delta_coarse: float

    def __post_init__(self):
        if self.delta > self.delta_coarse * (1.0 + 1e-9) + 1e-15:
            raise ValueError("delta must not exceed delta_coarse")


def stabilized_generator(plant, R1=None, Q=None):
    """Generator of the pre-stabilized plant A - B R1 Q C.

    With the defaults this is the plant's own damped generator; explicit
    ``R1``/``Q`` support input restrictions other than the identity.
    """
    if R1 is None and Q is None:
        return plant.As
    R1m = np.eye(plant.output_dim) if R1 is None else np.asarray(R1)
    Qm = plant.Q_feedback * np.eye(plant.output_dim) if Q is None else np.asarray(Q)
    return plant.A - plant.B @ R1m @ (Qm @ plant.C)


def eval_transfer(As, B, C, lam, R1=None):
    """Transfer function P_s(lambda) = C (lambda - A_s)^{-1} B R1 of the
    pre-stabilized plant with bounded modal input.

    Raises
    ------
    ResonanceError
        If ``lambda`` lies in the spectrum of ``As`` within the solver
        tolerance.
    """
    n = As.shape[0]
    Bin = B if R1 is None else B @ R1
    try:
        X = linalg.solve_dense(lam * np.eye(n) - As, Bin)
    except SingularMatrixError as exc:
        raise ResonanceError(lam, f"lambda={lam} is in the spectrum of As") from exc
    return C @ X


def transfer_paper_form(As, B, C, lam, R1=None):
    """P_s(lambda) through the boundary-system formula
    C (lambda - A_s)^{-1} (Alpha B_s - lambda B_s) + C B_s, with the modal
    stand-ins B_s = B and Alpha B_s = (A_s + I) B (the right-inverse identity
    of the stabilized input map absorbed into the generator action).

    Algebraically identical to :func:`eval_transfer`; kept as an independent
    evaluation path for cross-validation.
    """
    n = As.shape[0]
    try:
        X = linalg.solve_dense(lam * np.eye(n) - As, (As + np.eye(n)) @ B - lam * B)
    except SingularMatrixError as exc:
        raise ResonanceError(lam, f"lambda={lam} is in the spectrum of As") from exc
    P0 = C @ X + C @ B
    return P0 if R1 is None else P0 @ R1


def _frequency_data(plant, exo, R1, R2):
    """Per-frequency transfer values and the composite disturbance map E_s.

    Returns (P0_list, Ps_list, E_s, Q, R1) with P0 = C (iw - A_s)^{-1} B and
    P_s = P0 R1, plus E_s = R2 E - R1 Q F. A non-identity R1 also enters the
    pre-stabilized generator (the damper acts through the same restriction).
    """
    dim_u = plant.output_dim
    R1m = np.eye(dim_u) if R1 is None else np.asarray(R1, dtype=float)
    R2m = np.eye(dim_u) if R2 is None else np.asarray(R2, dtype=float)
    Q = plant.Q_feedback * np.eye(dim_u)
    As = stabilized_generator(plant) if R1 is None else stabilized_generator(plant, R1m, Q)
    P0s, Pss = [], []
    for w in exo.omegas:
        P0 = eval_transfer(As, plant.B, plant.C, 1j * w)
        P0s.append(P0)
        Pss.append(P0 @ R1m)
    E_s = R2m @ exo.E - R1m @ (Q @ exo.F)
    return P0s, Pss, E_s, Q, R1m


def _internal_model_G1(omegas, block_dim):
    q = omegas.size
    G1 = np.zeros((q * block_dim, q * block_dim), dtype=complex)
    for k, w in enumerate(omegas):
        blk = slice(k * block_dim, (k + 1) * block_dim)
        G1[blk, blk] = 1j * w * np.eye(block_dim)
    return G1


def synth_regulating(plant, exo, eps, R1=None, R2=None):
    """Minimal regulating controller with one scalar copy per frequency.

    The gain columns u_k solve P_s(i w_k) u_k = y_k for the frequency targets
    y_k = -P_0(i w_k) E_s phi_k - F phi_k (minimum-norm solution); for a zero
    target the column falls back to the top right singular direction of
    P_s(i w_k), which is guaranteed outside its kernel. The injection rows
    are G2_k = -(P_s(i w_k) u_k)^*.

    Raises
    ------
    RangeViolationError
        If some y_k is not in the range of P_s(i w_k) numerically, in which
        case no controller of this structure can regulate.
    """
    P0s, Pss, E_s, Q, _ = _frequency_data(plant, exo, R1, R2)
    q = exo.q
    dim_u = Pss[0].shape[1]
    dim_y = plant.output_dim
    K0 = np.zeros((dim_u, q), dtype=complex)
    G2 = np.zeros((q, dim_y), dtype=complex)
    for k in range(q):
        y_k = -(P0s[k] @ E_s[:, k] + exo.F[:, k])
        scale = np.linalg.norm(P0s[k] @ E_s + exo.F) + 1.0
        if np.linalg.norm(y_k) > 1e-13 * scale:
            u_k = linalg.pinv(Pss[k]) @ y_k
            resid = np.linalg.norm(Pss[k] @ u_k - y_k)
            if resid > 1e-8 * np.linalg.norm(y_k):
                raise RangeViolationError(
                    f"y_k outside range of P_s(i*{exo.omegas[k]}): residual {resid:.3e}"
                )
        else:
            _, u_k = linalg.operator_norm(Pss[k])
        K0[:, k] = u_k
        G2[k, :] = -(Pss[k] @ u_k).conj()
    return Controller(
        kind="regulating",
        omegas=exo.omegas,
        block_dim=1,
        G1=_internal_model_G1(exo.omegas, 1),
        G2=G2,
        K=eps * K0,
        K0=K0,
        Q=Q,
        eps=float(eps),
        selector=None,
    )


def synth_approx_robust(plant, exo, N, eps, R1=None, R2=None):
    """Approximate robust controller with internal model on Y_N.

    Y_N is the span of the output-basis functions up to angular order ``N``
    (dimension 2N + 1), P_N the corresponding coordinate projection. Each
    gain block is the minimum-norm right inverse K0_k = (P_N P_s(i w_k))^+,
    each injection block is -P_N, which places the internal-model loop gains
    P_N P_s(i w_k) K0_k exactly at the identity and so satisfies the
    stability spectrum condition with eigenvalues -1.

    Raises
    ------
    RankDeficiencyError
        If some P_N P_s(i w_k) fails the surjectivity test (smallest singular
        value below ``SURJECTIVITY_RTOL`` times the largest).
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    dim_y = plant.output_dim
    dim_yn = 2 * N + 1
    if dim_yn > dim_y:
        raise ValueError(f"2N+1 = {dim_yn} exceeds the output dimension {dim_y}")
    _, Pss, _, Q, _ = _frequency_data(plant, exo, R1, R2)
    selector = np.eye(dim_y)[:dim_yn]
    q = exo.q
    dim_u = Pss[0].shape[1]
    K0 = np.zeros((dim_u, q * dim_yn), dtype=complex)
    G2 = np.zeros((q * dim_yn, dim_y), dtype=complex)
    for k in range(q):
        PNPs = selector @ Pss[k]
        svd = linalg.svd(PNPs)
        s = svd.singular_values
        if s[-1] <= SURJECTIVITY_RTOL * s[0]:
            raise RankDeficiencyError(
                f"P_N P_s(i*{exo.omegas[k]}) not surjective: sigma_min/sigma_max "
                f"= {s[-1] / s[0]:.3e}"
            )
        blk = slice(k * dim_yn, (k + 1) * dim_yn)
        K0[:, blk] = linalg.pinv(PNPs)
        G2[blk, :] = -selector
    return Controller(
        kind="approx",
        omegas=exo.omegas,
        block_dim=dim_yn,
        G1=_internal_model_G1(exo.omegas, dim_yn),
        G2=G2,
        K=eps * K0,
        K0=K0,
        Q=Q,
        eps=float(eps),
        selector=selector,
    )


def synth_robust(plant, exo, eps, R1=None, R2=None):
    """Robust controller: internal model on the full discretized output space.

    Identical to :func:`synth_approx_robust` with Y_N = Y; with the
    pseudoinverse gain choice the general injection -(P_s(i w_k) K0_k)^*
    reduces to -I on Y.
    """
    ctrl = synth_approx_robust(plant, exo, plant.basis.max_order, eps, R1=R1, R2=R2)
    return Controller(
        kind="robust",
        omegas=ctrl.omegas,
        block_dim=ctrl.block_dim,
        G1=ctrl.G1,
        G2=ctrl.G2,
        K=ctrl.K,
        K0=ctrl.K0,
        Q=ctrl.Q,
        eps=ctrl.eps,
        selector=ctrl.selector,
    )


def check_g_conditions(ctrl, rtol=linalg.RANK_RTOL):
    """Test the two internal-model conditions of the controller.

    The controller contains an internal model iff G2 has trivial kernel and
    the ranges of (i w_k - G1) and G2 intersect trivially for every
    frequency. Ranks are SVD ranks at the given relative tolerance;
    intersection dimensions come from rank subadditivity
    dim(R(A) cap R(B)) = rank(A) + rank(B) - rank([A, B]).
    """
    dim_z = ctrl.dim_z
    rank_g2 = linalg.effective_rank(ctrl.G2, rtol)
    kernel_dim = ctrl.dim_y - rank_g2
    max_inter = 0
    for w in ctrl.omegas:
        A1 = 1j * w * np.eye(dim_z) - ctrl.G1
        r1 = linalg.effective_rank(A1, rtol)
        r12 = linalg.effective_rank(np.hstack([A1, ctrl.G2]), rtol)
        max_inter = max(max_inter, r1 + rank_g2 - r12)
    return GReport(
        kernel_dim_G2=kernel_dim,
        max_range_intersection_dim=max_inter,
        passed=(kernel_dim == 0 and max_inter == 0),
    )


def solve_regulator(closed_loop, exo):
    """Solve the regulator Sylvester equation of the assembled closed loop.

    Returns the partitioned solution along with the Sylvester defect
    (residual1, spectral norm, scaled check inside the solver) and the
    regulation defect residual2 = ||C_e Sigma + D_e||.
    """
    Sigma = linalg.sylvester_diag(closed_loop.Acl, closed_loop.Bcl, exo.omegas)
    n_p = closed_loop.plant_dim
    resid1 = np.linalg.norm(
        Sigma * (1j * exo.omegas) - closed_loop.Acl @ Sigma - closed_loop.Bcl, 2
    )
    resid2 = np.linalg.norm(closed_loop.Ccl @ Sigma + closed_loop.Dcl, 2)
    return RegulatorSolution(
        Sigma=Sigma,
        Pi=Sigma[:n_p],
        Gamma=Sigma[n_p:],
        residual1=float(resid1),
        residual2=float(resid2),
    )


def error_bound_delta(reg_sol, closed_loop, P_N):
    """Asymptotic windowed-error bound of the closed loop.

    ``delta`` is the squared norm of the residual operator C_e Sigma + D_e
    together with its maximizing unit vector; ``delta_coarse`` sums the
    squared (I - P_N)-tails of the per-frequency synthesis vectors
    P_s(i w_k) K z_k + P_0(i w_k) E_s phi_k + F phi_k with z_k the
    internal-model columns of the regulator solution.
    """
    plant, ctrl, exo = closed_loop.plant, closed_loop.ctrl, closed_loop.exo
    M_err = closed_loop.Ccl @ reg_sol.Sigma + closed_loop.Dcl
    sigma_max, v_max = linalg.operator_norm(M_err)
    delta = sigma_max**2
    P0s, Pss, E_s, _, _ = _frequency_data(plant, exo, closed_loop.R1, closed_loop.R2)
    tail = np.eye(plant.output_dim) - P_N
    coarse = 0.0
    for k in range(exo.q):
        z_k = reg_sol.Gamma[:, k]
        term = Pss[k] @ (ctrl.K @ z_k) + P0s[k] @ E_s[:, k] + exo.F[:, k]
        coarse += float(np.linalg.norm(tail @ term) ** 2)
    return ErrorBound(delta=float(delta), v_max=v_max, delta_coarse=coarse)


def gamma_closed_form(plant, ctrl, exo, R1=None, R2=None):
    """Internal-model block of the regulator solution in closed form.

    For the approximate/robust families the solution applied to phi_k is
    supported on the k-th copy and equals
    -eps^{-1} (P_N P_s(i w_k) K0_k)^{-1} P_N (P_0(i w_k) E_s + F) phi_k.
    Used to cross-check the Sylvester solver.
    """
    if ctrl.selector is None:
        raise ValueError("closed form requires a projection-structured controller")
    P0s, Pss, E_s, _, _ = _frequency_data(plant, exo, R1, R2)
    bd = ctrl.block_dim
    Gamma = np.zeros((ctrl.dim_z, exo.q), dtype=complex)
    for k in range(exo.q):
        blk = slice(k * bd, (k + 1) * bd)
        loop_gain = ctrl.selector @ Pss[k] @ ctrl.K0[:, blk]
        rhs = ctrl.selector @ (P0s[k] @ E_s[:, k] + exo.F[:, k])
        Gamma[blk, k] = -linalg.solve_dense(loop_gain, rhs) / ctrl.eps
    return Gamma
