"""Translation of a Scenario plus surrogate weights into the per-iteration SDP.

The robust SINR constraint of user u is enforced through the S-procedure
block

    Delta_u = [[G_u + lam_u E_u,  G_u h_u],
               [h_u' G_u,         h_u' G_u h_u - sigma_u^2 - lam_u]]  >= 0,

with G_u = W_u / delta_u - sum_{u' != u} W_u' - diag(q).  For the solver the
block is assembled in a per-user normalized form (a positive congruence of
Delta_u combined with a rescaled multiplier), which leaves the feasible set
unchanged but keeps all LMI data O(1) across the large near-far spread of
path-loss channels.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .sdp import (CongruenceTerm, LinearConstraint, LinExpr, LmiConstraint,
                  SdpProblem, herm)


@dataclass
class SurrogateWeights:
    """Linearization coefficients of the smoothed sparsity objective."""

    eta: np.ndarray   # (B,)
    beta: np.ndarray  # (B, U)

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if not (np.all(np.isfinite(self.eta)) and np.all(np.isfinite(self.beta))):
            raise ValueError("weights must be finite")
        if np.any(self.eta <= 0) or np.any(self.beta < 0):
            raise ValueError("eta must be positive, beta nonnegative")

    @classmethod
    def ones(cls, num_bs, num_users):
        return cls(eta=np.ones(num_bs), beta=np.ones((num_bs, num_users)))


@dataclass
class DeltaBlockSpec:
    """Affine map (W_1..W_U, q, lam_u) -> Delta_u for one user."""

    user: int
    h_tilde: np.ndarray
    error_shape: np.ndarray
    sigma_sq: float
    target_sinr: float

    @property
    def dim(self):
        return self.h_tilde.size + 1

    def g_matrix(self, w_matrices, q):
        B = self.h_tilde.size
        G = w_matrices[self.user] / self.target_sinr
        for v, W in enumerate(w_matrices):
            if v != self.user:
                G = G - W
        return G - np.diag(np.asarray(q, dtype=float))

    def evaluate(self, w_matrices, q, lam):
        """Numeric Delta_u for given W matrices, q vector, multiplier lam."""
        h = self.h_tilde
        G = self.g_matrix(w_matrices, q)
        top = G + lam * self.error_shape
        gh = G @ h
        corner = np.real(h.conj() @ G @ h) - self.sigma_sq - lam
        D = np.zeros((self.dim, self.dim), dtype=complex)
        D[:-1, :-1] = top
        D[:-1, -1] = gh
        D[-1, :-1] = gh.conj()
        D[-1, -1] = corner
        return D


def build_delta_block(scenario, u):
    ch = scenario.channels[u]
    return DeltaBlockSpec(user=u, h_tilde=ch.h_tilde, error_shape=ch.error_shape,
                          sigma_sq=float(scenario.params.noise_power[u]),
                          target_sinr=float(scenario.params.target_sinr[u]))


def _scaled_lmi(spec, num_users, name):
    """Normalized S-procedure LMI, PSD-equivalent to Delta_u >= 0.

    Congruence by T = diag((n/sigma) I, 1/sigma) with n = ||h_tilde||, plus
    the multiplier substitution lam = nu * sigma^2 / (n^2 ||E||).  Returns
    (LmiConstraint, lam_scale) with lam_raw = nu * lam_scale.
    """
    h = spec.h_tilde
    B = h.size
    n = np.linalg.norm(h)
    if n == 0:
        n = 1.0
    sigma = np.sqrt(spec.sigma_sq)
    E = spec.error_shape
    e_norm = np.linalg.norm(E, 2)
    lam_scale = spec.sigma_sq / (n * n * e_norm)
    J = np.hstack([(n / sigma) * np.eye(B), h[:, None] / sigma]).astype(complex)
    terms = []
    for v in range(num_users):
        coeff = 1.0 / spec.target_sinr if v == spec.user else -1.0
        terms.append(CongruenceTerm(var=f"W{v}", factor=J, coeff=coeff))
    scalar_coeffs = {}
    for b in range(B):
        jb = J[b, :]
        scalar_coeffs[f"q{b}"] = -np.outer(jb.conj(), jb)
    K = np.zeros((B + 1, B + 1), dtype=complex)
    K[:B, :B] = E / e_norm
    K[B, B] = -1.0 / (n * n * e_norm)
    scalar_coeffs[f"lam{spec.user}"] = K
    const = np.zeros((B + 1, B + 1), dtype=complex)
    const[B, B] = -1.0
    return LmiConstraint(name=name, dim=B + 1, const=const,
                         scalar_coeffs=scalar_coeffs, matrix_terms=terms), lam_scale


def assemble_sdp(scenario, weights):
    """Per-iteration SDP: power/backhaul constraints, robust-SINR LMIs,
    linear surrogate objective."""
    p = scenario.params
    B, U = p.num_bs, p.num_users
    weights = SurrogateWeights(weights.eta, weights.beta)
    if weights.eta.shape != (B,) or weights.beta.shape != (B, U):
        raise ValueError("weight shapes inconsistent with scenario")
    alpha = scenario.content.alpha
    P = scenario.content.cache_matrix
    req = scenario.content.requests

    prob = SdpProblem()
    prob.matrix_vars = [(f"W{u}", B) for u in range(U)]
    prob.scalar_vars = [(f"q{b}", 0.0) for b in range(B)] + \
                       [(f"lam{u}", 0.0) for u in range(U)]

    obj = LinExpr()
    for u in range(U):
        obj.matrix_coeffs[f"W{u}"] = np.diag(weights.eta + weights.beta[:, u]).astype(complex)
    for b in range(B):
        if alpha[b]:
            obj.scalar_coeffs[f"q{b}"] = float(weights.eta[b])
    prob.objective = obj

    for b in range(B):
        A_b = np.zeros((B, B))
        A_b[b, b] = 1.0
        expr = LinExpr(matrix_coeffs={f"W{u}": A_b for u in range(U)})
        if alpha[b]:
            expr.scalar_coeffs[f"q{b}"] = 1.0
        prob.linear_constraints.append(
            LinearConstraint(f"power{b}", expr, "<=", float(p.max_tx_power[b])))
    for b in range(B):
        expr = LinExpr()
        coeffs = {}
        for u in range(U):
            miss = 1.0 - P[b, req[u]]
            if miss:
                A_b = np.zeros((B, B))
                A_b[b, b] = miss
                coeffs[f"W{u}"] = A_b
        expr.matrix_coeffs = coeffs
        expr.scalar_coeffs[f"q{b}"] = -(2.0 ** p.backhaul_capacity[b] - 1.0)
        prob.linear_constraints.append(LinearConstraint(f"backhaul{b}", expr, "<=", 0.0))

    lam_scales = {}
    for u in range(U):
        spec = build_delta_block(scenario, u)
        lmi, scale = _scaled_lmi(spec, U, name=f"sinr{u}")
        prob.lmi_constraints.append(lmi)
        lam_scales[u] = scale
    prob.structural_constraints = ["Q diagonal: represented by the scalars q0..q%d" % (B - 1)]
    prob.meta = {"num_bs": B, "num_users": U, "lam_scales": lam_scales}
    return prob.validate()


def problem_shape(problem):
    """(variable groups, constraint groups) under the bookkeeping convention
    that the q scalars jointly stand for the diagonal matrix variable Q.

    Variables: each W, each lam, Q.  Constraints: the linear rows, the LMIs,
    W PSD, lam >= 0, Q PSD, Q diagonal.
    """
    nq = sum(1 for name, _ in problem.scalar_vars if name.startswith("q"))
    nlam = sum(1 for name, _ in problem.scalar_vars if name.startswith("lam"))
    var_groups = len(problem.matrix_vars) + (1 if nq else 0) + nlam
    con_groups = (len(problem.linear_constraints) + len(problem.lmi_constraints)
                  + len(problem.matrix_vars) + nlam + (1 if nq else 0)
                  + len(problem.structural_constraints))
    return var_groups, con_groups


def extract_lambdas(problem, solution):
    """Raw S-procedure multipliers lam_u from a solved assembled problem."""
    scales = problem.meta.get("lam_scales", {})
    return {u: solution.scalar_values[f"lam{u}"] * s for u, s in scales.items()}


def robust_sinr_certificate(w_vectors, q, scenario, u, tol=1e-9):
    """Search lam_u >= 0 making Delta_u(lam) PSD for fixed beamformers.

    Works on the normalized pencil (same congruence as the assembled LMI),
    where the PSD test ``min eig >= -tol * scale`` is a relative margin.
    Returns the raw multiplier value, or None when no certificate exists.
    """
    spec = build_delta_block(scenario, u)
    B = spec.h_tilde.size
    n = np.linalg.norm(spec.h_tilde)
    if n == 0:
        n = 1.0
    sigma = np.sqrt(spec.sigma_sq)
    e_norm = np.linalg.norm(spec.error_shape, 2)
    lam_scale = spec.sigma_sq / (n * n * e_norm)
    T = np.concatenate([np.full(B, n / sigma), [1.0 / sigma]])
    w_matrices = [np.outer(w, w.conj()) for w in w_vectors]
    D0 = spec.evaluate(w_matrices, q, 0.0)
    M0 = (T[:, None] * D0) * T[None, :]
    M1 = np.zeros((B + 1, B + 1), dtype=complex)
    M1[:B, :B] = spec.error_shape / e_norm
    M1[B, B] = -1.0 / (n * n * e_norm)

    scale = max(1.0, np.linalg.norm(M0, 2))
    threshold = -tol * scale

    def min_eig(nu):
        return float(np.linalg.eigvalsh(herm(M0 + nu * M1)).min())

    corner0 = float(np.real(M0[B, B]))
    nu_hi = max(corner0 * (n * n * e_norm), 0.0) + 1.0
    if min_eig(0.0) >= threshold:
        return 0.0
    res = minimize_scalar(lambda nu: -min_eig(nu), bounds=(0.0, nu_hi),
                          method="bounded", options={"xatol": 1e-12 * nu_hi})
    nu_star = float(res.x)
    if min_eig(nu_star) >= threshold:
        return nu_star * lam_scale
    return None
