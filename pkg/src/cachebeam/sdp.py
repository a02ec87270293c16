"""Standard-form conic programs over Hermitian-PSD matrix variables.

A problem holds a real linear objective over Hermitian matrix variables
(each implicitly constrained PSD) and lower-bounded scalar variables,
subject to linear (in)equalities and affine LMI constraints.  Affine LMI
dependence on a matrix variable V is expressed through congruence terms
``coeff * J' V J``, which covers robust-SINR blocks and keeps the solver
backends fast.

Two interchangeable backends solve a problem: the embedded primal-dual
path-following method in :mod:`cachebeam.ipm` (default) and a CVXPY
adapter in :mod:`cachebeam.cvx` used for cross-checking and as fallback.
"""

from dataclasses import dataclass, field

import numpy as np


class ProblemStructureError(ValueError):
    """Malformed problem: undeclared variables, shape mismatch, bad data."""


def herm(M):
    """Hermitian part (M + M')/2."""
    return 0.5 * (M + M.conj().T)


def is_hermitian(M, tol=1e-10):
    M = np.asarray(M)
    scale = max(1.0, np.max(np.abs(M)) if M.size else 0.0)
    return np.max(np.abs(M - M.conj().T)) <= tol * scale if M.size else True


@dataclass
class LinExpr:
    """Real-valued affine functional of the problem variables.

    Value = sum_v Re tr(matrix_coeffs[v] @ V_v) + sum_s scalar_coeffs[s] * x_s
    + const.  Matrix coefficients must be Hermitian.
    """

    matrix_coeffs: dict = field(default_factory=dict)
    scalar_coeffs: dict = field(default_factory=dict)
    const: float = 0.0

    def value(self, matrix_values, scalar_values):
        total = self.const
        for name, C in self.matrix_coeffs.items():
            total += float(np.real(np.trace(np.asarray(C) @ matrix_values[name])))
        for name, c in self.scalar_coeffs.items():
            total += c * float(scalar_values[name])
        return total


@dataclass
class CongruenceTerm:
    """LMI term ``coeff * J' V J`` for matrix variable ``var``.

    J has shape (dim(var), dim(LMI)).
    """

    var: str
    factor: np.ndarray
    coeff: float = 1.0


@dataclass
class LmiConstraint:
    """Affine Hermitian-matrix expression required PSD.

    M(x) = const + sum_s x_s * scalar_coeffs[s] + sum CongruenceTerms >= 0.
    """

    name: str
    dim: int
    const: np.ndarray = None
    scalar_coeffs: dict = field(default_factory=dict)
    matrix_terms: list = field(default_factory=list)

    def __post_init__(self):
        if self.const is None:
            self.const = np.zeros((self.dim, self.dim), dtype=complex)
        self.const = np.asarray(self.const, dtype=complex)

    def value(self, matrix_values, scalar_values):
        M = self.const.astype(complex).copy()
        for name, K in self.scalar_coeffs.items():
            M += float(scalar_values[name]) * np.asarray(K)
        for t in self.matrix_terms:
            J = np.asarray(t.factor)
            M += t.coeff * (J.conj().T @ matrix_values[t.var] @ J)
        return M


@dataclass
class LinearConstraint:
    name: str
    expr: LinExpr
    sense: str      # "<=", ">=", "=="
    bound: float

    def residual(self, matrix_values, scalar_values):
        """Violation amount (0 when satisfied)."""
        v = self.expr.value(matrix_values, scalar_values)
        if self.sense == "<=":
            return max(0.0, v - self.bound)
        if self.sense == ">=":
            return max(0.0, self.bound - v)
        if self.sense == "==":
            return abs(v - self.bound)
        raise ProblemStructureError(f"unknown sense {self.sense!r}")


@dataclass
class SdpProblem:
    matrix_vars: list = field(default_factory=list)   # (name, dim)
    scalar_vars: list = field(default_factory=list)   # (name, lower_bound)
    objective: LinExpr = field(default_factory=LinExpr)
    linear_constraints: list = field(default_factory=list)
    lmi_constraints: list = field(default_factory=list)
    structural_constraints: list = field(default_factory=list)  # descriptive notes
    meta: dict = field(default_factory=dict)

    def matrix_dims(self):
        return dict(self.matrix_vars)

    def scalar_bounds(self):
        return dict(self.scalar_vars)

    def validate(self):
        dims = {}
        for name, n in self.matrix_vars:
            if name in dims or n < 1:
                raise ProblemStructureError(f"bad matrix variable {name!r}")
            dims[name] = n
        lbs = {}
        for name, lb in self.scalar_vars:
            if name in dims or name in lbs or not np.isfinite(lb):
                raise ProblemStructureError(f"bad scalar variable {name!r}")
            lbs[name] = lb

        def check_expr(expr, where):
            for v, C in expr.matrix_coeffs.items():
                if v not in dims:
                    raise ProblemStructureError(f"{where}: undeclared matrix var {v!r}")
                C = np.asarray(C)
                if C.shape != (dims[v], dims[v]):
                    raise ProblemStructureError(f"{where}: coefficient shape mismatch for {v!r}")
                if not is_hermitian(C):
                    raise ProblemStructureError(f"{where}: coefficient for {v!r} not Hermitian")
                if not np.all(np.isfinite(C.view(float))):
                    raise ProblemStructureError(f"{where}: non-finite coefficient for {v!r}")
            for s, c in expr.scalar_coeffs.items():
                if s not in lbs:
                    raise ProblemStructureError(f"{where}: undeclared scalar var {s!r}")
                if not np.isfinite(c):
                    raise ProblemStructureError(f"{where}: non-finite coefficient for {s!r}")

        check_expr(self.objective, "objective")
        for lc in self.linear_constraints:
            if lc.sense not in ("<=", ">=", "=="):
                raise ProblemStructureError(f"{lc.name}: unknown sense {lc.sense!r}")
            check_expr(lc.expr, lc.name)
        for lmi in self.lmi_constraints:
            if lmi.const.shape != (lmi.dim, lmi.dim) or not is_hermitian(lmi.const):
                raise ProblemStructureError(f"{lmi.name}: constant block not Hermitian")
            for s, K in lmi.scalar_coeffs.items():
                if s not in lbs:
                    raise ProblemStructureError(f"{lmi.name}: undeclared scalar var {s!r}")
                K = np.asarray(K)
                if K.shape != (lmi.dim, lmi.dim) or not is_hermitian(K):
                    raise ProblemStructureError(f"{lmi.name}: scalar coefficient not Hermitian")
            for t in lmi.matrix_terms:
                if t.var not in dims:
                    raise ProblemStructureError(f"{lmi.name}: undeclared matrix var {t.var!r}")
                J = np.asarray(t.factor)
                if J.shape != (dims[t.var], lmi.dim):
                    raise ProblemStructureError(f"{lmi.name}: congruence factor shape mismatch")
                if not (np.all(np.isfinite(J.view(float))) and np.isfinite(t.coeff)):
                    raise ProblemStructureError(f"{lmi.name}: non-finite congruence data")
        return self


@dataclass
class SdpSolution:
    status: str                 # optimal | infeasible | numerical-failure | iteration-limit
    matrix_values: dict = field(default_factory=dict)
    scalar_values: dict = field(default_factory=dict)
    objective_value: float = np.nan
    max_constraint_violation: float = np.nan
    solver_iterations: int = 0
    primal_objective: float = np.nan
    dual_objective: float = np.nan
    backend: str = ""
    message: str = ""


@dataclass
class FeasibilityReport:
    """Independent per-class recomputation of constraint residuals."""

    linear: dict = field(default_factory=dict)        # name -> violation
    lmi: dict = field(default_factory=dict)           # name -> max(0, -min eig)
    matrix_psd: dict = field(default_factory=dict)    # var -> max(0, -min eig)
    scalar_bounds: dict = field(default_factory=dict)

    def worst(self):
        out = {}
        for cls in ("linear", "lmi", "matrix_psd", "scalar_bounds"):
            d = getattr(self, cls)
            out[cls] = max(d.values()) if d else 0.0
        return out

    @property
    def max_violation(self):
        return max(self.worst().values())

    def ok(self, tol):
        return self.max_violation <= tol


def verify_solution(problem, solution, tol=1e-7):
    """Recompute every constraint residual from the raw variable values.

    Never reuses solver-internal residuals.
    """
    mv, sv = solution.matrix_values, solution.scalar_values
    for name, n in problem.matrix_vars:
        if name not in mv or np.asarray(mv[name]).shape != (n, n):
            raise ProblemStructureError(f"solution missing/mismatched matrix var {name!r}")
    for name, _ in problem.scalar_vars:
        if name not in sv:
            raise ProblemStructureError(f"solution missing scalar var {name!r}")
    rep = FeasibilityReport()
    for lc in problem.linear_constraints:
        rep.linear[lc.name] = lc.residual(mv, sv)
    for lmi in problem.lmi_constraints:
        M = lmi.value(mv, sv)
        rep.lmi[lmi.name] = max(0.0, -float(np.linalg.eigvalsh(herm(M)).min()))
    for name, _ in problem.matrix_vars:
        rep.matrix_psd[name] = max(
            0.0, -float(np.linalg.eigvalsh(herm(np.asarray(mv[name]))).min())
        )
    for name, lb in problem.scalar_vars:
        rep.scalar_bounds[name] = max(0.0, lb - float(sv[name]))
    return rep


def solve(problem, feas_tol=1e-7, opt_tol=1e-7, max_iters=200, backend="auto",
          **backend_options):
    """Minimize the problem objective.

    backend:
      "embedded" -- the native path-following method (fast, no equalities);
      "cvxpy"    -- adapter to an external conic solver;
      "auto"     -- embedded first, adapter as fallback when the embedded
                    run ends without a conclusive status.
    """
    problem.validate()
    if backend == "cvxpy":
        from . import cvx
        return cvx.solve_cvxpy(problem, feas_tol, opt_tol, max_iters, **backend_options)
    from . import ipm
    has_eq = any(lc.sense == "==" for lc in problem.linear_constraints)
    if backend == "embedded":
        if has_eq:
            raise ProblemStructureError("embedded backend does not support equality constraints")
        return ipm.solve_ipm(problem, feas_tol, opt_tol, max_iters, **backend_options)
    if backend != "auto":
        raise ValueError(f"unknown backend {backend!r}")
    if not has_eq:
        sol = ipm.solve_ipm(problem, feas_tol, opt_tol, max_iters, **backend_options)
        if sol.status in ("optimal", "infeasible"):
            return sol
    from . import cvx
    return cvx.solve_cvxpy(problem, feas_tol, opt_tol, max_iters)
