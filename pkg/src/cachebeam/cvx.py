"""CVXPY adapter backend for SdpProblem.

Used for cross-checking the embedded solver and as the fallback for
problem features it does not cover (equality constraints).  Hermitian
variables are handled either natively by CVXPY or through the explicit
real 2n x 2n symmetric embedding ``[[X, -Y], [Y, X]]``; both routes must
agree, which the test suite checks.
"""

import numpy as np

from .sdp import SdpSolution, herm, verify_solution

_STATUS_MAP = {
    "optimal": "optimal",
    "optimal_inaccurate": "iteration-limit",
    "infeasible": "infeasible",
    "infeasible_inaccurate": "infeasible",
    "unbounded": "numerical-failure",
    "unbounded_inaccurate": "numerical-failure",
}


def _phi(A):
    """Real embedding of a complex matrix: [[Re, -Im], [Im, Re]]."""
    A = np.asarray(A, dtype=complex)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def solve_cvxpy(problem, feas_tol=1e-7, opt_tol=1e-7, max_iters=200,
                hermitian_mode="native", solver="CLARABEL", verbose=False):
    import cvxpy as cp

    if hermitian_mode not in ("native", "real"):
        raise ValueError(f"unknown hermitian_mode {hermitian_mode!r}")

    dims = problem.matrix_dims()
    constraints = []
    mvars = {}      # name -> (expression object(s), value extractor)
    if hermitian_mode == "native":
        for name, n in problem.matrix_vars:
            V = cp.Variable((n, n), hermitian=True, name=name)
            constraints.append(V >> 0)
            mvars[name] = V
    else:
        for name, n in problem.matrix_vars:
            X = cp.Variable((n, n), symmetric=True, name=name + "_re")
            Y = cp.Variable((n, n), name=name + "_im")
            constraints.append(Y == -Y.T)
            constraints.append(cp.bmat([[X, -Y], [Y, X]]) >> 0)
            mvars[name] = (X, Y)
    svars = {}
    for name, lb in problem.scalar_vars:
        xv = cp.Variable(name=name)
        constraints.append(xv >= lb)
        svars[name] = xv

    def lin_value(expr):
        total = expr.const
        for name, C in expr.matrix_coeffs.items():
            C = np.asarray(C, dtype=complex)
            if hermitian_mode == "native":
                total = total + cp.real(cp.trace(cp.Constant(C) @ mvars[name]))
            else:
                X, Y = mvars[name]
                # Re tr(C V) = tr(Re(C) X) - tr(Im(C) Y)
                total = total + cp.trace(C.real @ X) - cp.trace(C.imag @ Y)
        for name, coeff in expr.scalar_coeffs.items():
            total = total + coeff * svars[name]
        return total

    for lc in problem.linear_constraints:
        v = lin_value(lc.expr)
        if lc.sense == "<=":
            constraints.append(v <= lc.bound)
        elif lc.sense == ">=":
            constraints.append(v >= lc.bound)
        else:
            constraints.append(v == lc.bound)

    for lmi in problem.lmi_constraints:
        if hermitian_mode == "native":
            M = cp.Constant(np.asarray(lmi.const, dtype=complex))
            for s, K in lmi.scalar_coeffs.items():
                M = M + svars[s] * cp.Constant(np.asarray(K, dtype=complex))
            for t in lmi.matrix_terms:
                J = np.asarray(t.factor, dtype=complex)
                M = M + t.coeff * (J.conj().T @ mvars[t.var] @ J)
            constraints.append((M + M.H) / 2 >> 0)
        else:
            M = cp.Constant(_phi(lmi.const))
            for s, K in lmi.scalar_coeffs.items():
                M = M + svars[s] * cp.Constant(_phi(K))
            for t in lmi.matrix_terms:
                J = np.asarray(t.factor, dtype=complex)
                X, Y = mvars[t.var]
                Vt = cp.bmat([[X, -Y], [Y, X]])
                Jt = _phi(J)
                M = M + t.coeff * (Jt.T @ Vt @ Jt)
            constraints.append((M + M.T) / 2 >> 0)

    objective = cp.Minimize(lin_value(problem.objective))
    prob = cp.Problem(objective, constraints)

    opts = {}
    if solver == "CLARABEL":
        opts = {"tol_gap_abs": opt_tol, "tol_gap_rel": opt_tol,
                "tol_feas": feas_tol, "max_iter": max(max_iters, 50)}
    elif solver == "SCS":
        opts = {"eps": opt_tol, "max_iters": max(max_iters * 500, 10000)}
    try:
        prob.solve(solver=solver, verbose=verbose, **opts)
    except cp.error.SolverError as e:
        return SdpSolution(status="numerical-failure", backend=f"cvxpy/{solver}",
                           message=str(e))

    status = _STATUS_MAP.get(prob.status, "numerical-failure")
    sol = SdpSolution(status=status, backend=f"cvxpy/{solver}", message=prob.status)
    stats = prob.solver_stats
    if stats is not None and stats.num_iters is not None:
        sol.solver_iterations = int(stats.num_iters)
    if status in ("optimal", "iteration-limit") and prob.value is not None:
        for name, n in problem.matrix_vars:
            if hermitian_mode == "native":
                sol.matrix_values[name] = herm(np.asarray(mvars[name].value))
            else:
                X, Y = mvars[name]
                V = np.asarray(X.value) + 1j * np.asarray(Y.value)
                sol.matrix_values[name] = herm(V)
        for name, _ in problem.scalar_vars:
            sol.scalar_values[name] = float(svars[name].value)
        sol.objective_value = float(prob.value)
        sol.primal_objective = float(prob.value)
        extra = getattr(stats, "extra_stats", None)
        info = extra.get("info", extra) if isinstance(extra, dict) else None
        if isinstance(info, dict):
            for key in ("dobj", "cost_dual", "dual_objective"):
                if key in info:
                    sol.dual_objective = float(info[key])
                    break
        sol.max_constraint_violation = verify_solution(problem, sol).max_violation
    return sol
