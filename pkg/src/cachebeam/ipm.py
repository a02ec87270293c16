"""Embedded primal-dual path-following solver for SdpProblem instances.

Solves   min c'x   s.t.   M_k(x) = C_k + sum_i x_i A_{k,i}  PSD (Hermitian),
                          d + L x >= 0,
where x stacks the real parameters of all Hermitian matrix variables
(orthonormal basis: diagonal, sqrt(2)*real and sqrt(2)*imag off-diagonals)
followed by the scalar variables.  Matrix variables enter LMIs only through
congruence terms coeff * J' V J, which keeps every Schur-complement block a
congruence-transformed Kronecker product and makes the per-iteration cost
O(m^3) for the dense Cholesky of the m x m Schur matrix plus small per-cone
work.

The method is the standard infeasible-start Mehrotra predictor-corrector
with the HKM direction, run natively on complex Hermitian cones.  Primal
infeasibility is certified through a normalized Farkas dual ray
(A*(Z) + L'z ~ 0 with <C,Z> + d'z < 0).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .sdp import SdpSolution, ProblemStructureError, herm, verify_solution


# -- Hermitian parameterization -------------------------------------------

@lru_cache(maxsize=None)
def _hvec_meta(n):
    """Index arrays and the vec-basis matrix U for dimension n.

    U is (n^2, n^2) sparse complex; column alpha holds vec(H_alpha) in
    row-major order, H_alpha the orthonormal Hermitian basis.
    """
    iu, ju = np.triu_indices(n, k=1)
    npar = n * n
    rows, cols, vals = [], [], []
    for a in range(n):                       # diagonal params
        rows.append(a * n + a); cols.append(a); vals.append(1.0)
    s = 1.0 / np.sqrt(2.0)
    off = n
    for k in range(iu.size):                 # sqrt(2)*Re params
        i, j = iu[k], ju[k]
        rows += [i * n + j, j * n + i]
        cols += [off + k, off + k]
        vals += [s, s]
    off = n + iu.size
    for k in range(iu.size):                 # sqrt(2)*Im params
        i, j = iu[k], ju[k]
        rows += [i * n + j, j * n + i]
        cols += [off + k, off + k]
        vals += [1j * s, -1j * s]
    U = sp.csc_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(npar, npar))
    return iu, ju, U


def hvec(M):
    """Real coordinate vector of a Hermitian matrix (length n^2)."""
    n = M.shape[0]
    iu, ju, _ = _hvec_meta(n)
    s = np.sqrt(2.0)
    return np.concatenate([np.real(np.diag(M)),
                           s * np.real(M[iu, ju]),
                           s * np.imag(M[iu, ju])])


def hvec_batch(Ms):
    """hvec applied along the first axis of a (k, n, n) stack."""
    n = Ms.shape[-1]
    iu, ju, _ = _hvec_meta(n)
    s = np.sqrt(2.0)
    diag = np.real(Ms[:, np.arange(n), np.arange(n)])
    return np.concatenate([diag, s * np.real(Ms[:, iu, ju]),
                           s * np.imag(Ms[:, iu, ju])], axis=1)


def unhvec(v, n):
    iu, ju, _ = _hvec_meta(n)
    M = np.zeros((n, n), dtype=complex)
    M[np.arange(n), np.arange(n)] = v[:n]
    k = iu.size
    off = (v[n:n + k] + 1j * v[n + k:n + 2 * k]) / np.sqrt(2.0)
    M[iu, ju] = off
    M[ju, iu] = off.conj()
    return M


def _kron_block(P, Q):
    """Real matrix [Re tr(H_a P H_b Q)]_{ab} over the Hermitian bases.

    P is (nv, nv'), Q is (nv', nv); the result has shape (nv^2, nv'^2).
    """
    nv, nvp = P.shape
    K = np.einsum('bc,da->abcd', P, Q).reshape(nv * nv, nvp * nvp)
    _, _, Uv = _hvec_meta(nv)
    _, _, Uvp = _hvec_meta(nvp)
    t = Uv.T @ K                # (nv^2 params, nvp^2 vec)
    return np.real((Uvp.T @ t.T).T)


# -- canonical form --------------------------------------------------------

@dataclass
class _Cone:
    dim: int
    const: np.ndarray
    factors: list          # unique congruence factors; None = identity
    mterms: list           # (mvar_index, factor_index, coeff)
    sterms: list           # (x_index, Hermitian K)


@dataclass
class _Canonical:
    m: int
    c: np.ndarray
    c0: float
    cones: list
    L: np.ndarray          # (p, m)
    d: np.ndarray          # (p,)
    mvar_names: list
    mvar_dims: list
    mvar_offsets: list
    svar_names: list
    svar_xindex: dict
    x_scale: np.ndarray = None   # solution unscaling: x_orig = x_scale * x


def _equilibrate(can, passes=4):
    """Ruiz-style scaling of variables (block-wise) and constraints.

    Multiplies each cone/linear row by rho and each variable block column
    by delta so coefficient magnitudes flatten toward 1; the near-far
    channel spread otherwise puts ~1e7 between coefficient scales and sinks
    the Schur factorization.  The transformed problem is equivalent; the
    solution is recovered through x_scale.
    """
    nv = len(can.mvar_dims)
    ns = len(can.svar_names)
    nblocks = nv + ns
    dscale = np.ones(nblocks)
    p = can.L.shape[0]
    rho_lin = np.ones(p)
    svar_block = {}
    for j, name in enumerate(can.svar_names):
        svar_block[can.svar_xindex[name]] = nv + j

    for _ in range(passes):
        # row pass: cones and linear rows
        for cone in can.cones:
            mags = [abs(co) * np.linalg.norm(cone.factors[fi], 2) ** 2 * dscale[vi]
                    if cone.factors[fi] is not None else abs(co) * dscale[vi]
                    for vi, fi, co in cone.mterms]
            mags += [np.linalg.norm(K, 2) * dscale[svar_block[xi]]
                     for xi, K in cone.sterms]
            mags += [np.linalg.norm(cone.const, 2)]
            r = max(m for m in mags if m > 0)
            if r > 0:
                f = 1.0 / np.sqrt(r)
                cone.const *= f
                cone.mterms = [(vi, fi, co * f) for vi, fi, co in cone.mterms]
                cone.sterms = [(xi, K * f) for xi, K in cone.sterms]
        if p:
            rmax = np.maximum(np.abs(can.L).max(axis=1), np.abs(can.d))
            rmax[rmax == 0] = 1.0
            f = 1.0 / np.sqrt(rmax)
            can.L *= f[:, None]
            can.d *= f
            rho_lin *= f
        # column pass: per variable block
        colmax = np.zeros(nblocks)
        for cone in can.cones:
            for vi, fi, co in cone.mterms:
                mag = abs(co) * (np.linalg.norm(cone.factors[fi], 2) ** 2
                                 if cone.factors[fi] is not None else 1.0)
                colmax[vi] = max(colmax[vi], mag)
            for xi, K in cone.sterms:
                b = svar_block[xi]
                colmax[b] = max(colmax[b], np.linalg.norm(K, 2))
        if p:
            for j, name in enumerate(can.svar_names):
                xi = can.svar_xindex[name]
                colmax[nv + j] = max(colmax[nv + j], np.abs(can.L[:, xi]).max())
            for vi in range(nv):
                o, n2 = can.mvar_offsets[vi], can.mvar_dims[vi] ** 2
                block = np.abs(can.L[:, o:o + n2])
                if block.size:
                    colmax[vi] = max(colmax[vi], block.max())
        colmax[colmax == 0] = 1.0
        g = 1.0 / np.sqrt(colmax)
        for cone in can.cones:
            cone.mterms = [(vi, fi, co * g[vi]) for vi, fi, co in cone.mterms]
            cone.sterms = [(xi, K * g[svar_block[xi]]) for xi, K in cone.sterms]
        for vi in range(nv):
            o, n2 = can.mvar_offsets[vi], can.mvar_dims[vi] ** 2
            can.L[:, o:o + n2] *= g[vi]
        for j, name in enumerate(can.svar_names):
            can.L[:, can.svar_xindex[name]] *= g[nv + j]
        dscale *= g

    x_scale = np.ones(can.m)
    for vi in range(nv):
        o, n2 = can.mvar_offsets[vi], can.mvar_dims[vi] ** 2
        x_scale[o:o + n2] = dscale[vi]
    for j, name in enumerate(can.svar_names):
        x_scale[can.svar_xindex[name]] = dscale[nv + j]
    can.c = can.c * x_scale
    can.x_scale = x_scale
    return can


def canonicalize(problem):
    mvar_names = [name for name, _ in problem.matrix_vars]
    mvar_dims = [n for _, n in problem.matrix_vars]
    mvar_index = {name: i for i, name in enumerate(mvar_names)}
    offsets, off = [], 0
    for n in mvar_dims:
        offsets.append(off)
        off += n * n
    svar_names = [name for name, _ in problem.scalar_vars]
    svar_xindex = {name: off + j for j, name in enumerate(svar_names)}
    m = off + len(svar_names)

    def expr_to_row(expr):
        row = np.zeros(m)
        for name, C in expr.matrix_coeffs.items():
            i = mvar_index[name]
            row[offsets[i]:offsets[i] + mvar_dims[i] ** 2] = hvec(np.asarray(C, dtype=complex))
        for name, coeff in expr.scalar_coeffs.items():
            row[svar_xindex[name]] = coeff
        return row

    c = expr_to_row(problem.objective)
    c0 = problem.objective.const

    cones = []
    for i, n in enumerate(mvar_dims):
        cones.append(_Cone(dim=n, const=np.zeros((n, n), dtype=complex),
                           factors=[None], mterms=[(i, 0, 1.0)], sterms=[]))
    for lmi in problem.lmi_constraints:
        factors, mterms = [], []
        for t in lmi.matrix_terms:
            J = np.asarray(t.factor, dtype=complex)
            fi = None
            for k, F in enumerate(factors):
                if F is not None and F.shape == J.shape and np.array_equal(F, J):
                    fi = k
                    break
            if fi is None:
                factors.append(J)
                fi = len(factors) - 1
            mterms.append((mvar_index[t.var], fi, float(t.coeff)))
        # copies: the canonical data is rescaled in place by _equilibrate
        sterms = [(svar_xindex[s], np.array(K, dtype=complex))
                  for s, K in lmi.scalar_coeffs.items()]
        cones.append(_Cone(dim=lmi.dim, const=np.array(lmi.const, dtype=complex),
                           factors=factors, mterms=mterms, sterms=sterms))

    rows, ds = [], []
    for lc in problem.linear_constraints:
        a = expr_to_row(lc.expr)
        if lc.sense == "<=":
            rows.append(-a); ds.append(lc.bound - lc.expr.const)
        elif lc.sense == ">=":
            rows.append(a); ds.append(lc.expr.const - lc.bound)
        else:
            raise ProblemStructureError("equality constraints unsupported by embedded backend")
    for name, lb in problem.scalar_vars:
        a = np.zeros(m)
        a[svar_xindex[name]] = 1.0
        rows.append(a); ds.append(-lb)
    L = np.asarray(rows) if rows else np.zeros((0, m))
    d = np.asarray(ds) if ds else np.zeros(0)

    can = _Canonical(m=m, c=c, c0=c0, cones=cones, L=L, d=d,
                     mvar_names=mvar_names, mvar_dims=mvar_dims,
                     mvar_offsets=offsets, svar_names=svar_names,
                     svar_xindex=svar_xindex)
    return _equilibrate(can)


def _cone_apply(cone, can, x):
    """M_k(x) - C_k, the variable part of the cone matrix."""
    M = np.zeros((cone.dim, cone.dim), dtype=complex)
    for vi, fi, coeff in cone.mterms:
        n = can.mvar_dims[vi]
        V = unhvec(x[can.mvar_offsets[vi]:can.mvar_offsets[vi] + n * n], n)
        J = cone.factors[fi]
        M += coeff * (V if J is None else J.conj().T @ V @ J)
    for xi, K in cone.sterms:
        M += x[xi] * K
    return M


def _cone_adjoint(cone, can, Y, out):
    """out += A_k^T(Y) for Hermitian Y."""
    for vi, fi, coeff in cone.mterms:
        J = cone.factors[fi]
        R = Y if J is None else J @ Y @ J.conj().T
        o = can.mvar_offsets[vi]
        n = can.mvar_dims[vi]
        out[o:o + n * n] += coeff * hvec(herm(R))
    for xi, K in cone.sterms:
        out[xi] += float(np.real(np.einsum('ij,ji->', K, Y)))


def _max_step(S, dS):
    """Largest alpha with S + alpha dS staying PSD (S Hermitian PD)."""
    try:
        Lc = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return 0.0
    T = np.linalg.solve(Lc, dS)
    T = np.linalg.solve(Lc, T.conj().T)
    lam_min = np.linalg.eigvalsh(herm(T)).min()
    if lam_min >= -1e-16:
        return np.inf
    return 1.0 / (-lam_min)


def solve_ipm(problem, feas_tol=1e-7, opt_tol=1e-7, max_iters=200, verbose=False):
    can = canonicalize(problem)
    m = can.m
    if m == 0:
        raise ProblemStructureError("problem has no variables")
    p = can.L.shape[0]
    nu_total = sum(cone.dim for cone in can.cones) + p
    c, c0, L, d = can.c, can.c0, can.L, can.d
    c_scale = 1.0 + np.linalg.norm(c, np.inf)
    d_scale = 1.0 + (np.linalg.norm(d, np.inf) if p else 0.0)

    # initial point: x = 0, slack/dual cones at data-scaled identity
    x = np.zeros(m)
    S, Z, const_norms = [], [], []
    for cone in can.cones:
        nC = np.linalg.norm(cone.const, 2) if cone.dim else 0.0
        xi = 10.0 + 2.0 * nC
        S.append(cone.const + xi * np.eye(cone.dim))
        Z.append((10.0 + c_scale) * np.eye(cone.dim, dtype=complex))
        const_norms.append(1.0 + np.linalg.norm(cone.const))
    s = np.maximum(d + 10.0, 10.0) if p else np.zeros(0)
    z = np.full(p, 10.0 + c_scale)

    best = None
    best_score = np.inf
    status, message = "iteration-limit", ""
    iters_done = 0
    mu_prev = np.inf
    stall = 0

    for it in range(max_iters):
        iters_done = it
        # residuals
        rp = [cone.const + _cone_apply(cone, can, x) - S[k]
              for k, cone in enumerate(can.cones)]
        rp_lin = d + (L @ x if p else np.zeros(0)) - s
        atz = np.zeros(m)
        for k, cone in enumerate(can.cones):
            _cone_adjoint(cone, can, Z[k], atz)
        if p:
            atz += L.T @ z
        rd = c - atz
        gap = sum(float(np.real(np.einsum('ij,ji->', Z[k], S[k])))
                  for k in range(len(can.cones))) + (float(z @ s) if p else 0.0)
        mu = gap / nu_total

        pobj = float(c @ x) + c0
        dobj = -(sum(float(np.real(np.einsum('ij,ji->', cone.const, Z[k])))
                     for k, cone in enumerate(can.cones)) + (float(d @ z) if p else 0.0)) + c0
        # complementarity-based gap: immune to residual*dual cancellation
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))
        prfeas = max([np.linalg.norm(rp[k]) / const_norms[k] for k in range(len(can.cones))]
                     + ([np.linalg.norm(rp_lin, np.inf) / d_scale] if p else [0.0]))
        dufeas = np.linalg.norm(rd, np.inf) / c_scale
        score = max(prfeas, dufeas, max(relgap, 0.0))
        if verbose:
            print(f"iter {it:3d}  mu {mu:9.2e}  gap {relgap:9.2e}  "
                  f"pfeas {prfeas:8.1e}  dfeas {dufeas:8.1e}  pobj {pobj:+.6e}")
        if score < 0.99 * best_score:
            stall = 0
        if score < best_score:
            best_score = score
            best = (x.copy(), pobj, dobj, prfeas)
        if prfeas <= feas_tol and dufeas <= feas_tol and max(relgap, 0.0) <= opt_tol:
            status = "optimal"
            break

        # Farkas certificate of primal infeasibility from the scaled duals
        znorm = np.sqrt(sum(np.linalg.norm(Z[k]) ** 2 for k in range(len(can.cones)))
                        + (float(z @ z) if p else 0.0))
        if znorm > 0:
            ray = atz / znorm
            val = (sum(float(np.real(np.einsum('ij,ji->', cone.const, Z[k])))
                       for k, cone in enumerate(can.cones)) + (float(d @ z) if p else 0.0)) / znorm
            if val < 0 and np.linalg.norm(ray, np.inf) <= feas_tol * (-val):
                status = "infeasible"
                message = (f"Farkas certificate: residual {np.linalg.norm(ray, np.inf):.2e}, "
                           f"value {val:.2e}")
                break

        if not np.isfinite(mu) or mu <= 0:
            status = "numerical-failure"
            message = "complementarity collapsed"
            break
        if mu > 0.98 * mu_prev and prfeas > feas_tol:
            stall += 1
            if stall >= 10:
                status = "numerical-failure"
                message = "no progress"
                break
        else:
            stall = 0
        mu_prev = mu

        # scaling quantities
        Sinv = []
        ok = True
        for k in range(len(can.cones)):
            try:
                Lc = np.linalg.cholesky(S[k])
            except np.linalg.LinAlgError:
                ok = False
                break
            Li = sla.solve_triangular(Lc, np.eye(can.cones[k].dim), lower=True,
                                      check_finite=False)
            Sinv.append(Li.conj().T @ Li)
        if not ok:
            status = "numerical-failure"
            message = "slack factorization failed"
            break

        # Schur matrix
        M = np.zeros((m, m))
        for k, cone in enumerate(can.cones):
            nf = len(cone.factors)
            Pf = [[None] * nf for _ in range(nf)]
            Qf = [[None] * nf for _ in range(nf)]
            for a in range(nf):
                for b in range(nf):
                    Ja, Jb = cone.factors[a], cone.factors[b]
                    # P_{ab} = J_a Z J_b',  Q_{ba} = J_b Sinv J_a'
                    Pmat = Z[k]
                    if Ja is not None:
                        Pmat = Ja @ Pmat
                    if Jb is not None:
                        Pmat = Pmat @ Jb.conj().T
                    Qmat = Sinv[k]
                    if Jb is not None:
                        Qmat = Jb @ Qmat
                    if Ja is not None:
                        Qmat = Qmat @ Ja.conj().T
                    Pf[a][b] = Pmat
                    Qf[b][a] = Qmat
            kr_cache = {}
            for (vi, fi, ci) in cone.mterms:
                for (vj, fj, cj) in cone.mterms:
                    key = (fi, fj)
                    if key not in kr_cache:
                        kr_cache[key] = _kron_block(Pf[fi][fj], Qf[fj][fi])
                    oi, ni = can.mvar_offsets[vi], can.mvar_dims[vi]
                    oj, nj = can.mvar_offsets[vj], can.mvar_dims[vj]
                    M[oi:oi + ni * ni, oj:oj + nj * nj] += (ci * cj) * kr_cache[key]
            if cone.sterms:
                sidx = np.array([xi for xi, _ in cone.sterms])
                Ks = np.stack([K for _, K in cone.sterms])          # (ns, n, n)
                Ys = np.einsum('ab,jbc,cd->jad', Z[k], Ks, Sinv[k])  # Z K Sinv
                M[np.ix_(sidx, sidx)] += np.real(np.einsum('aij,bji->ab', Ks, Ys))
                for (vi, fi, ci) in cone.mterms:
                    J = cone.factors[fi]
                    R = Ys if J is None else np.einsum('ab,jbc,dc->jad', J, Ys, J.conj())
                    rows = ci * hvec_batch(0.5 * (R + np.conj(np.swapaxes(R, 1, 2))))
                    oi, ni = can.mvar_offsets[vi], can.mvar_dims[vi]
                    M[oi:oi + ni * ni, sidx] += rows.T
                    M[np.ix_(sidx, np.arange(oi, oi + ni * ni))] += rows
        if p:
            w_lin = z / s
            M += (L.T * w_lin) @ L
        M = 0.5 * (M + M.T)
        M[np.diag_indices_from(M)] += 1e-12 * (1.0 + np.abs(np.diag(M)))
        try:
            Mf = sla.cho_factor(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            status = "numerical-failure"
            message = "Schur factorization failed"
            break

        def solve_direction(sigma_mu, corr, corr_lin):
            rhs = -rd.copy()
            V1s = []
            for k, cone in enumerate(can.cones):
                V1 = sigma_mu * Sinv[k] - Z[k]
                if corr is not None:
                    V1 = V1 - corr[k] @ Sinv[k]
                Y = herm(V1 - Z[k] @ rp[k] @ Sinv[k])
                V1s.append(V1)
                _cone_adjoint(cone, can, Y, rhs)
            if p:
                cl = corr_lin if corr_lin is not None else 0.0
                rhs += L.T @ ((sigma_mu - z * s - cl) / s - (z / s) * rp_lin)
            dx = sla.cho_solve(Mf, rhs, check_finite=False)
            dx += sla.cho_solve(Mf, rhs - M @ dx, check_finite=False)
            dS = [_cone_apply(cone, can, dx) + rp[k]
                  for k, cone in enumerate(can.cones)]
            dZ = [herm(V1s[k] - Z[k] @ dS[k] @ Sinv[k])
                  for k in range(len(can.cones))]
            if p:
                ds = L @ dx + rp_lin
                dz = (sigma_mu - z * s - (corr_lin if corr_lin is not None else 0.0)) / s \
                    - (z / s) * ds
            else:
                ds = np.zeros(0); dz = np.zeros(0)
            return dx, dS, dZ, ds, dz

        # predictor
        dx_a, dS_a, dZ_a, ds_a, dz_a = solve_direction(0.0, None, None)
        ap = min([_max_step(S[k], dS_a[k]) for k in range(len(can.cones))]
                 + ([_lin_step(s, ds_a)] if p else []) + [np.inf])
        ad = min([_max_step(Z[k], dZ_a[k]) for k in range(len(can.cones))]
                 + ([_lin_step(z, dz_a)] if p else []) + [np.inf])
        ap, ad = min(1.0, 0.99 * ap), min(1.0, 0.99 * ad)
        gap_aff = sum(float(np.real(np.einsum('ij,ji->', Z[k] + ad * dZ_a[k],
                                              S[k] + ap * dS_a[k])))
                      for k in range(len(can.cones)))
        if p:
            gap_aff += float((z + ad * dz_a) @ (s + ap * ds_a))
        sigma = min(1.0, max(1e-10, (max(gap_aff, 0.0) / gap) ** 3))

        # corrector
        corr = [dZ_a[k] @ dS_a[k] for k in range(len(can.cones))]
        corr_lin = dz_a * ds_a if p else None
        dx, dS, dZ, ds, dz = solve_direction(sigma * mu, corr, corr_lin)
        ap = min([_max_step(S[k], dS[k]) for k in range(len(can.cones))]
                 + ([_lin_step(s, ds)] if p else []) + [np.inf])
        ad = min([_max_step(Z[k], dZ[k]) for k in range(len(can.cones))]
                 + ([_lin_step(z, dz)] if p else []) + [np.inf])
        tau = 0.98
        ap, ad = min(1.0, tau * ap), min(1.0, tau * ad)
        if ap < 1e-10 and ad < 1e-10:
            status = "numerical-failure"
            message = "step length collapsed"
            break
        x += ap * dx
        for k in range(len(can.cones)):
            S[k] = herm(S[k] + ap * dS[k])
            Z[k] = herm(Z[k] + ad * dZ[k])
        if p:
            s = s + ap * ds
            z = z + ad * dz

    if status != "optimal" and best is not None and best_score < np.inf:
        x = best[0]

    sol = _unpack(problem, can, x, status, iters_done + 1, message)
    sol.primal_objective = float(can.c @ x) + c0
    if status == "optimal":
        sol.dual_objective = dobj
    return sol


def _lin_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _unpack(problem, can, x, status, iters, message):
    x_orig = x * can.x_scale if can.x_scale is not None else x
    matrix_values = {}
    for i, name in enumerate(can.mvar_names):
        n = can.mvar_dims[i]
        o = can.mvar_offsets[i]
        matrix_values[name] = unhvec(x_orig[o:o + n * n], n)
    scalar_values = {name: float(x_orig[can.svar_xindex[name]]) for name in can.svar_names}
    sol = SdpSolution(status=status, matrix_values=matrix_values,
                      scalar_values=scalar_values,
                      objective_value=float(can.c @ x) + can.c0,
                      solver_iterations=iters, backend="embedded", message=message)
    try:
        sol.max_constraint_violation = verify_solution(problem, sol).max_violation
    except Exception:
        sol.max_constraint_violation = np.nan
    return sol
