"""Small dense complex-Hermitian semidefinite programming.

``solve_sdp`` is a primal-dual path-following interior-point method that
works directly in Hermitian arithmetic: Nesterov-Todd scaling, Mehrotra
predictor-corrector steps, and a dense Schur-complement system over the
constraint multipliers. Inequality rows carry nonnegative scalar slacks
that live in the same symmetric cone as the matrix block. Instances here
are tiny (n <= 64, m <= 16), so everything is dense.

``rank_reduce`` post-processes an optimal matrix into a low-rank one with
identical objective and constraint values by repeatedly moving along
Hermitian null directions of the compressed constraint system, and
``extract_rank_one`` pulls the factor out of a (near) rank-one matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, RankError, SolverError
from .linalg import (
    RANK_RTOL,
    herm_basis,
    herm_from_coords,
    hermitize,
    trace_inner,
)

EQ = "eq"
LE = "le"
GE = "ge"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAXITER = "maxiter"

MAX_DIM = 64
MAX_CONSTRAINTS = 16


@dataclass
class SdpProblem:
    """min tr(C X) over Hermitian X >= 0 subject to tr(A_i X) {=, <=, >=} b_i."""

    c: np.ndarray
    constraints: list  # of (a_i, b_i, sense)

    def __post_init__(self):
        self.c = hermitize(np.asarray(self.c, dtype=complex))
        n = self.c.shape[0]
        if self.c.ndim != 2 or self.c.shape != (n, n):
            raise DimensionError("objective matrix must be square")
        if n > MAX_DIM:
            raise DimensionError(f"matrix dimension {n} exceeds {MAX_DIM}")
        if len(self.constraints) > MAX_CONSTRAINTS:
            raise DimensionError(
                f"{len(self.constraints)} constraints exceed {MAX_CONSTRAINTS}"
            )
        cleaned = []
        for a, b, sense in self.constraints:
            a = hermitize(np.asarray(a, dtype=complex))
            if a.shape != (n, n):
                raise DimensionError("constraint matrix shape mismatch")
            if sense not in (EQ, LE, GE):
                raise ValueError(f"unknown constraint sense {sense!r}")
            cleaned.append((a, float(b), sense))
        self.constraints = cleaned

    @property
    def n(self) -> int:
        return self.c.shape[0]


@dataclass
class SdpSolution:
    x: np.ndarray
    duals: np.ndarray
    objective: float
    status: str
    gap: float = 0.0
    primal_infeas: float = 0.0
    dual_infeas: float = 0.0
    iterations: int = 0
    z: np.ndarray | None = None
    history: list = field(default_factory=list)


def _chol(a):
    """Cholesky with tiny escalating jitter; raises SolverError if hopeless."""
    a = hermitize(a)
    scale = max(np.real(np.trace(a)) / a.shape[0], 1e-300)
    for jit in (0.0, 1e-15, 1e-13, 1e-11):
        try:
            return np.linalg.cholesky(a + (jit * scale) * np.eye(a.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise SolverError("interior-point iterate left the cone")


def _max_step_psd(x, dx):
    """Largest alpha with X + alpha dX >= 0, for X > 0."""
    if not np.all(np.isfinite(dx)):
        raise SolverError("non-finite search direction")
    low = _chol(x)
    s = np.linalg.solve(low, dx)
    s = hermitize(np.linalg.solve(low, s.conj().T).conj().T)
    try:
        lam_min = np.linalg.eigvalsh(s)[0]
    except np.linalg.LinAlgError as exc:
        raise SolverError("step-length eigensolve failed") from exc
    if lam_min >= -1e-300:
        return np.inf
    return 1.0 / (-lam_min)


def _max_step_pos(v, dv):
    """Largest alpha with v + alpha dv >= 0 elementwise, for v > 0."""
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _nt_scaling(x, z):
    """NT scaling point W (W Z W = X) and its Hermitian square root / inverse."""
    lz = _chol(z)
    t = hermitize(lz.conj().T @ x @ lz)
    wt, qt = np.linalg.eigh(t)
    wt = np.maximum(wt, 1e-300)
    thalf = (qt * np.sqrt(wt)) @ qt.conj().T
    m1 = np.linalg.solve(lz.conj().T, thalf)
    w = hermitize(np.linalg.solve(lz.conj().T, m1.conj().T).conj().T)
    we, qw = np.linalg.eigh(w)
    we = np.maximum(we, 1e-300)
    r = (qw * np.sqrt(we)) @ qw.conj().T
    r_inv = (qw / np.sqrt(we)) @ qw.conj().T
    return w, r, r_inv


def _lyap_solve(v, rhs):
    """Solve (M V + V M)/2 = rhs for Hermitian M, with V Hermitian PD."""
    lam, q = np.linalg.eigh(v)
    lam = np.maximum(lam, 1e-30 * max(float(lam[-1]), 1e-270))
    b = q.conj().T @ rhs @ q
    denom = 0.5 * (lam[:, None] + lam[None, :])
    return hermitize(q @ (b / denom) @ q.conj().T)


def _ipm(c, a_list, b, d_cols, d_obj, tol, max_iter):
    """Core conic solve: min <C,X> + d.v  s.t. <A_i,X> + (D v)_i = b_i,
    X Hermitian PSD, v >= 0 elementwise.

    Returns a dict with the final iterate, status and per-iteration history.
    """
    n = c.shape[0]
    m = len(a_list)
    q = d_cols.shape[1]
    eye = np.eye(n)

    norm_b = 1.0 + np.linalg.norm(b)
    norm_c = 1.0 + np.linalg.norm(c) + np.linalg.norm(d_obj)

    # scale-aware cold start
    ratios = [abs(b[i]) / (1.0 + np.linalg.norm(a_list[i])) for i in range(m)]
    eta_p = float(np.clip(max(ratios) if ratios else 1.0, 1e-6, 1e6))
    eta_d = float(np.clip(1.0 + np.linalg.norm(c) / max(np.sqrt(n), 1.0), 1e-6, 1e8))
    x = eta_p * eye.astype(complex)
    v = eta_p * np.ones(q)
    y = np.zeros(m)
    z = eta_d * eye.astype(complex)
    t = eta_d * np.ones(q)

    def a_apply(mat):
        return np.array([trace_inner(a_i, mat) for a_i in a_list])

    def a_adj(yy):
        out = np.zeros((n, n), dtype=complex)
        for yi, a_i in zip(yy, a_list):
            out += yi * a_i
        return out

    history = []
    best = None
    status = MAXITER
    it = 0
    stall = 0
    mu_prev = np.inf
    errstate = np.errstate(over="ignore", invalid="ignore", divide="ignore")
    errstate.__enter__()
    for it in range(1, max_iter + 1):
        rp = b - a_apply(x) - d_cols @ v
        rd = hermitize(c - a_adj(y) - z)
        rt = d_obj - d_cols.T @ y - t
        gap_x = trace_inner(x, z)
        gap_v = float(v @ t)
        mu = (gap_x + gap_v) / (n + q)
        pobj = trace_inner(c, x) + float(d_obj @ v)
        dobj = float(b @ y)
        denom = 1.0 + max(abs(pobj), abs(dobj))
        relgap = abs(pobj - dobj) / denom
        compl = (gap_x + gap_v) / denom
        pinf = np.linalg.norm(rp) / norm_b
        dinf = (np.linalg.norm(rd) + np.linalg.norm(rt)) / norm_c
        history.append(
            {"pobj": pobj, "dobj": dobj, "pinf": pinf, "dinf": dinf, "gap": relgap}
        )
        score = max(relgap, compl, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, x.copy(), v.copy(), y.copy(), z.copy(), t.copy(),
                    relgap, pinf, dinf)
        if pinf <= tol and dinf <= tol and max(relgap, compl) <= tol:
            status = OPTIMAL
            break
        if not np.isfinite(score) or mu > 1e16:
            break
        # stop once progress stalls at the numerical floor
        stall = stall + 1 if mu > 0.9 * mu_prev else 0
        if stall >= 8:
            break
        mu_prev = mu

        try:
            w, r, r_inv = _nt_scaling(x, z)
        except SolverError:
            break
        waw = [hermitize(w @ a_i @ w) for a_i in a_list]
        wrdw = hermitize(w @ rd @ w)
        wlp2 = v / t
        m_sc = np.empty((m, m))
        for i in range(m):
            for k in range(i, m):
                m_sc[i, k] = m_sc[k, i] = trace_inner(a_list[i], waw[k])
        m_sc += (d_cols * wlp2) @ d_cols.T
        # tiny regularization keeps the solve stable when a row is degenerate
        m_sc += (1e-14 * max(1.0, np.trace(m_sc) / max(m, 1))) * np.eye(m)
        try:
            lsc = np.linalg.cholesky(m_sc)
        except np.linalg.LinAlgError:
            lsc = None

        def schur_solve(rhs_vec):
            if lsc is not None:
                return np.linalg.solve(
                    lsc.T, np.linalg.solve(lsc, rhs_vec)
                )
            return np.linalg.lstsq(m_sc, rhs_vec, rcond=None)[0]

        def direction(t_psd, rv):
            e = t_psd - wrdw
            rhs = rp - a_apply(e) - d_cols @ (rv - wlp2 * rt)
            dy = schur_solve(rhs)
            dz = hermitize(rd - a_adj(dy))
            dx = hermitize(e + sum(dy[k] * waw[k] for k in range(m)))
            dt = rt - d_cols.T @ dy
            dv = rv - wlp2 * dt
            return dx, dv, dy, dz, dt

        try:
            # predictor
            dx_a, dv_a, dy_a, dz_a, dt_a = direction(-x, -v)
            ap = min(1.0, 0.99 * min(_max_step_psd(x, dx_a), _max_step_pos(v, dv_a)))
            ad = min(1.0, 0.99 * min(_max_step_psd(z, dz_a), _max_step_pos(t, dt_a)))
            gap_aff = trace_inner(x + ap * dx_a, z + ad * dz_a) + float(
                (v + ap * dv_a) @ (t + ad * dt_a)
            )
            mu_aff = max(gap_aff, 0.0) / (n + q)
            sigma = float(np.clip((mu_aff / mu) ** 3, 1e-10, 1.0)) if mu > 0 else 0.1

            # corrector in the NT-scaled space
            v_nt = hermitize(r @ z @ r)
            dxh = r_inv @ dx_a @ r_inv
            dzh = r @ dz_a @ r
            cross = hermitize(0.5 * (dxh @ dzh + dzh @ dxh))
            rhs_hat = hermitize(sigma * mu * eye - v_nt @ v_nt - cross)
            m_hat = _lyap_solve(v_nt, rhs_hat)
            t_psd = hermitize(r @ m_hat @ r)
            if not np.all(np.isfinite(t_psd)):
                # ill-conditioned scaling: drop the second-order term
                lam_z, q_z = np.linalg.eigh(z)
                lam_z = np.maximum(lam_z, 1e-30 * max(float(lam_z[-1]), 1e-270))
                z_inv = hermitize((q_z / lam_z) @ q_z.conj().T)
                t_psd = sigma * mu * z_inv - x
            rv = sigma * mu / t - v - dv_a * dt_a / t

            dx, dv, dy, dz, dt = direction(t_psd, rv)
            ap = min(1.0, 0.99 * min(_max_step_psd(x, dx), _max_step_pos(v, dv)))
            ad = min(1.0, 0.99 * min(_max_step_psd(z, dz), _max_step_pos(t, dt)))
        except SolverError:
            break
        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dz))):
            break

        x = hermitize(x + ap * dx)
        v = v + ap * dv
        y = y + ad * dy
        z = hermitize(z + ad * dz)
        t = t + ad * dt

    errstate.__exit__(None, None, None)
    if status != OPTIMAL and best is not None:
        _, x, v, y, z, t, relgap, pinf, dinf = best
        # accept a stall at the numerical floor when within 10x of target
        if best[0] <= 10.0 * tol:
            status = OPTIMAL
    return {
        "x": x,
        "v": v,
        "y": y,
        "z": z,
        "t": t,
        "status": status,
        "iterations": it,
        "gap": relgap,
        "pinf": pinf,
        "dinf": dinf,
        "history": history,
    }


def _slack_columns(constraints):
    m = len(constraints)
    cols = []
    for i, (_, _, sense) in enumerate(constraints):
        if sense == EQ:
            continue
        col = np.zeros(m)
        col[i] = 1.0 if sense == LE else -1.0
        cols.append(col)
    if cols:
        return np.stack(cols, axis=1)
    return np.zeros((m, 0))


def _phase1_feasible(problem, tol):
    """Big-M style feasibility probe: min r s.t. the shifted system holds.

    Returns True when a (near) feasible point exists, False when the
    minimum residual multiplier stays clearly positive, None when the probe
    itself did not converge.
    """
    n = problem.n
    a_list = [a for a, _, _ in problem.constraints]
    b = np.array([bi for _, bi, _ in problem.constraints])
    d_cols = _slack_columns(problem.constraints)
    q = d_cols.shape[1]
    u = b - np.array([trace_inner(a, np.eye(n, dtype=complex)) for a in a_list])
    u -= d_cols @ np.ones(q)
    d_cols1 = np.concatenate([d_cols, u[:, None]], axis=1)
    d_obj1 = np.concatenate([np.zeros(q), [1.0]])
    res = _ipm(
        np.zeros((n, n), dtype=complex), a_list, b, d_cols1, d_obj1,
        tol=1e-8, max_iter=100,
    )
    if res["status"] != OPTIMAL:
        return None
    return bool(res["v"][-1] <= 1e-6 * (1.0 + float(np.max(np.abs(b), initial=0.0))))


def solve_sdp(problem: SdpProblem, tol: float = 1e-9, max_iter: int = 200) -> SdpSolution:
    """Solve a small Hermitian SDP to high accuracy.

    Status is ``optimal`` when primal/dual residuals and the duality gap all
    fall below ``tol`` (relative), ``infeasible`` when a feasibility probe
    certifies there is no solution, ``maxiter`` otherwise.
    """
    a_list = [a for a, _, _ in problem.constraints]
    b = np.array([bi for _, bi, _ in problem.constraints])
    d_cols = _slack_columns(problem.constraints)
    d_obj = np.zeros(d_cols.shape[1])
    res = _ipm(problem.c, a_list, b, d_cols, d_obj, tol=tol, max_iter=max_iter)
    status = res["status"]
    if status != OPTIMAL:
        feas = _phase1_feasible(problem, tol)
        if feas is False:
            status = INFEASIBLE
    return SdpSolution(
        x=hermitize(res["x"]),
        duals=res["y"],
        objective=trace_inner(problem.c, res["x"]),
        status=status,
        gap=res["gap"],
        primal_infeas=res["pinf"],
        dual_infeas=res["dinf"],
        iterations=res["iterations"],
        z=hermitize(res["z"]),
        history=res["history"],
    )


def rank_reduce(sol: SdpSolution, problem: SdpProblem) -> SdpSolution:
    """Reduce the rank of an optimal SDP matrix without moving objective or
    constraint values.

    Factors X = V V^H, looks for a nonzero Hermitian direction D with
    tr(V^H A_i V D) = 0 for every constraint, and steps X <- V (I - D/lam) V^H
    with lam the largest-magnitude eigenvalue of D, which drops the rank by
    at least one. Repeats until no direction exists. Every constraint value
    (and hence the objective, by complementarity) is preserved exactly.
    """
    if sol.status != OPTIMAL:
        raise SolverError("rank_reduce requires an optimal solution")
    x = hermitize(np.asarray(sol.x, dtype=complex))
    n = x.shape[0]
    for _ in range(n + 1):
        w, u = np.linalg.eigh(x)
        lam_max = max(float(w[-1]), 0.0)
        keep = w > RANK_RTOL * lam_max if lam_max > 0 else w > np.inf
        r = int(np.sum(keep))
        if r <= 1:
            break
        fac = u[:, keep] * np.sqrt(w[keep])
        basis = herm_basis(r)
        rows = []
        for a_i, _, _ in problem.constraints:
            g = hermitize(fac.conj().T @ a_i @ fac)
            rows.append([trace_inner(e, g) for e in basis])
        mat = np.array(rows)
        _, svals, vt = np.linalg.svd(mat, full_matrices=True)
        null_dim = r * r - len(svals) + int(
            np.sum(svals <= 1e-9 * max(1.0, svals[0] if len(svals) else 0.0))
        )
        if null_dim <= 0:
            break
        delta = herm_from_coords(vt[-1], basis)
        ev, evec = np.linalg.eigh(delta)
        k = int(np.argmax(np.abs(ev)))
        lam_bar = ev[k]
        if abs(lam_bar) < 1e-14:
            break
        mid_ev = np.maximum(1.0 - ev / lam_bar, 0.0)
        fac_new = (fac @ evec) * np.sqrt(mid_ev)
        x = hermitize(fac_new @ fac_new.conj().T)
    return SdpSolution(
        x=x,
        duals=sol.duals,
        objective=trace_inner(problem.c, x),
        status=sol.status,
        gap=sol.gap,
        primal_infeas=sol.primal_infeas,
        dual_infeas=sol.dual_infeas,
        iterations=sol.iterations,
        z=sol.z,
    )


def extract_rank_one(x, ratio_tol: float = 1e-6) -> np.ndarray:
    """Factor a (near) rank-one Hermitian PSD matrix as x = v v^H.

    Requires lambda_2 / lambda_1 <= ratio_tol; run rank_reduce first if the
    matrix is not rank-one yet.
    """
    x = hermitize(np.asarray(x, dtype=complex))
    w, u = np.linalg.eigh(x)
    lam1 = float(w[-1])
    if lam1 <= 0.0:
        raise RankError("matrix has no positive eigenvalue")
    lam2 = float(w[-2]) if x.shape[0] > 1 else 0.0
    if max(lam2, 0.0) / lam1 > ratio_tol:
        raise RankError(
            f"matrix is not numerically rank-one (ratio {lam2 / lam1:.2e})"
        )
    return np.sqrt(lam1) * u[:, -1]
