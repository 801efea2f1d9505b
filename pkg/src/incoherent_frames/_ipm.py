"""Compiled interior-point kernel used by :mod:`incoherent_frames.conic`.

Standard form handled here::

    minimize c^T x   s.t.  E x = d,   G x + s = h,   s in K

``K`` is a product of cones described by ``ctype`` (0 = nonnegative ray of
dimension 1, 1 = second-order cone), ``cstart`` and ``cdim``.
"""

import numpy as np
from numba import njit

OPTIMAL, MAX_ITERS, INFEASIBLE_PRIMAL, INFEASIBLE_DUAL, NUMERICAL_FAILURE = 0, 1, 2, 3, 4


@njit(cache=True, error_model="numpy")
def _dot(a, b):
    acc = 0.0
    for i in range(a.size):
        acc += a[i] * b[i]
    return acc


@njit(cache=True, error_model="numpy")
def _mv(A, x):
    m, n = A.shape
    out = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += A[i, j] * x[j]
        out[i] = acc
    return out


@njit(cache=True, error_model="numpy")
def _mtv(A, x):
    m, n = A.shape
    out = np.zeros(n)
    for i in range(m):
        xi = x[i]
        if xi != 0.0:
            for j in range(n):
                out[j] += A[i, j] * xi
    return out


@njit(cache=True, error_model="numpy")
def _gram(A):
    m, n = A.shape
    H = np.zeros((n, n))
    for k in range(m):
        for i in range(n):
            aki = A[k, i]
            if aki != 0.0:
                for j in range(i, n):
                    H[i, j] += aki * A[k, j]
    for i in range(n):
        for j in range(i):
            H[i, j] = H[j, i]
    return H


@njit(cache=True, error_model="numpy")
def _mm(A, B):
    m, k = A.shape
    n = B.shape[1]
    out = np.zeros((m, n))
    for i in range(m):
        for t in range(k):
            a = A[i, t]
            if a != 0.0:
                for j in range(n):
                    out[i, j] += a * B[t, j]
    return out


@njit(cache=True, error_model="numpy")
def _identity(ctype, cstart, M):
    e = np.zeros(M)
    for k in range(ctype.size):
        e[cstart[k]] = 1.0
    return e


@njit(cache=True, error_model="numpy")
def _shift_into(v, ctype, cstart, cdim, e):
    worst = -np.inf
    for k in range(ctype.size):
        a = cstart[k]
        if ctype[k] == 0:
            w = -v[a]
        else:
            nrm = 0.0
            for j in range(a + 1, a + cdim[k]):
                nrm += v[j] * v[j]
            w = np.sqrt(nrm) - v[a]
        if w > worst:
            worst = w
    if worst < 0:
        return v.copy()
    return v + (1.0 + worst) * e


@njit(cache=True, error_model="numpy")
def _jprod(u, v, ctype, cstart, cdim):
    out = np.empty_like(u)
    for k in range(ctype.size):
        a = cstart[k]
        if ctype[k] == 0:
            out[a] = u[a] * v[a]
        else:
            dot = 0.0
            for j in range(a, a + cdim[k]):
                dot += u[j] * v[j]
            out[a] = dot
            for j in range(a + 1, a + cdim[k]):
                out[j] = u[a] * v[j] + v[a] * u[j]
    return out


@njit(cache=True, error_model="numpy")
def _jdiv(lam, v, ctype, cstart, cdim):
    out = np.empty_like(v)
    for k in range(ctype.size):
        a = cstart[k]
        if ctype[k] == 0:
            out[a] = v[a] / lam[a]
        else:
            l0 = lam[a]
            v0 = v[a]
            n1 = 0.0
            r1 = 0.0
            for j in range(a + 1, a + cdim[k]):
                n1 += lam[j] * lam[j]
                r1 += lam[j] * v[j]
            det = l0 * l0 - n1
            rho = (l0 * v0 - r1) / det
            out[a] = rho
            for j in range(a + 1, a + cdim[k]):
                out[j] = (v[j] - lam[j] * rho) / l0
    return out


@njit(cache=True, error_model="numpy")
def _max_step(x, dx, ctype, cstart, cdim):
    alpha = np.inf
    for k in range(ctype.size):
        a = cstart[k]
        if ctype[k] == 0:
            if dx[a] < 0:
                t = -x[a] / dx[a]
                if t < alpha:
                    alpha = t
        else:
            qa = dx[a] * dx[a]
            qb = x[a] * dx[a]
            qc = x[a] * x[a]
            for j in range(a + 1, a + cdim[k]):
                qa -= dx[j] * dx[j]
                qb -= x[j] * dx[j]
                qc -= x[j] * x[j]
            # the head must stay nonnegative; this also catches tangent steps
            if dx[a] < 0:
                t = -x[a] / dx[a]
                if t < alpha:
                    alpha = t
            disc = qb * qb - qa * qc
            if disc < 0 and -disc <= 1e-12 * qb * qb:
                disc = 0.0  # double root lost to cancellation
            if disc >= 0:
                den = -qb + np.sqrt(disc)
                if den > 0:
                    t = max(qc, 0.0) / den
                    if t < alpha:
                        alpha = t
    return alpha


@njit(cache=True, error_model="numpy")
def _nt_scaling(s, z, ctype, cstart, cdim):
    """Return (w, eta) with w holding the normalized scaling point per cone row."""
    M = s.size
    w = np.empty(M)
    eta = np.empty(ctype.size)
    for k in range(ctype.size):
        a = cstart[k]
        if ctype[k] == 0:
            w[a] = np.sqrt(s[a] / z[a])
            eta[k] = 1.0
        else:
            d = cdim[k]
            sres = s[a] * s[a]
            zres = z[a] * z[a]
            for j in range(a + 1, a + d):
                sres -= s[j] * s[j]
                zres -= z[j] * z[j]
            sres = max(sres, 1e-300)
            zres = max(zres, 1e-300)
            ss = np.sqrt(sres)
            zs = np.sqrt(zres)
            dot = 0.0
            for j in range(a, a + d):
                dot += (s[j] / ss) * (z[j] / zs)
            gamma = np.sqrt(max((1.0 + dot) / 2.0, 1e-300))
            w[a] = (s[a] / ss + z[a] / zs) / (2.0 * gamma)
            for j in range(a + 1, a + d):
                w[j] = (s[j] / ss - z[j] / zs) / (2.0 * gamma)
            eta[k] = (sres / zres) ** 0.25
    return w, eta


@njit(cache=True, error_model="numpy")
def _apply_w(v, w, eta, ctype, cstart, cdim, inverse):
    out = np.empty_like(v)
    for k in range(ctype.size):
        a = cstart[k]
        if ctype[k] == 0:
            if inverse:
                out[a] = v[a] / w[a]
            else:
                out[a] = v[a] * w[a]
        else:
            d = cdim[k]
            w0 = w[a]
            v0 = v[a]
            dot = 0.0
            for j in range(a + 1, a + d):
                dot += w[j] * v[j]
            if inverse:
                out[a] = (w0 * v0 - dot) / eta[k]
                coef = -v0 + dot / (1.0 + w0)
                for j in range(a + 1, a + d):
                    out[j] = (v[j] + w[j] * coef) / eta[k]
            else:
                out[a] = (w0 * v0 + dot) * eta[k]
                coef = v0 + dot / (1.0 + w0)
                for j in range(a + 1, a + d):
                    out[j] = (v[j] + w[j] * coef) * eta[k]
    return out


@njit(cache=True, error_model="numpy")
def _apply_w_inv_mat(G, w, eta, ctype, cstart, cdim):
    M, n = G.shape
    out = np.empty_like(G)
    for k in range(ctype.size):
        a = cstart[k]
        if ctype[k] == 0:
            for col in range(n):
                out[a, col] = G[a, col] / w[a]
        else:
            d = cdim[k]
            w0 = w[a]
            inv_eta = 1.0 / eta[k]
            for col in range(n):
                v0 = G[a, col]
                dot = 0.0
                for j in range(a + 1, a + d):
                    dot += w[j] * G[j, col]
                out[a, col] = (w0 * v0 - dot) * inv_eta
                coef = -v0 + dot / (1.0 + w0)
                for j in range(a + 1, a + d):
                    out[j, col] = (G[j, col] + w[j] * coef) * inv_eta
    return out


@njit(cache=True, error_model="numpy")
def _chol_solve(L, b):
    n = L.shape[0]
    y = np.empty(n)
    for i in range(n):
        acc = b[i]
        for j in range(i):
            acc -= L[i, j] * y[j]
        y[i] = acc / L[i, i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for j in range(i + 1, n):
            acc -= L[j, i] * x[j]
        x[i] = acc / L[i, i]
    return x


@njit(cache=True, error_model="numpy")
def _chol_solve_mat(L, B):
    out = np.empty_like(B)
    for col in range(B.shape[1]):
        out[:, col] = _chol_solve(L, B[:, col].copy())
    return out


@njit(cache=True, error_model="numpy")
def _cholesky(A):
    """Cholesky with a diagonal floor; returns lower factor and success flag."""
    n = A.shape[0]
    L = np.zeros_like(A)
    ok = True
    for j in range(n):
        acc = A[j, j]
        for k in range(j):
            acc -= L[j, k] * L[j, k]
        if not acc > 0:
            ok = False
            acc = 1e-30 + abs(acc)
        L[j, j] = np.sqrt(acc)
        for i in range(j + 1, n):
            t = A[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / L[j, j]
    return L, ok


@njit(cache=True, error_model="numpy")
def _kkt_apply(E, G, w, eta, ctype, cstart, cdim, dx, dy, dz):
    """Multiply the unreduced KKT matrix [0 E^T G^T; E 0 0; G 0 -W^2]."""
    r1 = _mtv(G, dz) + _mtv(E, dy)
    r2 = _mv(E, dx)
    w2dz = _apply_w(_apply_w(dz, w, eta, ctype, cstart, cdim, False), w, eta, ctype, cstart, cdim, False)
    r3 = _mv(G, dx) - w2dz
    return r1, r2, r3


@njit(cache=True, error_model="numpy")
def _kkt_reduced(L, LS, HinvEt, E, Gs, w, eta, ctype, cstart, cdim, bx, by, bz):
    wbz = _apply_w(bz, w, eta, ctype, cstart, cdim, True)
    r = bx + _mtv(Gs, wbz)
    x0 = _chol_solve(L, r)
    p = E.shape[0]
    if p > 0:
        y = _chol_solve(LS, _mv(E, x0) - by)
        x = x0 - _mv(HinvEt, y)
    else:
        y = np.zeros(0)
        x = x0
    wdz = _mv(Gs, x) - wbz
    dz = _apply_w(wdz, w, eta, ctype, cstart, cdim, True)
    return x, y, dz


@njit(cache=True, error_model="numpy")
def _kkt_solve(L, LS, HinvEt, E, G, Gs, w, eta, ctype, cstart, cdim, bx, by, bz, refine):
    dx, dy, dz = _kkt_reduced(L, LS, HinvEt, E, Gs, w, eta, ctype, cstart, cdim, bx, by, bz)
    if refine == 0:
        return dx, dy, dz
    r1, r2, r3 = _kkt_apply(E, G, w, eta, ctype, cstart, cdim, dx, dy, dz)
    e1, e2, e3 = bx - r1, by - r2, bz - r3
    res = np.sqrt(_dot(e1, e1) + _dot(e2, e2) + _dot(e3, e3))
    for _ in range(refine):
        cx, cy, cz = _kkt_reduced(L, LS, HinvEt, E, Gs, w, eta, ctype, cstart, cdim, e1, e2, e3)
        nx, ny, nz = dx + cx, dy + cy, dz + cz
        r1, r2, r3 = _kkt_apply(E, G, w, eta, ctype, cstart, cdim, nx, ny, nz)
        f1, f2, f3 = bx - r1, by - r2, bz - r3
        new_res = np.sqrt(_dot(f1, f1) + _dot(f2, f2) + _dot(f3, f3))
        # keep a correction only if it helps; a poor factorization can make refinement diverge
        if not new_res < res:
            break
        dx, dy, dz, e1, e2, e3, res = nx, ny, nz, f1, f2, f3, new_res
    return dx, dy, dz


@njit(cache=True, error_model="numpy")
def _factor(Gs, E, reg):
    n = Gs.shape[1]
    H = _gram(Gs)
    scale = 1.0
    for i in range(n):
        if H[i, i] > scale:
            scale = H[i, i]
    for i in range(n):
        H[i, i] += reg * scale
    L, ok = _cholesky(H)
    p = E.shape[0]
    if p > 0:
        HinvEt = _chol_solve_mat(L, E.T.copy())
        S = _mm(E, HinvEt)
        sc = 1.0
        for i in range(p):
            if S[i, i] > sc:
                sc = S[i, i]
        for i in range(p):
            S[i, i] += reg * sc
        LS, ok2 = _cholesky(S)
        ok = ok and ok2
    else:
        HinvEt = np.zeros((n, 0))
        LS = np.zeros((0, 0))
    return L, LS, HinvEt, ok


@njit(cache=True, error_model="numpy")
def _norm(v):
    acc = 0.0
    for i in range(v.size):
        acc += v[i] * v[i]
    return np.sqrt(acc)


@njit(cache=True, error_model="numpy")
def hsde(c, E, d, G, h, ctype, cstart, cdim, tol, inf_tol, max_iters, refine):
    n = c.size
    p = d.size
    M = h.size
    ncones = ctype.size
    degree = ncones
    e = _identity(ctype, cstart, M)
    reg = 1e-13

    norm_c = max(1.0, _norm(c))
    norm_b = max(1.0, _norm(d))
    norm_h = max(1.0, _norm(h))

    # initial point: least squares with identity scaling
    w = np.ones(M)
    for k in range(ncones):
        if ctype[k] == 1:
            w[cstart[k]] = 1.0
            for j in range(cstart[k] + 1, cstart[k] + cdim[k]):
                w[j] = 0.0
    eta = np.ones(ncones)
    L, LS, HinvEt, ok = _factor(G, E, reg)
    x, y, zz = _kkt_solve(L, LS, HinvEt, E, G, G, w, eta, ctype, cstart, cdim,
                          np.zeros(n), d.copy(), h.copy(), refine)
    s = _shift_into(-zz, ctype, cstart, cdim, e)
    xd, y, zd = _kkt_solve(L, LS, HinvEt, E, G, G, w, eta, ctype, cstart, cdim,
                           -c, np.zeros(p), np.zeros(M), refine)
    z = _shift_into(zd, ctype, cstart, cdim, e)
    tau = 1.0
    kappa = 1.0

    status = MAX_ITERS
    it = 0
    gap = np.inf
    pres = np.inf
    dres = np.inf
    best = (np.inf, x.copy(), y.copy(), z.copy(), s.copy(), tau, kappa, np.inf, np.inf, np.inf)
    while True:
        rx = _mtv(G, z) + c * tau + _mtv(E, y)
        ry = d * tau - _mv(E, x)
        rz = s + _mv(G, x) - h * tau
        cx = _dot(c, x)
        by = _dot(d, y)
        hz = _dot(h, z)
        rt = kappa + cx + by + hz
        sz = _dot(s, z)
        mu = (sz + kappa * tau) / (degree + 1)

        pres = max(_norm(ry) / norm_b, _norm(rz) / norm_h) / tau
        dres = _norm(rx) / norm_c / tau
        pcost = cx / tau
        dcost = -(by + hz) / tau
        gap = sz / (tau * tau)
        rgap = gap / max(1.0, min(abs(pcost), abs(dcost)))
        merit = max(pres, dres, rgap)
        if merit < best[0]:
            best = (merit, x.copy(), y.copy(), z.copy(), s.copy(), tau, kappa, gap, pres, dres)
        if pres <= tol and dres <= tol and rgap <= tol:
            status = OPTIMAL
            break
        if by + hz < 0:
            r = rx - c * tau
            if _norm(r) / -(by + hz) < inf_tol:
                status = INFEASIBLE_PRIMAL
                break
        if cx < 0:
            r1 = _norm(_mv(E, x))
            r2 = _norm(s + _mv(G, x))
            if max(r1, r2) / -cx < inf_tol:
                status = INFEASIBLE_DUAL
                break
        if it >= max_iters:
            break
        if not np.isfinite(mu):
            status = NUMERICAL_FAILURE
            break

        w, eta = _nt_scaling(s, z, ctype, cstart, cdim)
        lam = _apply_w(z, w, eta, ctype, cstart, cdim, False)
        Gs = _apply_w_inv_mat(G, w, eta, ctype, cstart, cdim)
        L, LS, HinvEt, ok = _factor(Gs, E, reg)

        x1, y1, z1 = _kkt_solve(L, LS, HinvEt, E, G, Gs, w, eta, ctype, cstart, cdim,
                                -c, d.copy(), h.copy(), refine)
        denom = _dot(c, x1) + _dot(d, y1) + _dot(h, z1) - kappa / tau

        # predictor
        ds = _jprod(lam, lam, ctype, cstart, cdim)
        dk = kappa * tau
        lds = _jdiv(lam, ds, ctype, cstart, cdim)
        bz = -rz + _apply_w(lds, w, eta, ctype, cstart, cdim, False)
        x2, y2, z2 = _kkt_solve(L, LS, HinvEt, E, G, Gs, w, eta, ctype, cstart, cdim,
                                -rx, ry, bz, refine)
        dtau_a = (-rt + dk / tau - _dot(c, x2) - _dot(d, y2) - _dot(h, z2)) / denom
        dz_a = z2 + dtau_a * z1
        wdz_a = _apply_w(dz_a, w, eta, ctype, cstart, cdim, False)
        wids_a = -lds - wdz_a
        ds_a = _apply_w(wids_a, w, eta, ctype, cstart, cdim, False)
        dkap_a = -(dk + kappa * dtau_a) / tau
        a_aff = min(_max_step(s, ds_a, ctype, cstart, cdim), _max_step(z, dz_a, ctype, cstart, cdim))
        if dtau_a < 0:
            a_aff = min(a_aff, -tau / dtau_a)
        if dkap_a < 0:
            a_aff = min(a_aff, -kappa / dkap_a)
        a_aff = min(1.0, a_aff)
        sigma = (1.0 - a_aff) ** 3
        sigma = min(1.0, max(0.0, sigma))

        # corrector
        ds = ds + _jprod(wids_a, wdz_a, ctype, cstart, cdim) - sigma * mu * e
        dk = dk + dkap_a * dtau_a - sigma * mu
        f = 1.0 - sigma
        lds = _jdiv(lam, ds, ctype, cstart, cdim)
        bz = -f * rz + _apply_w(lds, w, eta, ctype, cstart, cdim, False)
        x2, y2, z2 = _kkt_solve(L, LS, HinvEt, E, G, Gs, w, eta, ctype, cstart, cdim,
                                -f * rx, f * ry, bz, refine)
        dtau = (-f * rt + dk / tau - _dot(c, x2) - _dot(d, y2) - _dot(h, z2)) / denom
        dx = x2 + dtau * x1
        dy = y2 + dtau * y1
        dz = z2 + dtau * z1
        wdz = _apply_w(dz, w, eta, ctype, cstart, cdim, False)
        ds_ = _apply_w(-lds - wdz, w, eta, ctype, cstart, cdim, False)
        dkap = -(dk + kappa * dtau) / tau
        alpha = min(_max_step(s, ds_, ctype, cstart, cdim), _max_step(z, dz, ctype, cstart, cdim))
        if dtau < 0:
            alpha = min(alpha, -tau / dtau)
        if dkap < 0:
            alpha = min(alpha, -kappa / dkap)
        alpha = min(1.0, 0.99 * alpha)
        if not np.isfinite(alpha) or alpha < 1e-12:
            status = NUMERICAL_FAILURE
            break
        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * ds_
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkap
        it += 1

    if status == MAX_ITERS or status == NUMERICAL_FAILURE:
        # fall back to the iterate with the smallest optimality measure
        _, x, y, z, s, tau, kappa, gap, pres, dres = best
    if status == INFEASIBLE_PRIMAL or status == INFEASIBLE_DUAL:
        scale = 1.0
    else:
        scale = tau
    return x / scale, y / scale, z / scale, s / scale, status, it, gap, pres, dres
