"""Pure numpy implementation of the hot kernels.

Same signatures as the compiled ``_ckernels`` module; used when the
extension is unavailable or ``NEMATIC_OR_PURE_PYTHON=1`` is set.

Unknowns are interleaved by node, ``x[3*i + c]`` with c = 0 (q11), 1 (q12),
2 (u).  Banded matrices use LAPACK storage ``ab[KU + r - c, c] = A[r, c]``.
"""

import numpy as np
from scipy.linalg import solve_banded

KL = 8
KU = 8
NBAND = KL + KU + 1


def _d1(f, h):
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return out


def _d2_stencils(n_nodes, h):
    """Row-wise second-derivative stencils as (offset, weight) pairs per node."""
    h2 = h * h
    inner = ((-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2))
    if n_nodes >= 4:
        first = ((0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2))
        last = ((0, 2.0 / h2), (-1, -5.0 / h2), (-2, 4.0 / h2), (-3, -1.0 / h2))
    else:
        first = ((0, 1.0 / h2), (1, -2.0 / h2), (2, 1.0 / h2))
        last = ((0, 1.0 / h2), (-1, -2.0 / h2), (-2, 1.0 / h2))
    return first, inner, last


def _d2(f, h):
    h2 = h * h
    out = np.empty_like(f)
    out[1:-1] = (f[:-2] - 2 * f[1:-1] + f[2:]) / h2
    if f.size >= 4:
        out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h2
        out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h2
    else:
        out[0] = out[-1] = out[1]
    return out


def residual(q11, q12, u, h, eps, px, l2, gc2, coupled):
    """Steady residual (right-hand side of the evolution equations).

    Rows at the two wall nodes are zero.  With ``coupled`` false the
    velocity is frozen: no flow coupling in the Q rows and a zero u row.
    """
    q11 = np.asarray(q11, dtype=float)
    q12 = np.asarray(q12, dtype=float)
    u = np.asarray(u, dtype=float)
    a = _d2(q11, h)
    b = _d2(q12, h)
    r = q11 * q11 + q12 * q12
    bulk = eps * (1.0 - 4.0 * r)
    r11 = a + q11 * bulk
    r12 = b + q12 * bulk
    ru = np.zeros_like(u)
    if coupled:
        uy = _d1(u, h)
        r11 += uy * q12
        r12 -= uy * q11
        p = q11 * b - q12 * a
        ru[1:-1] = (
            -px
            + (u[:-2] - 2 * u[1:-1] + u[2:]) / (h * h)
            + l2 * (p[2:] - p[:-2]) / h
            + gc2 * (q12[2:] - q12[:-2]) / (2 * h)
        )
    for f in (r11, r12, ru):
        f[0] = 0.0
        f[-1] = 0.0
    return r11, r12, ru


class _Band:
    def __init__(self, n_unknowns):
        self.ab = np.zeros((NBAND, n_unknowns))

    def add(self, rows, cols, vals):
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        np.add.at(self.ab, (KU + rows - cols, cols), vals)


def jacobian_band(q11, q12, u, h, eps, px, l2, gc2, coupled):
    """Analytic Jacobian of :func:`residual` with identity wall rows."""
    q11 = np.asarray(q11, dtype=float)
    q12 = np.asarray(q12, dtype=float)
    u = np.asarray(u, dtype=float)
    n = q11.size
    band = _Band(3 * n)
    i = np.arange(1, n - 1)
    h2 = h * h
    r = q11 * q11 + q12 * q12
    r11 = 3 * i
    r12 = 3 * i + 1
    ru = 3 * i + 2
    # diffusion
    for off, w in ((-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)):
        band.add(r11, 3 * (i + off), np.full(i.size, w))
        band.add(r12, 3 * (i + off) + 1, np.full(i.size, w))
    # bulk
    qi11 = q11[i]
    qi12 = q12[i]
    base = eps * (1.0 - 4.0 * r[i])
    band.add(r11, 3 * i, base - 8.0 * eps * qi11 * qi11)
    band.add(r11, 3 * i + 1, -8.0 * eps * qi11 * qi12)
    band.add(r12, 3 * i, -8.0 * eps * qi11 * qi12)
    band.add(r12, 3 * i + 1, base - 8.0 * eps * qi12 * qi12)
    if coupled:
        uy = _d1(u, h)
        band.add(r11, 3 * i + 1, uy[i])
        band.add(r12, 3 * i, -uy[i])
        band.add(r11, 3 * (i + 1) + 2, qi12 / (2 * h))
        band.add(r11, 3 * (i - 1) + 2, -qi12 / (2 * h))
        band.add(r12, 3 * (i + 1) + 2, -qi11 / (2 * h))
        band.add(r12, 3 * (i - 1) + 2, qi11 / (2 * h))
        for off, w in ((-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)):
            band.add(ru, 3 * (i + off) + 2, np.full(i.size, w))
        band.add(ru, 3 * (i + 1) + 1, np.full(i.size, gc2 / (2 * h)))
        band.add(ru, 3 * (i - 1) + 1, np.full(i.size, -gc2 / (2 * h)))
        if l2 != 0.0:
            band.add(*_stress_entries(q11, q12, h, l2, True))
    else:
        band.add(ru, ru, np.ones(i.size))
    _walls(band, n)
    return band.ab


def _stress_entries(q11, q12, h, scale, with_product):
    """Entries of ``scale * (P[i+1] - P[i-1]) / h`` in the u rows.

    P = q11*q12'' - q12*q11''.  ``with_product`` adds the terms from
    differentiating the undifferentiated factors (exact Jacobian); without
    it the factors are treated as frozen coefficients.
    """
    n = q11.size
    first, inner, last = _d2_stencils(n, h)
    a = _d2(q11, h)
    b = _d2(q12, h)
    rows, cols, vals = [], [], []
    j_all = np.arange(n)
    for sign, i_of_j in ((1.0, j_all - 1), (-1.0, j_all + 1)):
        ok = (i_of_j >= 1) & (i_of_j <= n - 2)
        js = j_all[ok]
        row = 3 * i_of_j[ok] + 2
        c = sign * scale / h
        if with_product:
            rows += [row, row]
            cols += [3 * js, 3 * js + 1]
            vals += [c * b[js], -c * a[js]]
        for sel, sten in ((js == 0, first), ((js > 0) & (js < n - 1), inner), (js == n - 1, last)):
            jj = js[sel]
            rr = row[sel]
            for off, w in sten:
                m = jj + off
                rows += [rr, rr]
                cols += [3 * m, 3 * m + 1]
                vals += [-c * q12[jj] * w, c * q11[jj] * w]
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def _walls(band, n):
    ab = band.ab
    for node in (0, n - 1):
        for c in range(3):
            row = 3 * node + c
            # zero the wall row, keep its diagonal
            for col in range(max(0, row - KL), min(3 * n, row + KU + 1)):
                ab[KU + row - col, col] = 0.0
            ab[KU, row] = 1.0


def frozen_band(q11, q12, u, h, eps, l2, gc2, dt, dtu, coupled):
    """Matrix ``I - dt*L`` of the linearly implicit pseudo-time step.

    ``L`` holds every derivative term with coefficients frozen at the
    current state plus the dissipative part ``-4 eps |q|^2 q`` of the bulk
    force.  The u rows use step ``dtu`` (dt over the inertia number).
    Wall rows are identity.
    """
    q11 = np.asarray(q11, dtype=float)
    q12 = np.asarray(q12, dtype=float)
    u = np.asarray(u, dtype=float)
    n = q11.size
    band = _Band(3 * n)
    i = np.arange(1, n - 1)
    h2 = h * h
    r = q11 * q11 + q12 * q12
    r11 = 3 * i
    r12 = 3 * i + 1
    ru = 3 * i + 2
    ones = np.ones(i.size)
    band.add(r11, r11, ones + dt * 4.0 * eps * r[i])
    band.add(r12, r12, ones + dt * 4.0 * eps * r[i])
    band.add(ru, ru, ones)
    for off, w in ((-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)):
        band.add(r11, 3 * (i + off), np.full(i.size, -dt * w))
        band.add(r12, 3 * (i + off) + 1, np.full(i.size, -dt * w))
        if coupled:
            band.add(ru, 3 * (i + off) + 2, np.full(i.size, -dtu * w))
    if coupled:
        qi11 = q11[i]
        qi12 = q12[i]
        band.add(r11, 3 * (i + 1) + 2, -dt * qi12 / (2 * h))
        band.add(r11, 3 * (i - 1) + 2, dt * qi12 / (2 * h))
        band.add(r12, 3 * (i + 1) + 2, dt * qi11 / (2 * h))
        band.add(r12, 3 * (i - 1) + 2, -dt * qi11 / (2 * h))
        band.add(ru, 3 * (i + 1) + 1, np.full(i.size, -dtu * gc2 / (2 * h)))
        band.add(ru, 3 * (i - 1) + 1, np.full(i.size, dtu * gc2 / (2 * h)))
        if l2 != 0.0:
            band.add(*_stress_entries(q11, q12, h, -dtu * l2, False))
    _walls(band, n)
    return band.ab


def _energy_cf(q11, q12, h, eps):
    d11 = np.diff(q11)
    d12 = np.diff(q12)
    grad = float(np.sum(d11 * d11 + d12 * d12)) / h
    r = q11 * q11 + q12 * q12
    f = eps * r * (2.0 * r - 1.0)
    bulk = h * (float(f.sum()) - 0.5 * (f[0] + f[-1]))
    return grad + bulk


def relax_cf(q11, q12, h, eps, dt, tol, max_steps):
    """Semi-implicit gradient flow of the frozen-velocity Q system.

    Returns ``(q11, q12, steps, residual_trace, energy_trace, converged)``.
    Traces hold one entry per visited iterate, the initial one included.
    """
    q11 = np.array(q11, dtype=float)
    q12 = np.array(q12, dtype=float)
    n = q11.size
    m = n - 2
    h2 = h * h
    res = []
    energy = []
    ab = np.empty((3, m))
    rhs = np.empty((m, 2))
    converged = False
    step = 0
    while True:
        r11, r12, _ = residual(q11, q12, q11 * 0.0, h, eps, 0.0, 0.0, 0.0, False)
        rn = max(np.max(np.abs(r11)), np.max(np.abs(r12)))
        if not np.isfinite(rn):
            break
        res.append(rn)
        energy.append(_energy_cf(q11, q12, h, eps))
        if rn < tol:
            converged = True
            break
        if step >= max_steps:
            break
        r = q11 * q11 + q12 * q12
        ab[0, :] = -dt / h2
        ab[2, :] = -dt / h2
        ab[1, :] = 1.0 + 2.0 * dt / h2 + 4.0 * dt * eps * r[1:-1]
        rhs[:, 0] = q11[1:-1] * (1.0 + dt * eps)
        rhs[:, 1] = q12[1:-1] * (1.0 + dt * eps)
        rhs[0, 0] += dt / h2 * q11[0]
        rhs[0, 1] += dt / h2 * q12[0]
        rhs[-1, 0] += dt / h2 * q11[-1]
        rhs[-1, 1] += dt / h2 * q12[-1]
        sol = solve_banded((1, 1), ab, rhs, overwrite_ab=False, check_finite=False)
        q11[1:-1] = sol[:, 0]
        q12[1:-1] = sol[:, 1]
        step += 1
    return q11, q12, step, np.array(res), np.array(energy), converged
