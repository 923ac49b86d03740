"""Jitted stepping kernels for the Monte Carlo engine.

One time step per particle is: move at unit speed (tumbling particles stay
put), wrap periodically, relax the internal deviation ``y`` toward zero while
adding the relative change of the sensed attractant along the path, then
stochastically stop or restart.  Observables are tallied after movement and
the internal update but before the transitions of the same step.

The sensed-field update exploits that in 1D the log-attractant changes by
exactly ``+-dt`` per step unless the particle crosses the origin or the
periodic seam, so ``expm1`` is evaluated only for those rare crossings.

All randomness comes from the counter-based :func:`chemokin.rng.u01`, one
draw per particle per step, so results are independent of evaluation order.
A draw ``u`` that falls below the transition probability ``p`` is reused as
``u / p`` (uniform conditional on the event) to pick the fresh direction.
"""

import math

from numba import njit

from .rng import u01

# Status codes returned by the kernels.
OK = 0
NAN_DETECTED = 1


@njit(cache=True, fastmath={"reassoc", "contract", "arcp"})
def run_1d(
    x,
    v,
    y,
    mprev,
    seed,
    n_steps,
    avg_start,
    stride,
    dt,
    L,
    eps,
    tau,
    delta,
    chi,
    nu,
    counts_f,
    counts_g,
    xi_sums,
    xi_counts,
    snap_counts,
):
    n = x.shape[0]
    n_cells = counts_f.shape[0]
    half = 0.5 * L
    inv_cell = n_cells / L
    decay = 1.0 / (1.0 + dt / tau)
    inv_delta = 1.0 / delta
    pstop_coef = dt / eps
    pstop_max = pstop_coef * (1.0 + chi)  # Lambda < 1 + chi: cheap reject bound
    instant = nu == 0.0
    p_restart = 0.0 if instant else dt / (nu * eps)
    snap = 0

    for k in range(1, n_steps + 1):
        accumulate = k > avg_start and (k - avg_start) % stride == 0
        for l in range(n):
            vi = v[l]
            if vi != 0.0:
                xn = x[l] + vi * dt
                if xn >= half:
                    xn -= L
                elif xn < -half:
                    xn += L
                mn = -abs(xn)
                dm = mn - mprev[l]
                # |dm| <= dt << 1 always (unit speed, M continuous across the
                # seam): cubic Taylor of expm1 is exact to ~dm^4/24
                ds = dm * (1.0 + dm * (0.5 + dm * (1.0 / 6.0)))
                y[l] = (y[l] + ds) * decay
                mprev[l] = mn
                x[l] = xn
            else:
                y[l] = y[l] * decay

            if accumulate:
                idx = int((x[l] + half) * inv_cell)
                if idx >= n_cells:
                    idx = n_cells - 1
                if vi != 0.0:
                    counts_f[idx] += 1
                    zz = y[l] * inv_delta
                    run_len = eps / (1.0 - chi * zz / math.sqrt(1.0 + zz * zz))
                    s = 0.0
                    if x[l] > 0.0:
                        s = -vi
                    elif x[l] < 0.0:
                        s = vi
                    if s > 0.0:
                        xi_sums[0, idx] += run_len
                        xi_counts[0, idx] += 1
                    elif s < 0.0:
                        xi_sums[1, idx] += run_len
                        xi_counts[1, idx] += 1
                    else:
                        xi_sums[2, idx] += run_len
                        xi_counts[2, idx] += 1
                else:
                    counts_g[idx] += 1
                snap_counts[snap, idx] += 1

            u = u01(seed, k, l)
            if vi != 0.0:
                # Lambda is needed only when the draw can possibly stop the run
                if u < pstop_max:
                    zz = y[l] * inv_delta
                    p = pstop_coef * (1.0 - chi * zz / math.sqrt(1.0 + zz * zz))
                    if u < p:
                        if instant:
                            v[l] = -1.0 if (u / p) < 0.5 else 1.0
                        else:
                            v[l] = 0.0
            else:
                if u < p_restart:
                    v[l] = -1.0 if (u / p_restart) < 0.5 else 1.0

        if accumulate:
            snap += 1
            for l in range(n):
                if math.isnan(y[l]) or math.isnan(x[l]):
                    return NAN_DETECTED, snap
    return OK, snap


@njit(cache=True, fastmath={"reassoc", "contract", "arcp"})
def run_2d(
    x1,
    x2,
    vx,
    vy,
    y,
    mprev,
    seed,
    n_steps,
    avg_start,
    stride,
    dt,
    L,
    eps,
    tau,
    delta,
    chi,
    nu,
    counts_f,
    counts_g,
    xi_sums,
    xi_counts,
    snap_counts,
):
    n = x1.shape[0]
    n_cells = counts_f.shape[0]
    half = 0.5 * L
    inv_cell = n_cells / L
    decay = 1.0 / (1.0 + dt / tau)
    inv_delta = 1.0 / delta
    pstop_coef = dt / eps
    pstop_max = pstop_coef * (1.0 + chi)
    instant = nu == 0.0
    p_restart = 0.0 if instant else dt / (nu * eps)
    two_pi = 2.0 * math.pi
    snap = 0

    for k in range(1, n_steps + 1):
        accumulate = k > avg_start and (k - avg_start) % stride == 0
        for l in range(n):
            vx_ = vx[l]
            vy_ = vy[l]
            running = vx_ != 0.0 or vy_ != 0.0
            if running:
                a = x1[l] + vx_ * dt
                b = x2[l] + vy_ * dt
                if a >= half:
                    a -= L
                elif a < -half:
                    a += L
                if b >= half:
                    b -= L
                elif b < -half:
                    b += L
                mn = -math.sqrt(a * a + b * b)
                dm = mn - mprev[l]
                # |dm| <= dt << 1: cubic Taylor of expm1 is exact to ~dm^4/24
                ds = dm * (1.0 + dm * (0.5 + dm * (1.0 / 6.0)))
                y[l] = (y[l] + ds) * decay
                mprev[l] = mn
                x1[l] = a
                x2[l] = b
            else:
                y[l] = y[l] * decay

            if accumulate:
                i1 = int((x1[l] + half) * inv_cell)
                if i1 >= n_cells:
                    i1 = n_cells - 1
                i2 = int((x2[l] + half) * inv_cell)
                if i2 >= n_cells:
                    i2 = n_cells - 1
                if running:
                    counts_f[i1, i2] += 1
                    zz = y[l] * inv_delta
                    run_len = eps / (1.0 - chi * zz / math.sqrt(1.0 + zz * zz))
                    # climbing means moving toward the origin: v . x < 0
                    s = vx_ * x1[l] + vy_ * x2[l]
                    if s < 0.0:
                        xi_sums[0, i1, i2] += run_len
                        xi_counts[0, i1, i2] += 1
                    elif s > 0.0:
                        xi_sums[1, i1, i2] += run_len
                        xi_counts[1, i1, i2] += 1
                    else:
                        xi_sums[2, i1, i2] += run_len
                        xi_counts[2, i1, i2] += 1
                else:
                    counts_g[i1, i2] += 1
                snap_counts[snap, i1, i2] += 1

            u = u01(seed, k, l)
            if running:
                if u < pstop_max:
                    zz = y[l] * inv_delta
                    p = pstop_coef * (1.0 - chi * zz / math.sqrt(1.0 + zz * zz))
                    if u < p:
                        if instant:
                            theta = two_pi * (u / p)
                            vx[l] = math.cos(theta)
                            vy[l] = math.sin(theta)
                        else:
                            vx[l] = 0.0
                            vy[l] = 0.0
            else:
                if u < p_restart:
                    theta = two_pi * (u / p_restart)
                    vx[l] = math.cos(theta)
                    vy[l] = math.sin(theta)

        if accumulate:
            snap += 1
            for l in range(n):
                if math.isnan(y[l]) or math.isnan(x1[l]) or math.isnan(x2[l]):
                    return NAN_DETECTED, snap
    return OK, snap


@njit(cache=True, fastmath={"reassoc", "contract", "arcp"})
def exks_apply(h, w, dcoef, vel_plus, vel_minus, dt, dx, dm, out):
    """One conservative explicit step of the extended continuum equation.

    ``dcoef[i, k]`` is the diffusion coefficient at the left x-face of cell
    i; ``vel_plus/vel_minus`` are the signed parts of the m-face velocities
    at the K-1 interior faces.  Periodic in x, zero-flux in m.
    """
    n_x, n_m = h.shape
    cx = dt / (dx * dx)
    cm = dt / dm
    phi = h * w
    for i in range(n_x):
        im1 = i - 1 if i > 0 else n_x - 1
        ip1 = i + 1 if i < n_x - 1 else 0
        for k in range(n_m):
            div = dcoef[ip1, k] * (phi[ip1, k] - phi[i, k]) - dcoef[i, k] * (
                phi[i, k] - phi[im1, k]
            )
            psi_hi = 0.0
            if k < n_m - 1:
                psi_hi = vel_plus[i, k] * h[i, k] - vel_minus[i, k] * h[i, k + 1]
            psi_lo = 0.0
            if k > 0:
                psi_lo = vel_plus[i, k - 1] * h[i, k - 1] - vel_minus[i, k - 1] * h[i, k]
            out[i, k] = h[i, k] + cx * div - cm * (psi_hi - psi_lo)
