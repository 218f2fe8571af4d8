"""Hot numerical kernels, jitted with numba when available.

Setting WML_DISABLE_NUMBA=1 swaps every @njit for a no-op decorator so
the same code runs as pure Python/numpy (slow but dependency-free); see
benchmarks/bench_kernels.py for the cost of that switch.
"""

import math

import numpy as np

from ._jit import njit


@njit(cache=True)
def pruefer_theta_end(s, x, b_nodes, b_mid, theta0):
    """Integrate the Pruefer phase theta' = s + b(r) sin(theta)cos(theta)
    across the mesh ``x`` with classical RK4.

    ``b_nodes[i]`` is the drift at x[i], ``b_mid[i]`` at the midpoint of
    (x[i], x[i+1]).  Returns theta at x[-1].
    """
    theta = theta0
    for i in range(x.shape[0] - 1):
        h = x[i + 1] - x[i]
        b0 = b_nodes[i]
        bm = b_mid[i]
        b1 = b_nodes[i + 1]
        k1 = s + b0 * 0.5 * math.sin(2.0 * theta)
        t2 = theta + 0.5 * h * k1
        k2 = s + bm * 0.5 * math.sin(2.0 * t2)
        t3 = theta + 0.5 * h * k2
        k3 = s + bm * 0.5 * math.sin(2.0 * t3)
        t4 = theta + h * k3
        k4 = s + b1 * 0.5 * math.sin(2.0 * t4)
        theta = theta + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return theta


# --------------------------------------------------------------------------
# counter-based RNG (splitmix64), identical jitted and unjitted
# --------------------------------------------------------------------------

_U64 = np.uint64


@njit(cache=True)
def _splitmix64(state):
    z = state + _U64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D4A2C62D99B3E5)
    return z ^ (z >> _U64(31)), z


@njit(cache=True)
def _to_unit(u):
    # uniform in (0, 1): use the top 53 bits
    return (float(u >> _U64(11)) + 0.5) / 9007199254740992.0


@njit(cache=True)
def _gauss_pair(state):
    """Box-Muller: two standard normals plus the advanced state."""
    state, u1 = _splitmix64(state)
    state, u2 = _splitmix64(state)
    a = math.sqrt(-2.0 * math.log(_to_unit(u1)))
    b = 2.0 * math.pi * _to_unit(u2)
    return state, a * math.cos(b), a * math.sin(b)


@njit(cache=True)
def _drift_lookup(r, fine_lo, fine_hi, fine_tab, coarse_hi, coarse_tab):
    """Linear interpolation of the drift from two uniform tables.

    fine table covers [fine_lo, fine_hi], coarse table [fine_hi,
    coarse_hi]; outside, clamp to the nearest entry.
    """
    if r <= fine_lo:
        return fine_tab[0]
    if r < fine_hi:
        u = (r - fine_lo) / (fine_hi - fine_lo) * (fine_tab.shape[0] - 1)
        i = int(u)
        w = u - i
        return fine_tab[i] * (1.0 - w) + fine_tab[i + 1] * w
    if r < coarse_hi:
        u = (r - fine_hi) / (coarse_hi - fine_hi) * (coarse_tab.shape[0] - 1)
        i = int(u)
        w = u - i
        return coarse_tab[i] * (1.0 - w) + coarse_tab[i + 1] * w
    return coarse_tab[coarse_tab.shape[0] - 1]


@njit(cache=True)
def explosion_paths(seed, n_paths, x0, t_max, r_out, dt_base,
                    fine_lo, fine_hi, fine_tab, coarse_hi, coarse_tab,
                    halve_every, out_status, out_time, out_status_half):
    """Euler-Maruyama paths of dX = b(X) dt + sqrt(2) dW (generator
    Delta_f), reflecting at fine_lo.

    Per-path status: 0 = survived to t_max inside, 1 = exited through
    r_out (explosion evidence), 2 = step-size underflow (treated as
    explosion evidence by callers).  Every ``halve_every``-th path is
    additionally rerun with dt/2 on an independent substream; the
    outcome lands in ``out_status_half`` (255 = not rerun) so callers
    can compare the two discretizations.
    """
    for p in range(n_paths):
        reps = 2 if (halve_every > 0 and p % halve_every == 0) else 1
        for rep in range(reps):
            scale = 1.0 if rep == 0 else 0.5
            state = (_U64(seed) + _U64(p) * _U64(0x9E3779B97F4A7C15)
                     + _U64(rep) * _U64(0xD1B54A32D192ED03))
            state, _ = _splitmix64(state)  # decorrelate from the seed line
            x = x0
            t = 0.0
            status = 0
            have_spare = False
            spare = 0.0
            while t < t_max:
                b = _drift_lookup(x, fine_lo, fine_hi, fine_tab,
                                  coarse_hi, coarse_tab)
                dt = dt_base * scale
                lim = 0.1 / (b * b + 1.0)
                if lim < dt:
                    dt = lim
                if dt < 1e-12:
                    status = 2
                    break
                if t + dt > t_max:
                    dt = t_max - t
                    if dt <= 0.0:
                        break
                if have_spare:
                    z = spare
                    have_spare = False
                else:
                    state, z, spare = _gauss_pair(state)
                    have_spare = True
                x = x + b * dt + math.sqrt(2.0 * dt) * z
                t = t + dt
                if x < fine_lo:
                    x = 2.0 * fine_lo - x  # reflect at the inner wall
                if x >= r_out:
                    status = 1
                    break
            if rep == 0:
                out_status[p] = status
                out_time[p] = t
            else:
                out_status_half[p] = status


@njit(cache=True)
def hitting_paths(seed, n_paths, x0, lam, t_max, barrier, r_out, dt_base,
                  fine_lo, fine_hi, fine_tab, coarse_hi, coarse_tab,
                  out_weight, out_status):
    """Per-path Feynman-Kac weight e^{-lam * tau} for the hitting time
    tau of the inner barrier, with Brownian-bridge crossing correction.

    Status: 0 = hit the barrier (weight = e^{-lam tau}), 1 = exited
    through r_out or survived to t_max (weight 0), 2 = step underflow.
    A path that straddles the barrier between steps is credited with the
    bridge probability p = exp(-(x-a)(x'-a)/dt) by thinning.
    """
    for p in range(n_paths):
        state = _U64(seed) + _U64(p) * _U64(0x9E3779B97F4A7C15)
        state, _ = _splitmix64(state)
        x = x0
        t = 0.0
        w = 0.0
        status = 1
        have_spare = False
        spare = 0.0
        while t < t_max:
            b = _drift_lookup(x, fine_lo, fine_hi, fine_tab,
                              coarse_hi, coarse_tab)
            dt = dt_base
            lim = 0.1 / (b * b + 1.0)
            if lim < dt:
                dt = lim
            if dt < 1e-12:
                status = 2
                break
            if t + dt > t_max:
                dt = t_max - t
                if dt <= 0.0:
                    break
            if have_spare:
                z = spare
                have_spare = False
            else:
                state, z, spare = _gauss_pair(state)
                have_spare = True
            xn = x + b * dt + math.sqrt(2.0 * dt) * z
            t = t + dt
            if xn <= barrier:
                status = 0
                w = math.exp(-lam * t)
                break
            # Brownian-bridge correction: the path may have dipped below
            # the barrier between the two endpoints
            if x > barrier and xn > barrier:
                pb = math.exp(-(x - barrier) * (xn - barrier) / dt)
                state, u = _splitmix64(state)
                if _to_unit(u) < pb:
                    status = 0
                    w = math.exp(-lam * t)
                    break
            x = xn
            if x >= r_out:
                status = 1
                break
        out_weight[p] = w
        out_status[p] = status
