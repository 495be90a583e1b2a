"""Compiled inner loops for trajectory and product simulation.

Random numbers are never drawn here: callers pass blocks of unit-rate
exponential variates produced by numpy generators, so results do not depend
on how replicas are scheduled.  ``mats`` is a ``(2, 2, 2)`` array stacking
``A0`` and ``A1``; ``rates`` holds the jump rates out of each state.
"""

import math

import numpy as np
from numba import njit

_SERIES_CUTOFF = 1e-4


@njit(cache=True)
def expm2_entries(a11, a12, a21, a22, t):
    m = 0.5 * (a11 + a22)
    h = 0.5 * (a11 - a22)
    d2 = h * h + a12 * a21
    delta = math.sqrt(abs(d2))
    if delta * abs(t) < _SERIES_CUTOFF:
        x = d2 * t * t
        emt = math.exp(m * t)
        c = emt * (1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0)
        s = emt * t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0)
    elif d2 > 0:
        lead = math.exp((m + delta) * t)
        c = 0.5 * lead * (1.0 + math.exp(-2.0 * delta * t))
        s = lead * (-math.expm1(-2.0 * delta * t)) / (2.0 * delta)
    else:
        emt = math.exp(m * t)
        c = emt * math.cos(delta * t)
        s = emt * math.sin(delta * t) / delta
    return c + s * h, s * a12, s * a21, c - s * h


@njit(cache=True)
def flow_unit(mats, i, theta, t):
    """Apply ``exp(t A_i)`` to ``e_theta``; return ``(log norm, new angle)``."""
    e11, e12, e21, e22 = expm2_entries(mats[i, 0, 0], mats[i, 0, 1], mats[i, 1, 0], mats[i, 1, 1], t)
    c = math.cos(theta)
    s = math.sin(theta)
    y1 = e11 * c + e12 * s
    y2 = e21 * c + e22 * s
    r = math.hypot(y1, y2)
    return math.log(r), math.atan2(y2, y1) % (2.0 * math.pi)


@njit(cache=True)
def run_until(mats, rates, state, draws, horizon):
    """Advance ``state = [log_r, theta, i, t, time_in_1, jumps]`` in place.

    Consumes entries of ``draws`` until the clock reaches ``horizon``; the last
    holding interval is cut exactly at the horizon.  Returns the number of
    draws used and whether the horizon was reached.
    """
    log_r, theta, i, t = state[0], state[1], int(state[2]), state[3]
    t1, jumps = state[4], state[5]
    used = 0
    done = False
    n = draws.shape[0]
    while used < n:
        hold = draws[used] / rates[i]
        used += 1
        if t + hold >= horizon:
            hold = horizon - t
            done = True
        dl, theta = flow_unit(mats, i, theta, hold)
        log_r += dl
        if i == 1:
            t1 += hold
        t += hold
        if done:
            break
        i = 1 - i
        jumps += 1.0
    state[0], state[1], state[2], state[3] = log_r, theta, float(i), t
    state[4], state[5] = t1, jumps
    return used, done


@njit(cache=True)
def occupy_until(mats, rates, state, draws, horizon, dt, bins, hist):
    """Like :func:`run_until`, also sampling ``(theta mod pi, i)`` on the grid ``k * dt``.

    ``state`` carries a sixth slot with the next sampling time.  Samples are
    added to ``hist[i, bin]``.
    """
    log_r, theta, i, t = state[0], state[1], int(state[2]), state[3]
    next_s = state[6]
    used = 0
    done = False
    n = draws.shape[0]
    width = math.pi / bins
    while used < n:
        hold = draws[used] / rates[i]
        used += 1
        if t + hold >= horizon:
            hold = horizon - t
            done = True
        end = t + hold
        while next_s < end:
            _, ang = flow_unit(mats, i, theta, next_s - t)
            k = int((ang % math.pi) / width)
            if k >= bins:
                k = bins - 1
            hist[i, k] += 1.0
            next_s += dt
        dl, theta = flow_unit(mats, i, theta, hold)
        log_r += dl
        t = end
        if done:
            break
        i = 1 - i
    state[0], state[1], state[2], state[3] = log_r, theta, float(i), t
    state[6] = next_s
    return used, done


@njit(cache=True)
def product_walk(mats, carry, states, holds, renorm_every, trace, trace_every):
    """Carry a vector and the full matrix through ``prod exp(hold_k A_{states_k})``.

    ``carry = [v1, v2, log_v, p11, p12, p21, p22, log_p, steps_done]`` is
    updated in place so long products can be fed in blocks.  The vector is
    renormalised every ``renorm_every`` steps (sooner if its norm leaves
    ``[1e-150, 1e150]``), the matrix every 1000 steps under the same guard.
    Every ``trace_every`` steps the running vector exponent is appended to
    ``trace``; the number written is returned.
    """
    v1, v2, logv = carry[0], carry[1], carry[2]
    p11, p12, p21, p22, logp = carry[3], carry[4], carry[5], carry[6], carry[7]
    done = int(carry[8])
    ntr = 0
    for step in range(states.shape[0]):
        i = states[step]
        e11, e12, e21, e22 = expm2_entries(mats[i, 0, 0], mats[i, 0, 1], mats[i, 1, 0], mats[i, 1, 1], holds[step])
        w1 = e11 * v1 + e12 * v2
        w2 = e21 * v1 + e22 * v2
        v1, v2 = w1, w2
        q11 = e11 * p11 + e12 * p21
        q12 = e11 * p12 + e12 * p22
        q21 = e21 * p11 + e22 * p21
        q22 = e21 * p12 + e22 * p22
        p11, p12, p21, p22 = q11, q12, q21, q22
        done += 1
        nv = math.hypot(v1, v2)
        if done % renorm_every == 0 or nv < 1e-150 or nv > 1e150:
            logv += math.log(nv)
            v1 /= nv
            v2 /= nv
        npm = max(abs(p11), abs(p12), abs(p21), abs(p22))
        if done % 1000 == 0 or npm < 1e-150 or npm > 1e150:
            logp += math.log(npm)
            p11 /= npm
            p12 /= npm
            p21 /= npm
            p22 /= npm
        if trace_every > 0 and done % trace_every == 0 and ntr < trace.shape[0]:
            trace[ntr] = (logv + math.log(math.hypot(v1, v2))) / done
            ntr += 1
    carry[0], carry[1], carry[2] = v1, v2, logv
    carry[3], carry[4], carry[5], carry[6], carry[7] = p11, p12, p21, p22, logp
    carry[8] = float(done)
    return ntr


def carried_logs(carry):
    """``(log |P v0|, log ||P||_2)`` from a product carry."""
    v1, v2, logv = carry[0], carry[1], carry[2]
    p11, p12, p21, p22 = carry[3], carry[4], carry[5], carry[6]
    fro2 = p11 * p11 + p12 * p12 + p21 * p21 + p22 * p22
    dt = p11 * p22 - p12 * p21
    sig = math.sqrt(0.5 * (fro2 + math.sqrt(max(fro2 * fro2 - 4.0 * dt * dt, 0.0))))
    return logv + math.log(math.hypot(v1, v2)), carry[7] + math.log(sig)
