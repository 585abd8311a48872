"""Compiled O(N) likelihood kernels.

``A_i = sum_{j<i} exp(-delta (t_i - t_j))`` is carried by the recursion
``A_i = exp(-delta (t_i - t_{i-1})) (1 + A_{i-1})`` and ``B_i = dA_i/d delta``
by ``B_i = exp(-delta d_i) (B_{i-1} - d_i (1 + A_{i-1}))``.
Gradients are with respect to (lambda0, alpha, delta, gamma) with gamma
treated as a free parameter. ``skip`` drops the log-intensity of the first
``skip`` events (conditioning on them); the compensator is unaffected.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def loglik_one(times, T, lam0, alpha, delta, gamma, skip=0):
    shift = gamma - lam0
    A = 0.0
    total = 0.0
    comp_sum = 0.0
    for i in range(times.size):
        if i > 0:
            A = math.exp(-delta * (times[i] - times[i - 1])) * (1.0 + A)
        if shift == 0.0:
            lam = lam0 + alpha * A
        else:
            E = math.exp(-delta * times[i])
            lam = lam0 * (1.0 - E) + gamma * E + alpha * A
        if i >= skip:
            if lam <= 0.0:
                return -np.inf
            total += math.log(lam)
        comp_sum += -math.expm1(-delta * (T - times[i]))
    comp = lam0 * T + alpha / delta * comp_sum + shift / delta * (-math.expm1(-delta * T))
    return total - comp


@njit(cache=True)
def loglik_one_grad(times, T, lam0, alpha, delta, gamma, out, skip=0):
    """Log-likelihood; writes the 4-gradient into ``out``."""
    shift = gamma - lam0
    A = 0.0
    B = 0.0
    total = 0.0
    g_l = 0.0
    g_a = 0.0
    g_d = 0.0
    g_g = 0.0
    comp_sum = 0.0
    dcomp_sum = 0.0
    for i in range(times.size):
        if i > 0:
            d = times[i] - times[i - 1]
            e = math.exp(-delta * d)
            B = e * (B - d * (1.0 + A))
            A = e * (1.0 + A)
        if shift == 0.0:
            lam = lam0 + alpha * A
        else:
            E = math.exp(-delta * times[i])
            lam = lam0 * (1.0 - E) + gamma * E + alpha * A
        if i >= skip:
            if lam <= 0.0:
                out[:] = np.nan
                return -np.inf
            total += math.log(lam)
            g_l += (1.0 - E) / lam
            g_a += A / lam
            g_g += E / lam
            g_d += (alpha * B - shift * times[i] * E) / lam
        u = T - times[i]
        comp_sum += -math.expm1(-delta * u)
        dcomp_sum += u * math.exp(-delta * u)
    em_T = -math.expm1(-delta * T)
    comp = lam0 * T + alpha / delta * comp_sum + shift / delta * em_T
    g_l -= T - em_T / delta
    g_a -= comp_sum / delta
    g_g -= em_T / delta
    g_d -= (-alpha / (delta * delta) * comp_sum + alpha / delta * dcomp_sum
            - shift / (delta * delta) * em_T + shift / delta * T * math.exp(-delta * T))
    out[0] = g_l
    out[1] = g_a
    out[2] = g_d
    out[3] = g_g
    return total - comp


@njit(cache=True)
def loglik_group(flat, offsets, windows, lam0, alpha, delta, gammas, skip=0):
    total = 0.0
    for m in range(windows.size):
        total += loglik_one(flat[offsets[m]:offsets[m + 1]], windows[m], lam0, alpha, delta,
                            gammas[m], skip)
    return total


@njit(cache=True)
def loglik_group_grad(flat, offsets, windows, lam0, alpha, delta, gammas, grad3, grad_gamma, skip=0):
    """Group log-likelihood; ``grad3`` gets (lambda0, alpha, delta), ``grad_gamma[m]`` per member."""
    buf = np.empty(4)
    total = 0.0
    grad3[:] = 0.0
    for m in range(windows.size):
        total += loglik_one_grad(flat[offsets[m]:offsets[m + 1]], windows[m],
                                 lam0, alpha, delta, gammas[m], buf, skip)
        grad3[0] += buf[0]
        grad3[1] += buf[1]
        grad3[2] += buf[2]
        grad_gamma[m] = buf[3]
    return total
