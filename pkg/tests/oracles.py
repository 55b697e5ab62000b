"""Independent closed-form oracles used by the test suite only.

Everything here goes through scipy special functions or raw adaptive
quadrature, never through the package's own integration engine, so that
agreement between the two is a genuine cross-check.
"""

import numpy as np
from scipy.integrate import quad
from scipy.special import ellipe, ellipk


def cubic_well_elliptic(v1, v2, v3):
    """Closed forms for the cubic-potential orbit on (v2, v3).

    The level set is mu - W = (v - v1)(v - v2)(v3 - v)/6 with kappa = 1.
    Returns dict with Xi, mean_v, mean_v2 (second moment) and theta.
    """
    m = (v3 - v2) / (v3 - v1)
    K = ellipk(m)
    E = ellipe(m)
    scale = np.sqrt(v3 - v1)
    Xi = 4.0 * np.sqrt(3.0) * K / scale
    # sn^2 moments over a quarter period
    I0 = K
    I1 = (K - E) / m
    I2 = ((2.0 + m) * K - 2.0 * (1.0 + m) * E) / (3.0 * m * m)
    I3 = (4.0 * (1.0 + m) * I2 - 3.0 * I1) / (5.0 * m)
    s2 = I1 / I0
    s4 = I2 / I0
    mean_v = v3 - (v3 - v2) * s2
    mean_v2 = (v3 * v3 - 2.0 * v3 * (v3 - v2) * s2 + (v3 - v2) ** 2 * s4)
    # theta = (2/sqrt(3)) * integral sqrt((v-v1)(v-v2)(v3-v)) dv
    #       = (4/sqrt(3)) (v3-v2)^2 sqrt(v3-v1) * <sn^2 cn^2 dn^2>_K
    J = I1 - (1.0 + m) * I2 + m * I3
    theta = (4.0 / np.sqrt(3.0)) * (v3 - v2) ** 2 * scale * J
    return {"Xi": Xi, "mean_v": mean_v, "mean_v2": mean_v2, "theta": theta}


def raw_action_quadrature(model, params, v2, v3):
    """Adaptive quadrature of the raw action integrand (endpoint sqrt)."""

    def f(v):
        w = model.potential_jet(v, params, 0)[0]
        kap = model.kappa_jet(v, 0)[0]
        return np.sqrt(max(2.0 * kap * (params.mu - w), 0.0))

    val, _ = quad(f, v2, v3, limit=400, epsabs=1e-14, epsrel=1e-13)
    return 2.0 * val


def raw_period_quadrature(model, params, v2, v3):
    """Adaptive quadrature of the raw period integrand (singular ends)."""

    def f(v):
        w = model.potential_jet(v, params, 0)[0]
        kap = model.kappa_jet(v, 0)[0]
        return np.sqrt(kap / max(2.0 * (params.mu - w), 1e-300))

    val, _ = quad(f, v2, v3, limit=400, epsabs=1e-13, epsrel=1e-12,
                  points=None)
    return 2.0 * val


def kdv_soliton_facts(c):
    """sech^2 solitary wave of f = -v^3/6 on endstate 0 at speed c."""
    return {"moment": 24.0 / 5.0 * c ** 2.5,
            "dcM": 12.0 * c ** 1.5,
            "dc2M": 18.0 * np.sqrt(c),
            "amplitude": 3.0 * c}


def fd_gradient(fn, x, h):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j] if np.ndim(h) else h
        g[j] = (fn(x + e) - fn(x - e)) / (2.0 * e[j])
    return g


def fd_hessian(fn, x, h):
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    f0 = fn(x)
    hv = h if np.ndim(h) else np.full(n, h)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = hv[i]
        H[i, i] = (fn(x + 2 * ei) - 2 * f0 + fn(x - 2 * ei)) / (4 * hv[i] ** 2)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = hv[j]
            H[i, j] = (fn(x + ei + ej) - fn(x + ei - ej)
                       - fn(x - ei + ej) + fn(x - ei - ej)) / (4 * hv[i] * hv[j])
            H[j, i] = H[i, j]
    return H
