"""Distinguished limits of the wave family: harmonic and soliton anchors.

Both ends of a periodic-wave branch degenerate: amplitude -> 0 at a well
minimum of the potential (harmonic wavetrains), wavelength -> infinity at
a saddle level (solitary waves).  This module computes the limit points
with their closed-form data, the frame vectors whose cancellations
organize the action asymptotics, the explicit limiting modulation
matrices on both boundaries, and the two-by-two toy model that isolates
the double-characteristic splitting mechanism.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (DegenerateWell, GroupVelocityResonance, NoSaddle,
                     NoWellMinimum, QuadratureNotConverged, SpeedResonance)
from .models import ModelSpec, WaveParams, structural_matrices
from .polys import padd, pder, pdeflate, pmul, pscale, trim
from .profiles import _newton_refine, _shift_scale_combine, gauss_nodes

RESONANCE_TOL = 1e-10


# ----------------------------------------------------------------------------
# frame vectors


@dataclass(frozen=True)
class LimitFrame:
    """Frame vectors at a reference state and their derived matrices."""

    V: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    T: np.ndarray
    E: np.ndarray
    F: np.ndarray
    P: np.ndarray
    D: np.ndarray
    sigma: float
    w: float
    zeta: float
    A_small: np.ndarray


def frame_vectors(model: ModelSpec, v: float, c: float = 0.0,
                  lam2: float = 0.0) -> LimitFrame:
    """Frame at an arbitrary admissible state v (limit points included)."""
    sm = structural_matrices(model)
    b = model.b
    if model.kind == "scalar":
        q, qv, qvv = model.impulse_jet(v)
        V = np.array([1.0, q, v])
        W = np.array([0.0, qv, 1.0])
        Z = np.array([0.0, qvv, 0.0])
        T = np.zeros(3)
        E = np.array([1.0, 0.0, 0.0])
        F = np.array([0.0, -1.0, 0.0])
        P = np.column_stack([sm.Sinv @ F, sm.Sinv @ V, sm.Sinv @ W])
        sigma, w, zeta = 0.0, 1.0 / b, 0.0
        A_small = np.array([[1.0]])
    else:
        g, gv, gvv, _ = model.velocity_jet(v, c, lam2)
        q, qv, qvv = model.impulse_jet(v, c, lam2)
        tau0 = model.tau_jet(v, 0)[0]
        rt = math.sqrt(tau0)
        V = np.array([1.0, q, v, g])
        W = np.array([0.0, qv, 1.0, gv])
        Z = np.array([0.0, qvv, 0.0, gvv])
        T = np.array([0.0, v / b, 0.0, 1.0]) / rt
        E = np.array([1.0, 0.0, 0.0, 0.0])
        F = np.array([0.0, -1.0, 0.0, 0.0])
        P = np.column_stack([sm.Sinv @ F, sm.Sinv @ V, sm.Sinv @ T, sm.Sinv @ W])
        sigma = 1.0 / (b * rt)
        w = 2.0 * gv / b
        zeta = gvv / b
        A_small = np.array([[0.0, 1.0 / rt], [1.0, gv]])
    D = P.T @ sm.S @ P
    return LimitFrame(V=V, W=W, Z=Z, T=T, E=E, F=F, P=P, D=D,
                      sigma=sigma, w=w, zeta=zeta, A_small=A_small)


# ----------------------------------------------------------------------------
# limit points


@dataclass(frozen=True)
class HarmonicPoint:
    """Zero-amplitude anchor of a wave family."""

    v0: float
    mu0: float
    c: float
    lam: np.ndarray
    U0: np.ndarray
    k0: float
    Xi0: float
    c0: float
    vg: float
    a0: float
    b0: float
    w0: float
    grad_c0: np.ndarray
    d3_kka_H: float
    frame: LimitFrame
    dispersionless_hyperbolic: bool
    branch: str = "plus"


@dataclass(frozen=True)
class SolitonPoint:
    """Infinite-wavelength anchor of a wave family."""

    vs: float
    vS: float
    mus: float
    cs: float
    Us: np.ndarray
    lambdas: np.ndarray
    XiS: float
    boussinesq: float
    dcM: float
    dc2M: float
    gradUM: np.ndarray
    frame: LimitFrame
    lambda_residual: float = 0.0
    quad_error: float = 0.0


def _critical_points(model: ModelSpec, params: WaveParams, window):
    """Roots of W' in the window with their curvature sign."""
    num, den = model.potential_rational(params)
    # W' = (num' den - num den') / den^2; roots from the numerator
    wp = trim(padd(pmul(pder(num), den), pscale(pmul(num, pder(den)), -1.0)))
    lo, hi = window
    roots = []
    if len(wp) >= 2:
        for z in np.roots(wp[::-1]):
            if abs(z.imag) > 1e-8 * max(1.0, abs(z.real)):
                continue
            x = float(z.real)
            if lo < x < hi:
                x = _newton_refine(wp, pder(wp), x, lo, hi, 1e-15)
                roots.append(x)
    out = []
    for x in sorted(roots):
        if out and abs(x - out[-1][0]) < 1e-10 * max(1.0, abs(x)):
            continue
        w2 = model.potential_jet(x, params, 2)[2]
        out.append((x, w2))
    return out


def harmonic_point(model: ModelSpec, c: float, lam, window=None,
                   branch: str = "plus") -> HarmonicPoint:
    """Locate the well minimum of the family (c, lambda) and its limit data.

    Raises NoWellMinimum / DegenerateWell; for two-field models the
    resonance-free harmonic speed branch is identified from the sign of
    the reduced-velocity slope.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    params = WaveParams(0.0, c, lam)
    lo, hi = window if window is not None else model.domain
    lo = lo if math.isfinite(lo) else -1e6
    hi = hi if math.isfinite(hi) else 1e6
    minima = [(x, w2) for x, w2 in _critical_points(model, params, (lo, hi))
              if w2 > 0.0]
    if not minima:
        raise NoWellMinimum(f"no well minimum of W in ({lo}, {hi})")
    if len(minima) > 1:
        raise NoWellMinimum(
            f"{len(minima)} well minima in ({lo}, {hi}); narrow the window")
    v0, w2 = minima[0]
    if w2 <= 1e-12:
        raise DegenerateWell(f"W''({v0}) = {w2:.2e}")
    wj = model.potential_jet(v0, params, 4)
    kj = model.kappa_jet(v0, 2)
    mu0 = wj[0]
    k0 = math.sqrt(w2 / kj[0]) / (2.0 * math.pi)
    Xi0 = 1.0 / k0
    b = model.b
    K1 = kj[1] / kj[0]
    K2 = kj[2] / kj[0]
    r3 = wj[3] / w2
    a0 = (0.25 * (K2 - 0.5 * K1 * K1) - 0.25 * K1 * r3
          - 0.125 * wj[4] / w2 + (5.0 / 24.0) * r3 * r3) / w2
    b0 = 0.5 * (K1 - r3) / w2
    if model.kind == "scalar":
        U0 = np.array([v0])
        c0 = -b * (model.f_jet(v0, 2)[2] + w2)
        vg = c0 - 2.0 * b * w2
        grad_c0 = np.array([b * wj[3] - b * K1 * w2])
        w0 = 1.0 / b
        d3 = 6.0 * b * w2 / k0
        disp_hyp = True
        branch = "plus" if b > 0 else "minus"
    else:
        g, gv, gvv, _ = model.velocity_jet(v0, c, float(lam[1]))
        U0 = np.array([v0, g])
        c0 = c
        vg = c - b * w2 / gv
        tj = model.tau_jet(v0, 3)
        fj = model.f_jet(v0, 3)
        # implicit differentiation of the defining quadratic for c0
        bt = b * tj[1] * g + c
        dPhi_c = 2.0 * bt
        dPhi_v = (2.0 * bt * b * tj[2] * g
                  - b * b * tj[1] * (fj[2] + 0.5 * tj[2] * g * g)
                  - b * b * tj[0] * (fj[3] + 0.5 * tj[3] * g * g)
                  - b * b * (tj[1] * kj[0] + tj[0] * kj[1])
                  * (2.0 * math.pi * k0) ** 2)
        dPhi_u = 2.0 * bt * b * tj[1] - b * b * tj[0] * tj[2] * g
        grad_c0 = -np.array([dPhi_v, dPhi_u]) / dPhi_c
        w0 = 2.0 * gv / b
        d3 = b * w2 * (-w2 + 3.0 * tj[0] * gv * gv) / (k0 * tj[0] * gv ** 3)
        disp_hyp = (fj[2] + 0.5 * tj[2] * g * g) > 0.0
        branch = "plus" if gv > 0 else "minus"
    frame = frame_vectors(model, v0, c, float(lam[-1]))
    return HarmonicPoint(v0=v0, mu0=mu0, c=c, lam=lam, U0=U0, k0=k0, Xi0=Xi0,
                         c0=c0, vg=vg, a0=a0, b0=b0, w0=w0, grad_c0=grad_c0,
                         d3_kka_H=d3, frame=frame,
                         dispersionless_hyperbolic=disp_hyp, branch=branch)


def _lambda_at_endstate(model: ModelSpec, c: float, Us: np.ndarray) -> np.ndarray:
    grad = model.hamiltonian_gradient(Us) + c * model.impulse_gradient(Us)
    return -grad


def _homoclinic_integrals(model: ModelSpec, params: WaveParams, vs: float,
                          vS: float, n: int = 160):
    """(M, dcM) for the solitary orbit between the saddle vs and level vS."""
    num, den = model.potential_rational(params)
    T = _shift_scale_combine(params.mu, den, num)
    q, r1 = pdeflate(T, vs)
    q, r2 = pdeflate(q, vs)
    q, r3 = pdeflate(q, vS)
    P = trim(-q)  # mu_s - W = (v - vs)^2 (vS - v) P(v) / D(v)
    kn, kd = model.kappa_rational()
    rows = kernels.pack_rows([P, den, kn, kd])

    def one_pass(m):
        x, wgt = gauss_nodes(m)
        th = (x + 1.0) * (math.pi / 4.0)
        wq = wgt * (math.pi / 4.0)
        s, cth = np.sin(th), np.cos(th)
        v = vS - (vS - vs) * s * s
        vals = kernels.horner_batch(rows, v)
        Pv, Dv, Knv, Kdv = vals
        kap = Knv / Kdv
        dv = 2.0 * (vS - vs) * s * cth
        # action integrand sqrt(2 kappa (mu_s - W))
        act = (v - vs) * np.sqrt(2.0 * kap * (vS - vs) * Pv / Dv) * s
        Mval = 2.0 * float((wq * act * dv).sum())
        # impulse-bracket integrand over the diverging arclength measure;
        # the bracket's quadratic vanishing at vs cancels the divergence
        meas = np.sqrt(kap * Dv / (2.0 * (vS - vs) * Pv)) / s
        if model.kind == "scalar":
            qb = (v - vs) / (2.0 * model.b)
        else:
            t0, t1 = model.tau
            tau_v = t0 + t1 * v
            cb = params.c / model.b
            g = -(cb * v + params.lam2) / tau_v
            gs = -(cb * vs + params.lam2) / (t0 + t1 * vs)
            qb = (g - gs) / model.b
        dcM = 2.0 * float((wq * qb * meas * dv).sum())
        return Mval, dcM

    c1 = one_pass(n)
    c2 = one_pass(2 * n)
    err = max(abs(c2[0] - c1[0]) / max(abs(c2[0]), 1e-300),
              abs(c2[1] - c1[1]) / max(abs(c2[1]), 1e-300))
    if err > 1e-9:
        raise QuadratureNotConverged(
            f"homoclinic integral error {err:.2e} above 1e-9")
    return c2[0], c2[1], err


def soliton_point(model: ModelSpec, c: float, endstate_or_lambda,
                  window=None) -> SolitonPoint:
    """Saddle point of W with its homoclinic orbit data.

    ``endstate_or_lambda`` is either the endstate U_s (length-N array,
    from which lambda is reconstructed) or the family's lambda vector.
    The adjacent well is expected on the right of the saddle.
    """
    arr = np.atleast_1d(np.asarray(endstate_or_lambda, dtype=float))
    if arr.shape[0] != model.N:
        raise ValueError("endstate_or_lambda must have length N")
    lo, hi = window if window is not None else model.domain
    lo = lo if math.isfinite(lo) else -1e6
    hi = hi if math.isfinite(hi) else 1e6

    def locate(lam_try):
        params = WaveParams(0.0, c, lam_try)
        sad = [(x, w2) for x, w2 in _critical_points(model, params, (lo, hi))
               if w2 < 0.0]
        return params, sad

    # endstate interpretation first (lambda reconstructed from it), falling
    # back to reading the input as lambda when no saddle appears
    lam = _lambda_at_endstate(model, c, arr)
    params, saddles = locate(lam)
    if not saddles:
        params, saddles = locate(arr)
        lam = arr
        if not saddles:
            raise NoSaddle(f"no saddle of W in ({lo}, {hi})")
    if len(saddles) > 1:
        raise NoSaddle(f"{len(saddles)} saddles in ({lo}, {hi}); narrow the window")
    vs, w2 = saddles[0]
    params = WaveParams(model.potential_jet(vs, params, 0)[0], c, lam)
    wj = model.potential_jet(vs, params, 2)
    mus = wj[0]
    # outer root of mu_s - W beyond the right well
    num, den = model.potential_rational(params)
    T = _shift_scale_combine(mus, den, num)
    q, _ = pdeflate(T, vs)
    q, _ = pdeflate(q, vs)
    cands = []
    qt = trim(q)
    if len(qt) >= 2:
        for z in np.roots(qt[::-1]):
            if abs(z.imag) < 1e-8 * max(1.0, abs(z.real)) and z.real > vs:
                x = _newton_refine(T, pder(T), float(z.real), vs, hi, 1e-15)
                cands.append(x)
    if not cands:
        raise NoSaddle("no outer turning level right of the saddle")
    vS = min(c_ for c_ in cands if c_ > vs + 1e-12 * max(1.0, abs(vs)))
    if model.kind == "scalar":
        Us = np.array([vs])
    else:
        Us = np.array([vs, model.velocity_jet(vs, c, float(lam[1]))[0]])
    lam_check = _lambda_at_endstate(model, c, Us)
    lam_res = float(np.max(np.abs(lam_check - lam)))
    XiS = 2.0 * math.pi * math.sqrt(model.kappa_jet(vs, 0)[0] / (-wj[2]))
    Mval, dcM, qerr = _homoclinic_integrals(model, params, vs, vS)

    def M_of(c_, Us_):
        lam_ = _lambda_at_endstate(model, c_, Us_)
        p_ = WaveParams(0.0, c_, lam_)
        sad = [(x, w2_) for x, w2_ in _critical_points(model, p_, (lo, hi))
               if w2_ < 0.0]
        vs_ = min(sad, key=lambda t: abs(t[0] - vs))[0]
        mus_ = model.potential_jet(vs_, p_, 0)[0]
        p_ = WaveParams(mus_, c_, lam_)
        num_, den_ = model.potential_rational(p_)
        T_ = _shift_scale_combine(mus_, den_, num_)
        qq, _ = pdeflate(T_, vs_)
        qq, _ = pdeflate(qq, vs_)
        vS_ = None
        for z in np.roots(trim(qq)[::-1]):
            if abs(z.imag) < 1e-8 * max(1.0, abs(z.real)) and z.real > vs_:
                x = _newton_refine(T_, pder(T_), float(z.real), vs_, hi, 1e-15)
                vS_ = x if vS_ is None else min(vS_, x)
        return _homoclinic_integrals(model, p_, vs_, vS_)

    hc = 1e-5 * max(1.0, abs(c))
    dcp = M_of(c + hc, Us)[1]
    dcm = M_of(c - hc, Us)[1]
    dc2M = (dcp - dcm) / (2.0 * hc)
    gradUM = np.zeros(model.N)
    for j in range(model.N):
        hU = 1e-5 * max(1.0, abs(Us[j]))
        e = np.zeros(model.N)
        e[j] = hU
        gradUM[j] = (M_of(c, Us + e)[0] - M_of(c, Us - e)[0]) / (2.0 * hU)
    frame = frame_vectors(model, vs, c, float(lam[-1]))
    return SolitonPoint(vs=vs, vS=vS, mus=mus, cs=c, Us=Us, lambdas=lam,
                        XiS=XiS, boussinesq=Mval, dcM=dcM, dc2M=dc2M,
                        gradUM=gradUM, frame=frame, lambda_residual=lam_res,
                        quad_error=qerr)


def limit_frame(model: ModelSpec, point) -> LimitFrame:
    """Frame vectors at a computed limit point."""
    if isinstance(point, HarmonicPoint):
        return frame_vectors(model, point.v0, point.c, float(point.lam[-1]))
    return frame_vectors(model, point.vs, point.cs, float(point.lambdas[-1]))


# ----------------------------------------------------------------------------
# limiting modulation matrices


def limiting_whitham_harmonic(model: ModelSpec, hp: HarmonicPoint) -> dict:
    """Zero-amplitude limit of the modulation matrices and its reduction."""
    sm = structural_matrices(model)
    N = model.N
    H2 = model.hamiltonian_hessian(hp.U0)
    det_vg = np.linalg.det(sm.B @ H2 + hp.vg * np.eye(N))
    scale = max(1.0, float(np.max(np.abs(H2))))
    if abs(det_vg) < RESONANCE_TOL * scale:
        raise GroupVelocityResonance(
            f"group velocity {hp.vg} resonates with the dispersionless matrix")
    k0 = hp.k0
    dkc0 = (hp.vg - hp.c0) / k0
    Mc = H2 + hp.c0 * sm.Binv
    Mg = H2 + hp.vg * sm.Binv
    gc = hp.grad_c0
    d2aH = (k0 ** 4 * dkc0 ** 2 * hp.a0
            + k0 ** 2 * float(gc @ np.linalg.solve(Mc, gc)))
    a_tilde0 = -d2aH + k0 ** 2 * float(gc @ np.linalg.solve(Mg, gc))
    n = N + 2
    hessH = np.zeros((n, n))
    hessH[0, 1] = hessH[1, 0] = -hp.vg
    hessH[1, 1] = d2aH
    hessH[1, 2:] = -k0 * gc
    hessH[2:, 1] = -k0 * gc
    hessH[2:, 2:] = H2
    Wlim = -sm.BB @ hessH
    Pt = np.eye(n)
    sol = np.linalg.solve(Mg, gc)
    Pt[0, 2:] = -k0 * (sm.Binv @ sol)
    Pt[2:, 1] = k0 * sol
    block = np.zeros((n, n))
    block[0, 0] = block[1, 1] = hp.vg
    block[0, 1] = a_tilde0
    block[2:, 2:] = -sm.B @ H2
    resid = float(np.max(np.abs(np.linalg.solve(Pt, Wlim @ Pt) - block)))
    return {"hessH_limit": hessH, "W_limit": Wlim, "a_tilde0": a_tilde0,
            "d2aH": d2aH, "P_tilde0": Pt, "block": block,
            "block_residual": resid, "dispersionless": -sm.B @ H2}


def limiting_whitham_soliton(model: ModelSpec, sp: SolitonPoint) -> dict:
    """Infinite-wavelength limit of the modulation matrices (diagonalizable)."""
    sm = structural_matrices(model)
    N = model.N
    H2 = model.hamiltonian_hessian(sp.Us)
    det_cs = np.linalg.det(sm.B @ H2 + sp.cs * np.eye(N))
    if abs(det_cs) < RESONANCE_TOL * max(1.0, float(np.max(np.abs(H2)))):
        raise SpeedResonance(
            f"soliton speed {sp.cs} resonates with the dispersionless matrix")
    Mc = H2 + sp.cs * sm.Binv
    gM = sp.gradUM
    dk2H = float(gM @ np.linalg.solve(Mc, gM))
    n = N + 2
    hessH = np.zeros((n, n))
    hessH[0, 0] = dk2H
    hessH[0, 1] = hessH[1, 0] = -sp.cs
    hessH[0, 2:] = gM
    hessH[2:, 0] = gM
    hessH[2:, 2:] = H2
    Wlim = -sm.BB @ hessH
    Pt = np.eye(n)
    Pt[1, 2:] = np.linalg.solve(Mc, gM) @ sm.Binv
    Pt[2:, 0] = -np.linalg.solve(Mc, gM)
    block = np.zeros((n, n))
    block[0, 0] = block[1, 1] = sp.cs
    block[2:, 2:] = -sm.B @ H2
    resid = float(np.max(np.abs(np.linalg.solve(Pt, Wlim @ Pt) - block)))
    return {"hessH_limit": hessH, "W_limit": Wlim, "dk2H_limit": dk2H,
            "P_tildeS": Pt, "block": block, "block_residual": resid,
            "dispersionless": -sm.B @ H2}


# ----------------------------------------------------------------------------
# toy model for double-root splitting


def toy_double_root(eps: float, v: float, a_tilde: float, delta: float,
                    delta_prime: float) -> dict:
    """Two-by-two family [[v, a+eps d'], [eps d, v]]: exact spectrum and class.

    The off-diagonal pair controls whether the double characteristic v
    splits along the real axis (hyperbolic), leaves it (elliptic), or
    stays defective (weakly hyperbolic).
    """
    Bc = a_tilde + eps * delta_prime
    Cc = eps * delta
    disc = Bc * Cc
    sq = cmath.sqrt(disc)
    z1, z2 = v + sq, v - sq
    if a_tilde == 0.0:
        if delta == 0.0 and delta_prime == 0.0:
            cls = "hyperbolic"
        elif eps > 0.0 and delta * delta_prime > 0.0:
            cls = "hyperbolic"
        elif eps > 0.0 and delta * delta_prime < 0.0:
            cls = "elliptic"
        else:
            cls = "weakly_hyperbolic"
    else:
        if eps > 0.0 and delta * a_tilde > 0.0:
            cls = "hyperbolic"
        elif eps > 0.0 and delta * a_tilde < 0.0:
            cls = "elliptic"
        else:
            cls = "weakly_hyperbolic"
    if Bc != 0.0:
        vecs = np.array([[1.0, 1.0],
                         [sq / Bc, -sq / Bc]], dtype=complex)
    elif Cc != 0.0:
        vecs = np.array([[sq / Cc, -sq / Cc],
                         [1.0, 1.0]], dtype=complex)
    else:
        vecs = np.eye(2, dtype=complex)
    expansion = None
    if a_tilde != 0.0 and delta * a_tilde > 0.0 and eps > 0.0:
        lead = math.sqrt(eps * delta * a_tilde)
        expansion = max(abs(z1 - (v + lead)), abs(z2 - (v - lead)))
    return {"eigenvalues": np.array([z1, z2]), "eigenvectors": vecs,
            "classification": cls, "expansion_residual": expansion}
