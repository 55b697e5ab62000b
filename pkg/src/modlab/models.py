"""Model definitions: the admissible Hamiltonian systems of Korteweg type.

A model is either scalar (one field v with energy density
``e = kappa(v) v_x^2 / 2 + f(v)`` and constant symplectic weight b) or a
two-field system carrying an extra kinetic term ``tau(v) u^2 / 2``.  The
traveling-wave reduction funnels everything through an effective
potential ``W(v; c, lambda)`` whose wells carry the periodic orbits; this
module evaluates W, the reduced velocity g, the reduced impulse q, and
the structural matrices exactly, with derivatives to the orders the
asymptotic formulas require.

Function families are closed form on purpose: f and kappa are (Laurent)
polynomials, tau is a positive constant or affine.  That keeps fourth
derivatives exact; nothing here is differentiated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainViolation
from .polys import Laurent, monomial_coeffs, padd, pmul, pscale

_MAX_F_DEGREE = 8
_MAX_KAPPA_DEGREE = 4


@dataclass(frozen=True)
class WaveParams:
    """Wave identifiers in the integration-constant chart (mu, c, lambda)."""

    mu: float
    c: float
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", np.atleast_1d(np.asarray(self.lam, dtype=float)))

    @property
    def lam1(self) -> float:
        return float(self.lam[0])

    @property
    def lam2(self) -> float:
        return float(self.lam[1])

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.mu, self.c], self.lam))

    @staticmethod
    def from_vector(x: np.ndarray) -> "WaveParams":
        return WaveParams(float(x[0]), float(x[1]), np.asarray(x[2:], dtype=float))


@dataclass(frozen=True)
class StructuralMatrices:
    """Constant matrices of the two modulation charts."""

    B: np.ndarray
    Binv: np.ndarray
    S: np.ndarray
    BB: np.ndarray
    BBinv: np.ndarray
    Sinv: np.ndarray


@dataclass(frozen=True)
class ModelSpec:
    """One admissible system.

    Parameters
    ----------
    kind : {'scalar', 'euler_korteweg'}
    b : float
        Nonzero symplectic weight.
    f : Laurent
        Bulk energy density.
    kappa : Laurent
        Capillarity coefficient, positive on the domain.
    tau : (t0, t1) or None
        Kinetic coefficient ``tau(v) = t0 + t1 v`` (system case only),
        positive on the domain.
    domain : (lo, hi)
        Open admissible interval for v.
    """

    kind: str
    b: float
    f: Laurent
    kappa: Laurent
    tau: tuple | None = None
    domain: tuple = (-math.inf, math.inf)
    label: str = field(default="model", compare=False)

    def __post_init__(self):
        if self.kind not in ("scalar", "euler_korteweg"):
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.b == 0.0:
            raise ConfigError("b must be nonzero")
        if self.kind == "euler_korteweg" and self.tau is None:
            raise ConfigError("system model requires tau")
        if len(self.f.coeffs) - 1 > _MAX_F_DEGREE:
            raise ConfigError("f degree above supported bound")
        if self.kappa.is_poly and len(self.kappa.coeffs) - 1 > _MAX_KAPPA_DEGREE:
            raise ConfigError("kappa degree above supported bound")
        self._check_positive(self.kappa, "kappa")
        if self.tau is not None:
            t0, t1 = self.tau
            self._check_positive(Laurent.make([t0, t1]), "tau")

    def _check_positive(self, fn: Laurent, name: str):
        lo, hi = self.domain
        a = lo if math.isfinite(lo) else -10.0
        b = hi if math.isfinite(hi) else 10.0
        if not fn.is_poly and a < 0.0:
            raise ConfigError(f"{name} has negative powers; domain must stay positive")
        probe = np.linspace(a + 1e-9 * (b - a), b - 1e-9 * (b - a), 257)
        if np.any(fn(probe) <= 0.0):
            raise ConfigError(f"{name} not positive on the declared domain")

    # -- basic structure ---------------------------------------------------

    @property
    def N(self) -> int:
        return 1 if self.kind == "scalar" else 2

    def check_domain(self, v: float):
        lo, hi = self.domain
        if not (lo < v < hi):
            raise DomainViolation(f"v = {v} outside domain ({lo}, {hi})")

    def tau_jet(self, v: float, order: int = 3) -> np.ndarray:
        t0, t1 = self.tau
        out = np.zeros(order + 1)
        out[0] = t0 + t1 * v
        if order >= 1:
            out[1] = t1
        return out

    def kappa_jet(self, v: float, order: int = 2) -> np.ndarray:
        return self.kappa.jet(v, order)

    def f_jet(self, v: float, order: int = 4) -> np.ndarray:
        return self.f.jet(v, order)

    # -- reduced velocity and impulse ---------------------------------------

    def velocity_jet(self, v: float, c: float, lam2: float) -> np.ndarray:
        """(g, g', g'', g''') of the reduced velocity g(v; c, lam2).

        Defined for the system case only; derivatives follow the closed
        recursions ``b tau g' = -c - b tau' g`` and their derivatives.
        """
        if self.kind != "euler_korteweg":
            raise ConfigError("velocity_jet is defined for system models only")
        self.check_domain(v)
        t = self.tau_jet(v, 3)
        g = -((self.c_over_b(c)) * v + lam2) / t[0]
        gv = (-(c / self.b) - t[1] * g) / t[0]
        gvv = (-t[2] * g - 2.0 * t[1] * gv) / t[0]
        gvvv = (-t[3] * g - 3.0 * t[2] * gv - 3.0 * t[1] * gvv) / t[0]
        return np.array([g, gv, gvv, gvvv])

    def c_over_b(self, c: float) -> float:
        return c / self.b

    def impulse_q(self, v: float, c: float = 0.0, lam2: float = 0.0) -> float:
        """Reduced impulse q(v) = Q(U) along the profile constraint."""
        self.check_domain(v)
        if self.kind == "scalar":
            return v * v / (2.0 * self.b)
        g = self.velocity_jet(v, c, lam2)[0]
        return v * g / self.b

    def impulse_jet(self, v: float, c: float = 0.0, lam2: float = 0.0) -> np.ndarray:
        """(q, q', q'') of the reduced impulse."""
        if self.kind == "scalar":
            return np.array([v * v / (2.0 * self.b), v / self.b, 1.0 / self.b])
        g, gv, gvv, _ = self.velocity_jet(v, c, lam2)
        return np.array([v * g / self.b,
                         (g + v * gv) / self.b,
                         (2.0 * gv + v * gvv) / self.b])

    # -- effective potential -------------------------------------------------

    def potential_jet(self, v: float, params: WaveParams, order: int = 4) -> np.ndarray:
        """W and its v-derivatives at (v; c, lambda), exactly.

        Parameters
        ----------
        v : float
            Evaluation point, inside the domain.
        params : WaveParams
        order : int
            Highest derivative, at most 4.

        Returns
        -------
        (order+1,) array [W, W', ..., W^(order)].
        """
        if order > 4 or order < 0:
            raise ConfigError("potential_jet supports order <= 4")
        self.check_domain(v)
        c, lam = params.c, params.lam
        fj = self.f_jet(v, order)
        if self.kind == "scalar":
            out = -fj.copy()
            cb = c / (2.0 * self.b)
            lam1 = float(lam[0])
            out[0] -= cb * v * v + lam1 * v
            if order >= 1:
                out[1] -= 2.0 * cb * v + lam1
            if order >= 2:
                out[2] -= 2.0 * cb
            return out
        lam1, lam2 = float(lam[0]), float(lam[1])
        t = self.tau_jet(v, 4) if order >= 4 else self.tau_jet(v, 3)
        t = np.concatenate([t, np.zeros(5 - len(t))])
        g, gv, gvv, gvvv = self.velocity_jet(v, c, lam2)
        cb = c / self.b
        out = np.empty(order + 1)
        out[0] = -fj[0] + 0.5 * t[0] * g * g - lam1 * v
        if order >= 1:
            out[1] = -fj[1] - 0.5 * t[1] * g * g - cb * g - lam1
        if order >= 2:
            out[2] = -fj[2] - 0.5 * t[2] * g * g + t[0] * gv * gv
        if order >= 3:
            out[3] = (-fj[3] - 0.5 * t[3] * g * g - t[2] * g * gv
                      + t[1] * gv * gv + 2.0 * t[0] * gv * gvv)
        if order >= 4:
            out[4] = (-fj[4] - 0.5 * t[4] * g * g - 2.0 * t[3] * g * gv
                      - t[2] * g * gvv + 4.0 * t[1] * gv * gvv
                      + 2.0 * t[0] * gvv * gvv + 2.0 * t[0] * gv * gvvv)
        return out

    def potential_rational(self, params: WaveParams) -> tuple[np.ndarray, np.ndarray]:
        """W = N(v)/D(v) as an exact polynomial ratio.

        The quadrature engine deflates known turning points out of
        ``mu*D - N`` so the orbit integrands never suffer endpoint
        cancellation.
        """
        c, lam = params.c, params.lam
        mf = self.f.shift
        vmf = monomial_coeffs(mf)
        if self.kind == "scalar":
            lam1 = float(lam[0])
            rest = np.array([0.0, lam1, c / (2.0 * self.b)])
            num = padd(pscale(self.f.coeffs, -1.0), pmul(pscale(rest, -1.0), vmf))
            return num, vmf
        lam1, lam2 = float(lam[0]), float(lam[1])
        t = np.array([self.tau[0], self.tau[1]])
        G = np.array([-lam2, -(c / self.b)])
        num = padd(pmul(pscale(self.f.coeffs, -1.0), t),
                   pmul(padd(pscale(pmul(G, G), 0.5),
                             pmul(np.array([0.0, -lam1]), t)), vmf))
        den = pmul(t, vmf)
        return num, den

    def kappa_rational(self) -> tuple[np.ndarray, np.ndarray]:
        return self.kappa.coeffs, monomial_coeffs(self.kappa.shift)

    def energy_density_rational(self) -> tuple[np.ndarray, np.ndarray]:
        """f(v) as a polynomial ratio (for averaged-energy integrands)."""
        return self.f.coeffs, monomial_coeffs(self.f.shift)

    # -- state-space Hessians ------------------------------------------------

    def hamiltonian_hessian(self, U: np.ndarray) -> np.ndarray:
        """Hessian of the zero-gradient energy H(U, 0) at the state U."""
        if self.kind == "scalar":
            return np.array([[self.f_jet(float(U[0]), 2)[2]]])
        v, u = float(U[0]), float(U[1])
        fj = self.f_jet(v, 2)
        t = self.tau_jet(v, 2)
        return np.array([[fj[2] + 0.5 * t[2] * u * u, t[1] * u],
                         [t[1] * u, t[0]]])

    def hamiltonian_value(self, U: np.ndarray) -> float:
        if self.kind == "scalar":
            return float(self.f(float(U[0])))
        v, u = float(U[0]), float(U[1])
        return float(self.f(v)) + 0.5 * self.tau_jet(v, 0)[0] * u * u

    def hamiltonian_gradient(self, U: np.ndarray) -> np.ndarray:
        if self.kind == "scalar":
            return np.array([self.f_jet(float(U[0]), 1)[1]])
        v, u = float(U[0]), float(U[1])
        fj = self.f_jet(v, 1)
        t = self.tau_jet(v, 1)
        return np.array([fj[1] + 0.5 * t[1] * u * u, t[0] * u])

    def impulse_value(self, U: np.ndarray) -> float:
        """Q(U) = U . B^-1 U / 2."""
        if self.kind == "scalar":
            return float(U[0]) ** 2 / (2.0 * self.b)
        return float(U[0]) * float(U[1]) / self.b

    def impulse_gradient(self, U: np.ndarray) -> np.ndarray:
        if self.kind == "scalar":
            return np.array([float(U[0]) / self.b])
        return np.array([float(U[1]) / self.b, float(U[0]) / self.b])


def structural_matrices(model: ModelSpec) -> StructuralMatrices:
    """B, S and the (N+2) modulation weight with their exact inverses."""
    b = model.b
    if model.N == 1:
        B = np.array([[b]])
        Binv = np.array([[1.0 / b]])
    else:
        B = np.array([[0.0, b], [b, 0.0]])
        Binv = np.array([[0.0, 1.0 / b], [1.0 / b, 0.0]])
    n = model.N + 2
    S = np.zeros((n, n))
    S[0, 1] = S[1, 0] = -1.0
    S[2:, 2:] = B
    BB = np.zeros((n, n))
    BB[0, 1] = BB[1, 0] = 1.0
    BB[2:, 2:] = B
    Sinv = np.zeros((n, n))
    Sinv[0, 1] = Sinv[1, 0] = -1.0
    Sinv[2:, 2:] = Binv
    BBinv = np.zeros((n, n))
    BBinv[0, 1] = BBinv[1, 0] = 1.0
    BBinv[2:, 2:] = Binv
    return StructuralMatrices(B=B, Binv=Binv, S=S, BB=BB, BBinv=BBinv, Sinv=Sinv)


# -- construction ------------------------------------------------------------


def _parse_function(spec, name: str) -> Laurent:
    if isinstance(spec, dict):
        if "poly" in spec:
            return Laurent.make(spec["poly"])
        if "laurent" in spec:
            return Laurent.from_terms(spec["laurent"])
        if spec.get("inv4v"):
            return Laurent.from_terms({-1: 0.25})
        raise ConfigError(f"unrecognized {name} spec: {spec!r}")
    return Laurent.make(spec)


def model_from_dict(cfg: dict) -> ModelSpec:
    """Build a ModelSpec from the JSON config model block."""
    try:
        kind = cfg["kind"]
        b = float(cfg["b"])
        f = _parse_function(cfg["f"], "f")
        kappa = _parse_function(cfg.get("kappa", [1.0]), "kappa")
    except KeyError as exc:
        raise ConfigError(f"model block missing field {exc}") from None
    tau = None
    if kind == "euler_korteweg":
        tspec = cfg.get("tau", {"const": 1.0})
        if "const" in tspec:
            tau = (float(tspec["const"]), 0.0)
        elif "affine" in tspec:
            t0, t1 = tspec["affine"]
            tau = (float(t0), float(t1))
        elif tspec.get("identity"):
            tau = (0.0, 1.0)
        else:
            raise ConfigError(f"unrecognized tau spec: {tspec!r}")
    if "domain" in cfg:
        lo = float(cfg["domain"][0]) if cfg["domain"][0] is not None else -math.inf
        hi = float(cfg["domain"][1]) if cfg["domain"][1] is not None else math.inf
    else:
        needs_positive = (not f.is_poly or not kappa.is_poly
                          or (tau is not None and tau[1] != 0.0))
        lo, hi = (0.0, math.inf) if needs_positive else (-math.inf, math.inf)
    return ModelSpec(kind=kind, b=b, f=f, kappa=kappa, tau=tau,
                     domain=(lo, hi), label=cfg.get("label", "model"))


def gkdv_model(f_coeffs=(0.0, 0.0, 0.0, -1.0 / 6.0), b: float = 1.0,
               kappa=(1.0,), label: str = "gkdv") -> ModelSpec:
    """Generalized KdV convenience constructor (scalar, polynomial)."""
    return ModelSpec(kind="scalar", b=b, f=Laurent.make(f_coeffs),
                     kappa=Laurent.make(kappa), label=label)
