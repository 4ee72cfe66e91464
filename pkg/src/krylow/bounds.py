"""Error-bound evaluation for Krylov-aware low-rank approximation.

The central quantities are, for a polynomial ``p`` of degree at most
``s - 1``,

    E_p       = ||p(L_tail)||_F^2 * max_{i<=k} |f(l_i) / p(l_i)|^2
    E_Omega,p = ||p(L_tail) Om_tail Om_k^+||_F^2 * max_{i<=k} |f(l_i) / p(l_i)|^2

where the eigenvalues are ordered by decreasing ``|f|`` and split into a
head of size ``k`` and a tail. The minimum over all such ``p`` is not
computed; :func:`E_upper` takes the minimum over a fixed family of
candidate polynomials and is therefore an upper bound.

Both quantities are invariant under rescaling ``p``, so every evaluation
works with ``log|p|`` and ``log|f|`` and rescales before exponentiating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.special import gammaln, logsumexp

from .errors import ValidationError
from .functions import ScalarFunction

# ---------------------------------------------------------------------------
# spectrum bookkeeping


def log_abs_f(f: ScalarFunction, lam):
    """``log|f(lam)|`` without overflow for the exponential."""
    lam = np.asarray(lam, dtype=float)
    if f.is_exp:
        return f.t * lam
    with np.errstate(divide="ignore"):
        return np.log(np.abs(f(lam)))


@dataclass(frozen=True)
class SpectrumSplit:
    """Eigenvalues ordered by decreasing ``|f|`` and split at ``k``.

    Parameters
    ----------
    eigenvalues : array_like
        Eigenvalues of ``A`` in any order.
    k : int
        Head size, ``1 <= k < n``.
    f : ScalarFunction

    Attributes
    ----------
    lam : ndarray
        Ordered eigenvalues, ``|f(lam[0])| >= |f(lam[1])| >= ...``.
    order : ndarray of int
        ``lam = eigenvalues[order]``; use it to order eigenvectors.
    """

    eigenvalues: np.ndarray
    k: int
    f: ScalarFunction
    lam: np.ndarray = field(init=False, repr=False)
    order: np.ndarray = field(init=False, repr=False)
    logf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float).ravel()
        if ev.size < 2:
            raise ValidationError("a spectrum split needs at least two eigenvalues")
        if not 1 <= self.k < ev.size:
            raise ValidationError(f"k must lie in [1, {ev.size - 1}], got {self.k}")
        lf = log_abs_f(self.f, ev)
        order = np.argsort(-lf, kind="stable")
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "lam", ev[order])
        object.__setattr__(self, "logf", lf[order])
        with np.errstate(invalid="ignore"):
            bad = np.diff(self.logf) > 0
        if np.any(bad):
            raise ValidationError("eigenvalues are not ordered by |f|")

    @property
    def n(self):
        return self.lam.size

    @property
    def head(self):
        return self.lam[: self.k]

    @property
    def tail(self):
        return self.lam[self.k:]

    @property
    def lam_min(self):
        return float(self.lam.min())

    @property
    def lam_max(self):
        return float(self.lam.max())

    @property
    def mu(self):
        """Spectrum in the variable of the exponential, ``t * lam`` for ``exp(tA)``.

        For other functions this is ``lam`` itself.
        """
        return self.f.t * self.lam if self.f.is_exp else self.lam

    def log_tail_norm(self):
        return 0.5 * float(logsumexp(2.0 * self.logf[self.k:]))

    def tail_norm(self):
        """``||f(L_tail)||_F``; ``inf`` when it overflows."""
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_tail_norm()))

    def log_f_norm2(self):
        """``log ||f(A)||_2``."""
        return float(self.logf[0])

    def f_norm2(self):
        return float(np.exp(self.log_f_norm2()))

    def f_normF(self):
        return float(np.exp(0.5 * logsumexp(2.0 * self.logf)))


# ---------------------------------------------------------------------------
# Chebyshev polynomials


def chebyshev(m, x, method="recurrence"):
    """Chebyshev polynomial of the first kind, ``T_m(x)``.

    ``method="closed"`` uses ``((x + sqrt(x^2-1))^m + (x - sqrt(x^2-1))^m) / 2``
    and is only valid for ``|x| >= 1``.
    """
    if m < 0:
        raise ValidationError("Chebyshev degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if method == "closed":
        if np.any(np.abs(x) < 1):
            raise ValidationError("closed form needs |x| >= 1")
        r = np.sqrt(x * x - 1.0)
        return 0.5 * ((x + r) ** m + (x - r) ** m)
    if method != "recurrence":
        raise ValidationError(f"unknown method {method!r}")
    t0, t1 = np.ones_like(x), x.copy()
    if m == 0:
        return t0
    for _ in range(m - 1):
        t0, t1 = t1, 2.0 * x * t1 - t0
    return t1


def log_abs_chebyshev(m, x):
    """``(log|T_m(x)|, sign T_m(x))`` without overflow."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    sgn = np.empty_like(x)
    inside = np.abs(x) <= 1.0
    if np.any(inside):
        v = chebyshev(m, x[inside])
        with np.errstate(divide="ignore"):
            out[inside] = np.log(np.abs(v))
        sgn[inside] = np.sign(v)
    if np.any(~inside):
        xo = x[~inside]
        ax = np.abs(xo)
        r = np.sqrt(ax * ax - 1.0)
        big = ax + r
        ratio = (ax - r) / big
        out[~inside] = m * np.log(big) + np.log(0.5 * (1.0 + ratio**m))
        sgn[~inside] = np.where(xo < 0, (-1.0) ** m, 1.0)
    return out, sgn


# ---------------------------------------------------------------------------
# candidate polynomials


@dataclass(frozen=True)
class PolyCandidate:
    """A polynomial used to bound E from above.

    kinds
    -----
    ``monomial_coeffs``
        ``params = (c0, c1, ...)``.
    ``taylor_exp_shifted``
        ``sum_{i=0}^{degree} (x - shift)^i / i!``; ``params = (shift,)``.
    ``chebyshev_shifted``
        ``(1 + x - a) T_{degree-1}(1 + 2 (x - b) / (b - a))``;
        ``params = (b, a)`` with ``b = lam_{k+1}`` and ``a = lam_n``.
    ``chebyshev_tail``
        ``T_degree`` of the affine map sending ``[lo, hi]`` onto ``[-1, 1]``;
        ``params = (lo, hi)``.
    ``annihilator``
        ``x - c``; ``params = (c,)``.
    ``interpolant``
        Chebyshev series on ``[lo, hi]``; ``params = (lo, hi, c0, c1, ...)``.
    """

    kind: str
    degree: int
    params: tuple = ()

    def log_abs(self, x):
        """``(log|p(x)|, sign p(x))`` elementwise."""
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "chebyshev_tail":
            lo, hi = self.params
            return log_abs_chebyshev(self.degree, (2.0 * x - lo - hi) / (hi - lo))
        if k == "chebyshev_shifted":
            b, a = self.params
            lt, st = log_abs_chebyshev(self.degree - 1, 1.0 + 2.0 * (x - b) / (b - a))
            lin = 1.0 + x - a
            with np.errstate(divide="ignore"):
                return lt + np.log(np.abs(lin)), st * np.sign(lin)
        if k == "taylor_exp_shifted":
            (c,) = self.params
            y = x - c
            if np.any(y < 0):
                # outside the region where every term is nonnegative
                v = np.zeros_like(y)
                for i in range(self.degree, -1, -1):
                    v = v * y + 1.0 / math.factorial(i)
                with np.errstate(divide="ignore"):
                    return np.log(np.abs(v)), np.sign(v)
            i = np.arange(self.degree + 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = i[None, :] * np.log(y)[:, None] - gammaln(i + 1)[None, :]
            terms[:, 0] = 0.0
            return logsumexp(terms, axis=1), np.ones_like(y)
        v = self(x)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(v)), np.sign(v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "monomial_coeffs":
            out = np.zeros_like(x)
            for c in reversed(self.params):
                out = out * x + c
            return out
        if k == "annihilator":
            return x - self.params[0]
        if k == "interpolant":
            lo, hi = self.params[:2]
            return npcheb.chebval((2.0 * x - lo - hi) / (hi - lo), self.params[2:])
        la, sg = self.log_abs(x)
        return sg * np.exp(la)


def _log_ratio_max(spec, logp_head):
    return float(np.max(spec.logf[: spec.k] - logp_head))


def E_candidate(spec: SpectrumSplit, p: PolyCandidate):
    """``||p(L_tail)||_F^2 * max_{i<=k} |f(l_i)/p(l_i)|^2``; ``inf`` if ``p`` vanishes on the head."""
    return float(np.exp(log_E_candidate(spec, p)))


def log_E_candidate(spec, p):
    lp, _ = p.log_abs(spec.lam)
    head, tail = lp[: spec.k], lp[spec.k:]
    if np.any(np.isneginf(head)):
        return math.inf
    log_tail = 0.5 * logsumexp(2.0 * tail) if np.any(np.isfinite(tail)) else -math.inf
    return float(2.0 * (log_tail + _log_ratio_max(spec, head)))


def E_omega_candidate(spec: SpectrumSplit, p: PolyCandidate, omega_k, omega_tail):
    """``||p(L_tail) Om_tail Om_k^+||_F^2 * max_{i<=k} |f(l_i)/p(l_i)|^2``.

    ``omega_k`` is ``U_k^T Omega`` (``k x ell``) and ``omega_tail`` is
    ``U_tail^T Omega``, both in the ordering of ``spec``.
    """
    Ok = np.asarray(omega_k, dtype=float)
    Ot = np.asarray(omega_tail, dtype=float)
    if Ok.shape[0] != spec.k or Ot.shape[0] != spec.n - spec.k or Ok.shape[1] != Ot.shape[1]:
        raise ValidationError("omega blocks do not match the spectrum split")
    if np.linalg.matrix_rank(Ok) < spec.k:
        raise ValidationError("Omega_k is rank deficient")
    lp, sg = p.log_abs(spec.lam)
    head, tail = lp[: spec.k], lp[spec.k:]
    if np.any(np.isneginf(head)):
        return math.inf
    finite = tail[np.isfinite(tail)]
    if finite.size == 0:
        return 0.0
    c = float(finite.max())
    d = sg[spec.k:] * np.exp(tail - c)
    # Om_k^+ = Om_k^T (Om_k Om_k^T)^{-1}
    pinv = np.linalg.solve(Ok @ Ok.T, Ok).T
    G = (d[:, None] * Ot) @ pinv
    lg = 2.0 * (0.5 * np.log(np.sum(G * G)) if np.any(G) else -math.inf)
    return float(np.exp(lg + 2.0 * (_log_ratio_max(spec, head) + c)))


# ---------------------------------------------------------------------------
# candidate families


def _tail_hull(spec):
    return float(spec.tail.min()), float(spec.tail.max())


def taylor_candidate(spec, s):
    """Truncated Taylor series of ``exp(x - mu_min)`` of degree ``s - 1``, in ``mu``."""
    return PolyCandidate("taylor_exp_shifted", s - 1, (float(spec.mu.min()),))


def chebyshev_exp_candidate(spec, s):
    """``(1 + x - mu_n) T_{s-2}(1 + 2 eta(x))``, or ``None`` if undefined."""
    mu = spec.mu
    b, a = float(mu[spec.k]), float(mu[-1])
    if s < 2 or b == a:
        return None
    return PolyCandidate("chebyshev_shifted", s - 1, (b, a))


def interpolant_candidate(spec, s):
    lo, hi = spec.lam_min, spec.lam_max
    if s < 1 or hi == lo:
        return None
    coef = npcheb.chebinterpolate(lambda t: spec.f(0.5 * (hi - lo) * t + 0.5 * (hi + lo)), s - 1)
    return PolyCandidate("interpolant", s - 1, (lo, hi, *coef))


def candidate_family(spec: SpectrumSplit, s: int):
    """Registered candidates of degree at most ``s - 1``, as ``(label, p, variable)``.

    ``variable`` is ``"mu"`` for candidates written in the exponent
    variable and ``"lam"`` otherwise.
    """
    if s < 1:
        raise ValidationError("s must be at least 1")
    fam = []
    f = spec.f
    if f.is_exp:
        fam.append(("taylor_exp_shifted", taylor_candidate(spec, s), "mu"))
        ch = chebyshev_exp_candidate(spec, s)
        if ch is not None:
            fam.append(("chebyshev_shifted", ch, "mu"))
    deg = f.degree
    if deg is not None and deg <= s - 1:
        coeffs = (0.0, 1.0) if f.kind == "identity" else f.coefficients
        fam.append(("monomial_coeffs", PolyCandidate("monomial_coeffs", deg, tuple(coeffs)), "lam"))
    lo, hi = _tail_hull(spec)
    if hi > lo:
        for m in range(s):
            fam.append((f"chebyshev_tail_{m}", PolyCandidate("chebyshev_tail", m, (lo, hi)), "lam"))
    else:
        fam.append(("chebyshev_tail_0", PolyCandidate("monomial_coeffs", 0, (1.0,)), "lam"))
        if s >= 2:
            fam.append(("annihilator", PolyCandidate("annihilator", 1, (lo,)), "lam"))
    ip = interpolant_candidate(spec, s)
    if ip is not None:
        fam.append(("interpolant", ip, "lam"))
    return fam


def _in_variable(spec, variable):
    if variable == "mu" and spec.f.is_exp and spec.f.t != 1.0:
        return _MuView(spec)
    return spec


class _MuView:
    """Presents ``spec`` with eigenvalues replaced by ``mu = t * lam``."""

    def __init__(self, spec):
        self.lam = spec.mu
        self.logf = spec.logf
        self.k = spec.k
        self.n = spec.n


def E_upper(spec: SpectrumSplit, s: int):
    """Upper bound on E(s; f) from the candidate family.

    Returns
    -------
    value : float
    argmin_kind : str
    """
    best, kind = math.inf, "none"
    for label, p, var in candidate_family(spec, s):
        v = log_E_candidate(_in_variable(spec, var), p)
        if v < best:
            best, kind = v, label
    return float(np.exp(best)), kind


def E_omega_upper(spec: SpectrumSplit, s: int, omega_k, omega_tail):
    """Minimum of :func:`E_omega_candidate` over the candidate family."""
    best, kind = math.inf, "none"
    for label, p, var in candidate_family(spec, s):
        v = E_omega_candidate(_in_variable(spec, var), p, omega_k, omega_tail)
        if v < best:
            best, kind = v, label
    return best, kind


def split_omega(spec: SpectrumSplit, eigenvectors, omega):
    """``(U_k^T Omega, U_tail^T Omega)`` with eigenvectors in the original order."""
    U = np.asarray(eigenvectors)[:, spec.order]
    P = U.T @ np.asarray(omega, dtype=float)
    return P[: spec.k], P[spec.k:]


# ---------------------------------------------------------------------------
# polynomial approximation error


def poly_err_exp(r, lam_min, lam_max):
    """``gamma^(2r+2) / (2^(4r+3) (2r+2)!)`` with ``gamma = lam_max - lam_min``.

    Multiplied by ``exp(lam_max)`` this bounds the best uniform error of a
    degree ``2r + 1`` polynomial approximation to ``exp`` on the interval
    (Chebyshev interpolation).
    """
    if r < 0:
        raise ValidationError("r must be nonnegative")
    g = float(lam_max) - float(lam_min)
    if g < 0:
        raise ValidationError("lam_max must not be below lam_min")
    if g == 0:
        return 0.0
    m = 2 * r + 2
    return float(np.exp(m * np.log(g) - (4 * r + 3) * np.log(2.0) - gammaln(m + 1)))


def poly_err(spec: SpectrumSplit, r: int, grid=4001):
    """Upper estimate of ``inf_{p in P_{2r+1}} ||f - p||_inf`` on ``[lam_min, lam_max]``.

    Exponentials use the closed-form interpolation bound; polynomials of
    degree at most ``2r + 1`` give zero; other functions use the maximum
    error of the degree ``2r + 1`` Chebyshev interpolant on a fine grid.
    """
    f = spec.f
    deg = f.degree
    if deg is not None and deg <= 2 * r + 1:
        return 0.0
    if f.is_exp:
        mu = spec.mu
        return poly_err_exp(r, mu.min(), mu.max()) * float(np.exp(mu.max()))
    lo, hi = spec.lam_min, spec.lam_max
    if hi == lo:
        return 0.0
    m = 2 * r + 1
    coef = npcheb.chebinterpolate(lambda t: f(0.5 * (hi - lo) * t + 0.5 * (hi + lo)), m)
    t = np.concatenate([np.linspace(-1.0, 1.0, grid), np.cos(np.pi * (np.arange(4 * m + 8) + 0.5) / (4 * m + 8))])
    x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    return float(np.max(np.abs(f(x) - npcheb.chebval(t, coef))))


# ---------------------------------------------------------------------------
# constants and gaps


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")


def constant_C_components(delta, k, ell):
    _check_delta(delta)
    if k < 1 or ell < k:
        raise ValidationError("constant_C needs 1 <= k <= ell")
    m = ell - k + 1
    return {
        "two_e": 2.0 * math.e,
        "log_factor": 2.0 * math.log(2.0 / delta) + 1.0,
        "power_factor": (2.0 * math.sqrt(math.pi * k) / delta) ** (2.0 / m),
        "ratio": k / m,
    }


def constant_C(delta, k, ell):
    """Tail-probability constant ``C_{delta,k,ell}``."""
    c = constant_C_components(delta, k, ell)
    return c["two_e"] * c["log_factor"] * c["power_factor"] * c["ratio"]


def constant_Chat(delta):
    """Single-vector constant ``2 pi (1 + 6 log(2/delta)) / delta^2``."""
    _check_delta(delta)
    return 2.0 * math.pi * (1.0 + 6.0 * math.log(2.0 / delta)) / delta**2


@dataclass(frozen=True)
class GapQuantities:
    """Eigenvalue gaps of an ordered spectrum.

    ``gamma(i, j) = lam_i - lam_j`` with 1-based indices. ``Gamma`` is
    ``min(1, 2 gamma(k, k+1) / gamma(k+1, n))`` and is set to 1 when the tail
    is a single point. ``gamma_min`` is the smallest relative head gap and
    is ``inf`` for ``k = 1``.
    """

    lam: np.ndarray
    k: int
    Gamma: float
    gamma_min: float

    def gamma(self, i, j):
        return float(self.lam[i - 1] - self.lam[j - 1])


def gamma_quantities(spec: SpectrumSplit, variable="mu"):
    lam = spec.mu if variable == "mu" else spec.lam
    k, n = spec.k, spec.n
    g_kk1 = lam[k - 1] - lam[k]
    g_k1n = lam[k] - lam[n - 1]
    if g_k1n == 0:
        Gamma = 1.0
    else:
        Gamma = float(min(1.0, 2.0 * g_kk1 / g_k1n))
    Gamma = max(Gamma, 0.0)
    width = abs(float(lam.max() - lam.min()))
    if k < 2:
        gmin = math.inf
    elif width == 0:
        gmin = 0.0
    else:
        h = np.sort(lam[:k])
        gmin = float(np.min(np.diff(h)) / width)
    return GapQuantities(np.asarray(lam, dtype=float), k, Gamma, gmin)


# ---------------------------------------------------------------------------
# assembled bounds

BOUND_KINDS = ("thm35_tail", "thm35_expectation", "cor41", "cor42", "thm51")


@dataclass(frozen=True)
class BoundReport:
    """A bound value with the pieces it was assembled from.

    ``value = poly_term + sqrt(tail_term**2 + e_factor * E_term)`` for every
    kind; :meth:`recombine` recomputes it.
    """

    bound_name: str
    value: float
    components: dict
    parameters: dict
    notes: dict = field(default_factory=dict)

    def recombine(self):
        c = self.components
        return c["poly_term"] + math.sqrt(c["tail_term"] ** 2 + c["e_factor"] * c["E_term"])

    def to_dict(self):
        out = {"bound_name": self.bound_name, "value": self.value}
        out.update({f"component.{k}": v for k, v in self.components.items()})
        out.update({f"param.{k}": v for k, v in self.parameters.items()})
        out.update({f"note.{k}": v for k, v in self.notes.items()})
        return out


def assemble_bound(kind, spec: SpectrumSplit, ell, s, r, delta=None):
    """Right-hand side of one of the error bounds for ``ALG_k``.

    Parameters
    ----------
    kind : {"thm35_tail", "thm35_expectation", "cor41", "cor42", "thm51"}
        ``thm35_*`` are the general tail and expectation bounds for the
        block method, ``cor41``/``cor42`` their exponential
        specializations via Taylor and Chebyshev candidates, and
        ``thm51`` the single-vector tail bound (``ell`` is ignored).
    spec : SpectrumSplit
    ell, s, r : int
    delta : float, optional
        Failure probability for the tail bounds.

    Raises
    ------
    ValidationError
        If a precondition of the chosen bound fails.
    """
    if kind not in BOUND_KINDS:
        raise ValidationError(f"unknown bound kind {kind!r}")
    k = spec.k
    if s < 1 or r < 0:
        raise ValidationError("need s >= 1 and r >= 0")
    params = {"k": k, "ell": ell, "s": s, "r": r}
    if delta is not None:
        params["delta"] = delta
    tail = spec.tail_norm()
    notes = {}

    if kind in ("cor41", "cor42"):
        if not spec.f.is_exp:
            raise ValidationError(f"{kind} applies to the exponential only")
        if ell - k < 2:
            raise ValidationError(f"{kind} requires ell - k >= 2")
        gq = gamma_quantities(spec)
        g1n = gq.gamma(1, spec.n)
        mu = spec.mu
        pe = poly_err_exp(r, mu.min(), mu.max())
        poly_term = 4.0 * math.sqrt(ell * s) * pe * math.exp(mu.max())
        notes["poly_term_proof_chain"] = 4.0 * math.sqrt(ell * s) * pe * 2 ** (4 * r + 3) * math.exp(mu.max())
        if kind == "cor41":
            if s < math.e * g1n:
                raise ValidationError(f"cor41 requires s >= e*gamma_1n = {math.e * g1n:.6g}")
            lr = s * math.log(g1n) - gammaln(s + 1) if g1n > 0 else -math.inf
            ratio = math.exp(lr)
            e_term = tail**2 / (1.0 - ratio) ** 2
            e_factor = 5.0 * k / (ell - k - 1)
            notes["taylor_ratio"] = ratio
        else:
            g1k, gkn = gq.gamma(1, k), gq.gamma(k, spec.n)
            if gkn > 0 and g1n > gkn:
                need = 2.0 + g1k / math.log(g1n / gkn)
            else:
                need = 2.0
            if s < need:
                raise ValidationError(f"cor42 requires s >= 2 + gamma_1k/log(gamma_1n/gamma_kn) = {need:.6g}")
            expo = -2.0 * (s - 2) * math.sqrt(gq.Gamma) + 3.0 * gkn
            e_term = tail**2
            e_factor = 2.0**expo * 80.0 * k / (ell - k - 1)
            notes["Gamma"] = gq.Gamma
        comps = {"poly_term": poly_term, "tail_term": tail, "E_term": e_term, "e_factor": e_factor}
    else:
        E_up, argmin = E_upper(spec, s)
        notes["E_argmin"] = argmin
        if kind == "thm51":
            _check_delta(delta if delta is not None else -1.0)
            gq = gamma_quantities(spec)
            if not gq.gamma_min > 0:
                raise ValidationError("thm51 requires gamma_min > 0 (distinct head eigenvalues)")
            poly_term = 4.0 * math.sqrt(k + s) * poly_err(spec, r)
            gfac = 1.0 if k < 2 else float(gq.gamma_min) ** (-2.0 * (k - 1))
            e_factor = constant_Chat(delta) * k**4 * gfac
            notes["gamma_min"] = gq.gamma_min
        else:
            if ell < k:
                raise ValidationError("block bounds require ell >= k")
            poly_term = 4.0 * math.sqrt(ell * s) * poly_err(spec, r)
            if kind == "thm35_tail":
                _check_delta(delta if delta is not None else -1.0)
                e_factor = 5.0 * constant_C(delta, k, ell)
            else:
                if ell - k < 2:
                    raise ValidationError("thm35_expectation requires ell - k >= 2")
                e_factor = 5.0 * k / (ell - k - 1)
        comps = {"poly_term": poly_term, "tail_term": tail, "E_term": E_up, "e_factor": e_factor}

    rep = BoundReport(kind, 0.0, comps, params, notes)
    return BoundReport(kind, rep.recombine(), comps, params, notes)
