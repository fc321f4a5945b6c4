"""Analytic evaluation of infinite product forms without series expansion.

A ProductForm denotes  c * t^k0 * prod_factors prod_{n>=0} (1 + s*t^(a+m*n))^e.
The mean, variance, log-value and characteristic function of the associated
coefficient distribution are computed by direct summation over the factor
exponents k = a + m*n in extended precision (>= 40 digits); inner sums stop
once a term falls below 1e-30 of the running sum, with a hard term cap.

pf_expand bridges back to the exact world: it produces the QSeries expansion
of a form, rewriting factor families through the Euler product
prod(1 - t^(d*n)) whenever the offsets allow, so that large orders stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from mpmath import mp, mpf, mpc

from ._precision import workprec, working_dps
from .qseries import QSeries

__all__ = [
    "ProductForm", "ProductFactor", "AsymptoticModel",
    "pf_mean", "pf_variance", "pf_log", "pf_charfn", "pf_expand", "to_mpf",
    "zeta_constants", "em_residual", "EMResidualRow",
    "FORMS", "MODELS", "named_form", "named_model", "BranchCutError",
]

TRUNCATION_EPS = "1e-30"
MAX_TERMS = 10 ** 7


class BranchCutError(ArithmeticError):
    """A characteristic-function log term crossed the principal branch cut."""


def to_mpf(x) -> mpf:
    """Coerce to mpf; floats go through repr so '0.01' means the decimal."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, float):
        return mpf(repr(x))
    return mpf(x)


@dataclass(frozen=True)
class ProductFactor:
    sign: int
    offset: Fraction      # a > 0
    step: Fraction        # m > 0
    exponent: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("factor sign must be +1 or -1")
        object.__setattr__(self, "offset", Fraction(self.offset))
        object.__setattr__(self, "step", Fraction(self.step))
        if self.offset <= 0 or self.step <= 0:
            raise ValueError("factor offset and step must be positive")


@dataclass(frozen=True)
class ProductForm:
    """c * t^k0 * prod over factors of prod_{n>=0} (1 + s t^(a+mn))^e."""

    prefactor_coeff: Fraction = Fraction(1)
    prefactor_exp: Fraction = Fraction(0)
    factors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "prefactor_coeff", Fraction(self.prefactor_coeff))
        object.__setattr__(self, "prefactor_exp", Fraction(self.prefactor_exp))
        object.__setattr__(self, "factors", tuple(
            f if isinstance(f, ProductFactor) else ProductFactor(*f)
            for f in self.factors))

    @property
    def positivity_guaranteed(self) -> bool:
        """Sufficient test for an all-nonnegative expansion: positive prefactor
        and only (1+t^k)^(e>=0) or (1-t^k)^(e<=0) factors."""
        if self.prefactor_coeff <= 0:
            return False
        return all((f.sign == 1) == (f.exponent >= 0) or f.exponent == 0
                   for f in self.factors)

    def concat(self, other: "ProductForm") -> "ProductForm":
        """The form of the product F*G; log/mean/variance add by construction."""
        return ProductForm(self.prefactor_coeff * other.prefactor_coeff,
                           self.prefactor_exp + other.prefactor_exp,
                           self.factors + other.factors)


# ---------------------------------------------------------------------------
# analytic evaluations
# ---------------------------------------------------------------------------


def _factor_sum(f: ProductFactor, rho, summand) -> mpf:
    """sum_{n>=0} summand(k, x) with k = a + m*n, x = exp(-k*rho), truncated
    at relative 1e-30 of the running sum."""
    eps = mpf(TRUNCATION_EPS)
    a = mpf(f.offset.numerator) / f.offset.denominator
    m = mpf(f.step.numerator) / f.step.denominator
    r = mp.exp(-m * rho)
    x = mp.exp(-a * rho)
    k = a
    acc = mp.mpf(0)
    for n in range(MAX_TERMS):
        term = summand(k, x)
        acc += term
        if abs(term) < eps * (abs(acc) + eps):
            break
        k += m
        x *= r
    return acc


def pf_mean(form: ProductForm, rho) -> mpf:
    """Mean of the coefficient distribution at t = exp(-rho):
    t d/dt log F(t) = k0 + sum e * s*k*x / (1 + s*x)."""
    with workprec():
        rho = to_mpf(rho)
        if rho <= 0:
            raise ValueError("rho must be positive")
        total = mpf(form.prefactor_exp.numerator) / form.prefactor_exp.denominator
        for f in form.factors:
            s = f.sign
            total += f.exponent * _factor_sum(
                f, rho, lambda k, x: s * k * x / (1 + s * x))
        return total


def pf_variance(form: ProductForm, rho) -> mpf:
    """Variance: (t d/dt)^2 log F(t) = sum e * s*k^2*x / (1 + s*x)^2."""
    with workprec():
        rho = to_mpf(rho)
        if rho <= 0:
            raise ValueError("rho must be positive")
        total = mp.mpf(0)
        for f in form.factors:
            s = f.sign
            total += f.exponent * _factor_sum(
                f, rho, lambda k, x: s * k * k * x / (1 + s * x) ** 2)
        return total


def pf_log(form: ProductForm, lam) -> mpf:
    """log F(exp(-lambda)) = log c - k0*lambda + sum e*log(1 + s*exp(-k*lambda)).

    lambda is the same substitution variable as rho (t = exp(-rho)); the two
    names follow the quantity being estimated, nothing else.
    """
    with workprec():
        lam = to_mpf(lam)
        if lam <= 0:
            raise ValueError("lambda must be positive")
        if form.prefactor_coeff <= 0:
            raise ValueError("log of a non-positive prefactor")
        total = mp.log(mpf(form.prefactor_coeff.numerator) / form.prefactor_coeff.denominator)
        total -= (mpf(form.prefactor_exp.numerator) / form.prefactor_exp.denominator) * lam
        for f in form.factors:
            s = f.sign
            total += f.exponent * _factor_sum(
                f, lam, lambda k, x: mp.log(1 + s * x))
        return total


def pf_charfn(form: ProductForm, rho, theta) -> mpc:
    """E[e^(i*theta*X)] = F(e^(i*theta) t) / F(t) for the tilted coefficient
    distribution; requires a form whose expansion is nonnegative."""
    if not form.positivity_guaranteed:
        raise ValueError("characteristic function needs nonnegative coefficients")
    with workprec():
        rho = to_mpf(rho)
        theta = to_mpf(theta)
        if rho <= 0:
            raise ValueError("rho must be positive")
        if theta == 0:
            return mpc(1)
        eps = mpf(TRUNCATION_EPS)
        total = mpc(0)
        w = mpc(rho, -theta)
        for f in form.factors:
            s = f.sign
            a = mpf(f.offset.numerator) / f.offset.denominator
            m = mpf(f.step.numerator) / f.step.denominator
            rw, rr = mp.exp(-m * w), mp.exp(-m * rho)
            zw, zr = mp.exp(-a * w), mp.exp(-a * rho)
            acc = mpc(0)
            for n in range(MAX_TERMS):
                uw, ur = 1 + s * zw, 1 + s * zr
                if mp.re(uw) <= 0:
                    raise BranchCutError(
                        f"log(1 + s*t^k) crossed the branch cut at k = {a + n * m}")
                term = mp.log(uw) - mp.log(ur)
                acc += term
                if abs(term) < eps * (abs(acc) + eps):
                    break
                zw *= rw
                zr *= rr
            total += f.exponent * acc
        # prefactor: (e^{i theta} t)^{k0} / t^{k0} = e^{i theta k0}
        k0 = mpf(form.prefactor_exp.numerator) / form.prefactor_exp.denominator
        return mp.exp(total + mpc(0, 1) * theta * k0)


# ---------------------------------------------------------------------------
# exact expansion
# ---------------------------------------------------------------------------


def _euler_word(f: ProductFactor, denom: int):
    """Express prod_{n>=0}(1 + s t^(a+mn))^e through Euler atoms
    E_d = prod_{n>=1}(1 - t^(d*n)) on the given grid, if possible.

    Returns {d: power} or None when the factor does not reduce.
    """
    a = f.offset * denom
    m = f.step * denom
    if a.denominator != 1 or m.denominator != 1:
        return None
    a, m, e = int(a), int(m), f.exponent
    if f.sign == -1:
        if a == m:                      # prod(1 - u^n), u = t^a
            return {a: e}
        if 2 * a == m:                  # prod(1 - u^(2n-1)) = E(u)/E(u^2)
            return {a: e, 2 * a: -e}
        return None
    if a == m:                          # prod(1 + u^n) = E(u^2)/E(u)
        return {2 * a: e, a: -e}
    if 2 * a == m:                      # prod(1 + u^(2n-1)) = E(u^2)^2/(E(u)E(u^4))
        return {m: 2 * e, a: -e, 2 * m: -e}
    return None


def _expand_factor_direct(f: ProductFactor, denom: int, order: int) -> QSeries:
    """Fallback: multiply the (1 + s t^k)^e binomial series factor by factor."""
    acc = QSeries.one(order, denom)
    a = f.offset * denom
    m = f.step * denom
    if a.denominator != 1 or m.denominator != 1:
        raise ValueError(f"factor exponents {f.offset}+n*{f.step} off the 1/{denom} grid")
    k, step = int(a), int(m)
    while k <= order:
        binom = _binomial_series(f.sign, k, f.exponent, order, denom)
        acc = (acc * binom).truncated(order)
        k += step
    return acc


def _binomial_series(sign: int, k: int, e: int, order: int, denom: int) -> QSeries:
    """(1 + sign*t^k)^e truncated at grid index `order` (e may be negative)."""
    terms = {0: 1}
    if e >= 0:
        c = 1
        for i in range(1, e + 1):
            if i * k > order:
                break
            c = c * (e - i + 1) // i
            terms[i * k] = c if (sign == 1 or i % 2 == 0) else -c
    else:
        p = -e
        c = 1
        i = 1
        while i * k <= order:
            c = c * (p + i - 1) // i
            x = c if sign == -1 else (c if i % 2 == 0 else -c)
            terms[i * k] = x
            i += 1
    return QSeries.from_terms(terms, order, denom)


def pf_expand(form: ProductForm, denom: int, order: int) -> QSeries:
    """Exact expansion of the form on grid 1/denom through index `order`."""
    from .modforms import euler_product  # local import avoids a cycle at load

    word: dict[int, int] = {}
    direct = []
    for f in form.factors:
        w = _euler_word(f, denom)
        if w is None:
            direct.append(f)
        else:
            for d, p in w.items():
                word[d] = word.get(d, 0) + p

    k0 = form.prefactor_exp * denom
    if k0.denominator != 1:
        raise ValueError(f"prefactor exponent {form.prefactor_exp} off the 1/{denom} grid")
    shift = int(k0)

    pad = order + max(0, -shift)
    num = QSeries.one(pad, denom)
    den = QSeries.one(pad, denom)
    for d, p in sorted(word.items()):
        if p == 0 or d > pad:
            continue
        # Euler atom on the working grid: indices d, 2d, ... are grid indices
        flat = euler_product(pad, d)
        base = QSeries(denom, flat.vmin, flat.order, flat.coeffs)
        if p > 0:
            num = (num * base ** p).truncated(pad)
        else:
            den = (den * base ** (-p)).truncated(pad)
    acc = num if den.coeffs == (1,) and den.vmin == 0 else num * den.invert()
    acc = acc.truncated(pad)
    for f in direct:
        acc = (acc * _expand_factor_direct(f, denom, pad)).truncated(pad)
    c = form.prefactor_coeff
    if c != 1:
        acc = acc * (c if c.denominator > 1 else int(c))
    return acc.shifted(shift).truncated(order)


# ---------------------------------------------------------------------------
# leading-order models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticModel:
    """Leading-term model for a coefficient family:

    mtilde(rho)  = A / rho^2        with A = mean_pi2 * pi^2
    sigma~^2     = B / rho^3        with B = var_pi2 * pi^2
    log F(e^-l)  ~ A/l + beta*log(l) + sum coeff*log(base) + c2pi*log(2*pi)

    mean_const records a constant offset of the true mean (reporting only;
    the saddle equation uses A/rho^2 alone).
    """

    mean_pi2: Fraction
    var_pi2: Fraction
    mean_const: Fraction = Fraction(0)
    log_beta: Fraction = Fraction(0)
    gamma_logs: tuple = ()          # ((coeff, integer base), ...)
    gamma_log2pi: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "mean_pi2", Fraction(self.mean_pi2))
        object.__setattr__(self, "var_pi2", Fraction(self.var_pi2))
        object.__setattr__(self, "mean_const", Fraction(self.mean_const))
        object.__setattr__(self, "log_beta", Fraction(self.log_beta))
        object.__setattr__(self, "gamma_log2pi", Fraction(self.gamma_log2pi))
        if self.mean_pi2 <= 0 or self.var_pi2 <= 0:
            raise ValueError("model scales A and B must be positive")

    def _frac(self, f: Fraction) -> mpf:
        return mpf(f.numerator) / f.denominator

    def mean_scale(self) -> mpf:
        with workprec():
            return self._frac(self.mean_pi2) * mp.pi ** 2

    def var_scale(self) -> mpf:
        with workprec():
            return self._frac(self.var_pi2) * mp.pi ** 2

    def mtilde(self, rho) -> mpf:
        with workprec():
            return self.mean_scale() / to_mpf(rho) ** 2

    def sigma_tilde(self, rho) -> mpf:
        with workprec():
            return mp.sqrt(self.var_scale() / to_mpf(rho) ** 3)

    def log_main(self, lam) -> mpf:
        with workprec():
            lam = to_mpf(lam)
            total = self.mean_scale() / lam + self._frac(self.log_beta) * mp.log(lam)
            for coeff, base in self.gamma_logs:
                total += self._frac(Fraction(coeff)) * mp.log(base)
            total += self._frac(self.gamma_log2pi) * mp.log(2 * mp.pi)
            return total


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_F = Fraction
_ETA_POWER = {2: 24, 3: 12, 4: 8, 5: 6, 7: 4, 9: 3, 13: 2, 25: 1}


def P(m, a) -> ProductForm:
    """P_{m,a} = prod_{n>=0} (1 - t^(m*n+a))^(-1)."""
    return ProductForm(factors=((-1, _F(a), _F(m), -1),))


def g_form(a: int, b: int, c: int) -> ProductForm:
    """prod_{k>=1} ((1 - t^(b*k)) / (1 - t^(a*k)))^c, a | b."""
    if b % a:
        raise ValueError("g(a, b, c) requires a | b")
    return ProductForm(factors=((-1, _F(b), _F(b), c), (-1, _F(a), _F(a), -c)))


def _jninv_form(n: int) -> ProductForm:
    e = _ETA_POWER[n]
    return ProductForm(prefactor_exp=_F(1),
                       factors=((-1, _F(n), _F(n), e), (-1, _F(1), _F(1), -e)))


FORMS: dict[str, ProductForm] = {
    "Q": ProductForm(factors=((1, _F(1), _F(2), 1),)),
    "R": ProductForm(factors=((1, _F(2), _F(2), 1),)),
    "H1star": ProductForm(factors=((-1, _F(1), _F(1), -24),)),
    "H2star": ProductForm(prefactor_coeff=_F(128),
                          factors=((1, _F(1), _F(2), 16), (-1, _F(1), _F(2), -16))),
    "H3star": ProductForm(prefactor_coeff=_F(2 ** 15), prefactor_exp=_F(2),
                          factors=((1, _F(2), _F(2), 16), (-1, _F(1), _F(2), -16))),
    "j2star": ProductForm(prefactor_exp=_F(-1), factors=((1, _F(1), _F(2), 24),)),
    "j2inv": ProductForm(prefactor_exp=_F(1), factors=((1, _F(1), _F(1), 24),)),
    "j2invsq": ProductForm(prefactor_exp=_F(2), factors=((1, _F(1), _F(1), 48),)),
    "j3cubeinv": ProductForm(prefactor_exp=_F(3),
                             factors=((-1, _F(3), _F(3), 36), (-1, _F(1), _F(1), -36))),
    "j4main": ProductForm(prefactor_exp=_F(5),
                          factors=((1, _F(1), _F(1), 24), (1, _F(2), _F(2), 48))),
    "j4starmain": ProductForm(prefactor_coeff=_F(16), prefactor_exp=_F(1),
                              factors=((-1, _F(8), _F(8), 4), (-1, _F(2), _F(2), -4))),
    "phi4": ProductForm(prefactor_exp=_F(1),
                        factors=((-1, _F(1), _F(1), 8), (-1, _F(4), _F(4), 16),
                                 (-1, _F(2), _F(2), -24))),
    "phi9": ProductForm(prefactor_exp=_F(2),
                        factors=((-1, _F(1), _F(1), 3), (-1, _F(9), _F(9), 9),
                                 (-1, _F(3), _F(3), -12))),
    "phi25": ProductForm(prefactor_exp=_F(4),
                         factors=((-1, _F(1), _F(1), 1), (-1, _F(25), _F(25), 5),
                                  (-1, _F(5), _F(5), -6))),
}
for _n in _ETA_POWER:
    FORMS[f"j{_n}inv"] = _jninv_form(_n)


def named_form(name: str, **params) -> ProductForm:
    """Look up a registry form; 'P' takes m, a and 'g' takes a, b, c."""
    if name == "P":
        return P(params["m"], params["a"])
    if name == "g":
        return g_form(params["a"], params["b"], params["c"])
    try:
        return FORMS[name]
    except KeyError:
        raise KeyError(
            f"unknown form {name!r}; available: P, g, {', '.join(sorted(FORMS))}"
        ) from None


def _jninv_model(n: int) -> AsymptoticModel:
    e = _ETA_POWER[n]
    scale = _F(e * (n - 1), 6 * n)
    return AsymptoticModel(mean_pi2=scale, var_pi2=2 * scale, mean_const=1,
                           gamma_logs=((_F(-e, 2), n),))


MODELS: dict[str, AsymptoticModel] = {
    "H1star": AsymptoticModel(4, 8, log_beta=12, gamma_log2pi=-12),
    "H2star": AsymptoticModel(2, 4, gamma_logs=((-1, 2),)),
    "H3star": AsymptoticModel(2, 4, mean_const=2, gamma_logs=((-1, 2),)),
    "j2star": AsymptoticModel(1, 2, mean_const=-1),
    "j2inv": AsymptoticModel(2, 4, mean_const=1, gamma_logs=((-12, 2),)),
    "j2invsq": AsymptoticModel(4, 8, mean_const=1, gamma_logs=((-24, 2),)),
    "j3cubeinv": AsymptoticModel(4, 8, mean_const=3, gamma_logs=((-18, 3),)),
    "j4main": AsymptoticModel(4, 8, mean_const=5, gamma_logs=((-36, 2),)),
    "j4starmain": AsymptoticModel(_F(1, 4), _F(1, 2), mean_const=1),
}
for _n in _ETA_POWER:
    MODELS[f"j{_n}inv"] = _jninv_model(_n)


def named_model(name: str) -> AsymptoticModel:
    try:
        return MODELS[name]
    except KeyError:
        raise KeyError(f"no model registered under {name!r}") from None


# ---------------------------------------------------------------------------
# zeta constants and Euler-Maclaurin residual tables
# ---------------------------------------------------------------------------


def _zeta3() -> mpf:
    """Apery's constant by direct summation with an Euler-Maclaurin tail."""
    with mp.workdps(working_dps() + 10):
        n0 = 6 * mp.dps + 50
        s = mp.fsum(mpf(1) / (n * n * n) for n in range(1, n0))
        n = mpf(n0)
        tail = 1 / (2 * n * n) + 1 / (2 * n ** 3)
        eps = mpf(10) ** (-(mp.dps + 5))
        for k in range(1, 60):
            term = mp.bernoulli(2 * k) * (2 * k + 1) / (2 * n ** (2 * k + 2))
            tail += term
            if abs(term) < eps:
                break
        return +(s + tail)


def zeta_constants() -> dict:
    """zeta(2) = pi^2/6, zeta(3) by series + EM tail, zeta(4) = pi^4/90,
    and the Hurwitz value zeta(2, 1/2) = (2^2 - 1) zeta(2) = pi^2/2."""
    with workprec():
        return {
            "zeta2": mp.pi ** 2 / 6,
            "zeta3": _zeta3(),
            "zeta4": mp.pi ** 4 / 90,
            "hurwitz2_half": mp.pi ** 2 / 2,
        }


@dataclass(frozen=True)
class EMResidualRow:
    quantity: str
    rho: object
    value: object
    main_term: object
    residual: object
    scaled_residual: object


_EM_KINDS = ("mP", "sP", "logP", "mQ", "sQ", "logQ", "mR", "sR", "logR")


def em_residual(kind: str, rho_list, m: int = 1, a: int = 1) -> list:
    """Numeric value vs leading term for the P/Q/R means, variances and logs.

    The scaled residual divides out the claimed remainder order: means carry
    an O(1/rho) remainder against a 1/rho^2 main term, so the row reports
    residual*rho; variances report residual*rho^2; logs report residual/rho.
    """
    if kind not in _EM_KINDS:
        raise ValueError(f"unknown quantity {kind!r}; choose from {_EM_KINDS}")
    if kind.startswith("log"):
        family, what = kind[3:], "log"
    else:
        family, what = kind[1:], kind[0]

    if family == "P":
        form = P(m, a)
    elif family == "Q":
        form = FORMS["Q"]
    else:
        form = FORMS["R"]

    rows = []
    with workprec():
        pi2 = mp.pi ** 2
        for rho in rho_list:
            r = to_mpf(rho)
            if what == "m":
                value = pf_mean(form, r)
                if family == "P":
                    main = pi2 / (6 * m * r ** 2)
                else:
                    main = pi2 / (24 * r ** 2)
                scaled = (value - main) * r
            elif what == "s":
                value = pf_variance(form, r)
                if family == "P":
                    main = pi2 / (3 * m * r ** 3)
                else:
                    main = pi2 / (12 * r ** 3)
                scaled = (value - main) * r ** 2
            else:
                value = pf_log(form, r)
                if family == "P":
                    main = (pi2 / (6 * m * r)
                            + mp.log(mp.gamma(mpf(a) / m) / mp.sqrt(2 * mp.pi))
                            + (mpf(a) / m - mpf(1) / 2) * mp.log(m * r))
                elif family == "Q":
                    main = pi2 / (24 * r)
                else:
                    main = pi2 / (24 * r) - mp.log(2) / 2
                scaled = (value - main) / r
            rows.append(EMResidualRow(kind, r, value, main, value - main, scaled))
    return rows
