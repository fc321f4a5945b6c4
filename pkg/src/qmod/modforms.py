"""Builders for the classical q-expansions and exact verifiers for the
algebraic identities among them.

Every builder takes an integer `order` meaning "exact through q**order" and
returns an immutable QSeries on its natural grid: D=24 for eta, D=8 for the
theta functions, D=2 for the theta-quotient sums, D=1 for everything that
lives on integer exponents.

The Euler product prod(1-q^n) is generated from the generalized pentagonal
numbers; the naive factor-by-factor product is kept in the test suite as the
oracle for it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .qseries import QSeries, first_difference

__all__ = [
    "euler_product", "eta", "e4", "j", "theta", "j_via_theta",
    "h_series", "hstar_series", "h_branch",
    "eta_quotient", "hauptmodul", "j4_star",
    "verify_theta_identities", "verify_h_closed_forms", "verify_table1",
    "verify_phi_eta", "verify_j4_star", "verify_dominance",
    "CheckResult", "VerifyReport",
    "HAUPTMODUL_LEVELS", "TABLE1", "PHI_ETA", "SERIES_BUILDERS", "series_by_name",
]


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class VerifyReport:
    suite: str
    checks: list = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(CheckResult(name, bool(ok), detail))

    def add_equality(self, name: str, a: QSeries, b: QSeries, through=None):
        """Record exact agreement of two series; detail names the first bad
        exponent on a mismatch."""
        x, y = a, b
        if through is not None:
            x = x.truncated(int(Fraction(through) * x.denom))
            y = y.truncated(int(Fraction(through) * y.denom))
        d = first_difference(x, y)
        self.checks.append(CheckResult(
            name, d is None, "" if d is None else f"first mismatch at exponent {d}"))

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def first_failure(self):
        for c in self.checks:
            if not c.ok:
                return c
        return None

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "ok": self.ok,
            "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.checks],
        }


# ---------------------------------------------------------------------------
# core builders
# ---------------------------------------------------------------------------


def _round_up(order: int, step: int = 64) -> int:
    return max(step, -(-order // step) * step)


@lru_cache(maxsize=None)
def _euler_cached(order: int, scale: int) -> QSeries:
    terms = {0: 1}
    k = 1
    while True:
        hit = False
        for g in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            e = scale * g
            if e <= order:
                terms[e] = -1 if k % 2 else 1
                hit = True
        if not hit:
            break
        k += 1
    return QSeries.from_terms(terms, order, 1)


def euler_product(order: int, scale: int = 1) -> QSeries:
    """prod_{n>=1} (1 - q^(scale*n)) exact through q**order (pentagonal form)."""
    if order < 0:
        raise ValueError("order must be >= 0")
    return _euler_cached(_round_up(order), scale).truncated(order)


@lru_cache(maxsize=None)
def _eta_cached(order: int) -> QSeries:
    e = euler_product(order).rescale(24)
    return e.shifted(1).truncated(24 * order)


def eta(order: int) -> QSeries:
    """Dedekind eta: q^(1/24) * prod(1-q^n), on grid D=24."""
    return _eta_cached(_round_up(order)).truncated(24 * order)


def _sigma3_table(order: int) -> list[int]:
    s = [0] * (order + 1)
    for d in range(1, order + 1):
        cube = d * d * d
        for m in range(d, order + 1, d):
            s[m] += cube
    return s


@lru_cache(maxsize=None)
def _e4_cached(order: int) -> QSeries:
    s = _sigma3_table(order)
    return QSeries(1, 0, order, [1] + [240 * s[n] for n in range(1, order + 1)])


def e4(order: int) -> QSeries:
    """Eisenstein series of weight 4: 1 + 240 sum sigma_3(n) q^n."""
    return _e4_cached(_round_up(order)).truncated(order)


@lru_cache(maxsize=None)
def _eta24_inv_cached(order: int) -> QSeries:
    # eta^24 = q * E(q)^24 lives on the integer grid already
    e24 = euler_product(order + 1) ** 24
    return e24.shifted(1).invert().truncated(order)


@lru_cache(maxsize=None)
def _j_cached(order: int) -> QSeries:
    return (e4(order + 1) ** 3 * _eta24_inv_cached(order + 1)).truncated(order)


def j(order: int) -> QSeries:
    """The modular j-function via E4^3 / eta^24, grid D=1, pole 1/q."""
    return _j_cached(_round_up(order)).truncated(order)


# -- theta functions ---------------------------------------------------------


def _sparse_factor_product(order8: int, factors) -> QSeries:
    """Product of binomials (1 + c*q^(k/8)) given as (grid_index, coeff) pairs."""
    acc = QSeries.one(order8, 8)
    for k, c in factors:
        if k > order8:
            continue
        acc = (acc + (acc * c).shifted(k)).truncated(order8)
    return acc


@lru_cache(maxsize=None)
def _theta_cached(which: int, order: int, mode: str) -> QSeries:
    order8 = 8 * order
    if mode == "sum":
        terms = {}
        if which == 0:
            terms[0] = 1
            n = 1
            while 4 * n * n <= order8:
                terms[4 * n * n] = -2 if n % 2 else 2
                n += 1
        elif which == 2:
            n = 0
            while (2 * n + 1) ** 2 <= order8:
                terms[(2 * n + 1) ** 2] = 2
                n += 1
        elif which == 3:
            terms[0] = 1
            n = 1
            while 4 * n * n <= order8:
                terms[4 * n * n] = 2
                n += 1
        else:
            raise ValueError("theta index must be 0, 2 or 3")
        return QSeries.from_terms(terms, order8, 8)
    if mode != "product":
        raise ValueError("mode must be 'sum' or 'product'")
    nmax = order + 1
    if which == 0:
        fac = [(8 * n, -1) for n in range(1, nmax + 1)]
        fac += [(8 * n - 4, -1) for n in range(1, nmax + 1) for _ in range(2)]
        return _sparse_factor_product(order8, fac)
    if which == 2:
        fac = [(8 * n, -1) for n in range(1, nmax + 1)]
        fac += [(8 * n, 1) for n in range(1, nmax + 1) for _ in range(2)]
        prod = _sparse_factor_product(order8 - 1, fac)
        return (prod * 2).shifted(1)
    if which == 3:
        fac = [(8 * n, -1) for n in range(1, nmax + 1)]
        fac += [(8 * n - 4, 1) for n in range(1, nmax + 1) for _ in range(2)]
        return _sparse_factor_product(order8, fac)
    raise ValueError("theta index must be 0, 2 or 3")


def theta(which: int, order: int, mode: str = "sum") -> QSeries:
    """Jacobi theta series on grid D=8.

    which=0: sum (-1)^n q^(n^2/2); which=2: sum q^((n+1/2)^2/2);
    which=3: sum q^(n^2/2).  Both construction modes agree exactly.
    """
    return _theta_cached(which, _round_up(order), mode).truncated(8 * order)


@lru_cache(maxsize=None)
def _j_via_theta_cached(order: int) -> QSeries:
    pad = order + 3
    t0, t2, t3 = (theta(w, pad) for w in (0, 2, 3))
    p8 = [t0 ** 8, t2 ** 8, t3 ** 8]
    s = p8[0] + p8[1] + p8[2]
    sinv = p8[0].invert() + p8[1].invert() + p8[2].invert()
    return (128 * s * sinv).project(1).truncated(order)


def j_via_theta(order: int) -> QSeries:
    """j as 2^7 (θ0^8+θ2^8+θ3^8)(θ0^-8+θ2^-8+θ3^-8), reduced to grid D=1."""
    return _j_via_theta_cached(_round_up(order)).truncated(order)


# -- the three theta-quotient pieces of j -------------------------------------


@lru_cache(maxsize=None)
def _h_cached(i: int, order: int) -> QSeries:
    pad = order + 3
    t0, t2, t3 = (theta(w, pad) for w in (0, 2, 3))
    if i == 1:
        r = (t0 * t2.invert()) ** 8 + (t3 * t2.invert()) ** 8
        return (128 * r).project(1).truncated(order)
    if i == 2:
        r = (t0 * t3.invert()) ** 8 + (t3 * t0.invert()) ** 8
        return (128 * r).project(2).truncated(2 * order)
    if i == 3:
        r = (t2 * t3.invert()) ** 8 + (t2 * t0.invert()) ** 8
        return (128 * r).project(2).truncated(2 * order)
    raise ValueError("H index must be 1, 2 or 3")


def h_series(i: int, order: int) -> QSeries:
    """H1, H2, H3 with j = 2^7*3 + H1 + H2 + H3; H1 on D=1, H2/H3 on D=2."""
    s = _h_cached(i, _round_up(order))
    return s.truncated(order if i == 1 else 2 * order)


@lru_cache(maxsize=None)
def _hstar_cached(i: int, order: int) -> QSeries:
    e1 = euler_product(order)
    if i == 1:
        return (e1 ** 24).invert().truncated(order)
    if i == 2:
        e2, e4_ = euler_product(order, 2), euler_product(order, 4)
        den = (e1 ** 32) * (e4_ ** 16)
        return (128 * (e2 ** 48) * den.invert()).truncated(order)
    if i == 3:
        e4_ = euler_product(order, 4)
        num = (e4_ ** 16) * (e1 ** 16).invert()
        return (32768 * num).shifted(2).truncated(order)
    raise ValueError("H* index must be 1, 2 or 3")


def hstar_series(i: int, order: int) -> QSeries:
    """The positive-coefficient majorants on the t-grid (t-order `order`):

    H1* = prod (1-t^n)^-24
    H2* = 2^7  prod ((1+t^(2n-1))/(1-t^(2n-1)))^16
    H3* = 2^15 t^2 prod ((1+t^(2n))/(1-t^(2n-1)))^16
    """
    return _hstar_cached(i, _round_up(order)).truncated(order)


def h_branch(i: int, sign: int, order: int) -> QSeries:
    """One branch of the half-integer product form of H2 or H3: the series
    Hi*(sign * q^(1/2)) on grid D=2, exact through q**order."""
    if i not in (2, 3):
        raise ValueError("branches exist for H2 and H3 only")
    return hstar_series(i, 2 * order).substitute(1, 2, sign)


# -- eta quotients and Hauptmoduln --------------------------------------------


def eta_quotient(factors, order: int) -> QSeries:
    """prod_m eta(m*tau)^(e_m) for factors [(m, e), ...], exact through q**order.

    The fractional prefactor q^(sum(m*e)/24) must land on an integer exponent;
    the Table 1 and j4* quotients all do.
    """
    s24 = sum(m * e for m, e in factors)
    if s24 % 24:
        raise ValueError(f"leading exponent {s24}/24 is off the integer grid")
    shift = s24 // 24
    pad = order + max(0, -shift) + 1
    num = QSeries.one(pad, 1)
    den = QSeries.one(pad, 1)
    for m, e in factors:
        base = euler_product(pad, m)
        if e > 0:
            num = (num * base ** e).truncated(pad)
        elif e < 0:
            den = (den * base ** (-e)).truncated(pad)
    return (num * den.invert()).shifted(shift).truncated(order)


HAUPTMODUL_LEVELS = (2, 3, 4, 5, 7, 9, 13, 25)

_ETA_POWER = {2: 24, 3: 12, 4: 8, 5: 6, 7: 4, 9: 3, 13: 2, 25: 1}


@lru_cache(maxsize=None)
def _hauptmodul_cached(n: int, order: int) -> QSeries:
    a = _ETA_POWER[n]
    return eta_quotient(((1, a), (n, -a)), order)


def hauptmodul(n: int, order: int) -> QSeries:
    """j_N = eta(tau)^a / eta(N*tau)^a with a = 24/(number of divisors step);
    simple pole 1/q with residue 1."""
    if n not in _ETA_POWER:
        raise ValueError(f"unsupported level {n}; supported: {sorted(_ETA_POWER)}")
    return _hauptmodul_cached(n, _round_up(order)).truncated(order)


@lru_cache(maxsize=None)
def _j4_star_cached(order: int) -> QSeries:
    a = eta_quotient(((8, 4), (2, -4)), order)
    b = eta_quotient(((2, 4), (8, -4)), order)
    return (16 * a - b).truncated(order)


def j4_star(order: int) -> QSeries:
    """16 eta(8t)^4/eta(2t)^4 - eta(2t)^4/eta(8t)^4; its odd-exponent
    coefficients are |d_n^(4)| of j_4."""
    return _j4_star_cached(_round_up(order)).truncated(order)


# ---------------------------------------------------------------------------
# Table 1 / Table 2 polynomial data
# ---------------------------------------------------------------------------

# j expressed through each Hauptmodul: lists of (ascending coeffs, power)
# for numerator and denominator.
TABLE1 = {
    2: ((((256, 1), 3),), (((0, 1), 2),)),
    3: ((((27, 1), 1), ((243, 1), 3)), (((0, 1), 3),)),
    4: ((((4096, 256, 1), 3),), (((0, 1), 4), ((16, 1), 1))),
    5: ((((3125, 250, 1), 3),), (((0, 1), 5),)),
    7: ((((49, 13, 1), 1), ((2401, 245, 1), 3)), (((0, 1), 7),)),
    9: ((((9, 1), 3), ((6561, 2187, 243, 1), 3)), (((0, 1), 9), ((27, 9, 1), 1))),
    13: ((((13, 5, 1), 1), ((28561, 15379, 3380, 247, 1), 3)), (((0, 1), 13),)),
    25: ((((1953125, 3906250, 4296875, 3125000, 1640625, 631250,
            178125, 35000, 4375, 250, 1), 3),),
         (((0, 1), 25), ((25, 25, 15, 5, 1), 1))),
}

# 1/Phi_N(j_N) as an eta quotient: N -> (ascending poly coeffs, eta factors)
PHI_ETA = {
    4: ((16, 1), ((1, 8), (4, 16), (2, -24))),
    9: ((27, 9, 1), ((1, 3), (9, 9), (3, -12))),
    25: ((25, 25, 15, 5, 1), ((1, 1), (25, 5), (5, -6))),
}


def poly_eval(coeffs, x: QSeries) -> QSeries:
    """Evaluate an integer polynomial (ascending coefficients) at a series."""
    acc = QSeries.constant(coeffs[-1], x.order - x.vmin, x.denom) if coeffs[-1] \
        else QSeries.zero(x.order - x.vmin, x.denom)
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _rational_expr(factors_num, factors_den, x: QSeries) -> QSeries:
    num = QSeries.one(x.order - x.vmin, x.denom)
    for coeffs, power in factors_num:
        num = num * poly_eval(coeffs, x) ** power
    den = QSeries.one(x.order - x.vmin, x.denom)
    for coeffs, power in factors_den:
        den = den * poly_eval(coeffs, x) ** power
    return num * den.invert()


# ---------------------------------------------------------------------------
# verifiers
# ---------------------------------------------------------------------------


def verify_theta_identities(order: int, seed: int = 0, samples: int = 100) -> VerifyReport:
    """The theta-function identity suite, all exact:

    eta^3 = (1/2) θ0 θ2 θ3;  θ3^4 = θ0^4 + θ2^4;  j equals the θ formula;
    and the quartic polynomial factorization on random integer triples.
    """
    rep = VerifyReport("theta")
    pad = order + 3
    t0, t2, t3 = (theta(w, pad) for w in (0, 2, 3))

    for w, s in ((0, t0), (2, t2), (3, t3)):
        rep.add_equality(f"theta{w} sum vs product",
                         s, theta(w, pad, "product"), through=order)

    lhs = (eta(pad) ** 3).project(8)
    rhs = t0 * t2 * t3 * Fraction(1, 2)
    rep.add_equality("eta^3 = (1/2) theta0 theta2 theta3", lhs, rhs, through=order)

    rep.add_equality("theta3^4 = theta0^4 + theta2^4",
                     t3 ** 4, t0 ** 4 + t2 ** 4, through=order)

    rep.add_equality("j = 2^7 (sum θ^8)(sum θ^-8)",
                     j(order), j_via_theta(order), through=order)

    rng = random.Random(seed)
    bad = None
    for _ in range(samples):
        x, y, z = (rng.randint(-99, 99) for _ in range(3))
        lhs_v = x**4 + y**4 + z**4 - 2 * (x*x*y*y + y*y*z*z + z*z*x*x)
        rhs_v = (x + y + z) * (x + y - z) * (x - y + z) * (x - y - z)
        if lhs_v != rhs_v:
            bad = (x, y, z)
            break
    rep.add(f"quartic factorization on {samples} random triples", bad is None,
            "" if bad is None else f"mismatch at {bad}")
    return rep


def verify_h_closed_forms(order: int) -> VerifyReport:
    """H1 closed form, the half-integer branch sums for H2/H3, and the
    decomposition 2^7*3 + H1 + H2 + H3 = j, all exact."""
    rep = VerifyReport("hforms")
    h1, h2, h3 = (h_series(i, order) for i in (1, 2, 3))

    e1, e2 = euler_product(order + 1), euler_product(order + 1, 2)
    inv_part = ((e1 ** 24) * (e2 ** 24).invert()).shifted(-1)  # q^-1 prod (1+q^n)^-24
    rep.add_equality("H1 = 2^7 + q^-1 prod(1+q^n)^-24",
                     h1, inv_part + 128, through=order)

    for i, h in ((2, h2), (3, h3)):
        minus = h_branch(i, -1, order)
        plus = h_branch(i, 1, order)
        rep.add_equality(f"H{i} = branch(-q^(1/2)) + branch(+q^(1/2))",
                         h, minus + plus, through=order)
        total = minus + plus
        odd = [e for e, c in total.terms() if e.denominator == 2 and c]
        rep.add(f"H{i} branch sum kills half-integer exponents", not odd,
                "" if not odd else f"survivor at exponent {odd[0]}")

    assembled = h1 + h2 + h3 + 384
    rep.add_equality("2^7*3 + H1 + H2 + H3 = j", assembled, j(order), through=order)
    return rep


def verify_table1(n: int, order: int) -> VerifyReport:
    """Evaluate the Table 1 rational expression at j_N and compare with j."""
    if n not in TABLE1:
        raise ValueError(f"unsupported level {n}")
    rep = VerifyReport(f"table1[{n}]")
    pad = order + 40
    jn = hauptmodul(n, pad)
    expr = _rational_expr(*TABLE1[n], jn)
    rep.add_equality(f"j = Table1 expression in j_{n}", expr, j(order), through=order)
    if n == 2:
        j2 = jn
        j2inv = j2.invert()
        rearr = j2 + 768 + (3 * 65536) * j2inv + 16777216 * (j2inv * j2inv)
        rep.add_equality("j = j_2 + 3*2^8 + 3*2^16/j_2 + 2^24/j_2^2",
                         rearr, j(order), through=order)
    return rep


def verify_phi_eta(n: int, order: int) -> VerifyReport:
    """1/Phi_N(j_N) equals its Table 2 eta quotient, exactly."""
    if n not in PHI_ETA:
        raise ValueError(f"no Phi identity at level {n}")
    rep = VerifyReport(f"phi[{n}]")
    coeffs, factors = PHI_ETA[n]
    jn = hauptmodul(n, order + 10)
    lhs = poly_eval(coeffs, jn).invert()
    rhs = eta_quotient(factors, order)
    rep.add_equality(f"1/Phi_{n}(j_{n}) = eta quotient", lhs, rhs, through=order)
    return rep


def verify_j4_star(order: int) -> VerifyReport:
    """j4 is supported on 1/q, the constant and odd exponents, and the
    odd-exponent coefficients of j4* are |d_n^(4)|."""
    rep = VerifyReport("j4star")
    j4 = hauptmodul(4, order)
    j4s = j4_star(order)

    bad_even = [e for e, c in j4.terms() if e >= 1 and e.numerator % 2 == 0 and c]
    rep.add("j_4 vanishes at positive even exponents", not bad_even,
            "" if not bad_even else f"nonzero at exponent {bad_even[0]}")

    bad_star = [e for e, c in j4s.terms() if e >= 0 and e.numerator % 2 == 0 and c]
    rep.add("j_4* vanishes at nonnegative even exponents", not bad_star,
            "" if not bad_star else f"nonzero at exponent {bad_star[0]}")

    mis = None
    for k in range(1, order + 1, 2):
        if j4s.coeff(k) != abs(j4.coeff(k)):
            mis = k
            break
    rep.add("coeff(j_4*, 2n-1) = |d_n^(4)|", mis is None,
            "" if mis is None else f"first mismatch at exponent {mis}")
    rep.add("leading terms", j4.coeff(-1) == 1 and j4s.coeff(-1) == -1
            and j4.coeff(0) == -8 and j4s.coeff(0) == 0)
    return rep


def verify_dominance(order: int) -> VerifyReport:
    """The coefficientwise-order facts the asymptotic arguments rest on."""
    from .qseries import dominates
    rep = VerifyReport("dominance")
    e1, e2 = euler_product(order + 1), euler_product(order + 1, 2)

    lhs = ((e1 ** 24) * (e2 ** 24).invert()).shifted(-1)   # q^-1 prod(1+q^n)^-24
    rhs = (e1 ** 24).invert().shifted(-1)                  # q^-1 prod(1-q^n)^-24
    ok, bad = dominates(lhs.truncated(order), rhs.truncated(order), 0)
    rep.add("q^-1 prod(1+q^n)^-24 << q^-1 prod(1-q^n)^-24 from exponent 0", ok,
            "" if ok else f"violated at exponent {bad}")

    # -q^-1 prod(1+q^(2n-1))^24 has no positive coefficient at all
    e4_ = euler_product(order + 1, 4)
    q24 = (e2 ** 48) * ((e1 ** 24) * (e4_ ** 24)).invert()
    j2star = q24.shifted(-1)
    ok2, bad2 = dominates(-j2star.truncated(order), QSeries.zero(order, 1), -1)
    rep.add("-q^-1 prod(1+q^(2n-1))^24 << 0", ok2,
            "" if ok2 else f"violated at exponent {bad2}")

    h1 = h_series(1, order)
    alt_ok = all(((-1) ** (n - 1)) * h1.coeff(n) > 0 for n in range(2, order + 1))
    rep.add("(-1)^(n-1) h_{1,n} > 0 for 2 <= n <= order", alt_ok)
    return rep


# ---------------------------------------------------------------------------
# name registry for the CLI and demos
# ---------------------------------------------------------------------------

SERIES_BUILDERS = {
    "eta": eta,
    "e4": e4,
    "j": j,
    "theta0": lambda order: theta(0, order),
    "theta2": lambda order: theta(2, order),
    "theta3": lambda order: theta(3, order),
    "H1": lambda order: h_series(1, order),
    "H2": lambda order: h_series(2, order),
    "H3": lambda order: h_series(3, order),
    "j4star": j4_star,
}
for _n in HAUPTMODUL_LEVELS:
    SERIES_BUILDERS[f"j{_n}"] = (lambda n: lambda order: hauptmodul(n, order))(_n)


def series_by_name(name: str, order: int) -> QSeries:
    try:
        builder = SERIES_BUILDERS[name]
    except KeyError:
        raise KeyError(
            f"unknown series {name!r}; available: {', '.join(sorted(SERIES_BUILDERS))}"
        ) from None
    return builder(order)
