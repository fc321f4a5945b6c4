"""Exact truncated Laurent series in q**(1/D) with rational coefficients.

A QSeries stores coefficients for exponents vmin/D .. order/D on a fixed
grid of denominator D.  Every stored coefficient up to `order` is exactly
correct; asking for a coefficient beyond `order` raises instead of
returning a silent zero.  Coefficients are Python ints wherever possible
and fractions.Fraction otherwise; no floating point enters this module.

Multiplication uses Kronecker substitution (pack the coefficient list
into one big integer, multiply, unpack), with gmpy2 doing the big-integer
product when available.  A schoolbook path remains for small inputs and
serves as the reference in tests.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence, Union

try:
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _mpz = None

Rational = Union[int, Fraction]

__all__ = [
    "QSeries",
    "OrderExceededError",
    "NotInvertibleError",
    "dominates",
    "first_difference",
]


class OrderExceededError(ValueError):
    """A coefficient beyond the guaranteed order was requested."""


class NotInvertibleError(ValueError):
    """Laurent inversion of the zero series was attempted."""


def _norm(c: Rational) -> Rational:
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


# ---------------------------------------------------------------------------
# convolution kernels
# ---------------------------------------------------------------------------

_SCHOOLBOOK_CUTOFF = 64  # below this length Kronecker packing is not worth it


def _conv_schoolbook(a: Sequence, b: Sequence, nout: int) -> list:
    out = [0] * nout
    for i, ai in enumerate(a):
        if i >= nout:
            break
        if ai:
            lim = min(len(b), nout - i)
            for j in range(lim):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
    return out


def _pack(vals: Sequence[int], width_bytes: int) -> int:
    buf = bytearray(width_bytes * len(vals))
    for i, x in enumerate(vals):
        if x:
            nb = (x.bit_length() + 7) // 8
            buf[i * width_bytes : i * width_bytes + nb] = x.to_bytes(nb, "little")
    return int.from_bytes(buf, "little")


def _conv_kronecker(a: Sequence[int], b: Sequence[int], nout: int) -> list[int]:
    """Signed integer convolution via one (up to four) big-int products."""
    ap = [x if x > 0 else 0 for x in a]
    an = [-x if x < 0 else 0 for x in a]
    bp = [x if x > 0 else 0 for x in b]
    bn = [-x if x < 0 else 0 for x in b]

    maxa = max(max(ap, default=0), max(an, default=0))
    maxb = max(max(bp, default=0), max(bn, default=0))
    if maxa == 0 or maxb == 0:
        return [0] * nout
    width = maxa.bit_length() + maxb.bit_length() + min(len(a), len(b)).bit_length() + 1
    width_bytes = (width + 7) // 8

    def prod(x: Sequence[int], y: Sequence[int]) -> int:
        if not any(x) or not any(y):
            return 0
        px, py = _pack(x, width_bytes), _pack(y, width_bytes)
        if _mpz is not None:
            return int(_mpz(px) * _mpz(py))
        return px * py

    pos = prod(ap, bp) + prod(an, bn)
    neg = prod(ap, bn) + prod(an, bp)

    nbytes = width_bytes * (len(a) + len(b))
    rp = pos.to_bytes(nbytes, "little")
    rn = neg.to_bytes(nbytes, "little")
    out = []
    for i in range(nout):
        lo, hi = i * width_bytes, (i + 1) * width_bytes
        out.append(int.from_bytes(rp[lo:hi], "little") - int.from_bytes(rn[lo:hi], "little"))
    return out


def _split_content(coeffs: Sequence[Rational]) -> tuple[Fraction, list[int]]:
    """Write the list as content * primitive-integer-list (content may be 1)."""
    den = 1
    for c in coeffs:
        if isinstance(c, Fraction):
            den = lcm(den, c.denominator)
    ints = [int(c * den) if den > 1 else c for c in coeffs]
    if den == 1:
        return Fraction(1), list(ints)
    g = 0
    for c in ints:
        g = gcd(g, c)
        if g == 1:
            break
    if g > 1:
        ints = [c // g for c in ints]
    else:
        g = 1
    return Fraction(g, den), ints


def _conv(a: Sequence[Rational], b: Sequence[Rational], nout: int) -> list[Rational]:
    if not a or not b or nout <= 0:
        return [0] * max(nout, 0)
    a_int = all(type(x) is int for x in a)
    b_int = all(type(x) is int for x in b)
    if a_int and b_int:
        if min(len(a), len(b)) < _SCHOOLBOOK_CUTOFF or len(a) * len(b) < 4096:
            return _conv_schoolbook(a, b, nout)
        return _conv_kronecker(a, b, nout)
    ca, ia = _split_content(a) if not a_int else (Fraction(1), list(a))
    cb, ib = _split_content(b) if not b_int else (Fraction(1), list(b))
    c = ca * cb
    raw = _conv(ia, ib, nout)
    return [_norm(c * x) for x in raw]


# ---------------------------------------------------------------------------
# the series type
# ---------------------------------------------------------------------------


class QSeries:
    """Truncated Laurent series on the exponent grid k/denom."""

    __slots__ = ("denom", "vmin", "order", "coeffs")

    def __init__(self, denom: int, vmin: int, order: int, coeffs: Iterable[Rational]):
        if denom < 1:
            raise ValueError("grid denominator must be >= 1")
        coeffs = [_norm(Fraction(c) if not isinstance(c, (int, Fraction)) else c) for c in coeffs]
        if len(coeffs) != order - vmin + 1 and not (order < vmin and not coeffs):
            raise ValueError("coefficient count does not match vmin..order")
        # normalize leading zeros so vmin points at the first nonzero entry
        k = 0
        while k < len(coeffs) and coeffs[k] == 0:
            k += 1
        if k == len(coeffs):
            vmin, coeffs = order + 1, []
        elif k:
            vmin, coeffs = vmin + k, coeffs[k:]
        object.__setattr__(self, "denom", denom)
        object.__setattr__(self, "vmin", vmin)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", tuple(coeffs))

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("QSeries is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, order: int, denom: int = 1) -> "QSeries":
        return cls(denom, order + 1, order, [])

    @classmethod
    def constant(cls, value: Rational, order: int, denom: int = 1) -> "QSeries":
        if value == 0:
            return cls.zero(order, denom)
        if order < 0:
            raise ValueError("constant series needs order >= 0")
        return cls(denom, 0, order, [value] + [0] * order)

    @classmethod
    def one(cls, order: int, denom: int = 1) -> "QSeries":
        return cls.constant(1, order, denom)

    @classmethod
    def from_terms(cls, terms: dict, order: int, denom: int = 1) -> "QSeries":
        """Build from {grid index: coefficient}; indices beyond order are dropped."""
        keep = {k: v for k, v in terms.items() if k <= order and v != 0}
        if not keep:
            return cls.zero(order, denom)
        vmin = min(keep)
        coeffs = [0] * (order - vmin + 1)
        for k, v in keep.items():
            coeffs[k - vmin] = v
        return cls(denom, vmin, order, coeffs)

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def order_exponent(self) -> Fraction:
        return Fraction(self.order, self.denom)

    @property
    def vmin_exponent(self) -> Fraction:
        return Fraction(self.vmin, self.denom)

    def coeff_index(self, k: int) -> Rational:
        """Coefficient at grid index k (exponent k/denom)."""
        if k > self.order:
            raise OrderExceededError(
                f"order exceeded: index {k} beyond guaranteed order {self.order}"
            )
        if k < self.vmin:
            return 0
        return self.coeffs[k - self.vmin]

    def coeff(self, exponent: Rational) -> Rational:
        """Exact coefficient of q**exponent; errors off-grid or beyond order."""
        e = Fraction(exponent)
        idx = e * self.denom
        if idx.denominator != 1:
            raise ValueError(f"exponent {e} is off-grid for denominator {self.denom}")
        return self.coeff_index(int(idx))

    def terms(self):
        """Yield (exponent: Fraction, coefficient) for nonzero stored terms."""
        for i, c in enumerate(self.coeffs):
            if c:
                yield Fraction(self.vmin + i, self.denom), c

    # -- grid handling -----------------------------------------------------

    def rescale(self, new_denom: int) -> "QSeries":
        """Re-express on a finer grid; new_denom must be a multiple of denom."""
        if new_denom == self.denom:
            return self
        if new_denom % self.denom:
            raise ValueError("new denominator must be a multiple of the old one")
        f = new_denom // self.denom
        if self.is_zero:
            return QSeries.zero(self.order * f, new_denom)
        coeffs = [0] * ((self.order - self.vmin) * f + 1)
        for i, c in enumerate(self.coeffs):
            coeffs[i * f] = c
        return QSeries(new_denom, self.vmin * f, self.order * f, coeffs)

    @staticmethod
    def _common(a: "QSeries", b: "QSeries") -> tuple["QSeries", "QSeries"]:
        d = lcm(a.denom, b.denom)
        return a.rescale(d), b.rescale(d)

    def truncated(self, order: int) -> "QSeries":
        """Restrict the guarantee (and storage) to the given grid index."""
        if order >= self.order:
            return self
        if order < self.vmin:
            return QSeries.zero(order, self.denom)
        return QSeries(self.denom, self.vmin, order, self.coeffs[: order - self.vmin + 1])

    def project(self, new_denom: int) -> "QSeries":
        """Move to a coarser grid; every off-grid coefficient must vanish."""
        if self.denom % new_denom:
            raise ValueError("new denominator must divide the old one")
        f = self.denom // new_denom
        if f == 1:
            return self
        for e, c in self.terms():
            if (e * new_denom).denominator != 1:
                raise ValueError(f"off-grid coefficient {c} at exponent {e}")
        if self.is_zero:
            return QSeries.zero(self.order // f, new_denom)
        order = self.order // f
        vmin = -((-self.vmin) // f)  # ceil for negative vmin
        coeffs = [self.coeff_index(k * f) for k in range(vmin, order + 1)]
        return QSeries(new_denom, vmin, order, coeffs)

    # -- arithmetic --------------------------------------------------------

    def __neg__(self) -> "QSeries":
        if self.is_zero:
            return self
        return QSeries(self.denom, self.vmin, self.order, [-c for c in self.coeffs])

    def __add__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self
            return self._add_scalar(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b = QSeries._common(self, other)
        order = min(a.order, b.order)
        if a.is_zero:
            return b.truncated(order)
        if b.is_zero:
            return a.truncated(order)
        vmin = min(a.vmin, b.vmin)
        if vmin > order:
            return QSeries.zero(order, a.denom)
        coeffs = [0] * (order - vmin + 1)
        for i, c in enumerate(a.coeffs):
            k = a.vmin + i
            if k > order:
                break
            coeffs[k - vmin] = c
        for i, c in enumerate(b.coeffs):
            k = b.vmin + i
            if k > order:
                break
            coeffs[k - vmin] = _norm(coeffs[k - vmin] + c)
        return QSeries(a.denom, vmin, order, coeffs)

    def _add_scalar(self, value: Rational) -> "QSeries":
        # scalars are exact at every order, so the guarantee is unchanged
        if self.order < 0:
            raise OrderExceededError("order exceeded: constant term not guaranteed")
        vmin = min(self.vmin, 0)
        coeffs = [0] * (self.order - vmin + 1)
        for i, c in enumerate(self.coeffs):
            coeffs[self.vmin + i - vmin] = c
        coeffs[-vmin] = _norm(coeffs[-vmin] + value)
        return QSeries(self.denom, vmin, self.order, coeffs)

    __radd__ = __add__

    def __sub__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            return self._add_scalar(-other)
        if not isinstance(other, QSeries):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "QSeries":
        return (-self) + other

    def __mul__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return QSeries.zero(self.order, self.denom)
            if self.is_zero:
                return self
            return QSeries(self.denom, self.vmin, self.order,
                           [_norm(c * other) for c in self.coeffs])
        if not isinstance(other, QSeries):
            return NotImplemented
        a, b = QSeries._common(self, other)
        if a.is_zero or b.is_zero:
            if a.is_zero and b.is_zero:
                order = min(a.order + b.vmin, b.order + a.vmin)
            elif a.is_zero:
                order = a.order + b.vmin
            else:
                order = b.order + a.vmin
            return QSeries.zero(order, a.denom)
        order = min(a.order + b.vmin, b.order + a.vmin)
        vmin = a.vmin + b.vmin
        nout = order - vmin + 1
        coeffs = _conv(a.coeffs, b.coeffs, nout)
        return QSeries(a.denom, vmin, order, coeffs)

    __rmul__ = __mul__

    def shifted(self, delta: int) -> "QSeries":
        """Multiply by q**(delta/denom)."""
        if self.is_zero:
            return QSeries.zero(self.order + delta, self.denom)
        return QSeries(self.denom, self.vmin + delta, self.order + delta, self.coeffs)

    def invert(self) -> "QSeries":
        """Laurent inverse; exact through order - 2*vmin."""
        if self.is_zero:
            raise NotInvertibleError("not invertible: zero series")
        v = self.vmin
        prec = self.order - v  # number of correct terms past the valuation
        u = list(self.coeffs)
        lead = u[0]
        inv = _series_inverse(u, prec + 1, lead)
        return QSeries(self.denom, -v, self.order - 2 * v, inv)

    def __pow__(self, e: int) -> "QSeries":
        if not isinstance(e, int):
            raise TypeError("only integer powers are supported")
        prec = self.order - self.vmin if not self.is_zero else self.order
        if e == 0:
            return QSeries.one(max(prec, 0), self.denom)
        base = self
        if e < 0:
            base = self.invert()
            e = -e
        result = None
        acc = base
        while e:
            if e & 1:
                result = acc if result is None else result * acc
            e >>= 1
            if e:
                acc = acc * acc
        return result

    def substitute(self, num: int, den: int, sign: int = 1) -> "QSeries":
        """Map q -> sign * q**(num/den); only monomial substitutions exist."""
        if num < 1 or den < 1:
            raise ValueError("substitution exponent num/den must be positive")
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        g = gcd(num, self.denom * den)
        new_denom = self.denom * den // g
        step = num // g
        if self.is_zero:
            return QSeries.zero(self.order * step, new_denom)
        coeffs = [0] * ((self.order - self.vmin) * step + 1)
        for i, c in enumerate(self.coeffs):
            k = self.vmin + i
            coeffs[i * step] = c if (sign == 1 or k % 2 == 0) else -c
        return QSeries(new_denom, self.vmin * step, self.order * step, coeffs)

    # -- comparison and export ----------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.denom == other.denom and self.vmin == other.vmin
                and self.order == other.order and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.denom, self.vmin, self.order, self.coeffs))

    def __repr__(self) -> str:
        return f"QSeries(denom={self.denom}, vmin={self.vmin}, order={self.order}, {self.pretty(6)})"

    def pretty(self, max_terms: int = 12) -> str:
        parts = []
        for e, c in self.terms():
            if len(parts) >= max_terms:
                parts.append("...")
                break
            if e == 0:
                parts.append(f"{c}")
            else:
                exp = f"q^({e})" if (e.denominator != 1 or e < 0) else (
                    "q" if e == 1 else f"q^{e}")
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                parts.append(("-" if c < 0 else "") + mag + exp)
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def to_json_dict(self) -> dict:
        def enc(c: Rational) -> str:
            return str(c)  # Fractions render as "p/q", ints as decimal strings

        coeffs = [enc(self.coeff_index(k)) for k in range(self.vmin, self.order + 1)]
        return {"denom": self.denom, "vmin": self.vmin, "order": self.order, "coeffs": coeffs}

    @classmethod
    def from_json_dict(cls, d: dict) -> "QSeries":
        def dec(s: str) -> Rational:
            return Fraction(s) if "/" in s else int(s)

        return cls(d["denom"], d["vmin"], d["order"], [dec(s) for s in d["coeffs"]])


def _series_inverse(u: list, nterms: int, lead) -> list:
    """First nterms coefficients of 1/sum(u[i] t^i), u[0] = lead != 0.

    Newton doubling on top of the convolution kernels; coefficients of the
    inverse depend only on the prefix of u, so each doubling step is exact.
    """
    if isinstance(lead, int) and lead in (1, -1):
        inv0 = lead
    else:
        inv0 = _norm(Fraction(1, 1) / lead)
    x = [inv0]
    n = 1
    while n < nterms:
        n2 = min(2 * n, nterms)
        u_part = u[:n2] if len(u) >= n2 else list(u) + [0] * (n2 - len(u))
        t = _conv(x, u_part, n2)        # = 1 + O(t^n)
        t[0] = _norm(t[0] - 1)
        corr = _conv(x, t, n2)
        x = [_norm((x[i] if i < len(x) else 0) - corr[i]) for i in range(n2)]
        n = n2
    return x[:nterms]


# ---------------------------------------------------------------------------
# module-level helpers
# ---------------------------------------------------------------------------


def dominates(a: QSeries, b: QSeries, start: Rational = 0):
    """Check a_n <= b_n for every grid exponent >= start within both guarantees.

    Returns (True, None) or (False, first_violating_exponent).
    """
    x, y = QSeries._common(a, b)
    lo = Fraction(start) * x.denom
    k = int(lo) if lo.denominator == 1 else int(lo) + (lo > 0)
    hi = min(x.order, y.order)
    for i in range(k, hi + 1):
        if x.coeff_index(i) > y.coeff_index(i):
            return False, Fraction(i, x.denom)
    return True, None


def first_difference(a: QSeries, b: QSeries):
    """First exponent where the two series differ on the common guaranteed
    range, or None if they agree everywhere up to min(order)."""
    x, y = QSeries._common(a, b)
    hi = min(x.order, y.order)
    lo = min(x.vmin, y.vmin)
    for k in range(lo, hi + 1):
        if x.coeff_index(k) != y.coeff_index(k):
            return Fraction(k, x.denom)
    return None
