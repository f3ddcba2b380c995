"""Exact arithmetic over F_q: polynomials, rational functions, truncated
Laurent series in 1/Y, quadratic irrationals and their continued fractions.

Conventions.  The valuation is the one at infinity: v(P/Q) = deg Q - deg P,
so v(Y) = -1 and the uniformiser is 1/Y.  A Laurent series is stored as a
window of known coefficients starting at its valuation; extending precision
never rewrites previously reported coefficients.
"""

from fractions import Fraction
import math

from .errors import (
    CharTwoError,
    NotIrrationalError,
    NotSplitError,
    PrecisionCapError,
    PrecisionError,
    TooLargeError,
)

PREC_CAP = 256
MAX_Q = 101

_SMALL_PRIMES = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                 59, 61, 67, 71, 73, 79, 83, 89, 97, 101}


def _check_q(q):
    if q not in _SMALL_PRIMES:
        raise ValueError(f"q must be a prime <= {MAX_Q}, got {q}")


def sqrt_mod(a, q):
    """Square root of a in F_q by exhaustive search, or None."""
    _check_q(q)
    a %= q
    for r in range(q):
        if r * r % q == a:
            return r
    return None


class FqPoly:
    """Polynomial over F_q, little-endian coefficient tuple, no leading zero."""

    __slots__ = ("q", "coeffs")

    def __init__(self, q, coeffs=()):
        _check_q(q)
        c = [x % q for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.q = q
        self.coeffs = tuple(c)

    @classmethod
    def zero(cls, q):
        return cls(q, ())

    @classmethod
    def one(cls, q):
        return cls(q, (1,))

    @classmethod
    def const(cls, q, a):
        return cls(q, (a,))

    @classmethod
    def x(cls, q):
        """The indeterminate Y."""
        return cls(q, (0, 1))

    @classmethod
    def monomial(cls, q, a, k):
        return cls(q, (0,) * k + (a,))

    def is_zero(self):
        return not self.coeffs

    @property
    def degree(self):
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lc(self):
        if not self.coeffs:
            return 0
        return self.coeffs[-1]

    def is_monic(self):
        return self.lc == 1

    def is_constant(self):
        return len(self.coeffs) <= 1

    def monic(self):
        if self.is_zero():
            return self
        return self * pow(self.lc, -1, self.q)

    def __hash__(self):
        return hash((self.q, self.coeffs))

    def __eq__(self, other):
        if isinstance(other, int):
            other = FqPoly.const(self.q, other)
        if not isinstance(other, FqPoly):
            return NotImplemented
        return self.q == other.q and self.coeffs == other.coeffs

    def _coerce(self, other):
        if isinstance(other, int):
            return FqPoly.const(self.q, other)
        if isinstance(other, FqPoly):
            if other.q != self.q:
                raise ValueError("mixed characteristics")
            return other
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] = (out[i] + x) % self.q
        return FqPoly(self.q, out)

    __radd__ = __add__

    def __neg__(self):
        return FqPoly(self.q, [-x for x in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return FqPoly.zero(self.q)
        a, b = self.coeffs, other.coeffs
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return FqPoly(self.q, out)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = self.q
        rem = list(self.coeffs)
        db = other.degree
        inv_lc = pow(other.lc, -1, q)
        quo = [0] * max(0, len(rem) - db)
        while len(rem) - 1 >= db and rem:
            if rem[-1] == 0:
                rem.pop()
                continue
            k = len(rem) - 1 - db
            c = rem[-1] * inv_lc % q
            quo[k] = c
            for j, y in enumerate(other.coeffs):
                rem[k + j] = (rem[k + j] - c * y) % q
            rem.pop()
        return FqPoly(q, quo), FqPoly(q, rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, n):
        out = FqPoly.one(self.q)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def gcd(self, other):
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def __call__(self, a):
        """Evaluate at a in F_q."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * a + c) % self.q
        return acc

    def derivative(self):
        return FqPoly(self.q, [i * c for i, c in enumerate(self.coeffs)][1:])

    def __repr__(self):
        return f"FqPoly(q={self.q}, {self})"

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append("Y" if c == 1 else f"{c}Y")
            else:
                terms.append(f"Y^{k}" if c == 1 else f"{c}Y^{k}")
        return "+".join(terms)

    def to_list(self):
        """Little-endian coefficient list (serialization form)."""
        return list(self.coeffs)


def all_polys(q, degree):
    """All polynomials over F_q of exact degree ``degree`` (monic and not)."""
    for lead in range(1, q):
        for tail in range(q ** degree):
            coeffs = []
            t = tail
            for _ in range(degree):
                coeffs.append(t % q)
                t //= q
            coeffs.append(lead)
            yield FqPoly(q, coeffs)


def monic_polys(q, degree):
    for tail in range(q ** degree):
        coeffs = []
        t = tail
        for _ in range(degree):
            coeffs.append(t % q)
            t //= q
        coeffs.append(1)
        yield FqPoly(q, coeffs)


_IRRED_CACHE = {}


def monic_irreducibles(q, max_degree):
    """Monic irreducible polynomials of degree <= max_degree, by trial division."""
    known = _IRRED_CACHE.setdefault(q, [])
    have = max((p.degree for p in known), default=0)
    for d in range(have + 1, max_degree + 1):
        for f in monic_polys(q, d):
            if not any(f % p == 0 for p in known if 2 * p.degree <= d):
                known.append(f)
    return [p for p in known if p.degree <= max_degree]


_FACTOR_CACHE = {}


def factor(f):
    """Factor a nonzero polynomial into monic irreducibles: dict {p: mult}."""
    if f.is_zero():
        raise ValueError("cannot factor 0")
    key = (f.q, f.monic().coeffs)
    hit = _FACTOR_CACHE.get(key)
    if hit is not None:
        return dict(hit)
    g = f.monic()
    out = {}
    d = 1
    while g.degree > 0:
        if 2 * d > g.degree:
            out[g] = out.get(g, 0) + 1
            break
        for p in monic_irreducibles(f.q, d):
            if p.degree != d:
                continue
            while g % p == 0:
                out[p] = out.get(p, 0) + 1
                g = g // p
        d += 1
    _FACTOR_CACHE[key] = dict(out)
    return out


def is_poly_square(f):
    """True iff f is a square in F_q[Y] (hence in F_q(Y) for polynomials)."""
    if f.is_zero():
        return True
    if sqrt_mod(f.lc, f.q) is None:
        return False
    return all(m % 2 == 0 for m in factor(f).values())


def euler_phi(f):
    """|(F_q[Y]/f)^x| for nonzero f; invariant under scalar multiples."""
    if f.is_zero():
        raise ValueError("euler_phi needs a nonzero polynomial")
    if f.degree == 0:
        return 1
    q = f.q
    out = 1
    for p, m in factor(f).items():
        n = q ** p.degree
        out *= n ** (m - 1) * (n - 1)
    return out


def monic_phi_sum(q, n):
    """Sum of euler_phi over monic polynomials of exact degree n (enumerated)."""
    return sum(euler_phi(f) for f in monic_polys(q, n))


def mertens_sum(q, n, budget=10 ** 7):
    """Sum of euler_phi over all nonzero f with 0 < deg f <= n.

    Direct enumeration over monic polynomials (each has q-1 scalar multiples
    with equal phi); equals q(q-1)(q^{2n}-1)/(q+1) exactly.
    """
    _check_q(q)
    if n < 1:
        raise ValueError("n must be >= 1")
    if q ** (n + 1) > budget:
        raise TooLargeError(f"enumeration budget exceeded: q^(n+1)={q ** (n + 1)}")
    return (q - 1) * sum(monic_phi_sum(q, d) for d in range(1, n + 1))


def mertens_closed_form(q, n):
    total = q * (q - 1) * (q ** (2 * n) - 1)
    assert total % (q + 1) == 0
    return total // (q + 1)


class RatFunc:
    """Reduced fraction of FqPoly with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if den is None:
            den = FqPoly.one(num.q)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = num.gcd(den)
        if not g.is_zero() and g.degree > 0:
            num, den = num // g, den // g
        inv = pow(den.lc, -1, num.q)
        self.num = num * inv
        self.den = den * inv

    @classmethod
    def const(cls, q, a):
        return cls(FqPoly.const(q, a))

    @classmethod
    def x(cls, q):
        return cls(FqPoly.x(q))

    @property
    def q(self):
        return self.num.q

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.degree == 0

    def valuation(self):
        """v_infinity = deg den - deg num; +infinity for 0."""
        if self.is_zero():
            return math.inf
        return self.den.degree - self.num.degree

    def abs_v(self):
        """|x|_v = q^{-v} as an exact Fraction."""
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.q) ** (-self.valuation())

    def _coerce(self, other):
        if isinstance(other, int):
            return RatFunc.const(self.q, other)
        if isinstance(other, FqPoly):
            return RatFunc(other)
        if isinstance(other, RatFunc):
            return other
        return None

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other / self

    def inverse(self):
        return RatFunc(self.den, self.num)

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num})/({self.den})"


class LaurentSeries:
    """Truncated element of F_q((1/Y)) with exact valuation.

    ``coeffs[i]`` is the coefficient of Y^{-(val+i)}; the first coefficient
    is nonzero unless the series is exactly zero (val None, empty coeffs).
    ``source`` (RatFunc or QuadIrr), when present, allows re-expansion at
    higher precision.
    """

    __slots__ = ("q", "val", "coeffs", "source")

    def __init__(self, q, val, coeffs, source=None):
        _check_q(q)
        c = [x % q for x in coeffs]
        # normalize: leading zeros shift the valuation
        while c and c[0] == 0:
            c.pop(0)
            val += 1
        if not c:
            if source is None or not _source_is_zero(source):
                raise PrecisionError("all known coefficients vanish")
            val = None
        self.q = q
        self.val = val
        self.coeffs = tuple(c)
        self.source = source

    @classmethod
    def exact_zero(cls, q):
        s = object.__new__(cls)
        s.q, s.val, s.coeffs, s.source = q, None, (), RatFunc.const(q, 0)
        return s

    def is_zero(self):
        return self.val is None

    @property
    def prec(self):
        return len(self.coeffs)

    def valuation(self):
        return math.inf if self.is_zero() else self.val

    def abs_v(self):
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.q) ** (-self.val)

    def coefficient(self, k):
        """Coefficient of Y^{-k}; raises if k beyond the known window."""
        if self.is_zero():
            return 0
        if k < self.val:
            return 0
        if k >= self.val + self.prec:
            raise PrecisionError(f"coefficient {k} beyond known precision")
        return self.coeffs[k - self.val]

    def extend(self, prec):
        """Re-expand the source at precision >= prec."""
        if self.is_zero():
            return self
        if self.prec >= prec:
            return self
        if self.source is None:
            raise PrecisionError("series has no exact source to extend")
        return laurent_expand(self.source, prec)

    def _binop_prec(self, other):
        if other.q != self.q:
            raise ValueError("mixed characteristics")

    def __add__(self, other):
        self._binop_prec(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        val = min(self.val, other.val)
        # known window: positions strictly below both unknown frontiers
        hi = min(self.val + self.prec, other.val + other.prec)
        n = hi - val
        if n <= 0:
            raise PrecisionError("no overlapping known window")
        out = [0] * n
        for i in range(n):
            k = val + i
            if self.val <= k < self.val + self.prec:
                out[i] += self.coeffs[k - self.val]
            if other.val <= k < other.val + other.prec:
                out[i] += other.coeffs[k - other.val]
        return LaurentSeries(self.q, val, out)

    def __neg__(self):
        if self.is_zero():
            return self
        return LaurentSeries(self.q, self.val, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._binop_prec(other)
        if self.is_zero() or other.is_zero():
            return LaurentSeries.exact_zero(self.q)
        n = min(self.prec, other.prec)
        out = [0] * n
        for i, x in enumerate(self.coeffs[:n]):
            if x:
                for j, y in enumerate(other.coeffs[:n - i]):
                    out[i + j] += x * y
        return LaurentSeries(self.q, self.val + other.val, out)

    def scalar_mul(self, a):
        if self.is_zero() or a % self.q == 0:
            return LaurentSeries.exact_zero(self.q)
        return LaurentSeries(self.q, self.val, [a * c for c in self.coeffs])

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError
        q, n = self.q, self.prec
        a0inv = pow(self.coeffs[0], -1, q)
        # invert the unit part 1 + u with u = tail/lead
        inv = [a0inv] + [0] * (n - 1)
        for k in range(1, n):
            s = 0
            for j in range(1, k + 1):
                if j < len(self.coeffs):
                    s += self.coeffs[j] * inv[k - j]
            inv[k] = (-a0inv * s) % q
        return LaurentSeries(q, -self.val, inv)

    def __truediv__(self, other):
        return self * other.inverse()

    def sqrt(self):
        """Square root; requires q odd, even valuation, square leading coeff."""
        if self.is_zero():
            return self
        q = self.q
        if q == 2:
            raise CharTwoError("square roots need odd characteristic")
        if self.val % 2 != 0:
            raise NotSplitError("odd valuation has no square root")
        r0 = sqrt_mod(self.coeffs[0], q)
        if r0 is None:
            raise NotSplitError("leading coefficient is not a square")
        n = self.prec
        inv_lead = pow(self.coeffs[0], -1, q)
        u = [c * inv_lead % q for c in self.coeffs]  # u0 = 1
        r = [1] + [0] * (n - 1)
        inv2 = pow(2, -1, q)
        for k in range(1, n):
            s = sum(r[i] * r[k - i] for i in range(1, k))
            r[k] = (u[k] - s) * inv2 % q
        return LaurentSeries(q, self.val // 2, [r0 * c for c in r])

    def polynomial_part(self):
        """The polynomial of terms with nonnegative Y-exponent (needs prec)."""
        if self.is_zero():
            return FqPoly.zero(self.q)
        if self.val > 0:
            return FqPoly.zero(self.q)
        if self.val + self.prec <= 0:
            raise PrecisionError("polynomial part not fully known")
        # exponent of Y at offset i is -(val+i); keep -(val+i) >= 0
        coeffs = [0] * (-self.val + 1)
        for i, c in enumerate(self.coeffs):
            k = self.val + i
            if k > 0:
                break
            coeffs[-k] = c
        return FqPoly(self.q, coeffs)

    def leading_coefficient(self):
        return self.coeffs[0] if not self.is_zero() else 0

    def __repr__(self):
        if self.is_zero():
            return "LaurentSeries(0)"
        terms = []
        for i, c in enumerate(self.coeffs[:6]):
            if c:
                k = self.val + i
                if k == 0:
                    terms.append(str(c))
                else:
                    terms.append(f"{c}*Y^{-k}")
        return ("LaurentSeries(" + " + ".join(terms)
                + f" + O(Y^{-(self.val + self.prec)}))")


def _source_is_zero(source):
    return isinstance(source, RatFunc) and source.is_zero()


def _rat_to_series(x, prec):
    """Exact Laurent expansion of a rational function by long division."""
    q = x.q
    if x.is_zero():
        return LaurentSeries.exact_zero(q)
    val = x.valuation()
    P, Q = x.num, x.den
    dp, dq = P.degree, Q.degree
    out = []
    # coefficient of Y^{-(val+i)} by synthetic division of P by Q at infinity
    rem = list(P.coeffs[::-1]) + [0] * (prec + Q.degree + 1)  # descending
    inv_lc = pow(Q.lc, -1, q)
    qdesc = Q.coeffs[::-1]
    for i in range(prec):
        c = rem[i] * inv_lc % q
        out.append(c)
        if c:
            for j, y in enumerate(qdesc):
                rem[i + j] = (rem[i + j] - c * y) % q
    return LaurentSeries(q, val, out, source=x)


def laurent_expand(x, prec, cap=PREC_CAP):
    """Expand a RatFunc or QuadIrr to at least ``prec`` known coefficients."""
    if prec < 1:
        raise ValueError("prec must be >= 1")
    if prec > cap:
        raise PrecisionCapError(f"requested precision {prec} exceeds cap {cap}")
    if isinstance(x, FqPoly):
        x = RatFunc(x)
    if isinstance(x, RatFunc):
        return _rat_to_series(x, prec)
    if isinstance(x, QuadIrr):
        return x.expand(prec, cap=cap)
    raise TypeError(f"cannot expand {type(x).__name__}")


def valuation_abs(x):
    """(v, |x|) for a LaurentSeries (or anything expandable)."""
    if isinstance(x, (RatFunc, FqPoly)):
        x = laurent_expand(x, 1) if not (isinstance(x, RatFunc) and x.is_zero()) \
            else LaurentSeries.exact_zero(x.q)
    if x.is_zero():
        return math.inf, Fraction(0)
    return x.val, x.abs_v()


def with_retry(fn, start=32, cap=PREC_CAP):
    """Run fn(prec) with doubling precision until it stops raising PrecisionError."""
    prec = start
    while True:
        try:
            return fn(prec)
        except PrecisionError:
            if prec >= cap:
                raise PrecisionCapError(
                    f"cancellation persisted up to the precision cap {cap}")
            prec = min(2 * prec, cap)


class QuadIrr:
    """Quadratic irrational over F_q(Y): a chosen root of A x^2 + B x + C.

    The triple is canonicalized (common factor removed, A monic).  ``branch``
    selects one of the two roots in F_q((1/Y)): the roots agree up to their
    first differing Laurent coefficient, and branch 0 is the root whose
    coefficient there is the smaller residue.
    """

    __slots__ = ("A", "B", "C", "branch")

    def __init__(self, A, B, C, branch=0):
        q = A.q
        if q == 2:
            raise CharTwoError("quadratic irrationals need odd q")
        if A.is_zero():
            raise ValueError("leading coefficient A must be nonzero")
        g = A.gcd(B.gcd(C)) if not (B.is_zero() and C.is_zero()) else A.monic()
        if not g.is_zero() and g.degree > 0:
            A, B, C = A // g, B // g, C // g
        u = pow(A.lc, -1, q)
        A, B, C = A * u, B * u, C * u
        D = B * B - 4 * A * C
        if is_poly_square(D):
            raise NotIrrationalError("discriminant is a square in F_q(Y)")
        if D.degree % 2 != 0 or sqrt_mod(D.lc, q) is None:
            raise NotSplitError("discriminant has no square root in F_q((1/Y))")
        self.A, self.B, self.C = A, B, C
        self.branch = branch & 1

    @property
    def q(self):
        return self.A.q

    @property
    def disc(self):
        return self.B * self.B - 4 * self.A * self.C

    def conj(self):
        out = object.__new__(QuadIrr)
        out.A, out.B, out.C, out.branch = self.A, self.B, self.C, 1 - self.branch
        return out

    def trace(self):
        return RatFunc(-self.B, self.A)

    def norm(self):
        return RatFunc(self.C, self.A)

    def key(self):
        return (self.A.coeffs, self.B.coeffs, self.C.coeffs, self.branch)

    def __eq__(self, other):
        return isinstance(other, QuadIrr) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def sep_valuation(self):
        """Exact v(alpha - alpha^sigma) = v(sqrt(D)) - v(A)."""
        return (-self.disc.degree // 2) - (-self.A.degree)

    def _roots(self, prec):
        """Both root expansions, ordered canonically (branch 0 first)."""
        q = self.q
        # work at higher precision: division by 2A and the subtraction
        # -B +- sqrt(D) can consume leading terms
        work = prec + self.A.degree + max(self.disc.degree, 0) + 4
        cap = max(work, PREC_CAP)
        sD = laurent_expand(RatFunc(self.disc), work, cap=cap).sqrt()
        mB = laurent_expand(RatFunc(-self.B), work, cap=cap) \
            if not self.B.is_zero() else LaurentSeries.exact_zero(q)
        twoA = laurent_expand(RatFunc(2 * self.A), work, cap=cap)
        r_plus = (mB + sD) / twoA
        r_minus = (mB - sD) / twoA
        # order by the residue at the first position where they differ,
        # which is exactly v(sqrt(D)/A)
        k = self.sep_valuation()
        cp, cm = r_plus.coefficient(k), r_minus.coefficient(k)
        assert cp != cm
        return (r_plus, r_minus) if cp < cm else (r_minus, r_plus)

    def expand(self, prec, cap=PREC_CAP):
        def attempt(p):
            roots = self._roots(p)
            out = roots[self.branch]
            if out.prec < prec:
                raise PrecisionError("root expansion shorter than requested")
            return out

        return with_retry(attempt, start=max(prec, 8), cap=max(cap, prec))

    def apply_homography(self, a, b, c, d):
        """Image under z -> (az+b)/(cz+d) with FqPoly entries, det != 0."""
        q = self.q
        det = a * d - b * c
        if det.is_zero():
            raise ValueError("singular homography")
        # alpha' = (a alpha + b)/(c alpha + d); substitute the inverse map
        # z = (d z' - b)/(-c z' + a) into A z^2 + B z + C = 0
        A, B, C = self.A, self.B, self.C
        A2 = A * d * d - B * d * c + C * c * c
        B2 = -2 * A * b * d + B * (a * d + b * c) - 2 * C * a * c
        C2 = A * b * b - B * a * b + C * a * a
        if A2.is_zero():
            raise ValueError("image has infinite leading root")
        out = QuadIrr(A2, B2, C2, 0)
        # pick the branch matching the transformed expansion
        k = out.sep_valuation()

        def attempt(p):
            alpha = self.expand(p)
            ca = laurent_expand(RatFunc(c), p) if not c.is_zero() \
                else LaurentSeries.exact_zero(q)
            da = laurent_expand(RatFunc(d), p) if not d.is_zero() \
                else LaurentSeries.exact_zero(q)
            aa = laurent_expand(RatFunc(a), p) if not a.is_zero() \
                else LaurentSeries.exact_zero(q)
            ba = laurent_expand(RatFunc(b), p) if not b.is_zero() \
                else LaurentSeries.exact_zero(q)
            img = (aa * alpha + ba) / (ca * alpha + da)
            root0 = out.expand(p)
            for s in (img, root0):
                # coefficient at k must be known (0 above the valuation is
                # exact knowledge; inside the window it must be computed)
                if s.val <= k and s.val + s.prec <= k:
                    raise PrecisionError(
                        "need deeper expansion to split branches")
            return img.coefficient(k) == root0.coefficient(k)

        is_branch0 = with_retry(attempt, start=16)
        out.branch = 0 if is_branch0 else 1
        return out

    def complexity(self):
        """h(alpha) = 1/|alpha - alpha^sigma| as an exact Fraction."""
        return Fraction(self.q) ** self.sep_valuation()

    def __repr__(self):
        return (f"QuadIrr(({self.A})x^2+({self.B})x+({self.C}), "
                f"branch={self.branch})")


def quad_invariants(alpha):
    """(trace, norm, conjugate, complexity h) with a dual-route h check.

    h is computed both from the Laurent expansions of the two branches and
    from |tr^2 - 4n|^{-1/2}; the two must agree exactly.
    """
    tr, nm = alpha.trace(), alpha.norm()
    # route 1: expansions of the two roots
    def attempt(p):
        a = alpha.expand(p)
        b = alpha.conj().expand(p)
        return (a - b).abs_v()

    sep = with_retry(attempt, start=16)
    h_series = 1 / sep
    # route 2: normalized discriminant
    d = tr * tr - 4 * nm
    v = d.valuation()
    assert v % 2 == 0
    h_formula = Fraction(alpha.q) ** (v // 2)
    if h_series != h_formula:
        raise AssertionError(
            f"complexity mismatch: expansions give {h_series}, "
            f"formula gives {h_formula}")
    return tr, nm, alpha.conj(), h_formula


class CFExpansion:
    """Artin continued fraction: polynomial partial quotients.

    ``period`` empty for rational input; otherwise minimal up to rotation.
    """

    __slots__ = ("preperiod", "period")

    def __init__(self, preperiod, period=()):
        self.preperiod = tuple(preperiod)
        self.period = tuple(period)

    def quotients(self, n):
        """First n partial quotients."""
        out = list(self.preperiod[:n])
        while len(out) < n:
            if not self.period:
                break
            out.extend(self.period[:n - len(out)])
        return out

    def convergents(self, n):
        """(p_k, q_k) for k < n, as FqPoly pairs."""
        qs = self.quotients(n)
        if not qs:
            return []
        q = qs[0].q
        p_prev, p_cur = FqPoly.one(q), qs[0]
        q_prev, q_cur = FqPoly.zero(q), FqPoly.one(q)
        out = [(p_cur, q_cur)]
        for a in qs[1:]:
            p_prev, p_cur = p_cur, a * p_cur + p_prev
            q_prev, q_cur = q_cur, a * q_cur + q_prev
            out.append((p_cur, q_cur))
        return out


def cf_expand(x):
    """Continued fraction of a RatFunc (finite) or QuadIrr (eventually periodic)."""
    if isinstance(x, (FqPoly, RatFunc)):
        if isinstance(x, FqPoly):
            x = RatFunc(x)
        quotients = []
        P, Q = x.num, x.den
        while not Q.is_zero():
            a, r = divmod(P, Q)
            quotients.append(a)
            P, Q = Q, r
        return CFExpansion(quotients, ())
    if not isinstance(x, QuadIrr):
        raise TypeError("cf_expand takes RatFunc or QuadIrr")

    q = x.q
    D = x.disc
    # complete quotients (P_i + sqrt(D))/Q_i, exact polynomial bookkeeping;
    # fold the branch sign into (P, Q): branch root = (-B + s*sqrtD)/(2A)
    sD_lead_branch0 = _canonical_sqrt_branch(x)
    if sD_lead_branch0:
        P, Q = -x.B, 2 * x.A
    else:
        P, Q = x.B, -2 * x.A
    seen = {}
    quotients = []
    i = 0
    while True:
        key = (P.coeffs, Q.coeffs)
        if key in seen:
            start = seen[key]
            return CFExpansion(quotients[:start], quotients[start:])
        seen[key] = i
        a = _complete_quotient_floor(P, Q, D)
        quotients.append(a)
        P = a * Q - P
        num = D - P * P
        Q_next, rem = divmod(num, Q)
        assert rem.is_zero(), "complete quotient bookkeeping broke"
        Q = Q_next
        i += 1
        if i > 4096:
            raise AssertionError("period not detected within 4096 steps")


def _canonical_sqrt_branch(x):
    """True if x's root uses +sqrt(D) with the canonical series square root."""
    # compare the root expansion against (-B + sqrtD)/(2A)
    def attempt(p):
        work = p + x.A.degree + max(x.disc.degree, 0) + 4
        cap = max(work, PREC_CAP)
        sD = laurent_expand(RatFunc(x.disc), work, cap=cap).sqrt()
        mB = laurent_expand(RatFunc(-x.B), work, cap=cap) \
            if not x.B.is_zero() else LaurentSeries.exact_zero(x.q)
        twoA = laurent_expand(RatFunc(2 * x.A), work, cap=cap)
        plus = (mB + sD) / twoA
        root = x.expand(p)
        k = x.sep_valuation()
        if plus.val + plus.prec <= k or root.val + root.prec <= k:
            raise PrecisionError("need deeper expansion")
        return plus.coefficient(k) == root.coefficient(k)

    return with_retry(attempt, start=16)


def _complete_quotient_floor(P, Q, D):
    """Polynomial part of (P + sqrt(D))/Q, exactly."""
    q = P.q

    def attempt(prec):
        sD = laurent_expand(RatFunc(D), prec).sqrt()
        Pn = laurent_expand(RatFunc(P), prec) if not P.is_zero() \
            else LaurentSeries.exact_zero(q)
        Qs = laurent_expand(RatFunc(Q), prec)
        return ((Pn + sD) / Qs).polynomial_part()

    start = 2 * (abs(D.degree) + abs(Q.degree) + abs(P.degree) + 4)
    return with_retry(attempt, start=min(start, PREC_CAP))


def parse_poly(q, text):
    """Parse "2Y^3+Y+1" style polynomial text over F_q."""
    text = text.replace(" ", "").replace("**", "^").replace("*", "")
    if not text:
        raise ValueError("empty polynomial")
    text = text.replace("-", "+-")
    out = FqPoly.zero(q)
    for term in text.split("+"):
        if not term:
            continue
        neg = term.startswith("-")
        if neg:
            term = term[1:]
        if "Y" in term:
            head, _, exp = term.partition("Y")
            c = int(head) if head else 1
            k = int(exp[1:]) if exp.startswith("^") else (1 if not exp else int(exp))
        else:
            c, k = int(term), 0
        if neg:
            c = -c
        out = out + FqPoly.monomial(q, c, k)
    return out


def parse_ratfunc(q, text):
    """Parse "P/Q" (or a bare polynomial) over F_q."""
    if "/" in text:
        p_txt, _, q_txt = text.partition("/")
        return RatFunc(parse_poly(q, p_txt.strip("()")),
                       parse_poly(q, q_txt.strip("()")))
    return RatFunc(parse_poly(q, text))
