"""Valuative geometry of the (q+1)-regular tree of PGL_2 over F_q((1/Y))
and its arithmetic: vertex distances, horoball heights, translation
lengths, boundary measures, crossratios, relative heights, norm forms,
covolumes, Hecke indices, and Farey counting.

Distances, heights and measures are all expressed through the valuation
v = v_infinity on F_q(Y); everything is exact (Fractions / big integers).
"""

from fractions import Fraction
import math

from .errors import (
    BudgetError,
    DegenerateError,
    DetNotUnitError,
    FixesInfinityError,
    SingularPointError,
    UnsupportedError,
)
from .ffield import (
    FqPoly,
    QuadIrr,
    RatFunc,
    euler_phi,
    laurent_expand,
    mertens_sum,
    monic_polys,
    with_retry,
)

INF = "inf"  # point at infinity of the projective line


class BTMatrix:
    """2x2 matrix over F_q(Y) acting on the tree and its boundary."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        raw = (a, b, c, d)
        q = next(x.q for x in raw if isinstance(x, (FqPoly, RatFunc)))
        entries = []
        for x in raw:
            if isinstance(x, FqPoly):
                x = RatFunc(x)
            elif isinstance(x, int):
                x = RatFunc.const(q, x)
            entries.append(x)
        self.a, self.b, self.c, self.d = entries
        if self.det().is_zero():
            raise DegenerateError("singular matrix")

    @property
    def q(self):
        return self.a.q

    def det(self):
        return self.a * self.d - self.b * self.c

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other):
        return BTMatrix(self.a * other.a + self.b * other.c,
                        self.a * other.b + self.b * other.d,
                        self.c * other.a + self.d * other.c,
                        self.c * other.b + self.d * other.d)

    def inverse(self):
        det = self.det()
        return BTMatrix(self.d / det, -self.b / det,
                        -self.c / det, self.a / det)

    def trace(self):
        return self.a + self.d

    def scalar_normalized(self):
        """Divide by an entry of minimal valuation (projective normal form)."""
        vals = [(x.valuation(), x) for x in self.entries() if not x.is_zero()]
        pivot = min(vals, key=lambda t: t[0])[1]
        return BTMatrix(self.a / pivot, self.b / pivot,
                        self.c / pivot, self.d / pivot)

    def proj_equal(self, other):
        s, o = self.scalar_normalized(), other.scalar_normalized()
        # after normalisation both have min valuation 0; compare up to the
        # remaining unit scalar by cross-multiplying
        for x, y in zip(s.entries(), o.entries()):
            if x.is_zero() != y.is_zero():
                return False
        for x, y in zip(s.entries(), o.entries()):
            if not x.is_zero():
                ratio = y / x
                break
        return all((y - ratio * x).is_zero()
                   for x, y in zip(s.entries(), o.entries()))

    def apply_boundary(self, z):
        """Homography action on K_v union {inf}; z RatFunc or INF."""
        if z == INF:
            if self.c.is_zero():
                return INF
            return self.a / self.c
        den = self.c * z + self.d
        if den.is_zero():
            return INF
        return (self.a * z + self.b) / den

    def min_entry_valuation(self):
        return min(x.valuation() for x in self.entries() if not x.is_zero())


def vertex_distance(g):
    """d(*, g*) = |v(det g) - 2 min entry valuation|.

    This is the gap between the two elementary divisors of g over the
    valuation ring (unimodular row/column operations over O_v preserve the
    minimal entry valuation and the determinant valuation).
    """
    return abs(g.det().valuation() - 2 * g.min_entry_valuation())


def vertex_distance_smith(g):
    """Independent oracle: actual Smith-form elimination over O_v.

    Pivots on a minimal-valuation entry and clears its row and column with
    multipliers in O_v, yielding diagonal elementary divisors.
    """
    m = [[g.a, g.b], [g.c, g.d]]

    def val(x):
        return x.valuation()

    # choose pivot with minimal valuation
    best = min(((i, j) for i in range(2) for j in range(2)
                if not m[i][j].is_zero()), key=lambda t: val(m[t[0]][t[1]]))
    i0, j0 = best
    if i0 == 1:
        m[0], m[1] = m[1], m[0]
    if j0 == 1:
        for row in m:
            row[0], row[1] = row[1], row[0]
    p = m[0][0]
    # clear column: row1 -= (m10/p) row0  (multiplier in O_v by minimality)
    f = m[1][0] / p
    m[1][0] = m[1][0] - f * m[0][0]
    m[1][1] = m[1][1] - f * m[0][1]
    # clear row: col1 -= (m01/p) col0
    f = m[0][1] / p
    m[0][1] = m[0][1] - f * m[0][0]
    m[1][1] = m[1][1] - f * m[1][0]
    assert m[1][0].is_zero() and m[0][1].is_zero()
    return abs(val(m[0][0]) - val(m[1][1]))


def horoball_height(g):
    """Height and center of the image of the horoball at infinity.

    Requires unit determinant and a matrix not fixing infinity; returns
    (height = -2 v(c), center = a/c).
    """
    if g.det().valuation() != 0:
        raise DetNotUnitError("determinant must be a v-unit")
    if g.c.is_zero():
        raise FixesInfinityError("matrix fixes the point at infinity")
    return -2 * g.c.valuation(), g.a / g.c


def translation_length(g):
    """Translation length on the tree: 2 max(0, -v(tr)) for unit det."""
    if g.det().valuation() != 0:
        raise DetNotUnitError("determinant must be a v-unit")
    tr = g.trace()
    if tr.is_zero():
        return 0
    v = tr.valuation()
    return max(0, -2 * v)


def translation_length_oracle(g, radius=3, max_center_deg=3):
    """min over tree vertices x near the base of d(x, g x).

    Vertices are represented by column-Hermite lattice bases
    [[pi^m, u], [0, pi^n]] with small m, n and polynomial parts of u of
    bounded degree; pi = 1/Y.
    """
    q = g.q
    Y = FqPoly.x(q)
    best = None
    reps = []
    for m in range(-radius, radius + 1):
        for n in range(-radius, radius + 1):
            if abs(m - n) > 2 * radius:
                continue
            for u in _small_elements(q, max_center_deg, radius):
                reps.append((m, n, u))
    for m, n, u in reps:
        pm = RatFunc(FqPoly.one(q), Y ** m) if m >= 0 else RatFunc(Y ** (-m))
        pn = RatFunc(FqPoly.one(q), Y ** n) if n >= 0 else RatFunc(Y ** (-n))
        B = BTMatrix(pm, u, RatFunc.const(q, 0), pn)
        d = vertex_distance(B.inverse() @ (g @ B))
        if best is None or d < best:
            best = d
    return best


def _small_elements(q, max_deg, max_neg):
    """Elements u = P(Y) + Q(1/Y) with small degrees (a sampling grid)."""
    out = []
    for dp in range(max_deg + 1):
        for tail in range(q ** dp):
            coeffs = []
            t = tail
            for _ in range(dp):
                coeffs.append(t % q)
                t //= q
            coeffs.append(1)
            out.append(RatFunc(FqPoly(q, coeffs)))
    out.append(RatFunc.const(q, 0))
    Y = FqPoly.x(q)
    for k in range(1, max_neg + 1):
        for c in range(1, q):
            out.append(RatFunc(FqPoly.const(q, c), Y ** k))
    return out


# ---------------------------------------------------------------------------
# boundary measures


def _abs_of(x):
    """Exact |x|_v for RatFunc / QuadIrr / LaurentSeries."""
    if isinstance(x, QuadIrr):
        return Fraction(x.q) ** (-x.expand(4).val)
    return x.abs_v()


def abs_diff(x, y):
    """Exact |x - y|_v for x, y in K_v or quadratic over it."""
    if isinstance(x, FqPoly):
        x = RatFunc(x)
    if isinstance(y, FqPoly):
        y = RatFunc(y)
    if isinstance(x, RatFunc) and isinstance(y, RatFunc):
        return (x - y).abs_v()
    if (isinstance(x, QuadIrr) and isinstance(y, QuadIrr)
            and (x.A, x.B, x.C) == (y.A, y.B, y.C)):
        if x.branch == y.branch:
            raise DegenerateError("points coincide")
        return Fraction(x.q) ** (-x.sep_valuation())
    q = x.q

    def attempt(prec):
        a = x.expand(prec) if isinstance(x, QuadIrr) else laurent_expand(x, prec)
        b = y.expand(prec) if isinstance(y, QuadIrr) else laurent_expand(y, prec)
        return (a - b).abs_v()

    return with_retry(attempt, start=16)


def patterson_point_ball(q, center, n):
    """Mass of the ball B(center, q^{-n}) under the density
    max(1, |z|)^{-2} dHaar (the sphere measure seen from the base vertex).

    center: RatFunc; returns an exact Fraction.
    """
    abs_c = _abs_of(center)
    radius = Fraction(q) ** (-n)
    if radius >= abs_c:
        # ball centered at 0 of the same radius (ultrametric)
        if radius <= 1:
            return radius  # inside O_v, density 1
        # O_v plus the shells 1 < |z| <= radius
        kmax = -n
        total = Fraction(1)
        for k in range(1, kmax + 1):
            shell = Fraction(q) ** k - Fraction(q) ** (k - 1)
            total += shell * Fraction(q) ** (-2 * k)
        return total
    # ball inside a single sphere |z| = |center|
    if abs_c <= 1:
        return radius
    return radius / abs_c ** 2


def patterson_total(q):
    """Total boundary mass (q+1)/q, with the shell-sum cross-check."""
    closed = Fraction(q + 1, q)
    shells = Fraction(1) + sum(
        (Fraction(q) ** k - Fraction(q) ** (k - 1)) * Fraction(q) ** (-2 * k)
        for k in range(1, 60))
    # geometric tail beyond the partial sum
    tail = Fraction(q - 1, q) * Fraction(q) ** (-60) / (1 - Fraction(1, q))
    assert closed - shells == tail
    return closed


def horoball_ball_mass(q, n):
    """Skinning measure of the horoball at infinity is plain Haar."""
    return Fraction(q) ** (-n)


def line_density(q, l_minus, l_plus, rho):
    """Density of the outer skinning measure of the line (l-, l+) at the
    boundary point rho: |l+ - l-| / (|rho - l-| |rho - l+|)."""
    for bad in (l_minus, l_plus):
        if isinstance(rho, RatFunc) and isinstance(bad, RatFunc) \
                and (rho - bad).is_zero():
            raise SingularPointError("density evaluated at a line endpoint")
    if rho == INF:
        raise SingularPointError("density evaluated at infinity")
    num = abs_diff(l_plus, l_minus)
    den = abs_diff(rho, l_minus) * abs_diff(rho, l_plus)
    if den == 0:
        raise SingularPointError("density evaluated at a line endpoint")
    return num / den


# ---------------------------------------------------------------------------
# crossratios, heights, norm forms


def crossratio_abs(a, b, c, d):
    """|[a,b,c,d]| = |c-a||d-b| / (|c-b||d-a|), with each factor containing
    an infinite point dropped (one factor upstairs, one downstairs)."""
    pts = [a, b, c, d]
    if sum(1 for p in pts if p == INF) > 1:
        raise DegenerateError("points are not pairwise distinct")
    num = Fraction(1)
    den = Fraction(1)
    factors = [((c, a), True), ((d, b), True), ((c, b), False), ((d, a), False)]
    for (x, y), top in factors:
        if x == INF or y == INF:
            continue  # the paired factor on the other side is dropped too
        f = abs_diff(x, y)
        if f == 0:
            raise DegenerateError("points are not pairwise distinct")
        if top:
            num *= f
        else:
            den *= f
    return num / den


def relative_height(alpha, beta):
    """h_alpha(beta) = max(|[a, b, b^s, a^s]|, |[a, b^s, b, a^s]|), a power
    of q equal to q^(distance between the two translation axes)."""
    if (alpha.A, alpha.B, alpha.C) == (beta.A, beta.B, beta.C):
        raise DegenerateError("beta lies in {alpha, alpha^sigma}")
    asig, bsig = alpha.conj(), beta.conj()
    h1 = crossratio_abs(alpha, beta, bsig, asig)
    h2 = crossratio_abs(alpha, bsig, beta, asig)
    h = max(h1, h2)
    # must be a nonnegative power of q
    n = 0
    acc = Fraction(1)
    while acc < h:
        acc *= alpha.q
        n += 1
    if acc != h:
        raise AssertionError(f"relative height {h} is not a power of q >= 1")
    return h


def norm_form(alpha, x, y):
    """Q_alpha(x, y) = |x^2 - xy tr(alpha) + y^2 n(alpha)|_v for FqPoly x, y."""
    if x.is_zero() and y.is_zero():
        raise DegenerateError("(x, y) must be nonzero")
    tr, nm = alpha.trace(), alpha.norm()
    val = RatFunc(x * x) - RatFunc(x * y) * tr + RatFunc(y * y) * nm
    return val.abs_v()


def transform_check(alpha, g, grid=5):
    """Verify Q_{g alpha}(x,y) = (h(alpha)/h(g alpha)) Q_alpha(g^{-1}(x,y))
    exactly on a grid of polynomial vectors (x, y).

    g: BTMatrix with entries polynomial and constant nonzero determinant
    (an element of GL_2(F_q[Y]), so |det| = 1 and the adjugate can replace
    the inverse inside the absolute values).
    """
    det = g.det()
    if not (det.is_polynomial() and det.num.is_constant()):
        raise UnsupportedError("g must lie in GL_2(F_q[Y])")
    for e in g.entries():
        if not e.is_polynomial():
            raise UnsupportedError("g must have polynomial entries")
    q = alpha.q
    ga = alpha.apply_homography(g.a.num, g.b.num, g.c.num, g.d.num)
    h_ratio = alpha.complexity() / ga.complexity()
    # adjugate: g^{-1} up to the unit determinant
    A, B, C, D = g.a.num, g.b.num, g.c.num, g.d.num
    checked = 0
    for xv in _grid_polys(q, grid):
        for yv in _grid_polys(q, grid):
            if xv.is_zero() and yv.is_zero():
                continue
            # (x', y') = adj(g) (x, y)
            xp = D * xv - B * yv
            yp = -C * xv + A * yv
            if xp.is_zero() and yp.is_zero():
                continue
            lhs = norm_form(ga, xv, yv)
            rhs = h_ratio * norm_form(alpha, xp, yp)
            if lhs != rhs:
                return False
            checked += 1
    return checked > 0


def _grid_polys(q, count):
    """The first `count` polynomials in the canonical enumeration."""
    out = []
    deg = 0
    while len(out) < count:
        for f in ([FqPoly.zero(q)] if deg == 0 else []):
            out.append(f)
        for f in monic_polys(q, deg):
            out.append(f)
            if len(out) >= count:
                break
        deg += 1
    return out[:count]


# ---------------------------------------------------------------------------
# covolumes, Hecke indices, Farey counting


def zeta_minus_one(q):
    """zeta_{F_q(Y)}(-1) = 1/((q-1)(q^2-1))."""
    return Fraction(1, (q - 1) * (q * q - 1))


def covolume_suite(q, ideal=None):
    """Covolume identities for the modular group over F_q[Y].

    nagao_series sums the reciprocals of the projective stabiliser orders
    along the quotient ray: 1/(q(q^2-1)) + sum_{n>=0} 1/((q-1) q^{n+2}),
    in exact rationals via the geometric series; it must equal
    via_zeta = 2 zeta_K(-1) = 2/((q-1)(q^2-1)).  ideal_covol(I) is the Haar
    covolume of K_v / I for a fractional ideal I = (f): N(I)/q at genus 0.
    """
    order_m1 = q * (q * q - 1)
    # sum_{n>=0} 1/((q-1) q^{n+2}) = 1/((q-1) q^2) * q/(q-1) = 1/(q(q-1)^2)
    series = Fraction(1, order_m1) + Fraction(1, q * (q - 1) ** 2)
    via_zeta = 2 * zeta_minus_one(q)
    closed = Fraction(2, (q - 1) * (q * q - 1))
    out = {"nagao_series": series, "via_zeta": via_zeta, "closed_form": closed,
           "agree": series == via_zeta == closed}
    if ideal is not None:
        norm = q ** ideal.degree
        out["ideal_covol"] = Fraction(norm, q)
    return out


def hecke_index(q, ideal, cross_check=True, budget_deg=4):
    """[GL_2(R) : G_I] = N(I) prod_{p | I} (1 + 1/N(p)) for the subgroup of
    matrices with lower-left entry in I = (ideal).

    The cross-check counts the projective line over R/I: unimodular pairs
    (a, b) modulo units, which is in bijection with the coset space.
    """
    from .ffield import factor

    if ideal.is_zero() or ideal.degree == 0:
        raise DegenerateError("ideal must be proper and nonzero")
    norm = q ** ideal.degree
    value = Fraction(norm)
    for p in factor(ideal):
        np_ = q ** p.degree
        value *= Fraction(np_ + 1, np_)
    assert value.denominator == 1
    value = int(value)
    if not cross_check:
        return value, None
    if ideal.degree > budget_deg:
        raise BudgetError("enumeration cross-check capped at degree 4")
    count = 0
    residues = _residues(q, ideal)
    for a in residues:
        for b in residues:
            g = a.gcd(b)
            g = g.gcd(ideal) if not g.is_zero() else ideal.monic()
            if g.degree == 0:
                count += 1
    units = euler_phi(ideal)
    assert count % units == 0
    return value, count // units


def _residues(q, modulus):
    out = []
    d = modulus.degree
    for tail in range(q ** d):
        coeffs = []
        t = tail
        for _ in range(d):
            coeffs.append(t % q)
            t //= q
        out.append(FqPoly(q, coeffs))
    return out


def farey_count(q, t, hist_depth=1, budget=10 ** 7):
    """Count of Farey classes of height at most q^t and the ball histogram.

    Psi(t) counts coprime pairs (P, Q), deg Q <= t, modulo the shear
    P -> P + kQ: one class per unit Q, and phi_q(Q) classes per Q of
    positive degree, so Psi(t) = (q-1) + sum_{0 < deg Q <= t} phi_q(Q).

    The histogram enumerates the rational points P/Q inside O_v (canonical
    form: Q monic, gcd(P, Q) = 1, deg P <= deg Q) and bins them by the
    first hist_depth coefficients of their Laurent expansion (the depth-d
    balls of O_v).  Returns dict with "psi", "points", "histogram".
    """
    if q ** (t + 1) > budget:
        raise BudgetError("Farey enumeration budget exceeded")
    psi = (q - 1) + mertens_sum(q, t, budget=budget)

    histogram = {}
    npoints = 0

    def bin_of(x):
        """First hist_depth coefficients (of Y^0 .. Y^{1-depth}) of x."""
        if x.is_zero():
            return (0,) * hist_depth
        s = laurent_expand(x, hist_depth + max(0, -x.valuation()) + 2)
        return tuple(s.coefficient(k) for k in range(hist_depth))

    # integer points: the constants
    for cst in range(q):
        key = (cst,) + (0,) * (hist_depth - 1)
        histogram[key] = histogram.get(key, 0) + 1
        npoints += 1
    # Q monic of positive degree, P = a Q + P0 with P0 a unit residue
    for d in range(1, t + 1):
        for Q in monic_polys(q, d):
            for P0 in _residues(q, Q):
                if P0.gcd(Q).degree != 0 and not P0.is_zero():
                    continue
                if P0.is_zero():
                    continue
                for a in range(q):
                    P = FqPoly.const(q, a) * Q + P0
                    x = RatFunc(P, Q)
                    key = bin_of(x)
                    histogram[key] = histogram.get(key, 0) + 1
                    npoints += 1
    return {"psi": psi, "points": npoints, "histogram": histogram}


def farey_psi_oracle(q, t):
    """Brute-force Psi(t): canonical shear representatives, enumerated."""
    total = q - 1  # unit denominators: one class per unit
    for d in range(1, t + 1):
        for lead in range(1, q):
            for Qm in monic_polys(q, d):
                Q = FqPoly.const(q, lead) * Qm
                for P in _residues(q, Q):
                    g = P.gcd(Q) if not P.is_zero() else Q.monic()
                    if g.degree == 0:
                        total += 1
    return total


# ---------------------------------------------------------------------------
# orbit experiments on quadratic irrationals


def _orbit_generators(q):
    Y = FqPoly.x(q)
    one = FqPoly.one(q)
    zero = FqPoly.zero(q)
    gens = [
        (one, Y, zero, one),        # shear by Y
        (one, one, zero, one),      # shear by 1
        (zero, one, one, zero),     # inversion
        (one, -Y, zero, one),
        (one, -one, zero, one),
    ]
    return gens


def quad_orbit_experiment(alpha0, mode="complexity", word_len=6,
                          max_orbit=4000):
    """Enumerate part of the modular orbit of a quadratic irrational and
    bin it by complexity.

    BFS over generator words (shears by Y and 1, inversion, and inverse
    shears) up to length word_len, deduplicating by the canonical
    (A, B, C, branch) form.  mode "complexity" bins by h(beta); mode
    "relative" bins by h_{alpha0}(beta) and asserts every value is a power
    of q.  Returns {"orbit_size", "bins": {value: count},
    "cumulative": [(threshold, N(threshold))]}.
    """
    if word_len > 12:
        raise BudgetError("orbit word length capped at 12")
    q = alpha0.q
    gens = _orbit_generators(q)
    seen = {alpha0.key(): alpha0}
    frontier = [alpha0]
    for _ in range(word_len):
        nxt = []
        for beta in frontier:
            for (a, b, c, d) in gens:
                img = beta.apply_homography(a, b, c, d)
                if img.key() not in seen:
                    seen[img.key()] = img
                    nxt.append(img)
                    if len(seen) > max_orbit:
                        raise BudgetError("orbit cap exceeded")
        frontier = nxt
        if not frontier:
            break

    bins = {}
    for beta in seen.values():
        if mode == "complexity":
            val = beta.complexity()
        elif mode == "relative":
            if (beta.A, beta.B, beta.C) == (alpha0.A, alpha0.B, alpha0.C):
                continue
            val = relative_height(alpha0, beta)
        else:
            raise UnsupportedError(f"unknown mode {mode!r}")
        bins[val] = bins.get(val, 0) + 1

    thresholds = sorted(bins)
    cumulative = []
    run = 0
    for s in thresholds:
        run += bins[s]
        cumulative.append((s, run))
    return {"orbit_size": len(seen), "bins": bins, "cumulative": cumulative}
