"""Counting common perpendiculars, closed orbits, and conjugacy-class
orbits on finite graphs, with the explicit asymptotic constants.

A common perpendicular between subgraphs Y- and Y+ is a non-backtracking
edge path that starts at a vertex of Y- without using an edge of Y-,
and arrives at a vertex of Y+ without using an edge of Y+.  Counts are
exact big integers when all conductances vanish.
"""

from fractions import Fraction
import math

import numpy as np

from .errors import (
    BudgetError,
    DegreeMismatchError,
    NotSimpleCycleError,
    UnsupportedError,
)

DEFAULT_BUDGET = 10 ** 8


class PerpQuery:
    """Counting request: graph, Y- and Y+ subgraph names, horizon nmax."""

    __slots__ = ("graph", "minus", "plus", "nmax")

    def __init__(self, graph, minus, plus, nmax):
        self.graph = graph
        self.minus = minus
        self.plus = plus
        self.nmax = nmax


class CountSeries:
    """Per-length and cumulative counts (exact ints) and weighted sums."""

    __slots__ = ("counts", "weighted", "cumulative", "cumulative_weighted")

    def __init__(self, counts, weighted):
        self.counts = list(counts)
        self.weighted = list(weighted)
        self.cumulative = []
        self.cumulative_weighted = []
        tot, wtot = 0, 0.0
        for c, w in zip(self.counts, self.weighted):
            tot += c
            wtot += w
            self.cumulative.append(tot)
            self.cumulative_weighted.append(wtot)


class AsymptoticReport:
    __slots__ = ("delta", "constant", "growth_base", "ratios", "verdict",
                 "normalisation", "constant_odd")

    def __init__(self, delta, constant, growth_base, ratios, verdict,
                 normalisation, constant_odd=None):
        self.delta = delta
        self.constant = constant
        self.growth_base = growth_base
        self.ratios = ratios
        self.verdict = verdict
        self.normalisation = normalisation
        # bipartite graphs: separate constant for odd-length perpendiculars
        self.constant_odd = constant_odd


def _start_mask(g, subname):
    """Edges allowed as first edge of a perpendicular leaving the subgraph."""
    sub = g.subgraph(subname)
    vset, eset = set(sub["vertices"]), set(sub["edges"])
    return [eid for eid in g.edge_ids
            if g.edges[eid].origin in vset and eid not in eset]


def _end_mask(g, subname):
    sub = g.subgraph(subname)
    vset, eset = set(sub["vertices"]), set(sub["edges"])
    return [eid for eid in g.edge_ids
            if g.edges[eid].terminus in vset and eid not in eset]


def count_perpendiculars(query, budget=DEFAULT_BUDGET):
    """Dynamic programming over directed-edge states.

    Exact (big-integer) when all conductances are zero, float-weighted
    otherwise.  Entry n (1-based length) of the returned CountSeries is the
    number / weighted mass of perpendiculars of length exactly n.
    """
    g = query.graph
    n_edges = g.edge_count()
    if n_edges * query.nmax > budget:
        raise BudgetError(
            f"{n_edges} edge states x nmax {query.nmax} exceeds budget")
    start = _start_mask(g, query.minus)
    end = set(_end_mask(g, query.plus))
    exact = all(g.edges[e].conductance == 0.0 for e in g.edge_ids)

    succ = []  # successor index lists, aligned with edge order
    weights = []
    for eid in g.edge_ids:
        e = g.edges[eid]
        row = [g.edge_index[f] for f in g.out_edges(e.terminus)
               if f != e.reverse]
        succ.append(row)
    for eid in g.edge_ids:
        weights.append(math.exp(g.edges[eid].conductance))

    end_idx = [g.edge_index[e] for e in sorted(end)]
    if exact:
        w = [0] * n_edges
        for eid in start:
            w[g.edge_index[eid]] = 1
    else:
        w = [0.0] * n_edges
        for eid in start:
            w[g.edge_index[eid]] = weights[g.edge_index[eid]]

    counts, weighted = [], []
    for n in range(1, query.nmax + 1):
        harvest = sum(w[i] for i in end_idx)
        if exact:
            counts.append(harvest)
            weighted.append(float(harvest))
        else:
            counts.append(0)
            weighted.append(harvest)
        if n < query.nmax:
            nxt = [0] * n_edges if exact else [0.0] * n_edges
            for i, mass in enumerate(w):
                if mass:
                    for j in succ[i]:
                        nxt[j] += mass if exact else mass * weights[j]
            w = nxt
    return CountSeries(counts, weighted)


def enumerate_perpendiculars(query):
    """Naive DFS oracle listing all perpendiculars of length <= nmax.

    Only intended for small graphs and short horizons.  Returns per-length
    counts.
    """
    g = query.graph
    if g.edge_count() > 32 or query.nmax > 10:
        raise BudgetError("naive enumeration is capped at 32 edges, nmax 10")
    start = _start_mask(g, query.minus)
    end = set(_end_mask(g, query.plus))
    counts = [0] * query.nmax

    def rec(eid, length):
        if eid in end:
            counts[length - 1] += 1
        if length == query.nmax:
            return
        e = g.edges[eid]
        for f in g.out_edges(e.terminus):
            if f != e.reverse:
                rec(f, length + 1)

    for eid in start:
        rec(eid, 1)
    return counts


# ---------------------------------------------------------------------------
# total masses of the dynamically relevant measures


def _entropy_spherical(periods):
    """Exponential growth rate of the spherically symmetric tree (p_n)."""
    n = len(periods)
    return math.log(math.prod(periods)) / n


def bm_mass(kind, **kw):
    """Total mass of the measure of maximal entropy on the quotient.

    kind "regular": args q, vol (probability normalisation on the sphere
    measures) -> (q/(q+1)) * vol.
    kind "biregular": args p, q, tvol (sphere measures normalised to
    (deg)/sqrt(deg-1)) -> tvol.
    kind "spherical": args periods (palindromic period of the degree
    sequence p_n), orbit: list of (r_x, stabiliser order) pairs over
    quotient vertices, norm_sq = squared total mass of the sphere measure
    at the root (default 1).
    """
    if kind == "regular":
        q, vol = kw["q"], kw["vol"]
        if q < 2:
            raise DegreeMismatchError("regular tree needs q >= 2")
        return Fraction(q, q + 1) * Fraction(vol)
    if kind == "biregular":
        p, q, tvol = kw["p"], kw["q"], kw["tvol"]
        if p < 1 or q < 1 or p == q:
            raise DegreeMismatchError("biregular needs distinct p, q >= 1")
        return Fraction(tvol)
    if kind == "spherical":
        periods = list(kw["periods"])
        orbit = kw["orbit"]
        norm_sq = kw.get("norm_sq", 1.0)
        h = _entropy_spherical(periods)
        total = 0.0
        for r_x, stab in orbit:
            if r_x == 0:
                c = periods[0] / (periods[0] + 1)
            else:
                p0 = periods[0]
                denom = (p0 + 1) ** 2
                for i in range(1, r_x):
                    denom *= periods[i % len(periods)] ** 2
                denom *= periods[r_x % len(periods)]
                c = ((periods[r_x % len(periods)] - 1)
                     * math.exp(2 * r_x * h) / denom
                     + 2 * p0 / (p0 + 1) ** 2)
            total += norm_sq * c / stab
        return total
    raise UnsupportedError(f"unknown tree kind {kind!r}")


def skinning_mass(kind, **kw):
    """Total skinning masses for the standard convex targets.

    Regular tree of degree q+1, probability normalisation:
      "point" -> 1/stab; "cycle" of length L -> ((q-1)/(q+1)) L;
      "horoball" -> (q/(q+1)) vol(ray); "k-regular" subgraph ->
      ((q+1-k)/(q+1)) * nvertices (unit sphere masses).
    Biregular (p, q), sphere norm deg/sqrt(deg-1):
      "biregular-cycle" with Lp vertices of degree p+1 and Lq of degree
      q+1 -> (p-1)/sqrt(p) Lp + (q-1)/sqrt(q) Lq.
    """
    if kind == "point":
        return Fraction(1, kw.get("stab", 1))
    if kind == "cycle":
        q, L = kw["q"], kw["L"]
        return Fraction(q - 1, q + 1) * L
    if kind == "horoball":
        q, vol = kw["q"], kw["vol"]
        return Fraction(q, q + 1) * Fraction(vol)
    if kind == "k-regular":
        q, k, nv = kw["q"], kw["k"], kw["nvertices"]
        if not 0 <= k <= q + 1:
            raise DegreeMismatchError("subgraph degree exceeds ambient degree")
        return Fraction(q + 1 - k, q + 1) * nv
    if kind == "biregular-cycle":
        p, q, lp, lq = kw["p"], kw["q"], kw["Lp"], kw["Lq"]
        return (p - 1) / math.sqrt(p) * lp + (q - 1) / math.sqrt(q) * lq
    raise UnsupportedError(f"unknown skinning kind {kind!r}")


# ---------------------------------------------------------------------------
# theoretical counting constants


def _classify_subgraph(g, subname):
    """(kind, data) with kind in {"point", "cycle"}."""
    sub = g.subgraph(subname)
    vs, es = sub["vertices"], sub["edges"]
    if len(vs) == 1 and not es:
        return "point", {"vertices": 1}
    # cycle: connected, every vertex meets exactly two directed subgraph edges
    if es and len(es) == 2 * len(vs):
        deg = {v: 0 for v in vs}
        for eid in es:
            deg[g.edges[eid].origin] += 1
        if all(d == 2 for d in deg.values()):
            return "cycle", {"length": len(vs)}
    return "other", {}


def theoretical_constant(query, budget=DEFAULT_BUDGET):
    """Asymptotic constant for cumulative perpendicular counts, assembled
    from the closed-form mass formulas, plus the measured ratio series.

    Supported: regular graphs (any two point/cycle targets) and the
    biregular bipartite case with two cycle targets.  All conductances must
    vanish.
    """
    g = query.graph
    if any(g.edges[e].conductance != 0.0 for e in g.edge_ids):
        raise UnsupportedError("constants implemented for zero conductance")
    if not g.trivial_orders():
        raise UnsupportedError("constants implemented for trivial orders")
    rep = g.volumes()
    degs = sorted(set(rep.degrees.values()))
    series = count_perpendiculars(query, budget=budget)
    km = _classify_subgraph(g, query.minus)
    kp = _classify_subgraph(g, query.plus)

    if len(degs) == 1:
        q = degs[0] - 1
        delta = math.log(q)
        nverts = g.vertex_count()
        # ||m|| = (q/(q+1)) Vol, probability-normalised sphere measures
        m_mass = Fraction(q, q + 1) * rep.vol

        def sk(kind, data):
            if kind == "point":
                return skinning_mass("point")
            if kind == "cycle":
                return skinning_mass("cycle", q=q, L=data["length"])
            raise UnsupportedError(
                "regular constants support point/cycle targets")

        s_minus, s_plus = sk(*km), sk(*kp)
        const = Fraction(q, q - 1) * s_minus * s_plus / m_mass
        ratios = [series.cumulative[n] / (float(const) * q ** (n + 1))
                  for n in range(len(series.cumulative))]
        verdict = "pass" if abs(ratios[-1] - 1) < 0.05 else "fail"
        return AsymptoticReport(delta, float(const), float(q), ratios,
                                verdict, "probability")

    if len(degs) == 2 and rep.bipartite:
        p, q = degs[0] - 1, degs[1] - 1
        if km[0] != "cycle" or kp[0] != "cycle":
            raise UnsupportedError(
                "biregular constants support two cycle targets")

        # per-degree-class skinning weights of a cycle target: each cycle
        # vertex of degree d+1 contributes (d-1)/sqrt(d) under the
        # deg/sqrt(deg-1) sphere normalisation (codegree 2 along the cycle)
        def class_sigma(subname):
            sub = g.subgraph(subname)
            out = {p: 0.0, q: 0.0}
            for v in sub["vertices"]:
                d = rep.degrees[v] - 1
                out[d] += (d - 1) / math.sqrt(d)
            return out

        sm, sp = class_sigma(query.minus), class_sigma(query.plus)
        # ||m|| = TVol = number of directed edges for trivial groups
        m_mass = g.edge_count()
        pref = 2 * p * q / ((p * q - 1) * m_mass)
        const_even = pref * (sm[p] * sp[p] + sm[q] * sp[q])
        const_odd = pref * (sm[p] * sp[q] + sm[q] * sp[p])
        base = math.sqrt(p * q)
        # cumulative counts split by length parity; counts[i] has length i+1
        cum_par = []
        even_tot = odd_tot = 0
        for i, c in enumerate(series.counts):
            if (i + 1) % 2 == 0:
                even_tot += c
            else:
                odd_tot += c
            cum_par.append(even_tot if (i + 1) % 2 == 0 else odd_tot)
        ratios = []
        for i, tot in enumerate(cum_par):
            n = i + 1
            cst = const_even if n % 2 == 0 else const_odd
            ratios.append(tot / (cst * base ** n) if cst else float("nan"))
        verdict = ("pass" if len(ratios) >= 2
                   and abs(ratios[-1] - 1) < 0.05
                   and abs(ratios[-2] - 1) < 0.05 else "fail")
        return AsymptoticReport(math.log(base), const_even, base, ratios,
                                verdict, "deg/sqrt(deg-1)",
                                constant_odd=const_odd)

    raise UnsupportedError("graph is neither regular nor biregular-bipartite")


# ---------------------------------------------------------------------------
# closed orbits


def _mobius(n):
    out, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    if m > 1:
        out = -out
    return out


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def closed_orbit_count(graph, nmax, weighted=False):
    """Per-length counts of periodic non-backtracking structures.

    Returns dict with lists indexed by n-1 for n = 1..nmax:
      fix: Fix_n = #periodic admissible edge sequences = trace(B^n), exact;
      primitive: primitive periodic sequences (Mobius inversion);
      orbits: prime orbits = primitive sequences / n (rotation classes);
      weighted: sum of e^{c} over Fix_n (floats) when requested.
    """
    if nmax > 26:
        raise BudgetError("closed-orbit horizon capped at 26")
    B, _ = graph.nb_transfer(exact=True)
    n_edges = len(B)
    fix = []
    M = [row[:] for row in B]
    # integer matrix powers, trace per step
    cur = [row[:] for row in B]
    for n in range(1, nmax + 1):
        if n > 1:
            cur = _int_matmul(cur, M)
        fix.append(sum(cur[i][i] for i in range(n_edges)))
    primitive = []
    for n in range(1, nmax + 1):
        tot = sum(_mobius(n // d) * fix[d - 1] for d in _divisors(n))
        primitive.append(tot)
    orbits = []
    for n in range(1, nmax + 1):
        assert primitive[n - 1] % n == 0
        orbits.append(primitive[n - 1] // n)
    out = {"fix": fix, "primitive": primitive, "orbits": orbits}
    if weighted:
        Bw, _ = graph.nb_transfer()
        cw = Bw.copy()
        wfix = []
        for n in range(1, nmax + 1):
            if n > 1:
                cw = cw @ Bw
            wfix.append(float(np.trace(cw)))
        out["weighted"] = wfix
    return out


def _int_matmul(A, B):
    n = len(A)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for k in range(n):
            a = Ai[k]
            if a:
                Bk = B[k]
                for j in range(n):
                    if Bk[j]:
                        row[j] += a * Bk[j]
    return out


# ---------------------------------------------------------------------------
# conjugacy-class counting


def validate_simple_cycle(graph, cycle_edges):
    """Check that a closed directed edge walk is a primitive simple cycle.

    cycle_edges: list of directed edge ids traversed in order.  Returns the
    cycle length.
    """
    if not cycle_edges:
        raise NotSimpleCycleError("empty cycle")
    n = len(cycle_edges)
    for i in range(n):
        e = graph.edges[cycle_edges[i]]
        f = graph.edges[cycle_edges[(i + 1) % n]]
        if f.origin != e.terminus:
            raise NotSimpleCycleError("edge walk is not closed/consecutive")
        if cycle_edges[(i + 1) % n] == e.reverse:
            raise NotSimpleCycleError("cycle backtracks")
    # primitive: not a repetition of a shorter rotation
    for d in range(1, n):
        if n % d == 0 and all(cycle_edges[i] == cycle_edges[i % d]
                              for i in range(n)):
            raise NotSimpleCycleError("cycle is a proper power")
    # simple: visits each vertex at most once
    origins = [graph.edges[e].origin for e in cycle_edges]
    if len(set(origins)) != n:
        raise NotSimpleCycleError("cycle revisits a vertex")
    return n


def conjugacy_count(graph, basepoint, cycle_edges, nmax,
                    budget=DEFAULT_BUDGET):
    """Orbit counts in the conjugacy class of the loxodromic element whose
    axis projects to the given primitive simple cycle.

    The translate distance satisfies d(x0, g x0) = len(cycle) + 2 d(x0, axis),
    so the count at horizon n equals the cumulative number of common
    perpendiculars from the basepoint to the (unoriented) cycle of length at
    most floor((n - len)/2).  Returns the list [N(0), ..., N(nmax)].
    """
    lam = validate_simple_cycle(graph, cycle_edges)
    # basepoint and cycle as throwaway subgraphs
    cyc_set = set()
    for eid in cycle_edges:
        cyc_set.add(eid)
        cyc_set.add(graph.edges[eid].reverse)
    verts = sorted({graph.edges[e].origin for e in cyc_set}
                   | {graph.edges[e].terminus for e in cyc_set})
    g2 = graph.with_conductance({})
    g2.subgraphs = dict(graph.subgraphs)
    g2.subgraphs["__base__"] = {"vertices": [basepoint], "edges": []}
    g2.subgraphs["__cycle__"] = {"vertices": verts, "edges": sorted(cyc_set)}

    radius = max((nmax - lam) // 2, 0)
    on_cycle = basepoint in verts
    perp = None
    if radius >= 1:
        perp = count_perpendiculars(
            PerpQuery(g2, "__base__", "__cycle__", radius), budget=budget)
    out = []
    for n in range(nmax + 1):
        if n < lam:
            out.append(0)
            continue
        r = (n - lam) // 2
        base = 1 if on_cycle else 0  # zero-length perpendicular
        out.append(base + (perp.cumulative[r - 1] if r >= 1 else 0))
    return out
