"""Subshifts of finite type on directed edges: pressure, equilibrium
measures, weak-Gibbs audits, correlation decay, and a brute-force
variational oracle.

The potential is always a 1-step function: phi(x) = c(x_0) depends on the
first letter only, so equilibrium states are Markov measures and the whole
thermodynamic apparatus reduces to Perron-Frobenius data of the weighted
transfer matrix B[a,b] = e^{c(b)} [a -> b allowed].
"""

import numpy as np

from .errors import (
    BudgetError,
    InadmissibleWordError,
    NoConvergenceError,
    ReducibleError,
)

POWER_TOL = 1e-12
POWER_CAP = 10 ** 6


class EdgeShift:
    """SFT with letters = directed edges (or abstract letters) and a
    1-step potential given per letter."""

    def __init__(self, letters, transitions, potential=None):
        """transitions: 0/1 matrix A[a,b]; potential: per-letter array c."""
        self.letters = list(letters)
        self.A = np.asarray(transitions, dtype=float)
        n = len(self.letters)
        if self.A.shape != (n, n):
            raise ValueError("transition matrix shape mismatch")
        self.potential = (np.zeros(n) if potential is None
                          else np.asarray(potential, dtype=float))
        # B[a,b] = e^{c(b)} when a -> b is allowed
        self.B = self.A * np.exp(self.potential)[None, :]

    @classmethod
    def from_graph(cls, g):
        """Shift of the non-backtracking edge dynamics of a graph."""
        B, _ = g.nb_transfer()
        A = (B > 0).astype(float)
        c = g.conductance_vector()
        return cls(list(g.edge_ids), A, c)

    @classmethod
    def full_shift(cls, k, potential=None):
        return cls(list(range(k)), np.ones((k, k)), potential)

    @classmethod
    def golden_mean(cls, potential=None):
        return cls([0, 1], np.array([[1.0, 1.0], [1.0, 0.0]]), potential)

    def n_letters(self):
        return len(self.letters)

    def letter_index(self, a):
        return self.letters.index(a)

    def is_irreducible(self):
        return _strongly_connected(self.A)

    def admissible(self, word):
        """word: sequence of letter indices."""
        return all(self.A[a, b] > 0 for a, b in zip(word, word[1:]))


def _strongly_connected(A):
    n = A.shape[0]
    if n == 0:
        return False

    def reach(M):
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in np.nonzero(M[v])[0]:
                if w not in seen:
                    seen.add(int(w))
                    stack.append(int(w))
        return seen

    return len(reach(A)) == n and len(reach(A.T)) == n


def _perron(B, tol=POWER_TOL, cap=POWER_CAP):
    """(rho, right, left) Perron data by power iteration.

    Iterates on B + I so periodic (e.g. bipartite) transition structures
    still converge; rho(B + I) = rho(B) + 1 with the same eigenvectors.
    """
    n = B.shape[0]
    M = B + np.eye(n)

    def iterate(mat):
        v = np.ones(n)
        v /= v.sum()
        lam = 0.0
        for _ in range(cap):
            w = mat @ v
            s = w.sum()
            if s <= 0:
                raise ReducibleError("transfer matrix lost all mass")
            w /= s
            if np.abs(w - v).max() <= tol * max(1.0, np.abs(v).max()):
                return s, w
            lam, v = s, w
        raise NoConvergenceError(
            f"power iteration did not converge within {cap} iterations")

    rho_r, right = iterate(M)
    rho_l, left = iterate(M.T)
    rho = (rho_r + rho_l) / 2 - 1.0
    # one Rayleigh polish for the eigenvalue
    rho = float(left @ B @ right / (left @ right))
    return rho, right, left


def pressure(shift):
    """Gurevic pressure = log Perron radius of the weighted transfer matrix.

    This is also the critical exponent of the conductance-weighted
    non-backtracking path count when the shift comes from a graph.
    """
    if not shift.is_irreducible():
        raise ReducibleError("transition structure is not strongly connected")
    rho, _, _ = _perron(shift.B)
    return float(np.log(rho))


class MarkovMeasure:
    """Stationary Markov chain on the letters of an SFT."""

    __slots__ = ("shift", "p", "P", "entropy", "phi_integral", "pressure")

    def __init__(self, shift, p, P, entropy, phi_integral, pressure):
        self.shift = shift
        self.p = p
        self.P = P
        self.entropy = entropy
        self.phi_integral = phi_integral
        self.pressure = pressure


def _chain_entropy(p, P):
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), 0.0)
    return float(-(p[:, None] * P * logs).sum())


def equilibrium_measure(shift):
    """The Parry-type equilibrium chain: P[a,b] = B[a,b] r(b) / (rho r(a))."""
    if not shift.is_irreducible():
        raise ReducibleError("transition structure is not strongly connected")
    rho, r, l = _perron(shift.B)
    P = shift.B * r[None, :] / (rho * r[:, None])
    P = P / P.sum(axis=1, keepdims=True)  # kill rounding drift
    p = l * r
    p = p / p.sum()
    h = _chain_entropy(p, P)
    phi_int = float(p @ shift.potential)
    return MarkovMeasure(shift, p, P, h, phi_int, float(np.log(rho)))


def cylinder_measure(m, word):
    """Measure of the cylinder [word]; word is a sequence of letter indices."""
    if len(word) == 0:
        return 1.0
    if not m.shift.admissible(word):
        raise InadmissibleWordError(f"word {list(word)} is not admissible")
    out = m.p[word[0]]
    for a, b in zip(word, word[1:]):
        out *= m.P[a, b]
    return float(out)


def weak_gibbs_audit(m, maxlen):
    """Extremes of the Gibbs ratio m(C_n(x)) / e^{S_n phi - n P} over
    periodic points of period <= maxlen, reported per starting letter.

    For a periodic word w of length n (closure w_{n-1} -> w_0 admissible)
    the cylinder mass is p(w_0) prod_{i<n-1} P[w_i, w_{i+1}], so the
    log-ratio is

        log p(w_0) + sum_{i<n-1} log P[w_i, w_{i+1}]
                   - sum_{i<n} c(w_i) + n * pressure.

    The extremes over all periodic words are computed with a max-plus /
    min-plus dynamic program on the edge weights
    W[a,b] = log P[a,b] - c(a) + pressure (the closing step contributes
    only -c(last) + pressure plus the admissibility constraint), which
    yields exactly the same extremes as full enumeration without touching
    k^n words.

    Returns {"per_letter": {letter: (lo, hi)}, "C": max per-letter spread
    hi/lo, "passes": bool}.  A spread of 1 means the ratios are constant
    (exact Gibbs property).
    """
    if maxlen > 16:
        raise BudgetError("weak-Gibbs audit capped at maxlen 16")
    n_letters = m.shift.n_letters()
    with np.errstate(divide="ignore"):
        W = np.where(m.P > 0, np.log(np.where(m.P > 0, m.P, 1.0)), -np.inf)
    W = W - m.shift.potential[:, None] + m.pressure
    W_min = np.where(np.isneginf(W), np.inf, W)
    closing = -m.shift.potential + m.pressure  # indexed by the last letter
    adm = m.P > 0

    per_letter = {}
    for a in range(n_letters):
        lo, hi = np.inf, -np.inf
        mx = np.full(n_letters, -np.inf)
        mn = np.full(n_letters, np.inf)
        mx[a] = 0.0
        mn[a] = 0.0
        for n in range(1, maxlen + 1):
            # paths of length n-1 from a; close up over admissible b -> a
            for b in range(n_letters):
                if not adm[b, a]:
                    continue
                if np.isfinite(mx[b]):
                    hi = max(hi, mx[b] + closing[b] + np.log(m.p[a]))
                if np.isfinite(mn[b]):
                    lo = min(lo, mn[b] + closing[b] + np.log(m.p[a]))
            mx = np.max(mx[:, None] + W, axis=0)
            mn = np.min(mn[:, None] + W_min, axis=0)
        per_letter[m.shift.letters[a]] = (float(np.exp(lo)), float(np.exp(hi)))
    spreads = [hi / lo for lo, hi in per_letter.values()
               if np.isfinite(lo) and np.isfinite(hi) and lo > 0]
    C = float(max(spreads)) if spreads else float("inf")
    return {"per_letter": per_letter, "C": C,
            "passes": bool(np.isfinite(C) and C >= 1.0)}


def periodic_gibbs_ratios(m, length):
    """All Gibbs ratios of periodic words of exact length ``length``
    (literal enumeration; used as an oracle against the tropical audit)."""
    if length > 12:
        raise BudgetError("enumeration capped at length 12")
    k = m.shift.n_letters()
    out = []

    def rec(word):
        if len(word) == length:
            if m.P[word[-1], word[0]] <= 0:
                return
            logm = np.log(m.p[word[0]])
            for a, b in zip(word, word[1:]):
                logm += np.log(m.P[a, b])
            s = sum(m.shift.potential[a] for a in word)
            out.append(float(np.exp(logm - s + length * m.pressure)))
            return
        last = word[-1]
        for b in range(k):
            if m.P[last, b] > 0:
                rec(word + [b])

    for a in range(k):
        if m.p[a] > 0:
            rec([a])
    return out


def correlation_decay(m, f, g, nmax):
    """cov_n = E[f(x_0) g(x_n)] - E f E g under the stationary chain, with a
    fitted exponential decay rate and the spectral oracle log(rho2/rho)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    p, P = m.p, m.P
    mean_f = float(p @ f)
    mean_g = float(p @ g)
    covs = []
    vec = g.copy()
    covs.append(float(p @ (f * vec)) - mean_f * mean_g)
    for _ in range(nmax):
        vec = P @ vec
        covs.append(float(p @ (f * vec)) - mean_f * mean_g)

    # spectral oracle: second modulus eigenvalue of P (dense solve)
    eigs = np.sort(np.abs(np.linalg.eigvals(P)))[::-1]
    rho2 = float(eigs[1]) if len(eigs) > 1 else 0.0

    # fit |cov_n| ~ K * r^n over the indices where it is meaningfully nonzero
    mags = np.abs(np.array(covs))
    idx = np.nonzero(mags > 1e-13)[0]
    idx = idx[idx >= 1]
    if len(idx) >= 2:
        slope = np.polyfit(idx, np.log(mags[idx]), 1)[0]
        rate = float(np.exp(slope))
    else:
        rate = 0.0
    return {"cov": covs, "fitted_rate": rate, "spectral_rate": rho2}


def brute_force_equilibrium(shift, n_starts=32, seed=12345):
    """Independent variational oracle: maximize h + int phi over stochastic
    matrices compatible with the SFT, from random starts.

    Rows are parameterized by softmax over the allowed entries and the
    objective h(p) + p.phi (p the stationary vector) is ascended with
    scipy's L-BFGS using an analytic gradient through the stationary
    distribution (fundamental-matrix formula).  Returns the best measure.
    """
    from scipy.optimize import minimize

    k = shift.n_letters()
    if k > 4:
        raise BudgetError("brute-force oracle capped at 4 letters")
    if not shift.is_irreducible():
        raise ReducibleError("transition structure is not strongly connected")
    allowed = [np.nonzero(shift.A[a] > 0)[0] for a in range(k)]
    sizes = [len(s) for s in allowed]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    dim = int(offsets[-1])
    phi = shift.potential

    def unpack(theta):
        P = np.zeros((k, k))
        for a in range(k):
            t = theta[offsets[a]:offsets[a + 1]]
            w = np.exp(t - t.max())
            P[a, allowed[a]] = w / w.sum()
        return P

    def stationary(P):
        # solve p(I - P) = 0, sum p = 1
        M = np.vstack([(np.eye(k) - P).T, np.ones(k)])
        b = np.zeros(k + 1)
        b[-1] = 1.0
        p, *_ = np.linalg.lstsq(M, b, rcond=None)
        return np.clip(p, 1e-300, None)

    def objective_grad(theta):
        P = unpack(theta)
        p = stationary(P)
        with np.errstate(divide="ignore"):
            logP = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), 0.0)
        U = np.where(P > 0, -logP, 0.0)
        # objective = sum_a p_a sum_b P_ab (-log P_ab) + sum_a p_a phi_a
        obj = float((p[:, None] * P * U).sum() + p @ phi)
        gvec = (P * U).sum(axis=1) + phi
        # gradient: d obj = sum de-contributions + (d p) . gvec, with
        # dp = p dP Z, Z the fundamental matrix of the chain
        Z = np.linalg.inv(np.eye(k) - P + np.outer(np.ones(k), p))
        # dObj/dP[a,b] = p_a (U[a,b] - 1) ... derivative of -PlogP is
        # -(logP + 1); plus stationary sensitivity p_a (Z g)_b
        Zg = Z @ gvec
        dP = np.zeros((k, k))
        for a in range(k):
            cols = allowed[a]
            dP[a, cols] = p[a] * ((U[a, cols] - 1.0) + Zg[cols])
        # chain rule through the softmax
        grad = np.zeros(dim)
        for a in range(k):
            cols = allowed[a]
            row = P[a, cols]
            d = dP[a, cols]
            grad[offsets[a]:offsets[a + 1]] = row * (d - (row @ d))
        return -obj, -grad

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_starts):
        theta0 = rng.normal(size=dim)
        res = minimize(objective_grad, theta0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-10})
        val = -res.fun
        if best is None or val > best[0]:
            best = (val, res.x)
    P = unpack(best[1])
    p = stationary(P)
    p = p / p.sum()
    h = _chain_entropy(p, P)
    return MarkovMeasure(shift, p, P, h, float(p @ phi), float(best[0]))
