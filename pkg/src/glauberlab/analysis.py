"""Quantitative independence diagnostics and bound formulas: influence
matrices, marginal stability, coupling independence (exact optimal transport
with Hamming cost), an entropic-independence witness search, piecewise
schedules with their exponential-decay constant, and fixed-point uniqueness
checks."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, asdict

import networkx as nx
import numpy as np

from .exact import enumerate_support, kl_divergence
from .ordercore import enumerate_up_sets, Poset

_TRANSPORT_SCALE = 10 ** 12


def _support_data(model):
    sup = enumerate_support(model)
    lws = np.array([model.log_weight(s) for s in sup.states], dtype=float)
    w = np.exp(lws - lws.max())
    return sup.states, w / w.sum()


def _conditional_law(states, probs, pins: dict):
    """Law over full states given a partial pinning; None if infeasible."""
    mask = np.array([all(s[v] == val for v, val in pins.items())
                     for s in states])
    mass = probs[mask].sum()
    if mass == 0.0:
        return None, None
    return [s for s, m in zip(states, mask) if m], probs[mask] / mass


def _marginal_one(states, probs, pins: dict, v):
    """P[coordinate v = 1 | pins]; None if the pinning is infeasible."""
    sub, p = _conditional_law(states, probs, pins)
    if sub is None:
        return None
    return float(sum(x for s, x in zip(sub, p) if s[v] == 1))


@dataclass
class InfluenceMatrix:
    matrix: np.ndarray
    pinning: dict
    include_diagonal: bool = True


def influence_matrix(model, pinning=None, include_diagonal=True) -> InfluenceMatrix:
    """Entry (u,v) = P[v=1 | pins, u=1] - P[v=1 | pins, u=0], set to 0 when
    either u-pinning is infeasible or v cannot take value 1.  The literal
    definition gives diagonal entries equal to 1; a flag drops them."""
    pinning = dict(pinning or {})
    n = model.n_vars
    if len(pinning) > n - 2:
        raise ValueError("pinning must leave at least two free variables")
    states, probs = _support_data(model)
    free = [v for v in range(n) if v not in pinning]
    mat = np.zeros((n, n))
    for u in free:
        m_u0 = _marginal_one(states, probs, pinning, u)
        if m_u0 is None or m_u0 in (0.0, 1.0):
            continue  # u is not decisive under this pinning
        for v in free:
            if v == u and not include_diagonal:
                continue
            m_v = _marginal_one(states, probs, pinning, v)
            if m_v is None or m_v == 0.0:
                continue
            hi = _marginal_one(states, probs, {**pinning, u: 1}, v)
            lo = _marginal_one(states, probs, {**pinning, u: 0}, v)
            if hi is None or lo is None:
                continue  # u is pinned de facto by the support
            mat[u, v] = hi - lo
    return InfluenceMatrix(mat, pinning, include_diagonal)


def sinf_norm(psi: InfluenceMatrix) -> float:
    return float(np.max(np.abs(psi.matrix).sum(axis=1)))


def max_sinf_norm(model, max_pin=None) -> float:
    """Max influence-matrix norm over all feasible pinnings leaving at least
    two free variables."""
    n = model.n_vars
    states, probs = _support_data(model)
    limit = n - 2 if max_pin is None else min(max_pin, n - 2)
    best = 0.0
    for r in range(limit + 1):
        for lam in itertools.combinations(range(n), r):
            for vals in itertools.product((0, 1), repeat=r):
                pins = dict(zip(lam, vals))
                if _conditional_law(states, probs, pins)[0] is None:
                    continue
                best = max(best, sinf_norm(influence_matrix(model, pins)))
    return best


def marginal_stability(model, max_vars=10) -> float:
    """Smallest K such that, for every feasible pinning tau on Lambda, every
    sub-pinning tau_S and every free v: odds(v | tau) <= K * odds(v | tau_S)
    and P[v=0 | tau] >= 1/K.  Returns math.inf when some conditional forces
    v to 1."""
    n = model.n_vars
    if n > max_vars:
        raise ValueError(f"guarded to {max_vars} variables")
    states, probs = _support_data(model)
    # odds[(pins as frozenset of (v,val), v)] computed lazily
    cache = {}

    def odds_and_p0(pins, v):
        key = (frozenset(pins.items()), v)
        if key not in cache:
            m1 = _marginal_one(states, probs, pins, v)
            cache[key] = None if m1 is None else (m1, 1.0 - m1)
        return cache[key]

    best = 1.0
    for r in range(n):
        for lam in itertools.combinations(range(n), r):
            for vals in itertools.product((0, 1), repeat=r):
                tau = dict(zip(lam, vals))
                for v in range(n):
                    if v in tau:
                        continue
                    got = odds_and_p0(tau, v)
                    if got is None:
                        continue
                    m1, m0 = got
                    if m0 == 0.0:
                        return math.inf
                    best = max(best, 1.0 / m0)
                    r_full = m1 / m0
                    for k in range(r):
                        for sub in itertools.combinations(lam, k):
                            tau_s = {u: tau[u] for u in sub}
                            s1, s0 = odds_and_p0(tau_s, v)
                            r_sub = s1 / s0 if s0 > 0 else math.inf
                            if r_full > 0:
                                if r_sub == 0.0:
                                    return math.inf
                                if r_sub is not math.inf:
                                    best = max(best, r_full / r_sub)
    return best


def _transport_cost(states_a, pa, states_b, pb) -> float:
    """Exact min-cost transport between two laws over full configurations,
    with Hamming cost; integer-scaled min-cost flow."""
    ia = [int(round(x * _TRANSPORT_SCALE)) for x in pa]
    ib = [int(round(x * _TRANSPORT_SCALE)) for x in pb]
    ia[int(np.argmax(pa))] += _TRANSPORT_SCALE - sum(ia)
    ib[int(np.argmax(pb))] += _TRANSPORT_SCALE - sum(ib)
    g = nx.DiGraph()
    for i, m in enumerate(ia):
        g.add_node(("a", i), demand=-m)
    for j, m in enumerate(ib):
        g.add_node(("b", j), demand=m)
    for i, sa in enumerate(states_a):
        for j, sb in enumerate(states_b):
            ham = sum(1 for x, y in zip(sa, sb) if x != y)
            g.add_edge(("a", i), ("b", j), weight=ham)
    flow = nx.min_cost_flow(g)
    cost = nx.cost_of_flow(g, flow)
    return cost / _TRANSPORT_SCALE


def coupling_independence(model, max_states=512) -> float:
    """Exact optimal value C: the worst (over pinnings and a discrepancy
    coordinate) expected Hamming distance of the best coupling between the
    two single-site conditionings."""
    n = model.n_vars
    states, probs = _support_data(model)
    best = 0.0
    for r in range(n):
        for lam in itertools.combinations(range(n), r):
            for vals in itertools.product((0, 1), repeat=r):
                pins = dict(zip(lam, vals))
                for i in range(n):
                    if i in pins:
                        continue
                    sub0, p0 = _conditional_law(states, probs, {**pins, i: 0})
                    sub1, p1 = _conditional_law(states, probs, {**pins, i: 1})
                    if sub0 is None or sub1 is None:
                        continue
                    if max(len(sub0), len(sub1)) > max_states:
                        raise ValueError("conditional support exceeds the guard")
                    best = max(best, _transport_cost(sub1, p1, sub0, p0))
    return best


def ei_witness(model, iterations=200, rng=None, restarts=4):
    """Search for a distribution nu maximizing
    sum_i KL(nu_i || mu_i) / KL(nu || mu): a constructive lower bound on the
    entropic-independence constant (never a certificate).

    Returns (best ratio, best nu as an array over the support)."""
    rng = rng or np.random.default_rng(0)
    states, mu = _support_data(model)
    n = model.n_vars
    k = len(states)
    ind = np.array([[1.0 if s[i] == 1 else 0.0 for i in range(n)]
                    for s in states])
    mu_marg = mu @ ind

    def ratio(nu):
        denom = kl_divergence(nu, mu)
        if not denom or denom < 1e-12 or math.isinf(denom):
            return None
        num = 0.0
        for i in range(n):
            m1 = min(1.0, max(0.0, float(nu @ ind[:, i])))
            num += kl_divergence((1 - m1, m1), (1 - mu_marg[i], mu_marg[i]))
        return num / denom

    candidates = [np.eye(k)[i] for i in range(k)]
    if k <= 22:
        poset = Poset(tuple(states))
        for u in enumerate_up_sets(poset):
            if not u:
                continue
            nu = np.zeros(k)
            for i in u:
                nu[i] = mu[i]
            candidates.append(nu / nu.sum())
    best_r, best_nu = 0.0, None
    for nu in candidates:
        r = ratio(nu)
        if r is not None and r > best_r:
            best_r, best_nu = r, nu
    for _ in range(restarts):
        nu = rng.dirichlet(np.ones(k))
        cur = ratio(nu)
        for _ in range(iterations):
            cand = nu * np.exp(0.3 * rng.standard_normal(k))
            cand /= cand.sum()
            r = ratio(cand)
            if r is not None and (cur is None or r > cur):
                nu, cur = cand, r
        if cur is not None and cur > best_r:
            best_r, best_nu = cur, nu
    return best_r, best_nu


# ---------------------------------------------------------------------------
# schedules and bound formulas


@dataclass(frozen=True)
class AlphaSchedule:
    """Piecewise-constant rate on [0, -log theta]: segments as (end, value)
    pairs with strictly increasing ends, the last end equal to -log theta."""

    theta: float
    segments: tuple  # ((t_end, value), ...)

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0,1)")
        length = -math.log(self.theta)
        prev = 0.0
        if not self.segments:
            raise ValueError("empty schedule")
        for end, val in self.segments:
            if val <= 0:
                raise ValueError("rate values must be positive")
            if end <= prev:
                raise ValueError("segment ends must increase")
            prev = end
        if abs(prev - length) > 1e-9 * max(1.0, length):
            raise ValueError("segments must cover [0, -log theta] exactly")

    def value_at(self, t):
        for end, val in self.segments:
            if t <= end:
                return val
        return self.segments[-1][1]

    def integral(self) -> float:
        total, start = 0.0, 0.0
        for end, val in self.segments:
            total += val * (end - start)
            start = end
        return total

    def breakpoints(self):
        return [end for end, _ in self.segments[:-1]]


def log_kappa(schedule: AlphaSchedule) -> float:
    """log of the decay constant: -4 * integral of the rate."""
    return -4.0 * schedule.integral()


def kappa(schedule: AlphaSchedule) -> float:
    try:
        return math.exp(log_kappa(schedule))
    except OverflowError:  # pragma: no cover - log_kappa is negative
        return 0.0


def t_bound(schedule: AlphaSchedule, mu_min: float, eps: float) -> float:
    """Step bound kappa^{-1} (log log 1/mu_min + log 1/(2 eps^2)) + 1;
    +inf if the exponential overflows."""
    if not 0 < mu_min < 1 or not 0 < eps < 1:
        raise ValueError("mu_min and eps must lie in (0,1)")
    try:
        inv = math.exp(-log_kappa(schedule))
    except OverflowError:
        return math.inf
    return inv * (math.log(math.log(1 / mu_min)) + math.log(1 / (2 * eps * eps))) + 1


def _clipped_two_piece(theta, t0_break, val_lo, val_hi):
    length = -math.log(theta)
    if t0_break <= 0:
        return AlphaSchedule(theta, ((length, val_hi),))
    if t0_break >= length:
        return AlphaSchedule(theta, ((length, val_lo),))
    return AlphaSchedule(theta, ((t0_break, val_lo), (length, val_hi)))


def rc_schedule(p_min, lambda_max, n):
    """Rate schedule for the flipped random cluster model:
    theta = p_min min(1e-7, (1-lambda_max)/27) / log n;
    rate 3(1-lambda_max)^-2 up to log(1/theta_0), then 5e4,
    with theta_0 = p_min (1-lambda_max)^2 / 2."""
    if not 0 < p_min < 1 or not 0 <= lambda_max < 1 or n < 2:
        raise ValueError("need p_min in (0,1), lambda_max in [0,1), n >= 2")
    theta = p_min * min(1e-7, (1 - lambda_max) / 27) / math.log(n)
    theta0 = 0.5 * p_min * (1 - lambda_max) ** 2
    sched = _clipped_two_piece(theta, -math.log(theta0),
                               3.0 * (1 - lambda_max) ** -2, 5e4)
    return theta, sched


def bhc_schedule(lam, delta_deg, n, delta):
    """Rate schedule for the bipartite hardcore left marginal:
    theta = lam / (e^9 (1+lam)^Delta Delta log n); rate 1e4 (1+lam)^{5 Delta}
    / delta up to log(1/theta_0) with theta_0 = lam e^{-e^9}, then twice 2e4
    (1+lam)^{5 Delta}."""
    if lam <= 0 or delta_deg < 1 or n < 2 or delta <= 0:
        raise ValueError("need lam > 0, delta_deg >= 1, n >= 2, delta > 0")
    theta = lam / (math.exp(9) * (1 + lam) ** delta_deg
                   * delta_deg * math.log(n))
    t0_break = math.exp(9) - math.log(lam)
    s5 = (1 + lam) ** (5 * delta_deg)
    sched = _clipped_two_piece(theta, t0_break, 1e4 * s5 / delta, 2e4 * s5)
    return theta, sched


def lambda_c(delta: int) -> float:
    if delta < 3:
        raise ValueError("defined for degree bounds >= 3")
    return (delta - 1) ** (delta - 1) / (delta - 2) ** delta


def uniqueness_check(lam, d, beta, w, delta):
    """Contraction test for F(x) = lam (1 + beta (1+x)^w)^(-d): F is strictly
    decreasing, so its fixed point on [0, lam] is unique; bisect to 1e-12 and
    require |F'(xhat)| <= 1 - delta.

    Returns (ok, xhat, fprime)."""
    if min(lam, d, beta, w) <= 0 or not 0 <= delta < 1:
        raise ValueError("bad parameters")

    def log_inner(x):
        # log(1 + beta (1+x)^w), stable for large w
        t = math.log(beta) + w * math.log1p(x)
        return t if t > 700 else math.log1p(math.exp(t))

    def safe_exp(t):
        if t > 700:
            return math.inf
        return 0.0 if t < -745 else math.exp(t)

    def f(x):
        return lam * safe_exp(-d * log_inner(x))

    lo, hi = 0.0, lam
    if f(lo) - lo < 0:
        raise RuntimeError("no sign change; cannot bisect")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) - mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    xhat = 0.5 * (lo + hi)
    log_abs_fp = (math.log(lam * d * beta * w) + (w - 1) * math.log1p(xhat)
                  - (d + 1) * log_inner(xhat))
    fp = -safe_exp(log_abs_fp)
    return abs(fp) <= 1 - delta, xhat, fp


def uniqueness_grid(lam, d, beta, delta, exps=range(-6, 13)):
    """Heuristic sweep: the contraction test on w in {2^k}; not exhaustive."""
    out = {}
    for k in exps:
        w = 2.0 ** k
        ok, xhat, fp = uniqueness_check(lam, d, beta, w, delta)
        out[w] = {"ok": ok, "fixed_point": xhat, "derivative": fp}
    return out


@dataclass
class IndependenceReport:
    sinf: float = None
    sinf_pinning: dict = None
    marginal_stability: float = None
    coupling: float = None
    ei_ratio: float = None
    ei_nu: list = None
    kappa: float = None
    log_kappa: float = None
    t_bound: float = None
    extras: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2, default=str)


def independence_report(model, rng=None, with_ei=True) -> IndependenceReport:
    rep = IndependenceReport()
    rep.sinf = max_sinf_norm(model)
    rep.marginal_stability = marginal_stability(model)
    rep.coupling = coupling_independence(model)
    if with_ei:
        r, nu = ei_witness(model, rng=rng)
        rep.ei_ratio = r
        rep.ei_nu = None if nu is None else [float(x) for x in nu]
    return rep
