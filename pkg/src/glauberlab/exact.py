"""Exact verification oracle: support enumeration, dense transition kernels,
distribution propagation, divergences, and the structural checks (detailed
balance, stochastic monotonicity, monotone systems, comparison of kernels,
exact mixing times)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ordercore import (STAR, Poset, contract, enumerate_up_sets, num_ones,
                        num_stars, state_str, stochastic_dominance)
from .models import ENUM_GUARD, LiftedModel, PinnedModel, pin, tilt

PROB_TOL = 1e-12
DRIFT_TOL = 1e-9
TV_TOL = 1e-10


@dataclass(frozen=True)
class EnumeratedSupport:
    """Lexicographically ordered support states with index lookup."""

    states: tuple

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    @property
    def size(self):
        return len(self.states)

    def index(self, state):
        return self._index[state]

    def __contains__(self, state):
        return state in self._index

    def poset(self) -> Poset:
        return Poset(self.states)


def enumerate_support(model, guard=ENUM_GUARD) -> EnumeratedSupport:
    return EnumeratedSupport(tuple(model.support_iter(guard=guard)))


@dataclass
class DistributionVector:
    support: EnumeratedSupport
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (self.support.size,):
            raise ValueError("length mismatch with support")
        if np.any(self.probs < -PROB_TOL) or abs(self.probs.sum() - 1) > PROB_TOL:
            raise ValueError("not a probability vector")


def stationary_distribution(model, support: EnumeratedSupport) -> np.ndarray:
    """Normalized weights over the enumerated support (log-stable)."""
    lws = np.array([model.log_weight(s) for s in support.states], dtype=float)
    w = np.exp(lws - lws.max())
    return w / w.sum()


def point_mass(support: EnumeratedSupport, state) -> np.ndarray:
    v = np.zeros(support.size)
    v[support.index(state)] = 1.0
    return v


@dataclass
class Kernel:
    support: EnumeratedSupport
    matrix: np.ndarray
    stationary: np.ndarray | None = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        k = self.support.size
        if self.matrix.shape != (k, k):
            raise ValueError("kernel shape mismatch")
        if np.any(self.matrix < -PROB_TOL):
            raise ValueError("negative transition probability")
        if np.max(np.abs(self.matrix.sum(axis=1) - 1)) > PROB_TOL:
            raise ValueError("rows do not sum to 1")

    def __matmul__(self, other):
        if isinstance(other, Kernel):
            return Kernel(self.support, self.matrix @ other.matrix,
                          stationary=self.stationary)
        return NotImplemented


# ---------------------------------------------------------------------------
# kernels


def glauber_kernel(model, support=None) -> Kernel:
    """Single-site heat-bath kernel: uniform site choice, conditional resample."""
    support = support or enumerate_support(model)
    n = model.n_vars
    k = support.size
    alpha = model.alphabet
    mat = np.zeros((k, k))
    for i, s in enumerate(support.states):
        for v in range(n):
            probs = model.conditional(s, v)
            t = list(s)
            for val, pr in zip(alpha, probs):
                if pr == 0.0:
                    continue
                t[v] = val
                mat[i, support.index(tuple(t))] += pr / n
    return Kernel(support, mat, stationary=stationary_distribution(model, support))


def site_glauber_kernel(model, v, support=None) -> Kernel:
    """The single-site kernel that always updates variable v."""
    support = support or enumerate_support(model)
    k = support.size
    alpha = model.alphabet
    mat = np.zeros((k, k))
    for i, s in enumerate(support.states):
        probs = model.conditional(s, v)
        t = list(s)
        for val, pr in zip(alpha, probs):
            if pr == 0.0:
                continue
            t[v] = val
            mat[i, support.index(tuple(t))] += pr
    return Kernel(support, mat, stationary=stationary_distribution(model, support))


def freeze_kernel(lifted: LiftedModel, support=None) -> Kernel:
    """Contract-then-lift kernel: from X, mass theta^{#1}(1-theta)^{#star} on
    every Y with the same contraction."""
    support = support or enumerate_support(lifted)
    theta = lifted.theta
    k = support.size
    mat = np.zeros((k, k))
    for i, s in enumerate(support.states):
        tau = contract(s)
        ones = [v for v in range(len(tau)) if tau[v] == 1]
        for choice in itertools.product((1, STAR), repeat=len(ones)):
            y = list(tau)
            pr = 1.0
            for v, c in zip(ones, choice):
                y[v] = c
                pr *= theta if c == 1 else 1 - theta
            mat[i, support.index(tuple(y))] += pr
    return Kernel(support, mat, stationary=stationary_distribution(lifted, support))


def _star_glauber_site_update(lifted, s, v):
    """Transition law at site v for the star-frozen dynamics: a star never
    moves; otherwise resample from the theta-tilted base conditional."""
    if s[v] == STAR:
        return ((STAR, 1.0),)
    q0, q1 = lifted.base.conditional(contract(s), v)
    z = q0 + lifted.theta * q1
    return ((0, q0 / z), (1, lifted.theta * q1 / z))


def star_glauber_kernel(lifted: LiftedModel, support=None) -> Kernel:
    support = support or enumerate_support(lifted)
    n = lifted.n_vars
    k = support.size
    mat = np.zeros((k, k))
    for i, s in enumerate(support.states):
        for v in range(n):
            t = list(s)
            for val, pr in _star_glauber_site_update(lifted, s, v):
                if pr == 0.0:
                    continue
                t[v] = val
                mat[i, support.index(tuple(t))] += pr / n
    return Kernel(support, mat, stationary=stationary_distribution(lifted, support))


def site_star_glauber_kernel(lifted: LiftedModel, v, support=None) -> Kernel:
    support = support or enumerate_support(lifted)
    k = support.size
    mat = np.zeros((k, k))
    for i, s in enumerate(support.states):
        t = list(s)
        for val, pr in _star_glauber_site_update(lifted, s, v):
            if pr == 0.0:
                continue
            t[v] = val
            mat[i, support.index(tuple(t))] += pr
    return Kernel(support, mat, stationary=stationary_distribution(lifted, support))


def fd_kernel(model, theta, support=None) -> Kernel:
    """Field dynamics: free every 0-site and each 1-site independently with
    probability theta, then resample the freed set from the tilted conditional.
    Exact sum over all freed sets; guarded to at most 20 variables."""
    if model.n_vars > 20:
        raise ValueError("field-dynamics kernel is guarded to 20 variables")
    support = support or enumerate_support(model)
    k = support.size
    tilted = tilt(model, theta)
    tilted_w = {s: math.exp(tilted.log_weight(s) or 0.0)
                if tilted.log_weight(s) is not None else 0.0
                for s in support.states}
    mat = np.zeros((k, k))
    for i, s in enumerate(support.states):
        ones = [v for v in range(model.n_vars) if s[v] == 1]
        for keep in itertools.product((0, 1), repeat=len(ones)):
            # kept 1-sites stay pinned at 1; everything else is resampled
            pinned = [v for v, kp in zip(ones, keep) if kp]
            pr_s = (theta ** (len(ones) - len(pinned))
                    * (1 - theta) ** len(pinned))
            idx = [j for j, t in enumerate(support.states)
                   if all(t[v] == 1 for v in pinned)]
            ws = np.array([tilted_w[support.states[j]] for j in idx])
            ws /= ws.sum()
            for j, w in zip(idx, ws):
                mat[i, j] += pr_s * w
    return Kernel(support, mat, stationary=stationary_distribution(model, support))


def algorithm_kernel_sequence(model, theta, t1, t2, steps=None):
    """Time-inhomogeneous kernels of the simulation run: at the start of each
    inner block the contract-then-lift kernel is prefixed.

    Returns (lifted_model, support, [Kernel for step 1..steps]).
    """
    lifted = LiftedModel(model, theta)
    support = enumerate_support(lifted)
    p_freeze = freeze_kernel(lifted, support)
    p_starg = star_glauber_kernel(lifted, support)
    both = p_freeze @ p_starg
    if steps is None:
        steps = t1 * t2
    seq = [both if t % t2 == 0 else p_starg for t in range(steps)]
    return lifted, support, seq


def modified_glauber_kernel_sequence(model, theta, t1, t2, steps=None):
    """Same block structure with the lifted Glauber kernel in place of the
    star-frozen one."""
    lifted = LiftedModel(model, theta)
    support = enumerate_support(lifted)
    p_freeze = freeze_kernel(lifted, support)
    p_gd = glauber_kernel(lifted, support)
    both = p_freeze @ p_gd
    if steps is None:
        steps = t1 * t2
    seq = [both if t % t2 == 0 else p_gd for t in range(steps)]
    return lifted, support, seq


def propagate(nu0: np.ndarray, kernels) -> list:
    """Left-multiply nu0 through the kernel sequence; returns [nu0, nu1, ...].

    Mass drift beyond 1e-9 aborts instead of renormalizing silently.
    """
    out = [np.asarray(nu0, dtype=float)]
    for ker in kernels:
        mat = ker.matrix if isinstance(ker, Kernel) else ker
        nxt = out[-1] @ mat
        if abs(nxt.sum() - 1.0) > DRIFT_TOL:
            raise ArithmeticError("propagation drifted off the simplex")
        out.append(nxt)
    return out


# ---------------------------------------------------------------------------
# pushforwards


def lift_pushforward(probs, bin_support: EnumeratedSupport, theta,
                     lifted_support: EnumeratedSupport) -> np.ndarray:
    """Analytic pushforward of a binary law under the randomized lift: each
    state fans out over its 1-coordinates with theta/(1-theta) weights."""
    out = np.zeros(lifted_support.size)
    for i, s in enumerate(bin_support.states):
        p = probs[i]
        if p == 0.0:
            continue
        ones = [v for v in range(len(s)) if s[v] == 1]
        for choice in itertools.product((1, STAR), repeat=len(ones)):
            y = list(s)
            pr = p
            for v, c in zip(ones, choice):
                y[v] = c
                pr *= theta if c == 1 else 1 - theta
            out[lifted_support.index(tuple(y))] += pr
    return out


def contract_pushforward(probs, lifted_support: EnumeratedSupport,
                         bin_support: EnumeratedSupport) -> np.ndarray:
    out = np.zeros(bin_support.size)
    for i, s in enumerate(lifted_support.states):
        out[bin_support.index(contract(s))] += probs[i]
    return out


# ---------------------------------------------------------------------------
# divergences and checks


def tv_distance(nu, mu) -> float:
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return 0.5 * np.abs(nu - mu).sum()


def kl_divergence(nu, mu) -> float:
    """KL(nu || mu) with 0 log 0 = 0; +inf if nu charges a mu-null state."""
    total = 0.0
    for a, b in zip(nu, mu):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        total += a * math.log(a / b)
    return total


def check_detailed_balance(kernel: Kernel, probs=None) -> float:
    """Max violation of mu(x)P(x,y) = mu(y)P(y,x) over all pairs."""
    mu = kernel.stationary if probs is None else np.asarray(probs, float)
    flux = mu[:, None] * kernel.matrix
    return float(np.max(np.abs(flux - flux.T)))


def check_stochastic_monotonicity(kernel: Kernel, poset: Poset = None,
                                  tol=PROB_TOL):
    """Rows at comparable states must be stochastically ordered.

    Returns (True, None) or (False, (state_lo, state_hi, up_set))."""
    poset = poset or kernel.support.poset()
    for i, j in poset.comparable_pairs():
        ok, wit = stochastic_dominance(kernel.matrix[i], kernel.matrix[j],
                                       poset, tol=tol)
        if not ok:
            return False, (poset.elements[i], poset.elements[j], wit)
    return True, None


def check_monotone_system(model, tol=PROB_TOL, max_vars=12):
    """Single-site conditionals must be stochastically increasing in the
    conditioning configuration, over all feasible full pinnings of the other
    coordinates.

    Returns (True, None) or (False, (v, state_lo, state_hi))."""
    if model.n_vars > max_vars:
        raise ValueError(f"guarded to {max_vars} variables")
    support = enumerate_support(model)
    alpha = model.alphabet
    chain = Poset(tuple((a,) for a in alpha))
    for v in range(model.n_vars):
        reps = {}
        for s in support.states:
            key = s[:v] + (None,) + s[v + 1:]
            reps.setdefault(key, s)
        keys = list(reps)
        for ka in keys:
            for kb in keys:
                if ka == kb:
                    continue
                if all(a <= b for a, b in zip(ka, kb) if a is not None):
                    pa = model.conditional(reps[ka], v)
                    pb = model.conditional(reps[kb], v)
                    ok, _ = stochastic_dominance(pa, pb, chain, tol=tol)
                    if not ok:
                        return False, (v, reps[ka], reps[kb])
    return True, None


def check_mc_leq(p: Kernel, q: Kernel, mu=None, poset: Poset = None,
                 tol=PROB_TOL, n_random=0, rng=None):
    """Comparison of kernels: nu P <=_sd nu Q for every nu whose density
    against mu is increasing.

    It suffices to test the extreme rays nu_U proportional to mu restricted to
    an up-set U, since every increasing-density nu is a mixture of these and
    dominance is preserved under mixtures.  Optionally cross-checks n_random
    random increasing-density nu as well.

    Returns (True, None) or (False, (up_set_or_probs, kind)).
    """
    mu = p.stationary if mu is None else np.asarray(mu, float)
    poset = poset or p.support.poset()
    for u in enumerate_up_sets(poset):
        mass = sum(mu[i] for i in u)
        if mass <= 0.0:
            continue
        nu = np.zeros(poset.size)
        for i in u:
            nu[i] = mu[i] / mass
        ok, _ = stochastic_dominance(nu @ p.matrix, nu @ q.matrix, poset,
                                     tol=tol)
        if not ok:
            return False, (u, "extreme-ray")
    if n_random:
        m = poset.leq_matrix()
        for _ in range(n_random):
            # random increasing density: positive mixture of up-set indicators
            dens = np.zeros(poset.size)
            for _ in range(3):
                i = rng.integers(poset.size)
                dens[np.nonzero(m[i])[0]] += rng.random()
            dens += rng.random() * 0.1
            nu = dens * mu
            if nu.sum() == 0:
                continue
            nu /= nu.sum()
            ok, _ = stochastic_dominance(nu @ p.matrix, nu @ q.matrix, poset,
                                         tol=tol)
            if not ok:
                return False, (nu, "random-increasing")
    return True, None


# ---------------------------------------------------------------------------
# mixing times


def exact_mixing_time(kernel: Kernel, x0=None, eps=0.25, cap=10 ** 6,
                      target=None) -> int:
    """Smallest t with TV(law at t, stationary) <= eps, by exact propagation.

    x0 is a start state (tuple) or None for the worst case over all starts.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0,1)")
    mu = kernel.stationary if target is None else np.asarray(target, float)
    if x0 is None:
        cur = np.eye(kernel.support.size)
        dist = lambda: max(tv_distance(row, mu) for row in cur)
    else:
        cur = point_mass(kernel.support, x0)
        dist = lambda: tv_distance(cur, mu)
    t = 0
    while dist() > eps:
        cur = cur @ kernel.matrix
        t += 1
        if t > cap:
            raise RuntimeError(f"mixing time exceeds the cap {cap}")
    return t


def tilted_mixing_time(model, theta, eps, cap=10 ** 6) -> int:
    """Worst Glauber mixing time of the tilted model over all feasible all-1
    pinnings, maximized over starting states."""
    support = enumerate_support(model)
    best = 0
    n = model.n_vars
    for r in range(n + 1):
        for lam_set in itertools.combinations(range(n), r):
            if not any(all(s[v] == 1 for v in lam_set) for s in support.states):
                continue
            m = tilt(model, theta)
            if lam_set:
                m = pin(m, {v: 1 for v in lam_set})
            ker = glauber_kernel(m)
            best = max(best, exact_mixing_time(ker, None, eps, cap=cap))
    return best


def two_state_mixing_time(a, b, pi1, x0_is_state1, eps) -> int:
    """Closed-form mixing of a 2-state chain with off-diagonal rates a, b:
    TV after t steps is |1-a-b|^t times the start's TV."""
    gap = abs(1.0 - a - b)
    d0 = abs((1.0 if x0_is_state1 else 0.0) - pi1)
    if d0 <= eps:
        return 0
    if gap == 0.0:
        return 1
    return math.ceil(math.log(eps / d0) / math.log(gap) - 1e-12)


# ---------------------------------------------------------------------------
# CSV export


def format_float(x) -> str:
    return format(float(x), ".17g")


def kernel_to_csv(kernel: Kernel) -> str:
    head = "state," + ",".join(state_str(s) for s in kernel.support.states)
    lines = [head]
    for s, row in zip(kernel.support.states, kernel.matrix):
        lines.append(state_str(s) + "," + ",".join(format_float(x) for x in row))
    return "\n".join(lines) + "\n"


def dist_to_csv(probs, support: EnumeratedSupport) -> str:
    lines = ["state,prob"]
    for s, x in zip(support.states, probs):
        lines.append(state_str(s) + "," + format_float(x))
    return "\n".join(lines) + "\n"
