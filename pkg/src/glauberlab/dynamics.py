"""Monte Carlo samplers: single-site Glauber, field dynamics, the
lift/contract simulation run, and censored Glauber, with deterministic
replayable trajectories."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .ordercore import STAR, contract, lift, state_str
from .models import tilt, pin

_SUPPORT_ASSERTS = False  # flip on to re-check support membership every step


def make_rng(seed, chain_index=0, purpose=""):
    """Derive an independent substream from (seed, chain index, purpose tag)."""
    tag = zlib.crc32(purpose.encode())
    ss = np.random.SeedSequence([int(seed) & (2 ** 64 - 1), int(chain_index), tag])
    return np.random.Generator(np.random.PCG64(ss))


def _sample_from(probs, rng):
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    return len(probs) - 1


@dataclass
class ChainRun:
    """A completed run: initial state, per-step assignment log, and the states
    recorded at requested times.  Replaying the log reproduces every recorded
    state exactly."""

    model: object
    x0: tuple
    seed: int
    steps: int
    recorded: dict = field(default_factory=dict)
    log: list = field(default_factory=list)  # entries (t, var, value)
    final: tuple = None

    def replay(self):
        """Recompute the recorded states from the assignment log alone."""
        state = list(self.x0)
        out = {}
        by_time = {}
        for t, v, val in self.log:
            by_time.setdefault(t, []).append((v, val))
        done = 0
        for t in sorted(self.recorded):
            for u in range(done + 1, t + 1):
                for v, val in by_time.get(u, ()):
                    state[v] = val
            done = max(done, t)
            out[t] = tuple(state)
        return out

    def dump_trajectory(self) -> str:
        lines = [f"{t}\t{state_str(s)}" for t, s in sorted(self.recorded.items())]
        return "\n".join(lines) + "\n"


def _check_support(model, state):
    if _SUPPORT_ASSERTS and model.log_weight(state) is None:
        raise AssertionError("chain left the support")


def glauber_run(model, x0, steps, seed, record_at=(), chain_index=0) -> ChainRun:
    """Heat-bath run: uniform site choice, exact conditional resample."""
    x0 = tuple(x0)
    if model.log_weight(x0) is None:
        raise ValueError("start state is outside the support")
    rng = make_rng(seed, chain_index, "glauber")
    record_at = set(record_at)
    run = ChainRun(model, x0, seed, steps)
    state = list(x0)
    alpha = model.alphabet
    if 0 in record_at:
        run.recorded[0] = x0
    n = model.n_vars
    for t in range(1, steps + 1):
        v = int(rng.integers(n))
        val = alpha[_sample_from(model.conditional(tuple(state), v), rng)]
        state[v] = val
        run.log.append((t, v, val))
        _check_support(model, tuple(state))
        if t in record_at:
            run.recorded[t] = tuple(state)
    run.final = tuple(state)
    return run


def _exact_slice_sample(model, theta, pinned_ones, rng):
    """Exact draw from the theta-tilted model with the given set pinned to 1."""
    m = tilt(model, theta)
    if pinned_ones:
        m = pin(m, {v: 1 for v in pinned_ones})
    states = list(m.support_iter())
    ws = np.array([m.weight(s) for s in states])
    ws /= ws.sum()
    return states[_sample_from(ws, rng)]


def field_dynamics_step(model, theta, x, rng, inner="exact"):
    """One field-dynamics transition: every 0-site is freed, each 1-site is
    freed independently with probability theta; the freed set is resampled
    from the tilted conditional, exactly or by inner Glauber steps."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0,1)")
    x = tuple(x)
    pinned = [v for v in range(model.n_vars)
              if x[v] == 1 and rng.random() >= theta]
    if inner == "exact":
        return _exact_slice_sample(model, theta, pinned, rng)
    kind, t2 = inner
    if kind != "glauber":
        raise ValueError("inner mode must be 'exact' or ('glauber', steps)")
    m = tilt(model, theta)
    if pinned:
        m = pin(m, {v: 1 for v in pinned})
    state = list(x)
    alpha = m.alphabet
    for _ in range(t2):
        v = int(rng.integers(m.n_vars))
        state[v] = alpha[_sample_from(m.conditional(tuple(state), v), rng)]
    return tuple(state)


def simulate_algorithm(model, theta, t1, t2, seed, record_at=(),
                       chain_index=0):
    """The lift/contract simulation run.

    Start at lift(1_V).  Each of the t1 phases contracts, re-lifts, freezes
    the star set, and performs t2 single-site steps: a uniformly chosen
    star site is left alone (the step is still consumed), any other site is
    resampled from the theta-tilted base conditional.  Returns
    (ChainRun over ternary states, final contracted sample).
    """
    ones = tuple([1] * model.n_vars)
    if model.log_weight(ones) is None:
        raise ValueError("infeasible start: the all-1 state has weight 0")
    if t1 < 1 or t2 < 1:
        raise ValueError("t1 and t2 must be at least 1")
    rng = make_rng(seed, chain_index, "simulate")
    record_at = set(record_at)
    state = list(lift(ones, theta, rng))
    run = ChainRun(model, tuple(state), seed, t1 * t2)
    if 0 in record_at:
        run.recorded[0] = tuple(state)
    n = model.n_vars
    t = 0
    for _ in range(t1):
        # the relift belongs to the next step, so recorded states at block
        # boundaries are the pre-relift ones; the log timestamps reflect that
        relift = lift(contract(tuple(state)), theta, rng)
        for v in range(n):
            if relift[v] != state[v]:
                run.log.append((t + 1, v, relift[v]))
        state = list(relift)
        for _ in range(t2):
            t += 1
            v = int(rng.integers(n))
            if state[v] != STAR:
                q0, q1 = model.conditional(contract(tuple(state)), v)
                z = q0 + theta * q1
                val = 0 if rng.random() < q0 / z else 1
                state[v] = val
                run.log.append((t, v, val))
            if t in record_at:
                run.recorded[t] = tuple(state)
    run.final = tuple(state)
    return run, contract(tuple(state))


@dataclass(frozen=True)
class Schedule:
    """State-independent censoring rule: step index -> allowed update set."""

    rule: object  # callable t -> frozenset of variable indices
    name: str = "custom"

    def allowed(self, t) -> frozenset:
        return self.rule(t)

    @classmethod
    def always(cls, n):
        full = frozenset(range(n))
        return cls(lambda t: full, name="always")

    @classmethod
    def never(cls):
        empty = frozenset()
        return cls(lambda t: empty, name="never")

    @classmethod
    def two_level(cls, left, right, period, seed):
        """Bipartite two-level schedule: for each block of `period` steps an
        outer left vertex is drawn (from the schedule's own stream, so the
        rule depends only on (t, seed)); the allowed set is that vertex plus
        the whole right side."""
        left = tuple(left)
        right = frozenset(right)
        rng = make_rng(seed, 0, "schedule")
        cache = []

        def rule(t):
            block = t // period
            while len(cache) <= block:
                cache.append(left[int(rng.integers(len(left)))])
            return frozenset([cache[block]]) | right

        return cls(rule, name="two-level")


def censored_glauber(model, x0, schedule: Schedule, steps, seed,
                     record_at=(), chain_index=0) -> ChainRun:
    """Glauber with censoring: the chosen site is resampled only when the
    schedule allows it at that step; disallowed picks leave the state as is."""
    x0 = tuple(x0)
    if model.log_weight(x0) is None:
        raise ValueError("start state is outside the support")
    rng = make_rng(seed, chain_index, "censored")
    record_at = set(record_at)
    run = ChainRun(model, x0, seed, steps)
    state = list(x0)
    if 0 in record_at:
        run.recorded[0] = x0
    alpha = model.alphabet
    n = model.n_vars
    for t in range(1, steps + 1):
        v = int(rng.integers(n))
        if v in schedule.allowed(t - 1):
            val = alpha[_sample_from(model.conditional(tuple(state), v), rng)]
            state[v] = val
            run.log.append((t, v, val))
        _check_support(model, tuple(state))
        if t in record_at:
            run.recorded[t] = tuple(state)
    run.final = tuple(state)
    return run
