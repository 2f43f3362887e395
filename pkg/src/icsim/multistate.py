"""M-state scheme: coincidence analysis, usefulness of transmission-function
sets, the tail-exhaustive lookahead, and its probability bounds.

The lookahead idea for general M: inside each block, both parties learn the
transmission tables of a short tail of p rounds (raw M-bit truth tables over
the side channel), then each simulates the trajectories of all M possible
states at the tail's start. If every trajectory ends in the same state, that
state is pinned down regardless of which trajectory was real. Whether the
trajectories merge is governed by the advance function's coincidence
structure (every state pair drivable to a common state within K steps) and
happens with probability bounded away from failure when tables are drawn
from a useful set.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .channel import ChannelModel
from .coding import CodeSpec, convey
from .protocol import (
    FiniteStateProtocol,
    Party,
    PartyView,
    Table,
    pad_protocol,
    party_view,
    run_protocol,
)
from .vertical import (
    LookaheadProvider,
    LookaheadResult,
    SimulationReport,
    VerticalSchedule,
    make_schedule,
    simulate_vertical,
)


# ---------------------------------------------------------------------------
# coincidence analysis of advance functions

@dataclass(frozen=True)
class CoincidenceCertificate:
    """Witnesses that every state pair can be driven to a common state.

    ``witnesses`` maps each unordered pair (j, j') with j < j' to two driving
    bit sequences of equal length ≤ K; feeding the first to a walk from j and
    the second to a walk from j' lands both on the same state. K is the worst
    case over pairs of the minimal such length.
    """

    K: int
    witnesses: dict[tuple[int, int], tuple[tuple[int, ...], tuple[int, ...]]]


def _drive(advance: Sequence[Sequence[int]], start: int, bits: Sequence[int]) -> int:
    s = start
    for b in bits:
        s = advance[s][b]
    return s


@lru_cache(maxsize=1024)
def _coincidence_search(advance: tuple[tuple[int, int], ...]) -> CoincidenceCertificate | None:
    M = len(advance)
    pairs = list(combinations(range(M), 2))
    witnesses = {}
    worst = 0
    for pair in pairs:
        # BFS on pair states, both walks driven by independently chosen bits
        parent: dict[tuple[int, int], tuple[tuple[int, int], int, int]] = {}
        frontier = [pair]
        seen = {pair}
        hit = None
        while frontier and hit is None:
            nxt = []
            for node in frontier:
                u, v = node
                for a, b in product((0, 1), repeat=2):
                    child = (advance[u][a], advance[v][b])
                    if child in seen:
                        continue
                    seen.add(child)
                    parent[child] = (node, a, b)
                    if child[0] == child[1]:
                        hit = child
                        break
                    nxt.append(child)
                if hit:
                    break
            frontier = nxt
        if hit is None:
            return None
        left: list[int] = []
        right: list[int] = []
        node = hit
        while node != pair:
            node, a, b = parent[node]
            left.append(a)
            right.append(b)
        left.reverse()
        right.reverse()
        witnesses[pair] = (tuple(left), tuple(right))
        worst = max(worst, len(left))
    return CoincidenceCertificate(worst, witnesses)


def is_coinciding(eta, M: int) -> CoincidenceCertificate | None:
    """Certificate with minimal-length witnesses, or None when some pair of
    states can never be driven to a common state."""
    advance = tuple(tuple(int(v) for v in row) for row in eta)
    if len(advance) != M or any(len(r) != 2 or not all(0 <= v < M for v in r) for r in advance):
        raise ValueError(f"advance table does not describe {M} states")
    if M == 1:
        return CoincidenceCertificate(0, {})
    return _coincidence_search(advance)


# ---------------------------------------------------------------------------
# usefulness of transmission-function sets

@dataclass(frozen=True)
class UsefulnessReport:
    useful: bool
    missing: tuple[tuple[int, int, int, int], ...]


def is_useful(function_set: Sequence[Table], M: int) -> UsefulnessReport:
    """Check that every output pattern (t, t') on every ordered pair of
    distinct states is realized by some table in the set."""
    tables = [tuple(int(b) for b in f) for f in function_set]
    if any(len(f) != M for f in tables):
        raise ValueError(f"every table must be defined on {M} states")
    missing = []
    for s, s2 in product(range(M), repeat=2):
        if s == s2:
            continue
        for t, t2 in product((0, 1), repeat=2):
            if not any(f[s] == t and f[s2] == t2 for f in tables):
                missing.append((s, s2, t, t2))
    return UsefulnessReport(not missing, tuple(missing))


def all_tables(M: int) -> tuple[Table, ...]:
    if M > 16:
        raise ValueError("full table enumeration supported for M <= 16")
    return tuple(tuple((x >> (M - 1 - i)) & 1 for i in range(M)) for x in range(1 << M))


def balanced_tables(M: int) -> tuple[Table, ...]:
    if M % 2:
        raise ValueError("balanced tables require an even number of states")
    return tuple(t for t in all_tables(M) if sum(t) == M // 2)


# ---------------------------------------------------------------------------
# probability bounds

def coincidence_bound(M: int, F_size: int, K: int, p: int) -> float:
    """Upper bound on one block's tail failing to merge all M trajectories.

    The tail is scanned in p/K disjoint K-round windows, each forcing one
    merge with probability at least F_size^-K, hence the requirement that K
    divide p (pad p up beforehand). p = 0 degenerates to the union bound
    over the M - 1 merges that never got a chance.
    """
    if M < 1 or F_size < 1 or K < 1:
        raise ValueError("M, F_size and K must be positive")
    if p == 0:
        return min(1.0, float(M - 1))
    if p < K:
        raise ValueError("tail must be at least K rounds")
    if p % K:
        raise ValueError("tail length must be a multiple of K")
    return min(1.0, (M - 1) * math.exp(-(F_size ** -K) * p / K))


def all_blocks_coincidence_bound(M: int, F_size: int, K: int, n: int) -> float:
    """Union bound over all sqrt(n) blocks, tail length n^(1/4)."""
    if n < 1:
        raise ValueError("n must be positive")
    return min(1.0, math.sqrt(n) * M * math.exp(-(F_size ** -K) * (n ** 0.25) / K))


# ---------------------------------------------------------------------------
# tail plans and the trajectory machinery

@dataclass(frozen=True)
class TailPlan:
    """How much of each block is simulated exhaustively and where.

    placement "last": the tail is the final p rounds of each block and yields
    the next block's initial state. placement "first": the tail is the
    opening p rounds, simulated for all M initial states and resolved by
    chaining at the end.
    """

    p: int
    placement: str
    K: int

    def __post_init__(self) -> None:
        if self.placement not in ("last", "first"):
            raise ValueError("placement must be 'last' or 'first'")
        if self.K < 1 or self.p < 1:
            raise ValueError("p and K must be positive")
        if self.p % self.K:
            raise ValueError("p must be a multiple of K")


def fourth_root_ceil(n: int) -> int:
    """Exact smallest integer r with r**4 >= n."""
    if n < 1:
        raise ValueError("n must be positive")
    r = max(1, round(n ** 0.25) - 2)
    while r ** 4 < n:
        r += 1
    return r


def make_tail_plan(n_padded: int, K: int, placement: str = "last") -> TailPlan:
    m = math.isqrt(n_padded)
    if m * m != n_padded:
        raise ValueError("tail plans are made for padded square lengths")
    p0 = fourth_root_ceil(n_padded)
    p = K * math.ceil(p0 / K)
    if p > m:
        raise ValueError(f"tail of {p} rounds does not fit in blocks of {m}")
    return TailPlan(p, placement, K)


def trajectories_coincide(eta, tables: Sequence[Table],
                          M: int) -> tuple[bool, tuple[int, ...]]:
    """Walk every possible initial state through the table sequence; report
    whether all finals agree, and the finals themselves."""
    finals = []
    for s0 in range(M):
        s = s0
        for table in tables:
            s = eta[s][table[s]]
        finals.append(s)
    return len(set(finals)) == 1, tuple(finals)


def coincidence_failure_trials(eta, function_set: Sequence[Table], p: int,
                               trials: int, base_seed: int) -> int:
    """Monte Carlo count of tails whose M trajectories fail to merge, with
    tables drawn i.i.d. uniform from the set, one seed per trial."""
    M = len(eta)
    adv = np.asarray(eta, dtype=np.int64)
    fset = np.asarray(function_set, dtype=np.int64)
    picks = np.stack([
        np.random.default_rng(base_seed + t).integers(0, len(fset), size=p)
        for t in range(trials)
    ])
    states = np.tile(np.arange(M), (trials, 1))
    for i in range(p):
        tables = fset[picks[:, i]]
        taus = np.take_along_axis(tables, states, axis=1)
        states = adv[states, taus]
    return int((states.min(axis=1) != states.max(axis=1)).sum())


# ---------------------------------------------------------------------------
# the tail-exhaustive scheme

def _tail_positions(m: int, plan: TailPlan) -> range:
    return range(m - plan.p + 1, m + 1) if plan.placement == "last" else range(1, plan.p + 1)


def _exchange_tail_tables(
    pp: FiniteStateProtocol,
    sched: VerticalSchedule,
    plan: TailPlan,
    ch: ChannelModel,
    side_code: CodeSpec,
    rng: np.random.Generator,
) -> tuple[dict[Party, list[list[Table]]], int, int]:
    """Each party sends raw M-bit truth tables for its rounds in every
    block's tail. Returns, per party, its assembled per-block tail tables
    (own rounds exact, counterpart rounds as decoded), plus the logical bits
    and channel uses spent."""
    M = pp.M
    m = sched.m
    parties = (Party.ALICE, Party.BOB)
    views = {q: party_view(pp, q) for q in parties}
    positions = list(_tail_positions(m, plan))
    own_pos = {q: [t for t in positions if t % 2 == q.parity] for q in parties}

    bits_used = 0
    channel_uses = 0
    heard: dict[Party, dict[tuple[int, int], Table]] = {}
    for k, sender in enumerate(parties):
        payload = [
            b
            for r in range(sched.rows)
            for t in own_pos[sender]
            for b in views[sender].table(r * m + t)
        ]
        transfer = convey(side_code, payload, ch, rng, matrix_seed=m + 5 + k)
        bits_used += len(payload)
        channel_uses += transfer.channel_uses
        decoded = {}
        idx = 0
        for r in range(sched.rows):
            for t in own_pos[sender]:
                decoded[(r, t)] = tuple(transfer.decoded[idx: idx + M])
                idx += M
        heard[sender.other] = decoded

    assembled: dict[Party, list[list[Table]]] = {}
    for q in parties:
        per_block = []
        for r in range(sched.rows):
            tables = []
            for t in positions:
                if t % 2 == q.parity:
                    tables.append(views[q].table(r * m + t))
                else:
                    tables.append(heard[q][(r, t)])
            per_block.append(tables)
        assembled[q] = per_block
    return assembled, bits_used, channel_uses


def tail_exhaustive_lookahead(p: FiniteStateProtocol, plan: TailPlan, ch: ChannelModel,
                              side_code: CodeSpec, rng: np.random.Generator) -> LookaheadResult:
    """Last-p placement: agree on every block's final state by simulating all
    M trajectories over the tail; block r+1's initial state is block r's
    common final. A block whose trajectories do not merge is a coincidence
    failure and aborts the run (reported, never silently wrong)."""
    sched = make_schedule(p.n)
    if sched.n_padded != p.n:
        raise ValueError("protocol length must be the padded square")
    if plan.placement != "last":
        raise ValueError("this lookahead uses a last-p tail plan")
    if is_coinciding(p.advance, p.M) is None:
        warnings.warn("advance function is not coinciding; merges are not guaranteed",
                      stacklevel=2)

    assembled, bits_used, channel_uses = _exchange_tail_tables(
        p, sched, plan, ch, side_code, rng)

    vectors: dict[Party, tuple[int, ...]] = {}
    bad: set[int] = set()
    for q, per_block in assembled.items():
        vec = [p.initial_state]
        for r in range(sched.rows - 1):
            ok, finals = trajectories_coincide(p.advance, per_block[r], p.M)
            if not ok:
                bad.add(r)
                vec.append(finals[0])
            else:
                vec.append(finals[0])
        vectors[q] = tuple(vec)

    failure = None
    if bad:
        failure = f"trajectories did not merge in blocks {sorted(bad)}"
    return LookaheadResult(vectors[Party.ALICE], vectors[Party.BOB],
                           bits_used, channel_uses, failure=failure, tail_len=plan.p)


def mstate_provider(side_code: CodeSpec, K: int | None = None) -> LookaheadProvider:
    def provide(pp: FiniteStateProtocol, sched: VerticalSchedule,
                ch: ChannelModel, rng: np.random.Generator) -> LookaheadResult:
        horizon = K
        if horizon is None:
            cert = is_coinciding(pp.advance, pp.M)
            if cert is None:
                return LookaheadResult((), (), 0, 0,
                                       failure="advance function is not coinciding")
            horizon = max(1, cert.K)
        plan = make_tail_plan(sched.n_padded, horizon, "last")
        return tail_exhaustive_lookahead(pp, plan, ch, side_code, rng)

    return provide


def simulate_mstate(p: FiniteStateProtocol, ch: ChannelModel, code_spec: CodeSpec,
                    side_spec: CodeSpec, placement: str,
                    rng: np.random.Generator, seed: int | None = None,
                    K: int | None = None) -> SimulationReport:
    """Tail-exhaustive simulation in either placement.

    last-p composes the lookahead with the vertical engine. first-p instead
    leaves the first p columns of every block untransmitted: both parties
    reconstruct them for all M initial states from the exchanged tail
    tables, transmit one transcript bit per row for the remaining columns,
    and resolve the actual trajectory by chaining block finals at the end.
    """
    if placement == "last":
        return simulate_vertical(p, ch, code_spec, mstate_provider(side_spec, K=K),
                                 rng, scheme="m-state-last", seed=seed,
                                 side_rate=side_spec.rate)
    if placement != "first":
        raise ValueError("placement must be 'last' or 'first'")

    sched = make_schedule(p.n)
    pp = pad_protocol(p, sched.n_padded)
    m = sched.m
    if K is None:
        cert = is_coinciding(pp.advance, pp.M)
        if cert is None:
            warnings.warn("advance function is not coinciding; merges are not guaranteed",
                          stacklevel=2)
        K = max(1, cert.K) if cert else 1
    plan = make_tail_plan(sched.n_padded, K, "first")

    assembled, lookahead_bits, lookahead_uses = _exchange_tail_tables(
        pp, sched, plan, ch, side_spec, rng)

    def report(alice_ok: bool, bob_ok: bool, vertical_uses: int,
               column_errors: tuple[bool, ...], failure: str | None,
               coincidence_ok: bool) -> SimulationReport:
        return SimulationReport(
            scheme="m-state-first",
            channel=ch.name,
            code=code_spec.name,
            seed=seed,
            n_logical=p.n,
            n_padded=sched.n_padded,
            m=m,
            rows=sched.rows,
            states=pp.M,
            channel_uses=vertical_uses + lookahead_uses,
            vertical_uses=vertical_uses,
            lookahead_uses=lookahead_uses,
            lookahead_bits=lookahead_bits,
            rate_target=code_spec.rate,
            side_rate=side_spec.rate,
            alice_correct=alice_ok,
            bob_correct=bob_ok,
            column_errors=column_errors,
            lookahead_failure=failure,
            coincidence_ok=coincidence_ok,
            tail_len=plan.p,
        )

    # every party simulates all M trajectories over the opening tail
    parties = (Party.ALICE, Party.BOB)
    trajectories: dict[Party, list[list[tuple[list[int], int]]]] = {}
    bad: set[int] = set()
    for q in parties:
        per_block = []
        for r in range(sched.rows):
            branches = []
            for s0 in range(pp.M):
                s = s0
                bits = []
                for table in assembled[q][r]:
                    tau = table[s]
                    bits.append(tau)
                    s = pp.advance[s][tau]
                branches.append((bits, s))
            finals = {s for _, s in branches}
            if len(finals) > 1:
                bad.add(r)
            per_block.append(branches)
        trajectories[q] = per_block

    if bad:
        failure = f"trajectories did not merge in blocks {sorted(bad)}"
        return report(False, False, 0, (), failure, False)

    views = {q: party_view(pp, q) for q in parties}
    merged = {q: [trajectories[q][r][0][1] for r in range(sched.rows)] for q in parties}
    suffix = {q: [[] for _ in range(sched.rows)] for q in parties}
    vertical_uses = 0
    column_errors = []
    for j in range(plan.p + 1, m + 1):
        sender = Party.ALICE if j % 2 else Party.BOB
        receiver = sender.other
        column = [
            views[sender].table(r * m + j)[merged[sender][r]]
            for r in range(sched.rows)
        ]
        transfer = convey(code_spec, column, ch, rng, matrix_seed=j)
        vertical_uses += transfer.channel_uses
        column_errors.append(not transfer.intact)
        for q, bits in ((sender, column), (receiver, transfer.decoded)):
            for r in range(sched.rows):
                b = int(bits[r])
                suffix[q][r].append(b)
                merged[q][r] = pp.advance[merged[q][r]][b]

    truth = run_protocol(pp).bits
    correct = {}
    for q in parties:
        out: list[int] = []
        s = pp.initial_state
        for r in range(sched.rows):
            bits, final = trajectories[q][r][s]
            out.extend(bits)
            out.extend(suffix[q][r])
            s = final
            for b in suffix[q][r]:
                s = pp.advance[s][b]
        correct[q] = tuple(out) == truth

    return report(correct[Party.ALICE], correct[Party.BOB], vertical_uses,
                  tuple(column_errors), None, True)
