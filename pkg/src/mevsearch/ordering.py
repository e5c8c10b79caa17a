"""Feasible block construction and ordering search.

The miner action model: starting from the pending mempool, a miner may
reorder transactions, censor them (drop any subset), and insert its own
template transactions at arbitrary positions, per the space's flags.  The
engine enumerates every feasible sequence exactly once (depth-first, sharing
state prefixes), evaluates an objective in skip-invalid mode (a user
transaction that fails under some ordering is censored-by-failure, not a dead
branch), and reduces to the best/worst value with a deterministic tie-break:
among equal values the lexicographically smallest item-index sequence wins,
so reports are identical for any worker count or partition shape.

Pruning collapses permutations within maximal runs of same-direction
exact-input swaps on the same pool into one representative ordered by mempool
index.  Constant-product math is only order-independent up to integer
rounding, so the search verifies every collapse: an inversion is skipped only
when swapping the adjacent pair provably leaves the pool state bit-identical
and both actors are single-shot accounts the objective ignores (their own
balances then never influence anything downstream).  Repeated identical
trades always collapse; distinct wei-scale trades collapse exactly when the
rounding happens to agree, which keeps the reduction lossless for any
objective.  The stateless enumeration API applies the syntactic rule only.

Instances too large to enumerate fall back to seeded uniform sampling of
orderings (Fisher-Yates shuffles, deduplicated) ; the original mempool order
is always evaluated first, so the reported best is never below the untouched
ordering's value.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from multiprocessing import get_context

from .state import (
    FeePolicy,
    MINER,
    ScenarioError,
    State,
    Swap,
    Tx,
    UnknownVenueError,
    apply_sequence,
    apply_tx,
)

BLOCK_BREAK = -1  # sequence-key marker between blocks of a k-block construction
BLOCK_BREAK_LABEL = "|"


@dataclass(frozen=True, slots=True)
class OrderingSpace:
    """The set of block sequences a miner can build from a mempool.

    With every flag off the only feasible sequence is the mempool's original
    order.  ``k`` is the number of consecutive blocks under construction;
    mempool transactions with ``arrival_block == w`` become schedulable in
    block ``w`` (0-based) and later.  Templates are the miner's own
    transactions, re-offered each block, each usable at most once per block.
    """

    mempool: tuple[Tx, ...]
    templates: tuple[Tx, ...] = ()
    allow_reorder: bool = True
    allow_censor: bool = False
    allow_insert: bool = False
    miner: str = MINER
    k: int = 1
    charge_fees: bool = False
    fee_token: str = ""

    def labeled(self) -> "OrderingSpace":
        """Fill in default labels (m0.., t0..) where missing."""
        mem = tuple(
            tx if tx.label else tx.with_label(f"m{i}") for i, tx in enumerate(self.mempool)
        )
        tpl = tuple(
            tx if tx.label else tx.with_label(f"t{i}") for i, tx in enumerate(self.templates)
        )
        return replace(self, mempool=mem, templates=tpl)

    def fee_policy(self) -> FeePolicy | None:
        if not self.charge_fees:
            return None
        if not self.fee_token:
            raise ScenarioError("charge_fees requires fee_token")
        return FeePolicy(self.miner, self.fee_token)


@dataclass(frozen=True, slots=True)
class SearchBudget:
    """Exhaustive coverage when the pruned space fits, else seeded sampling.

    ``tractability_threshold`` is the transaction count up to which the
    pruned space is counted (and fully explored when it fits in
    ``max_paths``); above it the engine samples ``max_paths`` orderings.
    """

    mode: str = "randomized"  # "exhaustive" forces full enumeration
    max_paths: int = 400_000
    seed: int = 0
    tractability_threshold: int = 9


@dataclass(frozen=True, slots=True)
class EvReport:
    """Search outcome: best (and optionally worst) value with witnesses."""

    best_value: int
    best_ordering: tuple[str, ...]
    paths_explored: int
    exhaustive: bool
    worst_value: int | None = None
    worst_ordering: tuple[str, ...] | None = None
    paths_total: int | None = None


@dataclass(frozen=True, slots=True)
class Partition:
    """One slice of the candidate stream: sequences whose first item index is
    in ``first_items`` (plus the empty sequence when ``own_root`` is set)."""

    first_items: tuple[int, ...]
    own_root: bool


# ---------------------------------------------------------------------------
# Item bookkeeping
# ---------------------------------------------------------------------------

def _items(space: OrderingSpace) -> tuple[Tx, ...]:
    return space.mempool + space.templates


def _run_key(tx: Tx, tracked: frozenset[str]):
    """Equivalence key for prunable swaps; None acts as a barrier."""
    a = tx.action
    if type(a) is Swap and not a.exact_out and a.amount is not None and tx.actor not in tracked:
        return (tx.venue, a.token_in, a.token_out)
    return None


def _guarded_tracked(items: tuple[Tx, ...], tracked: frozenset[str]) -> frozenset[str]:
    """Also treat multi-shot actors as tracked: an account with several
    transactions can gate later guards through its own balance, so its swaps
    must never be commuted away."""
    counts: dict[str, int] = {}
    for tx in items:
        counts[tx.actor] = counts.get(tx.actor, 0) + 1
    return tracked | {actor for actor, n in counts.items() if n > 1}


def _commutes(state: State, tx_p: Tx, tx_c: Tx) -> bool:
    """Would swapping this adjacent same-pool, same-direction pair leave the
    pool bit-identical?

    Both actors are single-shot and untracked, so only the pool's final
    reserves can influence anything downstream; validity of either swap is
    order-independent (neither touches the other's balance).
    """
    from .contracts import AmmPool, amm_swap_exact_in

    pool0 = state.contracts.get(tx_p.venue)
    if not isinstance(pool0, AmmPool):
        return True  # both orders are no-ops on a non-pool venue

    def step(pool, tx):
        a = tx.action
        if state.balances.get((tx.actor, a.token_in), 0) < a.amount:
            return pool
        res = amm_swap_exact_in(pool, a.token_in, a.amount)
        return pool if res is None else res[0]

    return step(step(pool0, tx_p), tx_c) == step(step(pool0, tx_c), tx_p)


def canonicalize(seq: tuple[int, ...], keys: list) -> tuple[int, ...]:
    """Sort each maximal run of equal non-None run keys by item index."""
    out: list[int] = []
    i, n = 0, len(seq)
    while i < n:
        j = i + 1
        k = keys[seq[i]] if seq[i] >= 0 else None
        if k is not None:
            while j < n and seq[j] >= 0 and keys[seq[j]] == k:
                j += 1
        run = sorted(seq[i:j])
        out.extend(run)
        i = j
    return tuple(out)


def _first_candidates(space: OrderingSpace, n_mempool: int, n_items: int) -> list[int]:
    """Feasible first item indices (the partitioning prefixes)."""
    first: list[int] = []
    if n_mempool:
        if space.allow_reorder or space.allow_censor:
            first.extend(range(n_mempool))
        else:
            first.append(0)
    if space.allow_insert:
        first.extend(range(n_mempool, n_items))
    return first


def partition(space: OrderingSpace, workers: int) -> list[Partition]:
    """Split the candidate stream into ``workers`` disjoint sub-spaces by
    first-position prefix (round-robin for balance); the union re-creates the
    full stream with no duplicates."""
    if workers < 1:
        raise ScenarioError("workers must be >= 1")
    space = space.labeled()
    n_mempool = sum(1 for tx in space.mempool if tx.arrival_block == 0)
    n_items = n_mempool + len(space.templates)
    first = _first_candidates(space, n_mempool, n_items)
    parts = []
    for w in range(workers):
        parts.append(Partition(tuple(first[w::workers]), own_root=(w == 0)))
    return parts


# ---------------------------------------------------------------------------
# Enumeration (single block)
# ---------------------------------------------------------------------------

def iter_sequences(
    space: OrderingSpace,
    pruning: bool = True,
    tracked: frozenset[str] = frozenset(),
    part: Partition | None = None,
):
    """Yield every feasible single-block sequence exactly once, as tuples of
    item indices (mempool 0..n-1 in original order, then templates).

    Applies the syntactic collapse rule (index-sorted runs of single-shot
    untracked same-direction swaps); the stateful search additionally
    verifies each collapse against the integer pool arithmetic.
    """
    space = space.labeled()
    if space.k != 1:
        raise ScenarioError("iter_sequences enumerates single-block spaces")
    mempool = [tx for tx in space.mempool if tx.arrival_block == 0]
    items = tuple(mempool) + space.templates
    n_mem = len(mempool)
    tracked = _guarded_tracked(items, tracked | {space.miner})
    keys = [_run_key(tx, tracked) if pruning else None for tx in items]
    reorder, censor, insert = space.allow_reorder, space.allow_censor, space.allow_insert
    first_filter = set(part.first_items) if part is not None else None

    seq: list[int] = []

    def walk(mem_rem: tuple[int, ...], tpl_rem: tuple[int, ...], prev_key, prev_idx: int):
        if censor or not mem_rem:
            yield tuple(seq)
        at_root = not seq
        if mem_rem:
            choices = range(len(mem_rem)) if (reorder or censor) else range(1)
            for j in choices:
                idx = mem_rem[j]
                if at_root and first_filter is not None and idx not in first_filter:
                    continue
                key = keys[idx]
                if key is not None and key == prev_key and idx < prev_idx:
                    continue
                if reorder:
                    nxt = mem_rem[:j] + mem_rem[j + 1:]
                else:
                    nxt = mem_rem[j + 1:]  # earlier ones censored for good
                seq.append(idx)
                yield from walk(nxt, tpl_rem, key, idx)
                seq.pop()
        if insert:
            for j in range(len(tpl_rem)):
                idx = tpl_rem[j]
                if at_root and first_filter is not None and idx not in first_filter:
                    continue
                key = keys[idx]
                if key is not None and key == prev_key and idx < prev_idx:
                    continue
                seq.append(idx)
                yield from walk(mem_rem, tpl_rem[:j] + tpl_rem[j + 1:], key, idx)
                seq.pop()

    root = walk(tuple(range(n_mem)), tuple(range(n_mem, len(items))), None, -1)
    if part is not None and not part.own_root:
        skipped_root = False
        for s in root:
            if not s and not skipped_root:
                skipped_root = True
                continue
            yield s
    else:
        yield from root


def count_sequences(
    space: OrderingSpace, pruning: bool = True, tracked: frozenset[str] = frozenset()
) -> int:
    """Number of feasible (pruned) sequences of a single-block space."""
    return sum(1 for _ in iter_sequences(space, pruning, tracked))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

class _OverBudget(Exception):
    """Raised by a capped exhaustive attempt when the space is too large."""


class _Reducer:
    """Deterministic max/min fold over (value, sequence-key) pairs."""

    __slots__ = ("best", "worst", "paths", "want_worst", "cap")

    def __init__(self, want_worst: bool, cap: int | None = None):
        self.best = None  # (value, key, labels)
        self.worst = None
        self.paths = 0
        self.want_worst = want_worst
        self.cap = cap

    def offer(self, value: int, key: tuple[int, ...], labels: tuple[str, ...]) -> None:
        self.paths += 1
        if self.cap is not None and self.paths > self.cap:
            raise _OverBudget
        b = self.best
        if b is None or value > b[0] or (value == b[0] and key < b[1]):
            self.best = (value, key, labels)
        if self.want_worst:
            w = self.worst
            if w is None or value < w[0] or (value == w[0] and key < w[1]):
                self.worst = (value, key, labels)

    def merge(self, other: "_Reducer") -> None:
        self.paths += other.paths
        for cand in (other.best,):
            if cand is not None:
                b = self.best
                if b is None or cand[0] > b[0] or (cand[0] == b[0] and cand[1] < b[1]):
                    self.best = cand
        if self.want_worst and other.worst is not None:
            w = self.worst
            cand = other.worst
            if w is None or cand[0] < w[0] or (cand[0] == w[0] and cand[1] < w[1]):
                self.worst = cand


def _labels_for(items: tuple[Tx, ...], key: tuple[int, ...]) -> tuple[str, ...]:
    return tuple(BLOCK_BREAK_LABEL if i == BLOCK_BREAK else items[i].label for i in key)


def _dfs_block(
    state: State,
    items: tuple[Tx, ...],
    n_mem: int,
    keys: list,
    space: OrderingSpace,
    objective,
    reducer: _Reducer,
    fee_policy: FeePolicy | None,
    part: Partition | None = None,
    prefix: tuple[int, ...] = (),
    max_len: int | None = None,
) -> None:
    """Exhaustive skip-invalid DFS over one block, prefix-sharing states.

    ``part`` restricts first choices (the public partition contract);
    ``prefix`` forces an initial choice sequence and ``max_len`` caps the
    sequence length (the executor's internal work units).
    """
    reorder, censor, insert = space.allow_reorder, space.allow_censor, space.allow_insert
    value_of = objective.value
    seq: list[int] = []
    first_filter = set(part.first_items) if part is not None else None
    eval_root = part.own_root if part is not None else not prefix

    def walk(
        st: State,
        mem_rem: tuple[int, ...],
        tpl_rem: tuple[int, ...],
        prev_key,
        prev_idx: int,
        prev_state: State | None,
    ):
        if censor or not mem_rem:
            if seq or eval_root:
                reducer.offer(value_of(st), tuple(seq), _labels_for(items, tuple(seq)))
        if max_len is not None and len(seq) >= max_len:
            return
        at_root = not seq
        if mem_rem:
            choices = range(len(mem_rem)) if (reorder or censor) else range(1)
            for j in choices:
                idx = mem_rem[j]
                if at_root and first_filter is not None and idx not in first_filter:
                    continue
                key = keys[idx]
                if (
                    key is not None
                    and key == prev_key
                    and idx < prev_idx
                    and _commutes(prev_state, items[prev_idx], items[idx])
                ):
                    continue
                nxt_rem = mem_rem[:j] + mem_rem[j + 1:] if reorder else mem_rem[j + 1:]
                try:
                    nxt_state = apply_tx(st, items[idx], fee_policy)
                except UnknownVenueError:
                    nxt_state = None
                seq.append(idx)
                walk(nxt_state if nxt_state is not None else st, nxt_rem, tpl_rem, key, idx, st)
                seq.pop()
        if insert:
            for j in range(len(tpl_rem)):
                idx = tpl_rem[j]
                if at_root and first_filter is not None and idx not in first_filter:
                    continue
                key = keys[idx]
                if (
                    key is not None
                    and key == prev_key
                    and idx < prev_idx
                    and _commutes(prev_state, items[prev_idx], items[idx])
                ):
                    continue
                try:
                    nxt_state = apply_tx(st, items[idx], fee_policy)
                except UnknownVenueError:
                    nxt_state = None
                seq.append(idx)
                walk(
                    nxt_state if nxt_state is not None else st,
                    mem_rem,
                    tpl_rem[:j] + tpl_rem[j + 1:],
                    key,
                    idx,
                    st,
                )
                seq.pop()

    mem_rem = tuple(range(n_mem))
    tpl_rem = tuple(range(n_mem, len(items)))
    st = state
    prev_key, prev_idx = None, -1
    prev_state: State | None = None
    for idx in prefix:
        if idx < n_mem:
            if reorder:
                pos = mem_rem.index(idx)
                mem_rem = mem_rem[:pos] + mem_rem[pos + 1:]
            else:
                pos = mem_rem.index(idx)
                mem_rem = mem_rem[pos + 1:]
        else:
            pos = tpl_rem.index(idx)
            tpl_rem = tpl_rem[:pos] + tpl_rem[pos + 1:]
        prev_state = st
        try:
            nxt = apply_tx(st, items[idx], fee_policy)
        except UnknownVenueError:
            nxt = None
        if nxt is not None:
            st = nxt
        seq.append(idx)
        prev_key, prev_idx = keys[idx], idx
    walk(st, mem_rem, tpl_rem, prev_key, prev_idx, prev_state)


def _second_choices_for(
    space: OrderingSpace,
    items: tuple[Tx, ...],
    n_mem: int,
    keys: list,
    first: int,
    state: State,
) -> list[int]:
    """Feasible second items after ``first``, honoring flags and the
    verified pruning rule (the root state is the verification context)."""
    n_items = len(items)
    out: list[int] = []
    reorder, censor, insert = space.allow_reorder, space.allow_censor, space.allow_insert
    if first < n_mem:
        if reorder:
            mem_candidates = [i for i in range(n_mem) if i != first]
        elif censor:
            mem_candidates = list(range(first + 1, n_mem))
        else:
            mem_candidates = [first + 1] if first + 1 < n_mem else []
    else:
        if reorder or censor:
            mem_candidates = list(range(n_mem))
        else:
            mem_candidates = [0] if n_mem else []
    if insert:
        mem_candidates += [i for i in range(n_mem, n_items) if i != first]
    for idx in mem_candidates:
        key = keys[idx]
        if (
            key is not None
            and key == keys[first]
            and idx < first
            and _commutes(state, items[first], items[idx])
        ):
            continue
        out.append(idx)
    return out


_WORKER_SHARED = None


def _init_worker(shared) -> None:
    global _WORKER_SHARED
    _WORKER_SHARED = shared


def _unit_task(unit) -> tuple:
    prefix, max_len = unit
    state, space, objective, pruning, want_worst = _WORKER_SHARED
    return _search_part((state, space, objective, pruning, None, prefix, max_len, want_worst, None))


def _search_part(args) -> tuple | None:
    """Worker entry: exhaustive DFS over one slice (picklable args).

    Returns ``None`` when a path cap is given and the slice exceeds it.
    """
    state, space, objective, pruning, part, prefix, max_len, want_worst, cap = args
    space = space.labeled()
    mempool = tuple(tx for tx in space.mempool if tx.arrival_block == 0)
    items = mempool + space.templates
    tracked = _guarded_tracked(items, objective.tracked | {space.miner})
    keys = [_run_key(tx, tracked) if pruning else None for tx in items]
    reducer = _Reducer(want_worst, cap=cap)
    try:
        _dfs_block(
            state,
            items,
            len(mempool),
            keys,
            space,
            objective,
            reducer,
            space.fee_policy(),
            part=part,
            prefix=prefix,
            max_len=max_len,
        )
    except _OverBudget:
        return None
    return reducer.best, reducer.worst, reducer.paths


def _exhaustive_single(
    state: State,
    space: OrderingSpace,
    objective,
    pruning: bool,
    want_worst: bool,
    workers: int,
) -> _Reducer:
    reducer = _Reducer(want_worst)
    if workers <= 1:
        best, worst, paths = _search_part(
            (state, space, objective, pruning, None, (), None, want_worst, None)
        )
        reducer.best, reducer.worst, reducer.paths = best, worst, paths
        return reducer

    # Work units at depth-2 prefixes load-balance far better than root-level
    # partitions; one extra unit covers the sequences shorter than 2 items.
    mempool = tuple(tx for tx in space.mempool if tx.arrival_block == 0)
    items = mempool + space.templates
    n_mem = len(mempool)
    tracked = _guarded_tracked(items, objective.tracked | {space.miner})
    keys = [_run_key(tx, tracked) if pruning else None for tx in items]
    # Sequences of length <= 1 belong to the first unit; every longer
    # sequence belongs to exactly one depth-2 prefix.
    units: list[tuple] = [((), 1)]
    for first in _first_candidates(space, n_mem, len(items)):
        for second in _second_choices_for(space, items, n_mem, keys, first, state):
            units.append(((first, second), None))

    shared = (state, space, objective, pruning, want_worst)
    pool_size = max(1, min(workers, len(units), os.cpu_count() or 1))
    ctx = get_context("fork")
    with ProcessPoolExecutor(
        max_workers=pool_size, mp_context=ctx, initializer=_init_worker, initargs=(shared,)
    ) as pool:
        results = list(pool.map(_unit_task, units, chunksize=1))
    for best, worst, paths in results:
        other = _Reducer(want_worst)
        other.best, other.worst, other.paths = best, worst, paths
        reducer.merge(other)
    return reducer


# ---------------------------------------------------------------------------
# Randomized sampling
# ---------------------------------------------------------------------------

def _sample_sequences(
    space: OrderingSpace,
    items: tuple[Tx, ...],
    n_mem: int,
    budget: SearchBudget,
) -> list[tuple[int, ...]]:
    """Distinct orderings sampled uniformly: identity first, then seeded
    Fisher-Yates shuffles, without replacement."""
    rng = random.Random(budget.seed)
    identity = tuple(range(n_mem))
    seen = {identity}
    out = [identity]
    attempts = 0
    max_attempts = max(50 * budget.max_paths, 1000)
    idx_mem = list(range(n_mem))
    idx_tpl = list(range(n_mem, len(items)))
    while len(out) < budget.max_paths and attempts < max_attempts:
        attempts += 1
        chosen = list(idx_mem) if not space.allow_censor else [
            i for i in idx_mem if rng.getrandbits(1)
        ]
        if space.allow_insert and idx_tpl:
            chosen += [i for i in idx_tpl if rng.getrandbits(1)]
        rng.shuffle(chosen)
        if not space.allow_reorder:
            # keep mempool items in original relative order, templates where they fell
            mem_sorted = iter(sorted(i for i in chosen if i < n_mem))
            chosen = [next(mem_sorted) if i < n_mem else i for i in chosen]
        seq = tuple(chosen)
        if seq not in seen:
            seen.add(seq)
            out.append(seq)
    return out


def _evaluate_sequences(
    state: State,
    space: OrderingSpace,
    items: tuple[Tx, ...],
    seqs: list[tuple[int, ...]],
    objective,
    want_worst: bool,
) -> _Reducer:
    reducer = _Reducer(want_worst)
    fee_policy = space.fee_policy()
    for seq in seqs:
        txs = [items[i] for i in seq]
        res = apply_sequence(state, txs, "skip_invalid", fee_policy)
        reducer.offer(objective.value(res.state), seq, _labels_for(items, seq))
    return reducer


# ---------------------------------------------------------------------------
# Multi-block construction
# ---------------------------------------------------------------------------

def _dfs_k_blocks(
    state: State,
    space: OrderingSpace,
    objective,
    pruning: bool,
    reducer: _Reducer,
) -> None:
    """Exact joint search over k blocks with arrival waves.

    Transactions become schedulable in their arrival block; closing a block
    advances the block number, re-offers the miner templates, and admits the
    next wave.  Without censoring, every admitted transaction must be placed
    by the final block's close.
    """
    space = space.labeled()
    k = space.k
    waves: dict[int, list[int]] = {}
    mempool = space.mempool
    for i, tx in enumerate(mempool):
        if tx.arrival_block < k:
            waves.setdefault(tx.arrival_block, []).append(i)
    items = mempool + space.templates
    n_mem = len(mempool)
    tracked = _guarded_tracked(items, objective.tracked | {space.miner})
    keys = [_run_key(tx, tracked) if pruning else None for tx in items]
    reorder, censor, insert = space.allow_reorder, space.allow_censor, space.allow_insert
    fee_policy = space.fee_policy()
    tpl_all = tuple(range(n_mem, len(items)))
    value_of = objective.value
    seq: list[int] = []

    def walk(st, block, mem_rem, tpl_rem, prev_key, prev_idx, prev_state):
        # close current block
        if censor or not mem_rem or block + 1 < k:
            if block + 1 == k:
                if censor or not mem_rem:
                    reducer.offer(value_of(st), tuple(seq), _labels_for(items, tuple(seq)))
            else:
                nxt_state = st.with_block(st.block_number + 1)
                nxt_rem = mem_rem + tuple(waves.get(block + 1, ()))
                seq.append(BLOCK_BREAK)
                walk(nxt_state, block + 1, nxt_rem, tpl_all, None, -1, None)
                seq.pop()
        if mem_rem:
            choices = range(len(mem_rem)) if (reorder or censor) else range(1)
            for j in choices:
                idx = mem_rem[j]
                key = keys[idx]
                if (
                    key is not None
                    and key == prev_key
                    and idx < prev_idx
                    and _commutes(prev_state, items[prev_idx], items[idx])
                ):
                    continue
                nxt_rem = mem_rem[:j] + mem_rem[j + 1:] if reorder else mem_rem[j + 1:]
                try:
                    nxt = apply_tx(st, items[idx], fee_policy)
                except UnknownVenueError:
                    nxt = None
                seq.append(idx)
                walk(nxt if nxt is not None else st, block, nxt_rem, tpl_rem, key, idx, st)
                seq.pop()
        if insert:
            for j in range(len(tpl_rem)):
                idx = tpl_rem[j]
                key = keys[idx]
                if (
                    key is not None
                    and key == prev_key
                    and idx < prev_idx
                    and _commutes(prev_state, items[prev_idx], items[idx])
                ):
                    continue
                try:
                    nxt = apply_tx(st, items[idx], fee_policy)
                except UnknownVenueError:
                    nxt = None
                seq.append(idx)
                walk(nxt if nxt is not None else st, block, mem_rem,
                     tpl_rem[:j] + tpl_rem[j + 1:], key, idx, st)
                seq.pop()

    walk(state, 0, tuple(waves.get(0, ())), tpl_all, None, -1, None)


def _greedy_k_blocks(
    state: State,
    space: OrderingSpace,
    objective,
    budget: SearchBudget,
    pruning: bool,
    workers: int,
) -> tuple[EvReport, list[int]]:
    """Greedy per-block concatenation; returns the report and the cumulative
    objective value after each block (used by the weighted-MEV series)."""
    space = space.labeled()
    pending: list[Tx] = []
    labels: list[str] = []
    paths = 0
    per_block: list[int] = []
    current = state
    for b in range(space.k):
        pending += [tx for tx in space.mempool if tx.arrival_block == b]
        sub = replace(space, mempool=tuple(pending), k=1)
        rep = search(sub, budget, objective, state=current, pruning=pruning, workers=workers)
        paths += rep.paths_explored
        chosen = [lbl for lbl in rep.best_ordering]
        by_label = {tx.label: tx for tx in sub.labeled().mempool + sub.labeled().templates}
        txs = [by_label[lbl] for lbl in chosen]
        res = apply_sequence(current, txs, "skip_invalid", space.fee_policy())
        current = res.state.with_block(res.state.block_number + 1)
        chosen_set = set(chosen)
        pending = [tx for tx in sub.labeled().mempool if tx.label not in chosen_set]
        if b:
            labels.append(BLOCK_BREAK_LABEL)
        labels.extend(chosen)
        per_block.append(objective.value(current))
    report = EvReport(
        best_value=per_block[-1] if per_block else objective.value(current),
        best_ordering=tuple(labels),
        paths_explored=paths,
        exhaustive=False,
    )
    return report, per_block


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def search(
    space: OrderingSpace,
    budget: SearchBudget,
    objective,
    state: State,
    pruning: bool = True,
    want_worst: bool = False,
    workers: int = 1,
) -> EvReport:
    """Best (and optionally worst) objective value over the feasible space.

    Exhaustive whenever ``budget`` allows full coverage of the pruned space;
    otherwise seeded uniform sampling without replacement.  Reports are
    bit-identical for any ``workers`` value.
    """
    space = space.labeled()
    if budget.mode not in ("exhaustive", "randomized"):
        raise ScenarioError(f"unknown budget mode: {budget.mode!r}")

    if space.k > 1:
        if budget.mode == "exhaustive":
            reducer = _Reducer(want_worst)
            _dfs_k_blocks(state, space, objective, pruning, reducer)
            best, worst = reducer.best, reducer.worst
            return EvReport(
                best_value=best[0],
                best_ordering=best[2],
                paths_explored=reducer.paths,
                exhaustive=True,
                worst_value=worst[0] if worst else None,
                worst_ordering=worst[2] if worst else None,
                paths_total=reducer.paths,
            )
        report, _ = _greedy_k_blocks(state, space, objective, budget, pruning, workers)
        return report

    mempool = tuple(tx for tx in space.mempool if tx.arrival_block == 0)
    items = mempool + space.templates

    if budget.mode == "exhaustive":
        reducer = _exhaustive_single(state, space, objective, pruning, want_worst, workers)
        best, worst = reducer.best, reducer.worst
        return EvReport(
            best_value=best[0],
            best_ordering=best[2],
            paths_explored=reducer.paths,
            exhaustive=True,
            worst_value=worst[0] if worst else None,
            worst_ordering=worst[2] if worst else None,
            paths_total=reducer.paths,
        )

    # Randomized budget: tractable instances get one capped exhaustive
    # attempt; if the pruned space fits in max_paths the result is exact.
    if len(items) <= budget.tractability_threshold:
        attempt = _search_part(
            (state, space, objective, pruning, None, (), None, want_worst, budget.max_paths)
        )
        if attempt is not None:
            best, worst, paths = attempt
            return EvReport(
                best_value=best[0],
                best_ordering=best[2],
                paths_explored=paths,
                exhaustive=True,
                worst_value=worst[0] if worst else None,
                worst_ordering=worst[2] if worst else None,
                paths_total=paths,
            )

    seqs = _sample_sequences(space, items, len(mempool), budget)
    reducer = _evaluate_sequences(state, space, items, seqs, objective, want_worst)
    best, worst = reducer.best, reducer.worst
    return EvReport(
        best_value=best[0],
        best_ordering=best[2],
        paths_explored=reducer.paths,
        exhaustive=False,
        worst_value=worst[0] if worst else None,
        worst_ordering=worst[2] if worst else None,
        paths_total=None,
    )
