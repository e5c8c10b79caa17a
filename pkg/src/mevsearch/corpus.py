"""Seeded random scenario generation and the sampling-convergence experiment.

Instances are reorder-only AMM scenarios with one designated beneficiary (a
"whale" whose ordering-dependent outcome is the quantity of interest), built
deterministically from a seed: the same (seed, count, txs) always produces
byte-identical scenario files.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .contracts import AmmPool
from .metrics import Valuation, value_spread
from .ordering import SearchBudget
from .scenario import Scenario, TokenDecl
from .state import Swap, Tx

WAD = 10**18
WHALE = "whale"


def _instance_rng(seed: int, index: int) -> random.Random:
    return random.Random(seed * 1_000_003 + index)


def make_spread_instance(
    seed: int,
    index: int,
    n_txs: int,
    n_pools: int = 2,
    fee_bps: int = 30,
    whale_txs: int = 2,
) -> Scenario:
    """One reorder-only instance: ``n_txs`` swaps across ``n_pools`` pools,
    ``whale_txs`` of them by the beneficiary, prices valued at the first
    pool's initial spot rate."""
    rng = _instance_rng(seed, index)
    pools: dict[str, object] = {}
    reserves: list[tuple[int, int]] = []
    eth0 = rng.randint(500, 5_000) * WAD
    ratio = rng.randint(50, 200)
    tkn0 = eth0 * 100 // ratio
    reserves.append((tkn0, eth0))
    for p in range(1, n_pools):
        skew = rng.randint(90, 112)
        reserves.append((tkn0 * 100 // skew, eth0 * skew // 100))
    for p, (rx, ry) in enumerate(reserves):
        pools[f"pool{p}"] = AmmPool("TKN", "ETH", rx, ry, fee_bps=fee_bps)

    balances: dict[tuple[str, str], int] = {}
    mempool: list[Tx] = []
    whale_slots = sorted(rng.sample(range(n_txs), min(whale_txs, n_txs)))
    for i in range(n_txs):
        venue = f"pool{rng.randrange(n_pools)}"
        pool: AmmPool = pools[venue]  # type: ignore[assignment]
        is_whale = i in whale_slots
        actor = WHALE if is_whale else f"u{i}"
        per_mille = rng.randint(30, 80) if is_whale else rng.randint(2, 40)
        sell_tkn = rng.getrandbits(1) == 1
        if sell_tkn:
            amount = pool.reserve_x * per_mille // 1000
            token_in, token_out = "TKN", "ETH"
        else:
            amount = pool.reserve_y * per_mille // 1000
            token_in, token_out = "ETH", "TKN"
        key = (actor, token_in)
        balances[key] = balances.get(key, 0) + amount
        mempool.append(Tx(actor, venue, Swap(token_in, token_out, amount), label=f"m{i}"))

    valuation = Valuation(
        primary="ETH", mode="oracle_priced", prices={"TKN": Fraction(eth0, tkn0)}
    )
    return Scenario(
        tokens=(TokenDecl("ETH", primary=True), TokenDecl("TKN")),
        balances=balances,
        contracts=pools,
        mempool=tuple(mempool),
        miner_account="miner",
        templates=(),
        allow_reorder=True,
        allow_censor=False,
        allow_insert=False,
        valuation=valuation,
        budget=SearchBudget(mode="exhaustive", seed=seed),
        beneficiary=WHALE,
    )


def pruning_corpus(seed: int, count: int = 200, max_txs: int = 6) -> list[Scenario]:
    """Small fee-less instances for the pruned-vs-unpruned equivalence check."""
    out = []
    for i in range(count):
        rng = _instance_rng(seed, 10_000 + i)
        n = rng.randint(3, max_txs)
        out.append(
            make_spread_instance(
                seed, 10_000 + i, n, n_pools=rng.randint(1, 2), fee_bps=0, whale_txs=1
            )
        )
    return out


def convergence_corpus(seed: int, count: int = 100) -> list[Scenario]:
    """7-9 transaction instances for the sampling-convergence experiment."""
    out = []
    for i in range(count):
        rng = _instance_rng(seed, 20_000 + i)
        n = rng.choice([7, 7, 8, 8, 8, 9])
        out.append(make_spread_instance(seed, 20_000 + i, n, n_pools=2, fee_bps=30, whale_txs=2))
    return out


def gen_corpus(seed: int, count: int, txs: int) -> list[Scenario]:
    """Scenario suite for the CLI: fixed transaction count per instance."""
    return [
        make_spread_instance(seed, i, txs, n_pools=2, fee_bps=30, whale_txs=min(2, txs))
        for i in range(count)
    ]


# ---------------------------------------------------------------------------
# Convergence measurement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergencePoint:
    index: int
    paths_total: int
    paths_sampled: int
    exhaustive_spread: int
    sampled_spread: int

    @property
    def ratio(self) -> Fraction:
        if self.exhaustive_spread == 0:
            return Fraction(1)
        return Fraction(self.sampled_spread, self.exhaustive_spread)


@dataclass(frozen=True)
class ConvergenceResult:
    points: tuple[ConvergencePoint, ...]
    target_ratio: Fraction

    @property
    def hits(self) -> int:
        return sum(1 for p in self.points if p.ratio >= self.target_ratio)

    @property
    def hit_rate(self) -> Fraction:
        return Fraction(self.hits, len(self.points))


def measure_convergence(
    instances: list[Scenario],
    path_fraction: Fraction = Fraction(1, 100),
    target_ratio: Fraction = Fraction(7, 10),
    seed: int = 0,
) -> ConvergenceResult:
    """For each instance: exhaustive best-ordering spread of the beneficiary
    versus the spread found by sampling ``path_fraction`` of the pruned
    paths.  A point "hits" when the sampled spread reaches ``target_ratio``
    of the exhaustive one."""
    points = []
    for i, scenario in enumerate(instances):
        state = scenario.initial_state()
        space = scenario.space()
        valuation = scenario.get_valuation()
        assert scenario.beneficiary is not None
        exact = value_spread(
            scenario.beneficiary, space, state, valuation, SearchBudget(mode="exhaustive")
        )
        total = exact.paths_explored
        budget = max(1, int(total * path_fraction))
        sampled = value_spread(
            scenario.beneficiary,
            space,
            state,
            valuation,
            SearchBudget(mode="randomized", max_paths=budget, seed=seed * 7_919 + i,
                         tractability_threshold=0),
        )
        points.append(
            ConvergencePoint(
                index=i,
                paths_total=total,
                paths_sampled=sampled.paths_explored,
                exhaustive_spread=exact.spread,
                sampled_spread=sampled.spread,
            )
        )
    return ConvergenceResult(points=tuple(points), target_ratio=target_ratio)
