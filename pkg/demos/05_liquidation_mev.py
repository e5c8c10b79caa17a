"""Walkthrough: liquidations unlocked by reordering the price oracle's pool.

A CDP sits just above the safety threshold.  One pending swap pushes the
pool price down; the miner orders it first, inserts a liquidation, and takes
the whole collateral while a second pending swap restores the price.

Writes demos/data/liquidation.json.
"""

from fractions import Fraction
from pathlib import Path

from mevsearch import AmmPool, Liquidate, MakerBook, OrderingSpace, SearchBudget, State, Swap, Tx
from mevsearch.compose import oracle_liquidation_mev
from mevsearch.metrics import MinerModel, Valuation, ev
from mevsearch.scenario import Scenario, TokenDecl, save_scenario

DATA = Path(__file__).parent / "data"
EXH = SearchBudget(mode="exhaustive")

pool = AmmPool("DAI", "ETH", 20_000, 10_000, fee_bps=0)
book = MakerBook(
    loan_token="DAI", collateral_token="ETH", price_source="pool",
    collateral={"victim": 900}, debt={"victim": 1_100},
)
state = State(
    balances={("u", "ETH"): 2_000, ("u2", "DAI"): 1_500},
    contracts={"pool": pool, "book": book},
)
mempool = (
    Tx("u", "pool", Swap("ETH", "DAI", 2_000), label="push-down"),
    Tx("u2", "pool", Swap("DAI", "ETH", 1_500), label="push-up"),
)
space = OrderingSpace(mempool=mempool)
valuation = Valuation(primary="ETH", mode="oracle_priced", prices={"DAI": Fraction(1, 2)})
player = MinerModel(accounts=frozenset({"miner"}))

print("CDP: 900 ETH collateral vs 1100 DAI debt at pool price 2 DAI/ETH")
print("  2*900 = 1800 >= 1.5*1100 = 1650: safe under the original order.\n")

plain = ev(player, space, state, valuation, EXH)
print(f"MEV without liquidation insertions: {plain.best_value}")

report = oracle_liquidation_mev(player, state, space, valuation, EXH)
print(f"MEV with one liquidation template per open CDP: {report.best_value}")
print(f"Best ordering: {report.best_ordering}")
print("The oracle-moving swap executes first, the liquidation lands while the")
print("position is underwater, and the second swap restores the price.")

scenario = Scenario(
    tokens=(TokenDecl("ETH", primary=True, decimals=0), TokenDecl("DAI", decimals=0)),
    balances=dict(state.balances),
    contracts=dict(state.contracts),
    mempool=mempool,
    miner_account="miner",
    templates=(Tx("miner", "book", Liquidate("victim"), origin="miner", label="liq"),),
    allow_reorder=True,
    allow_censor=False,
    allow_insert=True,
    valuation=valuation,
    budget=SearchBudget(mode="exhaustive"),
)
DATA.mkdir(exist_ok=True)
save_scenario(scenario, DATA / "liquidation.json")
print(f"\nScenario written to {DATA / 'liquidation.json'}")
