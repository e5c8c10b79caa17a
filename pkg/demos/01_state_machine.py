"""Walkthrough: the ledger state machine and its three contract families.

Applies a handful of transactions against a pool, a CDP book, and a price
bet, showing atomic reverts and token-supply accounting along the way.
"""

from mevsearch import (
    AmmPool,
    Bet,
    CdpManipulate,
    GetReward,
    Liquidate,
    MakerBook,
    Pricebet,
    State,
    Swap,
    Tx,
    apply_sequence,
    apply_tx,
    total_supply,
)


def show(label, state):
    pool = state.contracts["amm"]
    print(f"  {label:<38} pool=({pool.reserve_x} DAI, {pool.reserve_y} ETH) "
          f"alice ETH={state.balance('alice', 'ETH')} DAI={state.balance('alice', 'DAI')}")


pool = AmmPool("DAI", "ETH", 20_000, 10_000, fee_bps=30)
book = MakerBook(loan_token="DAI", collateral_token="ETH", price_source="amm",
                 collateral={"victim": 900}, debt={"victim": 1_100})
bet = Pricebet(oracle="amm", token="ETH", deadline=10)

state = State(
    balances={("alice", "ETH"): 1_000, ("bob", "DAI"): 5_000},
    contracts={"amm": pool, "book": book, "bet": bet},
)

print("A swap that exceeds the actor's balance reverts with no side effects:")
before = state
assert apply_tx(state, Tx("alice", "amm", Swap("ETH", "DAI", 2_000))) is None
assert state == before
show("after failed over-sized swap", state)

print("\nA valid swap settles atomically and conserves both token supplies:")
eth_supply = total_supply(state, "ETH")
dai_supply = total_supply(state, "DAI")
state = apply_tx(state, Tx("alice", "amm", Swap("ETH", "DAI", 500)))
show("alice sells 500 ETH", state)
assert total_supply(state, "ETH") == eth_supply
assert total_supply(state, "DAI") == dai_supply

print("\nThe ETH sale moved the pool price; the victim's CDP is now unsafe")
print("(price*collateral < 1.5*debt, compared cross-multiplied), so anyone")
print("can liquidate and take the whole collateral:")
state = apply_tx(state, Tx("bob", "book", Liquidate("victim")))
print(f"  bob seized {state.balance('bob', 'ETH')} ETH of collateral")

print("\nSequences apply strictly (first failure invalidates the block) or")
print("in skip-invalid mode (failures become no-ops), which is how the")
print("search engine treats censoring-by-failure:")
seq = [
    Tx("bob", "amm", Swap("DAI", "ETH", 4_000)),
    Tx("alice", "amm", Swap("ETH", "DAI", 10**9)),  # can never afford this
]
strict = apply_sequence(state, seq, "strict")
skippy = apply_sequence(state, seq, "skip_invalid")
print(f"  strict: ok={strict.ok} failed_index={strict.failed_index}")
print(f"  skip_invalid: applied={skippy.applied}")

print("\nThe price bet pays double or nothing on the oracle pool's reserves:")
state = skippy.state
state = apply_tx(state, Tx("alice", "bet", Bet()))
claim = apply_tx(state, Tx("alice", "bet", GetReward()))
pool = state.contracts["amm"]
flipped = pool.reserve_y > pool.reserve_x
print(f"  pool ETH reserve > DAI reserve? {flipped}; claim paid? {claim is not None}")
