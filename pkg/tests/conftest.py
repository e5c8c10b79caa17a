"""Shared builders for small deterministic fixtures."""

from __future__ import annotations

from fractions import Fraction

import pytest

from mevsearch.contracts import AmmPool, MakerBook, Pricebet
from mevsearch.metrics import Valuation
from mevsearch.state import State

WAD = 10**18


def simple_pool(reserve_x=1000, reserve_y=1000, fee_bps=0, token_x="BBT", token_y="ETH"):
    return AmmPool(token_x, token_y, reserve_x, reserve_y, fee_bps=fee_bps)


def pool_state(balances=None, pools=None, block_number=0):
    return State(dict(balances or {}), dict(pools or {}), block_number)


@pytest.fixture
def eth_valuation():
    return Valuation(primary="ETH")


@pytest.fixture
def priced_valuation():
    return Valuation(primary="ETH", mode="oracle_priced", prices={"BBT": Fraction(1, 2)})


def maker_state(
    price_x=200,
    price_y=100,
    collateral=None,
    debt=None,
    balances=None,
    efficient=False,
):
    """CDP book priced by a pool holding (price_x DAI, price_y ETH)."""
    pool = AmmPool("DAI", "ETH", price_x, price_y, fee_bps=0)
    book = MakerBook(
        loan_token="DAI",
        collateral_token="ETH",
        price_source="pool",
        collateral=dict(collateral or {}),
        debt=dict(debt or {}),
        efficient_auction=efficient,
    )
    return State(dict(balances or {}), {"pool": pool, "book": book}, 0)


def pricebet_state(reserve_eth=101, reserve_bbt=100, player_eth=100, deadline=5, block_number=0):
    pool = AmmPool("BBT", "ETH", reserve_bbt, reserve_eth, fee_bps=0)
    bet = Pricebet(oracle="pool", token="ETH", deadline=deadline)
    return State({("alice", "ETH"): player_eth}, {"pool": pool, "bet": bet}, block_number)
