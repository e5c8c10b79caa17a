"""Executable contract models: constant-product AMM, CDP book, price bet.

All arithmetic is exact integer arithmetic.  Price comparisons are
cross-multiplied (no division anywhere in a guard), swap outputs use the
deployed-AMM rounding (floor on exact-input output, floor+1 on exact-output
input), and every operation either returns a full successor state or ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .state import (
    AddLiquidity,
    Bet,
    CDP_KINDS,
    CdpManipulate,
    GetReward,
    Liquidate,
    RemoveLiquidity,
    ScenarioError,
    State,
    Swap,
    Tx,
)

FEE_DENOM = 10_000


@dataclass(frozen=True, slots=True)
class AmmPool:
    """Constant-product pool over ``token_x``/``token_y``.

    ``fee_bps`` generalizes the deployed 0.3% fee: an input of ``a`` trades as
    ``a * (10000 - fee_bps) / 10000`` while the full ``a`` enters the
    reserves.  ``lp_shares`` maps accounts to liquidity-provider shares.
    """

    token_x: str
    token_y: str
    reserve_x: int
    reserve_y: int
    fee_bps: int = 30
    lp_total: int = 0
    lp_shares: dict[str, int] = field(default_factory=dict)

    def reserve(self, token: str) -> int:
        if token == self.token_x:
            return self.reserve_x
        if token == self.token_y:
            return self.reserve_y
        raise ScenarioError(f"token {token!r} not in pool")

    def has_token(self, token: str) -> bool:
        return token in (self.token_x, self.token_y)


@dataclass(frozen=True, slots=True)
class MakerBook:
    """Simplified single-collateral CDP contract.

    Loans are denominated in ``loan_token`` (minted on withdrawal, burned on
    repayment); collateral is held in ``collateral_token``.  The liquidation
    ratio is ``ratio_num/ratio_den`` (default 3/2).  Prices come from the
    ``price_source`` pool's reserves, or from ``oracle_price`` when an
    ingested oracle update overrides them; either way guards compare
    price*collateral against threshold*debt fully cross-multiplied.

    ``efficient_auction`` switches the liquidation payout from the
    miner-optimal outcome (liquidator receives the entire collateral for
    free) to the perfectly-efficient auction (liquidator repays the debt and
    receives collateral of equal value at the oracle price).
    """

    loan_token: str
    collateral_token: str
    price_source: str
    ratio_num: int = 3
    ratio_den: int = 2
    collateral: dict[str, int] = field(default_factory=dict)
    debt: dict[str, int] = field(default_factory=dict)
    oracle_price: tuple[int, int] | None = None
    efficient_auction: bool = False


@dataclass(frozen=True, slots=True)
class Pricebet:
    """Single-shot bet that the oracle pool will value the paired token above
    the primary token (strictly more primary-token reserve than paired-token
    reserve) before ``deadline``.

    The contract is created holding ``pot`` (the 100 house tokens of the
    modeled contract); a bet locks ``stake`` more and a winning claim pays
    ``reward``.  At most one claim can ever settle.
    """

    oracle: str
    token: str
    deadline: int
    stake: int = 100
    reward: int = 200
    pot: int = 100
    has_bet: bool = False
    player: str | None = None
    settled: bool = False


Contract = AmmPool | MakerBook | Pricebet


def holding(contract: object, token: str) -> int:
    """Tokens held inside a contract (for supply accounting)."""
    if isinstance(contract, AmmPool):
        if token == contract.token_x:
            return contract.reserve_x
        if token == contract.token_y:
            return contract.reserve_y
        return 0
    if isinstance(contract, MakerBook):
        if token == contract.collateral_token:
            return sum(contract.collateral.values())
        return 0
    if isinstance(contract, Pricebet):
        return contract.pot if token == contract.token else 0
    raise ScenarioError(f"unknown contract type: {type(contract)!r}")


# ---------------------------------------------------------------------------
# AMM math
# ---------------------------------------------------------------------------

def amm_out_given_in(reserve_in: int, reserve_out: int, amount_in: int, fee_bps: int) -> int:
    """Exact-input output amount with fee and floor rounding.

    With ``fee_bps == 0`` this is exactly the constant-product closed form
    ``floor(y - x*y/(x + dx))``.
    """
    in_after_fee = amount_in * (FEE_DENOM - fee_bps)
    return (in_after_fee * reserve_out) // (reserve_in * FEE_DENOM + in_after_fee)


def amm_in_given_out(reserve_in: int, reserve_out: int, amount_out: int, fee_bps: int) -> int:
    """Exact-output input amount (deployed rounding: floor + 1)."""
    numerator = reserve_in * amount_out * FEE_DENOM
    denominator = (reserve_out - amount_out) * (FEE_DENOM - fee_bps)
    return numerator // denominator + 1


def amm_out_given_in_exact(
    reserve_in: int, reserve_out: int, amount_in: Fraction | int, fee_bps: int = 0
) -> Fraction:
    """No-rounding rational oracle for the exact-input formula."""
    in_after_fee = Fraction(amount_in) * (FEE_DENOM - fee_bps)
    return in_after_fee * reserve_out / (reserve_in * FEE_DENOM + in_after_fee)


def amm_swap_exact_in(pool: AmmPool, token_in: str, amount_in: int) -> tuple[AmmPool, int] | None:
    """Swap ``amount_in`` of ``token_in`` into the pool.

    Returns the updated pool and the output amount, or ``None`` when the
    trade is malformed (non-positive input, foreign token, uninitialized
    reserves).  A zero output is not an error: the trade still settles.
    """
    if amount_in <= 0 or not pool.has_token(token_in):
        return None
    if pool.reserve_x <= 0 or pool.reserve_y <= 0:
        return None
    if token_in == pool.token_x:
        out = amm_out_given_in(pool.reserve_x, pool.reserve_y, amount_in, pool.fee_bps)
        new_pool = replace(pool, reserve_x=pool.reserve_x + amount_in, reserve_y=pool.reserve_y - out)
    else:
        out = amm_out_given_in(pool.reserve_y, pool.reserve_x, amount_in, pool.fee_bps)
        new_pool = replace(pool, reserve_y=pool.reserve_y + amount_in, reserve_x=pool.reserve_x - out)
    return new_pool, out


def amm_swap_exact_out(pool: AmmPool, token_out: str, amount_out: int) -> tuple[AmmPool, int] | None:
    """Buy exactly ``amount_out`` of ``token_out``; returns (pool, input cost)."""
    if amount_out <= 0 or not pool.has_token(token_out):
        return None
    if pool.reserve_x <= 0 or pool.reserve_y <= 0:
        return None
    if token_out == pool.token_y:
        if amount_out >= pool.reserve_y:
            return None
        cost = amm_in_given_out(pool.reserve_x, pool.reserve_y, amount_out, pool.fee_bps)
        new_pool = replace(pool, reserve_x=pool.reserve_x + cost, reserve_y=pool.reserve_y - amount_out)
    else:
        if amount_out >= pool.reserve_x:
            return None
        cost = amm_in_given_out(pool.reserve_y, pool.reserve_x, amount_out, pool.fee_bps)
        new_pool = replace(pool, reserve_y=pool.reserve_y + cost, reserve_x=pool.reserve_x - amount_out)
    return new_pool, cost


def amm_add_liquidity(pool: AmmPool, account: str, amount_x: int, amount_y: int) -> tuple[AmmPool, int] | None:
    """Deposit both tokens, minting shares pro-rata (isqrt bootstrap)."""
    if amount_x <= 0 or amount_y <= 0:
        return None
    if pool.lp_total == 0:
        minted = math.isqrt(amount_x * amount_y)
    else:
        if pool.reserve_x <= 0 or pool.reserve_y <= 0:
            return None
        minted = min(
            amount_x * pool.lp_total // pool.reserve_x,
            amount_y * pool.lp_total // pool.reserve_y,
        )
    if minted <= 0:
        return None
    shares = dict(pool.lp_shares)
    shares[account] = shares.get(account, 0) + minted
    new_pool = replace(
        pool,
        reserve_x=pool.reserve_x + amount_x,
        reserve_y=pool.reserve_y + amount_y,
        lp_total=pool.lp_total + minted,
        lp_shares=shares,
    )
    return new_pool, minted


def amm_remove_liquidity(pool: AmmPool, account: str, shares: int) -> tuple[AmmPool, int, int] | None:
    """Burn shares, returning the pro-rata floor of each reserve."""
    if shares <= 0 or shares > pool.lp_total:
        return None
    if pool.lp_shares.get(account, 0) < shares:
        return None
    out_x = shares * pool.reserve_x // pool.lp_total
    out_y = shares * pool.reserve_y // pool.lp_total
    new_shares = dict(pool.lp_shares)
    new_shares[account] -= shares
    if new_shares[account] == 0:
        del new_shares[account]
    new_pool = replace(
        pool,
        reserve_x=pool.reserve_x - out_x,
        reserve_y=pool.reserve_y - out_y,
        lp_total=pool.lp_total - shares,
        lp_shares=new_shares,
    )
    return new_pool, out_x, out_y


# ---------------------------------------------------------------------------
# Maker guards
# ---------------------------------------------------------------------------

def maker_price(state: State, book: MakerBook) -> tuple[int, int]:
    """Price of one collateral token in loan tokens, as (numerator, denominator).

    Read straight from the price source pool's reserves (loan reserve over
    collateral reserve) and never materialized as a quotient.
    """
    if book.oracle_price is not None:
        return book.oracle_price
    pool = state.contracts.get(book.price_source)
    if not isinstance(pool, AmmPool):
        raise ScenarioError(f"price source {book.price_source!r} is not an AMM pool")
    return pool.reserve(book.loan_token), pool.reserve(book.collateral_token)


def maker_safe(price: tuple[int, int], book: MakerBook, collateral: int, debt: int) -> bool:
    """price*collateral >= threshold*debt, cross-multiplied."""
    num, den = price
    return num * collateral * book.ratio_den >= book.ratio_num * debt * den


def maker_underwater(state: State, book: MakerBook, account: str) -> bool:
    price = maker_price(state, book)
    return not maker_safe(price, book, book.collateral.get(account, 0), book.debt.get(account, 0))


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def _set_balance(balances: dict, account: str, token: str, amount: int) -> None:
    balances[(account, token)] = amount


def _credit(balances: dict, account: str, token: str, amount: int) -> None:
    key = (account, token)
    balances[key] = balances.get(key, 0) + amount


def execute(state: State, tx: Tx, contract: object) -> State | None:
    """Run ``tx`` against ``contract``; returns the new state or ``None``."""
    action = tx.action
    if isinstance(contract, AmmPool):
        if isinstance(action, Swap):
            return _exec_swap(state, tx, contract, action)
        if isinstance(action, AddLiquidity):
            return _exec_add_liquidity(state, tx, contract, action)
        if isinstance(action, RemoveLiquidity):
            return _exec_remove_liquidity(state, tx, contract, action)
        return None
    if isinstance(contract, MakerBook):
        if isinstance(action, CdpManipulate):
            return _exec_cdp(state, tx, contract, action)
        if isinstance(action, Liquidate):
            return _exec_liquidate(state, tx, contract, action)
        return None
    if isinstance(contract, Pricebet):
        if isinstance(action, Bet):
            return _exec_bet(state, tx, contract)
        if isinstance(action, GetReward):
            return _exec_getreward(state, tx, contract)
        return None
    raise ScenarioError(f"unknown contract type at venue {tx.venue!r}")


def _exec_swap(state: State, tx: Tx, pool: AmmPool, action: Swap) -> State | None:
    if action.amount is None:
        raise ScenarioError("swap has an unbound insertion-size parameter")
    if not (pool.has_token(action.token_in) and pool.has_token(action.token_out)):
        return None
    if action.token_in == action.token_out:
        return None
    if action.exact_out:
        res = amm_swap_exact_out(pool, action.token_out, action.amount)
        if res is None:
            return None
        new_pool, amount_in = res
        amount_out = action.amount
    else:
        res = amm_swap_exact_in(pool, action.token_in, action.amount)
        if res is None:
            return None
        new_pool, amount_out = res
        amount_in = action.amount

    have = state.balances.get((tx.actor, action.token_in), 0)
    if have < amount_in:
        return None
    balances = dict(state.balances)
    _set_balance(balances, tx.actor, action.token_in, have - amount_in)
    _credit(balances, tx.actor, action.token_out, amount_out)
    contracts = dict(state.contracts)
    contracts[tx.venue] = new_pool
    return State(balances, contracts, state.block_number)


def _exec_add_liquidity(state: State, tx: Tx, pool: AmmPool, action: AddLiquidity) -> State | None:
    have_x = state.balances.get((tx.actor, pool.token_x), 0)
    have_y = state.balances.get((tx.actor, pool.token_y), 0)
    if have_x < action.amount_x or have_y < action.amount_y:
        return None
    res = amm_add_liquidity(pool, tx.actor, action.amount_x, action.amount_y)
    if res is None:
        return None
    new_pool, _ = res
    balances = dict(state.balances)
    _set_balance(balances, tx.actor, pool.token_x, have_x - action.amount_x)
    _set_balance(balances, tx.actor, pool.token_y, have_y - action.amount_y)
    contracts = dict(state.contracts)
    contracts[tx.venue] = new_pool
    return State(balances, contracts, state.block_number)


def _exec_remove_liquidity(state: State, tx: Tx, pool: AmmPool, action: RemoveLiquidity) -> State | None:
    res = amm_remove_liquidity(pool, tx.actor, action.shares)
    if res is None:
        return None
    new_pool, out_x, out_y = res
    balances = dict(state.balances)
    _credit(balances, tx.actor, pool.token_x, out_x)
    _credit(balances, tx.actor, pool.token_y, out_y)
    contracts = dict(state.contracts)
    contracts[tx.venue] = new_pool
    return State(balances, contracts, state.block_number)


def _exec_cdp(state: State, tx: Tx, book: MakerBook, action: CdpManipulate) -> State | None:
    if action.kind not in CDP_KINDS:
        raise ScenarioError(f"unknown CDP action: {action.kind!r}")
    if action.qty < 0:
        return None
    qty = action.qty
    actor = tx.actor
    coll = book.collateral.get(actor, 0)
    debt = book.debt.get(actor, 0)

    if action.kind == "deposit_collateral":
        have = state.balances.get((actor, book.collateral_token), 0)
        if have < qty:
            return None
        balances = dict(state.balances)
        _set_balance(balances, actor, book.collateral_token, have - qty)
        new_coll = dict(book.collateral)
        new_coll[actor] = coll + qty
        new_book = replace(book, collateral=new_coll)

    elif action.kind == "pay_loan":
        have = state.balances.get((actor, book.loan_token), 0)
        if have < qty or debt < qty:
            return None
        balances = dict(state.balances)
        _set_balance(balances, actor, book.loan_token, have - qty)
        new_debt = dict(book.debt)
        new_debt[actor] = debt - qty
        new_book = replace(book, debt=new_debt)

    elif action.kind == "withdraw_collateral":
        price = maker_price(state, book)
        if coll < qty or not maker_safe(price, book, coll - qty, debt):
            return None
        balances = dict(state.balances)
        _credit(balances, actor, book.collateral_token, qty)
        new_coll = dict(book.collateral)
        new_coll[actor] = coll - qty
        new_book = replace(book, collateral=new_coll)

    else:  # withdraw_loan
        price = maker_price(state, book)
        if not maker_safe(price, book, coll, debt + qty):
            return None
        balances = dict(state.balances)
        _credit(balances, actor, book.loan_token, qty)
        new_debt = dict(book.debt)
        new_debt[actor] = debt + qty
        new_book = replace(book, debt=new_debt)

    contracts = dict(state.contracts)
    contracts[tx.venue] = new_book
    return State(balances, contracts, state.block_number)


def _exec_liquidate(state: State, tx: Tx, book: MakerBook, action: Liquidate) -> State | None:
    victim = action.victim
    coll = book.collateral.get(victim, 0)
    debt = book.debt.get(victim, 0)
    price = maker_price(state, book)
    if maker_safe(price, book, coll, debt):
        return None

    balances = dict(state.balances)
    new_coll = dict(book.collateral)
    new_debt = dict(book.debt)

    if book.efficient_auction:
        # Perfectly efficient two-phase auction: the liquidator repays the
        # debt and receives collateral of equal oracle value.
        num, den = price
        if num <= 0:
            return None
        seized = debt * den // num
        if seized > coll:
            seized = coll
        have = state.balances.get((tx.actor, book.loan_token), 0)
        if have < debt:
            return None
        _set_balance(balances, tx.actor, book.loan_token, have - debt)
        _credit(balances, tx.actor, book.collateral_token, seized)
        new_coll[victim] = coll - seized
        new_debt[victim] = 0
    else:
        # Miner-optimal outcome: the entire collateral for nothing.
        _credit(balances, tx.actor, book.collateral_token, coll)
        new_coll[victim] = 0
        new_debt[victim] = 0

    contracts = dict(state.contracts)
    contracts[tx.venue] = replace(book, collateral=new_coll, debt=new_debt)
    return State(balances, contracts, state.block_number)


def _exec_bet(state: State, tx: Tx, bet: Pricebet) -> State | None:
    if bet.has_bet:
        return None
    have = state.balances.get((tx.actor, bet.token), 0)
    if have < bet.stake:
        return None
    balances = dict(state.balances)
    _set_balance(balances, tx.actor, bet.token, have - bet.stake)
    contracts = dict(state.contracts)
    contracts[tx.venue] = replace(bet, pot=bet.pot + bet.stake, has_bet=True, player=tx.actor)
    return State(balances, contracts, state.block_number)


def _exec_getreward(state: State, tx: Tx, bet: Pricebet) -> State | None:
    if not bet.has_bet or bet.settled or bet.player != tx.actor:
        return None
    if state.block_number > bet.deadline:
        return None
    if bet.pot < bet.reward:
        return None
    oracle = state.contracts.get(bet.oracle)
    if not isinstance(oracle, AmmPool) or not oracle.has_token(bet.token):
        raise ScenarioError(f"price bet oracle {bet.oracle!r} is not a pool over {bet.token!r}")
    primary_reserve = oracle.reserve(bet.token)
    other_token = oracle.token_y if oracle.token_x == bet.token else oracle.token_x
    other_reserve = oracle.reserve(other_token)
    if primary_reserve <= other_reserve:
        return None
    balances = dict(state.balances)
    _credit(balances, tx.actor, bet.token, bet.reward)
    contracts = dict(state.contracts)
    contracts[tx.venue] = replace(bet, pot=bet.pot - bet.reward, settled=True)
    return State(balances, contracts, state.block_number)
