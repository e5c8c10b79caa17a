"""Scenario files: the serialized unit of analysis.

A scenario bundles tokens, initial balances, deployed contracts, the pending
mempool, the miner's configuration (account, templates, action flags, block
count), a valuation, a search budget, and optional analysis inputs (epsilon,
insertion bounds, a contract to deploy, a spread beneficiary).

Format: JSON with every amount as a decimal string of base units.  Floats
are rejected outright so values survive round trips bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .contracts import AmmPool, MakerBook, Pricebet
from .metrics import MinerModel, Valuation
from .ordering import OrderingSpace, SearchBudget
from .state import (
    AddLiquidity,
    Bet,
    CDP_KINDS,
    CdpManipulate,
    GetReward,
    Liquidate,
    RemoveLiquidity,
    State,
    Swap,
    Tx,
)

SCHEMA_VERSION = 1


class ParseError(ValueError):
    """Malformed scenario or log input; carries the offending path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _reject_float(value: str):
    raise ParseError("<number>", f"float literal {value!r}: amounts must be decimal strings")


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ParseError(path, f"missing required field {key!r}")
    return obj[key]


def _amount(value, path: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ParseError(path, f"expected a decimal string, got {value!r}")
    try:
        out = int(value)
    except ValueError:
        raise ParseError(path, f"not a decimal integer: {value!r}") from None
    if out < minimum:
        raise ParseError(path, f"value {out} below minimum {minimum}")
    return out


def _fraction(obj, path: str) -> Fraction:
    if not isinstance(obj, dict):
        raise ParseError(path, "expected {num, den}")
    num = _amount(_require(obj, "num", path), f"{path}.num", minimum=-(10**77))
    den = _amount(_require(obj, "den", path), f"{path}.den", minimum=1)
    return Fraction(num, den)


def _fraction_json(f: Fraction) -> dict:
    return {"num": str(f.numerator), "den": str(f.denominator)}


@dataclass(frozen=True)
class TokenDecl:
    id: str
    primary: bool = False
    decimals: int = 18


@dataclass
class Scenario:
    tokens: tuple[TokenDecl, ...]
    balances: dict[tuple[str, str], int]
    contracts: dict[str, object]
    mempool: tuple[Tx, ...]
    miner_account: str
    templates: tuple[Tx, ...]
    allow_reorder: bool
    allow_censor: bool
    allow_insert: bool
    k: int = 1
    charge_fees: bool = False
    valuation: Valuation | None = None
    budget: SearchBudget = field(default_factory=SearchBudget)
    epsilon: Fraction = Fraction(0)
    insertion_bounds: tuple[int, int] | None = None
    new_contract: tuple[str, object] | None = None
    beneficiary: str | None = None
    block_number: int = 0

    @property
    def primary(self) -> str:
        return next(t.id for t in self.tokens if t.primary)

    def initial_state(self) -> State:
        return State(dict(self.balances), dict(self.contracts), self.block_number)

    def space(self) -> OrderingSpace:
        return OrderingSpace(
            mempool=self.mempool,
            templates=self.templates,
            allow_reorder=self.allow_reorder,
            allow_censor=self.allow_censor,
            allow_insert=self.allow_insert,
            miner=self.miner_account,
            k=self.k,
            charge_fees=self.charge_fees,
            fee_token=self.primary,
        ).labeled()

    def player(self) -> MinerModel:
        return MinerModel(accounts=frozenset((self.miner_account,)))

    def get_valuation(self) -> Valuation:
        return self.valuation if self.valuation is not None else Valuation(primary=self.primary)


# ---------------------------------------------------------------------------
# Transactions
# ---------------------------------------------------------------------------

_TX_TYPES = ("swap", "add_liquidity", "remove_liquidity", "cdp", "liquidate", "bet", "get_reward")


def tx_from_json(obj: dict, path: str, origin: str) -> Tx:
    actor = _require(obj, "actor", path)
    venue = _require(obj, "venue", path)
    kind = _require(obj, "type", path)
    if kind == "swap":
        amount_raw = _require(obj, "amount", path)
        if amount_raw is None:
            if origin != "miner":
                raise ParseError(path, "only miner templates may leave the amount unresolved")
            amount = None
        else:
            amount = _amount(amount_raw, f"{path}.amount", minimum=0)
        action = Swap(
            token_in=_require(obj, "token_in", path),
            token_out=_require(obj, "token_out", path),
            amount=amount,
            exact_out=bool(obj.get("exact_out", False)),
        )
    elif kind == "add_liquidity":
        action = AddLiquidity(
            amount_x=_amount(_require(obj, "amount_x", path), f"{path}.amount_x"),
            amount_y=_amount(_require(obj, "amount_y", path), f"{path}.amount_y"),
        )
    elif kind == "remove_liquidity":
        action = RemoveLiquidity(shares=_amount(_require(obj, "shares", path), f"{path}.shares"))
    elif kind == "cdp":
        sub = _require(obj, "kind", path)
        if sub not in CDP_KINDS:
            raise ParseError(path, f"unknown CDP action {sub!r}")
        action = CdpManipulate(kind=sub, qty=_amount(_require(obj, "qty", path), f"{path}.qty"))
    elif kind == "liquidate":
        action = Liquidate(victim=_require(obj, "victim", path))
    elif kind == "bet":
        action = Bet()
    elif kind == "get_reward":
        action = GetReward()
    else:
        raise ParseError(path, f"unknown transaction type {kind!r} (expected one of {_TX_TYPES})")
    return Tx(
        actor=actor,
        venue=venue,
        action=action,
        origin=origin,
        label=obj.get("label", ""),
        fee=_amount(obj.get("fee", 0), f"{path}.fee"),
        arrival_block=_amount(obj.get("arrival_block", 0), f"{path}.arrival_block"),
    )


def tx_to_json(tx: Tx) -> dict:
    out: dict = {"actor": tx.actor, "venue": tx.venue}
    a = tx.action
    if type(a) is Swap:
        out["type"] = "swap"
        out["token_in"] = a.token_in
        out["token_out"] = a.token_out
        out["amount"] = None if a.amount is None else str(a.amount)
        if a.exact_out:
            out["exact_out"] = True
    elif type(a) is AddLiquidity:
        out["type"] = "add_liquidity"
        out["amount_x"] = str(a.amount_x)
        out["amount_y"] = str(a.amount_y)
    elif type(a) is RemoveLiquidity:
        out["type"] = "remove_liquidity"
        out["shares"] = str(a.shares)
    elif type(a) is CdpManipulate:
        out["type"] = "cdp"
        out["kind"] = a.kind
        out["qty"] = str(a.qty)
    elif type(a) is Liquidate:
        out["type"] = "liquidate"
        out["victim"] = a.victim
    elif type(a) is Bet:
        out["type"] = "bet"
    elif type(a) is GetReward:
        out["type"] = "get_reward"
    else:
        raise ParseError("<tx>", f"unknown action {a!r}")
    if tx.label:
        out["label"] = tx.label
    if tx.fee:
        out["fee"] = str(tx.fee)
    if tx.arrival_block:
        out["arrival_block"] = tx.arrival_block
    return out


# ---------------------------------------------------------------------------
# Contracts
# ---------------------------------------------------------------------------

def contract_from_json(obj: dict, path: str, primary: str) -> tuple[str, object]:
    cid = _require(obj, "id", path)
    kind = _require(obj, "type", path)
    if kind == "amm":
        contract: object = AmmPool(
            token_x=_require(obj, "token_x", path),
            token_y=_require(obj, "token_y", path),
            reserve_x=_amount(_require(obj, "reserve_x", path), f"{path}.reserve_x"),
            reserve_y=_amount(_require(obj, "reserve_y", path), f"{path}.reserve_y"),
            fee_bps=_amount(obj.get("fee_bps", 30), f"{path}.fee_bps"),
            lp_total=_amount(obj.get("lp_total", 0), f"{path}.lp_total"),
            lp_shares={
                acct: _amount(v, f"{path}.lp_shares.{acct}")
                for acct, v in obj.get("lp_shares", {}).items()
            },
        )
    elif kind == "maker":
        ratio = obj.get("ratio", {"num": 3, "den": 2})
        oracle_price = None
        if obj.get("oracle_price") is not None:
            f = _fraction(obj["oracle_price"], f"{path}.oracle_price")
            oracle_price = (f.numerator, f.denominator)
        contract = MakerBook(
            loan_token=_require(obj, "loan_token", path),
            collateral_token=_require(obj, "collateral_token", path),
            price_source=_require(obj, "price_source", path),
            ratio_num=_amount(_require(ratio, "num", f"{path}.ratio"), f"{path}.ratio.num", 1),
            ratio_den=_amount(_require(ratio, "den", f"{path}.ratio"), f"{path}.ratio.den", 1),
            collateral={
                acct: _amount(v, f"{path}.collateral.{acct}")
                for acct, v in obj.get("collateral", {}).items()
            },
            debt={acct: _amount(v, f"{path}.debt.{acct}") for acct, v in obj.get("debt", {}).items()},
            oracle_price=oracle_price,
            efficient_auction=bool(obj.get("efficient_auction", False)),
        )
    elif kind == "pricebet":
        stake = _amount(obj.get("stake", 100), f"{path}.stake")
        contract = Pricebet(
            oracle=_require(obj, "oracle", path),
            token=primary,
            deadline=_amount(_require(obj, "deadline", path), f"{path}.deadline"),
            stake=stake,
            reward=_amount(obj.get("reward", 2 * stake), f"{path}.reward"),
            pot=_amount(obj.get("pot", stake), f"{path}.pot"),
            has_bet=bool(obj.get("has_bet", False)),
            player=obj.get("player"),
            settled=bool(obj.get("settled", False)),
        )
    else:
        raise ParseError(path, f"unknown contract type {kind!r}")
    return cid, contract


def contract_to_json(cid: str, contract: object) -> dict:
    if isinstance(contract, AmmPool):
        out = {
            "id": cid,
            "type": "amm",
            "token_x": contract.token_x,
            "token_y": contract.token_y,
            "reserve_x": str(contract.reserve_x),
            "reserve_y": str(contract.reserve_y),
            "fee_bps": contract.fee_bps,
        }
        if contract.lp_total:
            out["lp_total"] = str(contract.lp_total)
            out["lp_shares"] = {a: str(v) for a, v in sorted(contract.lp_shares.items())}
        return out
    if isinstance(contract, MakerBook):
        out = {
            "id": cid,
            "type": "maker",
            "loan_token": contract.loan_token,
            "collateral_token": contract.collateral_token,
            "price_source": contract.price_source,
            "ratio": {"num": contract.ratio_num, "den": contract.ratio_den},
            "collateral": {a: str(v) for a, v in sorted(contract.collateral.items())},
            "debt": {a: str(v) for a, v in sorted(contract.debt.items())},
        }
        if contract.oracle_price is not None:
            out["oracle_price"] = {"num": str(contract.oracle_price[0]), "den": str(contract.oracle_price[1])}
        if contract.efficient_auction:
            out["efficient_auction"] = True
        return out
    if isinstance(contract, Pricebet):
        out = {
            "id": cid,
            "type": "pricebet",
            "oracle": contract.oracle,
            "deadline": contract.deadline,
            "stake": str(contract.stake),
            "reward": str(contract.reward),
            "pot": str(contract.pot),
        }
        if contract.has_bet:
            out["has_bet"] = True
            out["player"] = contract.player
        if contract.settled:
            out["settled"] = True
        return out
    raise ParseError("<contract>", f"unknown contract {contract!r}")


# ---------------------------------------------------------------------------
# Scenario load/save
# ---------------------------------------------------------------------------

def scenario_from_dict(doc: dict) -> Scenario:
    if _require(doc, "schema_version", "$") != SCHEMA_VERSION:
        raise ParseError("$.schema_version", f"unsupported version {doc['schema_version']!r}")

    tokens = []
    for i, t in enumerate(_require(doc, "tokens", "$")):
        tokens.append(
            TokenDecl(
                id=_require(t, "id", f"$.tokens[{i}]"),
                primary=bool(t.get("primary", False)),
                decimals=_amount(t.get("decimals", 18), f"$.tokens[{i}].decimals"),
            )
        )
    primaries = [t for t in tokens if t.primary]
    if len(primaries) != 1:
        raise ParseError("$.tokens", "exactly one token must be flagged primary")
    primary = primaries[0].id
    token_ids = {t.id for t in tokens}
    if len(token_ids) != len(tokens):
        raise ParseError("$.tokens", "duplicate token ids")

    balances: dict[tuple[str, str], int] = {}
    for acct, per_token in doc.get("accounts", {}).items():
        for token, amount in per_token.items():
            if token not in token_ids:
                raise ParseError(f"$.accounts.{acct}", f"unknown token {token!r}")
            balances[(acct, token)] = _amount(amount, f"$.accounts.{acct}.{token}")

    contracts: dict[str, object] = {}
    for i, c in enumerate(doc.get("contracts", [])):
        cid, contract = contract_from_json(c, f"$.contracts[{i}]", primary)
        if cid in contracts:
            raise ParseError(f"$.contracts[{i}]", f"duplicate contract id {cid!r}")
        contracts[cid] = contract

    new_contract = None
    if doc.get("new_contract") is not None:
        cid, contract = contract_from_json(doc["new_contract"], "$.new_contract", primary)
        if cid in contracts:
            raise ParseError("$.new_contract", f"contract id {cid!r} already deployed")
        new_contract = (cid, contract)

    known_venues = set(contracts) | ({new_contract[0]} if new_contract else set())

    miner = doc.get("miner", {})
    miner_account = miner.get("account", "miner")
    flags = miner.get("flags", {})

    def load_txs(objs, path, origin):
        txs = []
        for i, obj in enumerate(objs):
            tx = tx_from_json(obj, f"{path}[{i}]", origin)
            if tx.venue not in known_venues:
                raise ParseError(f"{path}[{i}].venue", f"unknown venue {tx.venue!r}")
            txs.append(tx)
        return tuple(txs)

    mempool = load_txs(doc.get("mempool", []), "$.mempool", "mempool")
    templates = load_txs(miner.get("templates", []), "$.miner.templates", "miner")
    for i, tx in enumerate(templates):
        if tx.actor != miner_account:
            raise ParseError(
                f"$.miner.templates[{i}].actor",
                f"templates must act as the miner account {miner_account!r}",
            )

    valuation = None
    if doc.get("valuation") is not None:
        v = doc["valuation"]
        prices = {}
        for token, frac in v.get("prices", {}).items():
            if token not in token_ids:
                raise ParseError("$.valuation.prices", f"unknown token {token!r}")
            prices[token] = _fraction(frac, f"$.valuation.prices.{token}")
        valuation = Valuation(primary=primary, mode=v.get("mode", "primary_only"), prices=prices)

    b = doc.get("budget", {})
    budget = SearchBudget(
        mode=b.get("mode", "randomized"),
        max_paths=_amount(b.get("max_paths", 400_000), "$.budget.max_paths", 1),
        seed=_amount(b.get("seed", 0), "$.budget.seed"),
        tractability_threshold=_amount(b.get("tractability_threshold", 9), "$.budget.tractability_threshold"),
    )

    insertion_bounds = None
    if doc.get("insertion_bounds") is not None:
        ib = doc["insertion_bounds"]
        insertion_bounds = (
            _amount(_require(ib, "alpha_min", "$.insertion_bounds"), "$.insertion_bounds.alpha_min", 1),
            _amount(_require(ib, "alpha_max", "$.insertion_bounds"), "$.insertion_bounds.alpha_max", 1),
        )

    epsilon = Fraction(0)
    if doc.get("epsilon") is not None:
        epsilon = _fraction(doc["epsilon"], "$.epsilon")

    return Scenario(
        tokens=tuple(tokens),
        balances=balances,
        contracts=contracts,
        mempool=mempool,
        miner_account=miner_account,
        templates=templates,
        allow_reorder=bool(flags.get("reorder", True)),
        allow_censor=bool(flags.get("censor", False)),
        allow_insert=bool(flags.get("insert", False)),
        k=_amount(miner.get("k", 1), "$.miner.k", 1),
        charge_fees=bool(miner.get("charge_fees", False)),
        valuation=valuation,
        budget=budget,
        epsilon=epsilon,
        insertion_bounds=insertion_bounds,
        new_contract=new_contract,
        beneficiary=doc.get("beneficiary"),
        block_number=_amount(doc.get("block_number", 0), "$.block_number"),
    )


def scenario_to_dict(s: Scenario) -> dict:
    accounts: dict[str, dict[str, str]] = {}
    for (acct, token), amount in sorted(s.balances.items()):
        accounts.setdefault(acct, {})[token] = str(amount)
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "tokens": [
            {"id": t.id, **({"primary": True} if t.primary else {}), "decimals": t.decimals}
            for t in s.tokens
        ],
        "accounts": accounts,
        "contracts": [contract_to_json(cid, c) for cid, c in sorted(s.contracts.items())],
        "mempool": [tx_to_json(tx) for tx in s.mempool],
        "miner": {
            "account": s.miner_account,
            "templates": [tx_to_json(tx) for tx in s.templates],
            "flags": {
                "reorder": s.allow_reorder,
                "censor": s.allow_censor,
                "insert": s.allow_insert,
            },
            "k": s.k,
            "charge_fees": s.charge_fees,
        },
        "budget": {
            "mode": s.budget.mode,
            "max_paths": s.budget.max_paths,
            "seed": s.budget.seed,
            "tractability_threshold": s.budget.tractability_threshold,
        },
    }
    if s.valuation is not None:
        doc["valuation"] = {
            "mode": s.valuation.mode,
            "prices": {
                t: _fraction_json(p) for t, p in sorted(s.valuation.prices.items()) if t != s.primary
            },
        }
    if s.epsilon != 0:
        doc["epsilon"] = _fraction_json(s.epsilon)
    if s.insertion_bounds is not None:
        doc["insertion_bounds"] = {
            "alpha_min": str(s.insertion_bounds[0]),
            "alpha_max": str(s.insertion_bounds[1]),
        }
    if s.new_contract is not None:
        doc["new_contract"] = contract_to_json(*s.new_contract)
    if s.beneficiary is not None:
        doc["beneficiary"] = s.beneficiary
    if s.block_number:
        doc["block_number"] = s.block_number
    return doc


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as e:
        raise ParseError("$", f"invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("$", "scenario must be a JSON object")
    return scenario_from_dict(doc)


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(scenario_to_dict(s)))


def dumps_canonical(doc: dict) -> str:
    """Stable serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
