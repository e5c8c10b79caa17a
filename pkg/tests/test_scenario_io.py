"""Scenario serialization: round trips, strictness, determinism."""

import json
from fractions import Fraction

import pytest

from mevsearch.contracts import AmmPool, MakerBook, Pricebet
from mevsearch.corpus import gen_corpus, make_spread_instance
from mevsearch.metrics import Valuation
from mevsearch.ordering import SearchBudget
from mevsearch.scenario import (
    ParseError,
    Scenario,
    TokenDecl,
    dumps_canonical,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from mevsearch.state import Bet, Liquidate, Swap, Tx


def full_scenario() -> Scenario:
    pool = AmmPool("BBT", "ETH", 10**21, 9 * 10**20, fee_bps=30)
    book = MakerBook(
        loan_token="BBT",
        collateral_token="ETH",
        price_source="amm",
        collateral={"v": 10**18},
        debt={"v": 10**18},
        oracle_price=(3, 2),
    )
    bet = Pricebet(oracle="amm", token="ETH", deadline=12, stake=100, reward=200, pot=100)
    return Scenario(
        tokens=(TokenDecl("ETH", primary=True), TokenDecl("BBT")),
        balances={("alice", "BBT"): 5 * 10**18, ("miner", "ETH"): 10**20},
        contracts={"amm": pool, "book": book},
        mempool=(
            Tx("alice", "amm", Swap("BBT", "ETH", 10**18), label="m0"),
            Tx("alice", "book", Liquidate("v"), label="m1", arrival_block=1),
        ),
        miner_account="miner",
        templates=(
            Tx("miner", "amm", Swap("ETH", "BBT", None, exact_out=True), origin="miner", label="t0"),
            Tx("miner", "bet", Bet(), origin="miner", label="t1"),
        ),
        allow_reorder=True,
        allow_censor=True,
        allow_insert=True,
        k=2,
        valuation=Valuation(primary="ETH", mode="oracle_priced", prices={"BBT": Fraction(9, 10)}),
        budget=SearchBudget(mode="randomized", max_paths=1234, seed=99, tractability_threshold=8),
        epsilon=Fraction(1, 20),
        insertion_bounds=(1, 10**22 - 1),
        new_contract=("bet", bet),
        beneficiary="alice",
        block_number=7,
    )


def test_round_trip_semantic_identity(tmp_path):
    s = full_scenario()
    path = tmp_path / "scn.json"
    save_scenario(s, path)
    s2 = load_scenario(path)
    assert scenario_to_dict(s2) == scenario_to_dict(s)
    assert s2.initial_state() == s.initial_state()
    assert s2.space() == s.space()
    assert s2.epsilon == s.epsilon and s2.insertion_bounds == s.insertion_bounds
    # a second save is byte-identical
    path2 = tmp_path / "scn2.json"
    save_scenario(s2, path2)
    assert path.read_text() == path2.read_text()


def test_saved_amounts_are_decimal_strings(tmp_path):
    path = tmp_path / "scn.json"
    save_scenario(full_scenario(), path)
    doc = json.loads(path.read_text())
    for acct, tokens in doc["accounts"].items():
        for token, amount in tokens.items():
            assert isinstance(amount, str) and amount.isdigit()
    for contract in doc["contracts"]:
        if contract["type"] == "amm":
            assert isinstance(contract["reserve_x"], str)
            assert isinstance(contract["reserve_y"], str)
    for tx in doc["mempool"]:
        if tx["type"] == "swap":
            assert tx["amount"] is None or isinstance(tx["amount"], str)


def test_floats_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema_version": 1, "tokens": [{"id": "ETH", "primary": true, "decimals": 1.5}]}')
    with pytest.raises(ParseError):
        load_scenario(path)


def test_unknown_venue_rejected():
    doc = {
        "schema_version": 1,
        "tokens": [{"id": "ETH", "primary": True}],
        "accounts": {},
        "contracts": [],
        "mempool": [
            {"actor": "a", "venue": "ghost", "type": "swap", "token_in": "ETH", "token_out": "ETH", "amount": "1"}
        ],
    }
    with pytest.raises(ParseError) as err:
        scenario_from_dict(doc)
    assert "ghost" in str(err.value)


def test_requires_exactly_one_primary():
    doc = {"schema_version": 1, "tokens": [{"id": "ETH"}, {"id": "BBT"}]}
    with pytest.raises(ParseError):
        scenario_from_dict(doc)


def test_wrong_schema_version():
    with pytest.raises(ParseError):
        scenario_from_dict({"schema_version": 2, "tokens": [{"id": "E", "primary": True}]})


def test_unresolved_amount_only_on_templates():
    doc = {
        "schema_version": 1,
        "tokens": [{"id": "ETH", "primary": True}, {"id": "BBT"}],
        "contracts": [
            {"id": "amm", "type": "amm", "token_x": "BBT", "token_y": "ETH",
             "reserve_x": "10", "reserve_y": "10"}
        ],
        "mempool": [
            {"actor": "a", "venue": "amm", "type": "swap", "token_in": "BBT",
             "token_out": "ETH", "amount": None}
        ],
    }
    with pytest.raises(ParseError):
        scenario_from_dict(doc)


def test_gen_corpus_is_deterministic(tmp_path):
    a = [dumps_canonical(scenario_to_dict(s)) for s in gen_corpus(7, 5, 6)]
    b = [dumps_canonical(scenario_to_dict(s)) for s in gen_corpus(7, 5, 6)]
    assert a == b
    c = [dumps_canonical(scenario_to_dict(s)) for s in gen_corpus(8, 5, 6)]
    assert a != c


def test_generated_instance_loads_and_runs(tmp_path):
    s = make_spread_instance(3, 1, 5)
    path = tmp_path / "g.json"
    save_scenario(s, path)
    loaded = load_scenario(path)
    state = loaded.initial_state()
    assert loaded.beneficiary == "whale"
    assert any(acct == "whale" for (acct, _tok) in state.balances)


def test_template_actor_must_be_miner():
    doc = {
        "schema_version": 1,
        "tokens": [{"id": "ETH", "primary": True}, {"id": "BBT"}],
        "contracts": [
            {"id": "amm", "type": "amm", "token_x": "BBT", "token_y": "ETH",
             "reserve_x": "10", "reserve_y": "10"}
        ],
        "miner": {
            "account": "miner",
            "templates": [
                {"actor": "mallory", "venue": "amm", "type": "swap",
                 "token_in": "BBT", "token_out": "ETH", "amount": "1"}
            ],
        },
    }
    with pytest.raises(ParseError) as err:
        scenario_from_dict(doc)
    assert "miner" in str(err.value)
