"""Chronological event logs and replay validation.

Logs are flat CSV with a header row, one record per contract event, sorted
by (block_number, tx_index).  Sparse columns per kind:

    swap              actor, token_in, amount_in (token_out for readability)
    liquidity_add     actor, amount_x, amount_y
    liquidity_remove  actor, shares
    cdp               actor, sub_kind, qty
    liquidate         actor, victim
    price_update      price_num, price_den   (CDP book oracle override)
    fee_update        actor, debt_value      (post-stability-fee debt)

``reverted`` marks records the export knows failed on-chain; they are
skipped.  Replay recomputes swap outputs from the model, so the final
reserves measure model fidelity; actors are funded on demand (exports do not
carry wallet balances).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .contracts import AmmPool, MakerBook
from .state import (
    AddLiquidity,
    CdpManipulate,
    Liquidate,
    RemoveLiquidity,
    State,
    Swap,
    Tx,
    apply_tx,
)
from .scenario import ParseError

COLUMNS = [
    "venue",
    "block_number",
    "tx_index",
    "kind",
    "actor",
    "token_in",
    "amount_in",
    "token_out",
    "amount_x",
    "amount_y",
    "shares",
    "sub_kind",
    "qty",
    "victim",
    "price_num",
    "price_den",
    "debt_value",
    "reverted",
]

KINDS = ("swap", "liquidity_add", "liquidity_remove", "cdp", "liquidate", "price_update", "fee_update")


@dataclass(frozen=True)
class Record:
    venue: str
    block_number: int
    tx_index: int
    kind: str
    actor: str = ""
    token_in: str = ""
    amount_in: int = 0
    token_out: str = ""
    amount_x: int = 0
    amount_y: int = 0
    shares: int = 0
    sub_kind: str = ""
    qty: int = 0
    victim: str = ""
    price_num: int = 0
    price_den: int = 0
    debt_value: int = 0
    reverted: bool = False


def _int_cell(row: dict, key: str, line: int) -> int:
    raw = (row.get(key) or "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"line {line}", f"column {key!r}: not an integer: {raw!r}") from None


def read_event_log(path: str | Path) -> list[Record]:
    records: list[Record] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "kind" not in reader.fieldnames:
            raise ParseError("line 1", "missing header row")
        for line, row in enumerate(reader, start=2):
            kind = (row.get("kind") or "").strip()
            if kind not in KINDS:
                raise ParseError(f"line {line}", f"unknown record type {kind!r}")
            records.append(
                Record(
                    venue=(row.get("venue") or "").strip(),
                    block_number=_int_cell(row, "block_number", line),
                    tx_index=_int_cell(row, "tx_index", line),
                    kind=kind,
                    actor=(row.get("actor") or "").strip(),
                    token_in=(row.get("token_in") or "").strip(),
                    amount_in=_int_cell(row, "amount_in", line),
                    token_out=(row.get("token_out") or "").strip(),
                    amount_x=_int_cell(row, "amount_x", line),
                    amount_y=_int_cell(row, "amount_y", line),
                    shares=_int_cell(row, "shares", line),
                    sub_kind=(row.get("sub_kind") or "").strip(),
                    qty=_int_cell(row, "qty", line),
                    victim=(row.get("victim") or "").strip(),
                    price_num=_int_cell(row, "price_num", line),
                    price_den=_int_cell(row, "price_den", line),
                    debt_value=_int_cell(row, "debt_value", line),
                    reverted=(row.get("reverted") or "").strip() in ("1", "true", "True"),
                )
            )
    order = [(r.block_number, r.tx_index) for r in records]
    if order != sorted(order):
        raise ParseError("$", "records must be sorted by (block_number, tx_index)")
    return records


def write_event_log(records: list[Record], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.venue,
                    r.block_number,
                    r.tx_index,
                    r.kind,
                    r.actor,
                    r.token_in,
                    r.amount_in or "",
                    r.token_out,
                    r.amount_x or "",
                    r.amount_y or "",
                    r.shares or "",
                    r.sub_kind,
                    r.qty or "",
                    r.victim,
                    r.price_num or "",
                    r.price_den or "",
                    r.debt_value or "",
                    "1" if r.reverted else "",
                ]
            )


def record_to_tx(record: Record) -> Tx | None:
    """Transaction equivalent of a record; None for book-keeping records."""
    if record.kind == "swap":
        action = Swap(record.token_in, record.token_out, record.amount_in)
    elif record.kind == "liquidity_add":
        action = AddLiquidity(record.amount_x, record.amount_y)
    elif record.kind == "liquidity_remove":
        action = RemoveLiquidity(record.shares)
    elif record.kind == "cdp":
        action = CdpManipulate(record.sub_kind, record.qty)
    elif record.kind == "liquidate":
        action = Liquidate(record.victim)
    else:
        return None
    return Tx(record.actor, record.venue, action)


@dataclass(frozen=True)
class ReplayFailure:
    index: int
    record: Record
    reason: str


def replay(state: State, records: list[Record], autofund: bool = True) -> tuple[State, list[ReplayFailure], dict[str, int]]:
    """Apply a log in order; returns (final state, failures, swaps per venue).

    ``autofund`` tops up an actor's input balance before each transfer-in,
    since chain exports carry no wallet balances.
    """
    failures: list[ReplayFailure] = []
    swap_counts: dict[str, int] = {}
    for i, record in enumerate(records):
        if record.reverted:
            continue
        contract = state.contracts.get(record.venue)
        if contract is None:
            failures.append(ReplayFailure(i, record, "unknown venue"))
            continue

        if record.kind == "price_update":
            if not isinstance(contract, MakerBook):
                failures.append(ReplayFailure(i, record, "price_update on a non-book venue"))
                continue
            contracts = dict(state.contracts)
            contracts[record.venue] = replace(contract, oracle_price=(record.price_num, record.price_den))
            state = State(state.balances, contracts, record.block_number)
            continue
        if record.kind == "fee_update":
            if not isinstance(contract, MakerBook):
                failures.append(ReplayFailure(i, record, "fee_update on a non-book venue"))
                continue
            debt = dict(contract.debt)
            debt[record.actor] = record.debt_value
            contracts = dict(state.contracts)
            contracts[record.venue] = replace(contract, debt=debt)
            state = State(state.balances, contracts, record.block_number)
            continue

        tx = record_to_tx(record)
        assert tx is not None
        if autofund:
            state = _fund_for(state, record, contract)
        state = state.with_block(record.block_number)
        nxt = apply_tx(state, tx)
        if nxt is None:
            failures.append(ReplayFailure(i, record, "transaction invalid at replay state"))
            continue
        state = nxt
        if record.kind == "swap":
            swap_counts[record.venue] = swap_counts.get(record.venue, 0) + 1
    return state, failures, swap_counts


def _fund_for(state: State, record: Record, contract) -> State:
    needs: list[tuple[str, int]] = []
    if record.kind == "swap":
        needs.append((record.token_in, record.amount_in))
    elif record.kind == "liquidity_add" and isinstance(contract, AmmPool):
        needs.append((contract.token_x, record.amount_x))
        needs.append((contract.token_y, record.amount_y))
    elif record.kind == "cdp" and record.sub_kind == "deposit_collateral" and isinstance(contract, MakerBook):
        needs.append((contract.collateral_token, record.qty))
    elif record.kind == "cdp" and record.sub_kind == "pay_loan" and isinstance(contract, MakerBook):
        needs.append((contract.loan_token, record.qty))
    if not needs:
        return state
    balances = dict(state.balances)
    for token, amount in needs:
        key = (record.actor, token)
        if balances.get(key, 0) < amount:
            balances[key] = amount
    return State(balances, state.contracts, state.block_number)


# ---------------------------------------------------------------------------
# Diffing against an expected final snapshot
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldDiff:
    venue: str
    field: str
    actual: int
    expected: int
    tolerance: int

    @property
    def abs_diff(self) -> int:
        return abs(self.actual - self.expected)

    @property
    def rel_diff(self) -> Fraction | None:
        if self.expected == 0:
            return None if self.actual == 0 else Fraction(1)
        return Fraction(self.abs_diff, abs(self.expected))

    @property
    def within(self) -> bool:
        return self.abs_diff <= self.tolerance


@dataclass(frozen=True)
class ReplayReport:
    diffs: tuple[FieldDiff, ...]
    failures: tuple[ReplayFailure, ...]
    swap_counts: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(d.within for d in self.diffs)

    def exceeding(self) -> list[FieldDiff]:
        return [d for d in self.diffs if not d.within]


def contract_snapshot(contract) -> dict[str, int]:
    """Flat integer view of a contract's comparable fields."""
    if isinstance(contract, AmmPool):
        return {"reserve_x": contract.reserve_x, "reserve_y": contract.reserve_y}
    if isinstance(contract, MakerBook):
        out: dict[str, int] = {}
        for acct in sorted(contract.collateral):
            out[f"collateral:{acct}"] = contract.collateral[acct]
        for acct in sorted(contract.debt):
            out[f"debt:{acct}"] = contract.debt[acct]
        return out
    raise ParseError("<expected>", f"no snapshot for contract {contract!r}")


def replay_validate(
    state: State,
    records: list[Record],
    expected: dict[str, dict[str, int]],
    amm_tolerance_per_swap: int = 1,
    autofund: bool = True,
) -> ReplayReport:
    """Replay a log and diff the final contract fields against an expected
    snapshot.  AMM reserves tolerate the accumulated rounding (one base unit
    per applied swap); book fields must match exactly.
    """
    final, failures, swap_counts = replay(state, records, autofund=autofund)
    diffs: list[FieldDiff] = []
    for venue in sorted(expected):
        contract = final.contracts.get(venue)
        if contract is None:
            raise ParseError(f"$.{venue}", "expected snapshot names an unknown venue")
        snapshot = contract_snapshot(contract)
        tolerance = (
            amm_tolerance_per_swap * swap_counts.get(venue, 0)
            if isinstance(contract, AmmPool)
            else 0
        )
        for fname in sorted(expected[venue]):
            if fname not in snapshot:
                raise ParseError(f"$.{venue}.{fname}", "unknown field in expected snapshot")
            diffs.append(
                FieldDiff(
                    venue=venue,
                    field=fname,
                    actual=snapshot[fname],
                    expected=expected[venue][fname],
                    tolerance=tolerance,
                )
            )
    return ReplayReport(diffs=tuple(diffs), failures=tuple(failures), swap_counts=swap_counts)


def load_expected(path: str | Path) -> dict[str, dict[str, int]]:
    import json

    doc = json.loads(Path(path).read_text())
    out: dict[str, dict[str, int]] = {}
    for venue, fields in doc.items():
        out[venue] = {}
        for fname, value in fields.items():
            if isinstance(value, float):
                raise ParseError(f"$.{venue}.{fname}", "floats are not allowed")
            out[venue][fname] = int(value)
    return out


def log_from_sequence(state: State, txs: list[Tx], block_number: int = 0) -> tuple[list[Record], State]:
    """Engine-side log writer: execute a sequence strictly and emit one
    record per transaction (round-trip fixture for replay validation)."""
    records: list[Record] = []
    current = state
    for i, tx in enumerate(txs):
        nxt = apply_tx(current, tx)
        if nxt is None:
            raise ParseError(f"$.txs[{i}]", "sequence invalid while writing log")
        a = tx.action
        base = dict(venue=tx.venue, block_number=block_number, tx_index=i, actor=tx.actor)
        if type(a) is Swap:
            records.append(
                Record(kind="swap", token_in=a.token_in, amount_in=a.amount, token_out=a.token_out, **base)
            )
        elif type(a) is AddLiquidity:
            records.append(Record(kind="liquidity_add", amount_x=a.amount_x, amount_y=a.amount_y, **base))
        elif type(a) is RemoveLiquidity:
            records.append(Record(kind="liquidity_remove", shares=a.shares, **base))
        elif type(a) is CdpManipulate:
            records.append(Record(kind="cdp", sub_kind=a.kind, qty=a.qty, **base))
        elif type(a) is Liquidate:
            records.append(Record(kind="liquidate", victim=a.victim, **base))
        else:
            raise ParseError(f"$.txs[{i}]", "bets are not loggable events")
        current = nxt
    return records, current
