"""Hash-chained append-only event log.

Every record links to its predecessor through a sha256 chain, so a single
flipped byte anywhere breaks verification at that seq. The log is the replay
input: scenario + seed + logged commands + logged provider outputs fully
determine a run.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .canonical import ZERO_DIGEST, chain_hash
from .errors import ChainError

KINDS = (
    "MOVE", "PARAM", "INJECT", "REQUEST", "RESPONSE", "CONFLICT",
    "VERDICT", "COMMIT", "ABSTRACT", "CAPSULE", "METRICS", "SNAPSHOT",
)

# Tick-phase ownership of each record kind (phase 0 is the pre-run genesis).
KIND_PHASES: dict[str, tuple[int, ...]] = {
    "PARAM": (1,),
    "VERDICT": (1,),
    "MOVE": (2,),
    "INJECT": (3,),
    "REQUEST": (5,),
    "RESPONSE": (5,),
    "CONFLICT": (6,),
    "COMMIT": (7,),
    "ABSTRACT": (8,),
    "CAPSULE": (8,),
    "METRICS": (9,),
    "SNAPSHOT": (0, 9),
}


@dataclass(frozen=True)
class LogRecord:
    seq: int
    tick: int
    kind: str
    payload: dict[str, Any]
    chain: str

    def body(self) -> dict[str, Any]:
        return {"seq": self.seq, "tick": self.tick, "kind": self.kind, "payload": self.payload}

    def to_dict(self) -> dict[str, Any]:
        return {**self.body(), "chain": self.chain}


@dataclass
class EventLog:
    records: list[LogRecord] = field(default_factory=list)

    @property
    def head_seq(self) -> int:
        return self.records[-1].seq if self.records else -1

    def append(self, tick: int, kind: str, payload: dict[str, Any]) -> LogRecord:
        if kind not in KINDS:
            raise ChainError(f"unknown record kind '{kind}'")
        seq = self.head_seq + 1
        prev = self.records[-1].chain if self.records else ZERO_DIGEST
        body = {"seq": seq, "tick": tick, "kind": kind, "payload": payload}
        record = LogRecord(seq=seq, tick=tick, kind=kind, payload=payload,
                           chain=chain_hash(prev, body))
        self.records.append(record)
        return record

    def since(self, seq: int) -> list[LogRecord]:
        return [r for r in self.records if r.seq > seq]

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for record in self.records:
                handle.write(json.dumps(record.to_dict(), sort_keys=True,
                                        separators=(",", ":"), ensure_ascii=False))
                handle.write("\n")


def verify_chain(records: Iterable[LogRecord]) -> None:
    """Check seq gaplessness and recompute every chain link."""
    prev = ZERO_DIGEST
    expected_seq = 0
    for record in records:
        if record.seq != expected_seq:
            raise ChainError(f"seq gap: expected {expected_seq}, found {record.seq}")
        recomputed = chain_hash(prev, record.body())
        if recomputed != record.chain:
            raise ChainError(f"chain mismatch at seq {record.seq}")
        prev = record.chain
        expected_seq += 1


def read_log(path: str | Path) -> list[LogRecord]:
    """Parse and chain-verify a log file."""
    records: list[LogRecord] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                records.append(LogRecord(
                    seq=int(raw["seq"]),
                    tick=int(raw["tick"]),
                    kind=str(raw["kind"]),
                    payload=raw["payload"],
                    chain=str(raw["chain"]),
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ChainError(f"malformed log record at line {line_no}: {exc}") from exc
    verify_chain(records)
    return records
