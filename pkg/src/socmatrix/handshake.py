"""Symbolic-vs-neural conflict protocol: pass, auto-reject, or escalate.

Escalated actions wait in a queue for a human verdict; silence past the
deadline means denial (safety-dominant default), so no conflict can block
an agent forever. Terminal verdicts are immutable: the first one wins.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .ecie import ContextStack
from .errors import ConflictStateError, WorldError
from .world import RuleLayer

DEFAULT_DEADLINE_TICKS = 3

PENDING = "pending"
APPROVED = "approved"
DENIED = "denied"
AMENDED = "amended"
EXPIRED = "expired"
STATUSES = (PENDING, APPROVED, DENIED, AMENDED, EXPIRED)

VERDICTS = ("approve", "deny", "amend")

_VERDICT_STATUS = {"approve": APPROVED, "deny": DENIED, "amend": AMENDED}


@dataclass(frozen=True)
class ProposedAction:
    agent_id: str
    tick: int
    tag: str
    utterance: str
    stack: ContextStack
    utterance_tags: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent": self.agent_id,
            "tick": self.tick,
            "tag": self.tag,
            "utterance": self.utterance,
            "utterance_tags": list(self.utterance_tags),
            "stack": self.stack.to_dict(),
        }


@dataclass
class Conflict:
    id: int
    action: ProposedAction
    violated: list[tuple[str, str, str]]  # (layer id, tag, severity)
    deadline_tick: int
    created_tick: int
    status: str = PENDING
    verdict_by: str | None = None
    amended_content: str | None = None

    def is_terminal(self) -> bool:
        return self.status != PENDING

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "action": self.action.to_dict(),
            "violated": [
                {"layer": layer, "tag": tag, "severity": severity}
                for layer, tag, severity in self.violated
            ],
            "status": self.status,
            "verdict_by": self.verdict_by,
            "amended_content": self.amended_content,
            "deadline_tick": self.deadline_tick,
            "created_tick": self.created_tick,
        }


@dataclass(frozen=True)
class Evaluation:
    outcome: str  # "pass" | "auto_reject" | "escalate"
    violations: list[tuple[str, str, str]]
    conflict: Conflict | None = None


def find_violations(
    action: ProposedAction, stack: ContextStack, layers: dict[str, RuleLayer]
) -> list[tuple[str, str, str]]:
    """Which active layers forbid the proposed tag, and how severely."""
    violations = []
    for layer_id in stack.layer_ids():
        layer = layers[layer_id]
        severity = layer.hard_constraints.get(action.tag)
        if severity is not None:
            violations.append((layer_id, action.tag, severity))
    return violations


@dataclass
class ConflictBook:
    """All conflicts ever raised, plus the monotonic id counter."""

    conflicts: dict[int, Conflict] = field(default_factory=dict)
    next_id: int = 1

    def get(self, conflict_id: int) -> Conflict:
        if conflict_id not in self.conflicts:
            raise WorldError(f"unknown conflict {conflict_id}")
        return self.conflicts[conflict_id]

    def evaluate(
        self,
        action: ProposedAction,
        stack: ContextStack,
        layers: dict[str, RuleLayer],
        deadline_ticks: int = DEFAULT_DEADLINE_TICKS,
    ) -> Evaluation:
        """Check a proposal against the stack's hard constraints.

        No violation passes; any auto_reject-severity violation rejects
        outright; anything else becomes a pending conflict for a human.
        """
        violations = find_violations(action, stack, layers)
        if not violations:
            return Evaluation(outcome="pass", violations=[])
        if any(severity == "auto_reject" for _, _, severity in violations):
            return Evaluation(outcome="auto_reject", violations=violations)
        conflict = Conflict(
            id=self.next_id,
            action=action,
            violated=violations,
            deadline_tick=action.tick + deadline_ticks,
            created_tick=action.tick,
        )
        self.next_id += 1
        self.conflicts[conflict.id] = conflict
        return Evaluation(outcome="escalate", violations=violations, conflict=conflict)

    def apply_verdict(
        self, conflict_id: int, verdict: str, arbiter: str, content: str | None = None
    ) -> Conflict:
        """First verdict wins; anything after a terminal state is an error."""
        if verdict not in VERDICTS:
            raise WorldError(f"verdict '{verdict}' not in {list(VERDICTS)}")
        conflict = self.get(conflict_id)
        if conflict.is_terminal():
            raise ConflictStateError(
                f"conflict {conflict_id} is already {conflict.status}"
            )
        if verdict == "amend":
            if not content:
                raise WorldError(f"amend verdict for conflict {conflict_id} needs content")
            conflict.amended_content = content
        conflict.status = _VERDICT_STATUS[verdict]
        conflict.verdict_by = arbiter
        return conflict

    def expire(self, tick: int) -> list[Conflict]:
        """Deadline sweep: pending conflicts at or past their deadline expire.

        Expiry is denial semantics (fallback no-op); terminal conflicts are
        untouched.
        """
        expired = []
        for conflict_id in sorted(self.conflicts):
            conflict = self.conflicts[conflict_id]
            if conflict.status == PENDING and conflict.deadline_tick <= tick:
                conflict.status = EXPIRED
                expired.append(conflict)
        return expired

    def pending_queue(self) -> list[Conflict]:
        pending = [c for c in self.conflicts.values() if c.status == PENDING]
        return sorted(pending, key=lambda c: (c.deadline_tick, c.id))

    def by_status(self, status: str | None = None) -> list[Conflict]:
        if status is not None and status not in STATUSES:
            raise WorldError(f"unknown conflict status '{status}'")
        out = [
            c for c in self.conflicts.values() if status is None or c.status == status
        ]
        return sorted(out, key=lambda c: c.id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "next_id": self.next_id,
            "conflicts": [self.conflicts[i].to_dict() for i in sorted(self.conflicts)],
        }
