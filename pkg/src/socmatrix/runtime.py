"""Thread-safe wrapper around the kernel for service use.

The kernel itself is single-writer; this wrapper serializes tick execution,
lets many producers queue commands that apply at the next tick boundary, and
hands read-only, single-tick-consistent snapshots to API handlers.
"""
from __future__ import annotations

import logging
import threading
from typing import Any

from .errors import WorldError
from .eventlog import LogRecord
from .kernel import Kernel
from .world import World

logger = logging.getLogger(__name__)


class KernelRuntime:
    def __init__(self, kernel: Kernel) -> None:
        self.kernel = kernel
        self._lock = threading.RLock()
        self._new_records = threading.Condition(self._lock)
        self._queue: list[dict[str, Any]] = []
        self._ticker: threading.Thread | None = None
        self._stop = threading.Event()

    # -- command intake (many producers) -------------------------------------

    def enqueue(self, command: dict[str, Any]) -> int:
        """Queue a command; returns the tick at which it will apply."""
        with self._lock:
            self._queue.append(command)
            return self.kernel.tick

    # -- tick driving (single consumer) ---------------------------------------

    def step(self) -> list[LogRecord]:
        with self._new_records:
            commands, self._queue = self._queue, []
            records = self.kernel.run_tick(commands)
            self._new_records.notify_all()
            return records

    def start(self, interval: float, max_ticks: int | None = None) -> None:
        if self._ticker is not None:
            raise RuntimeError("ticker already running")

        def loop() -> None:
            executed = 0
            while not self._stop.wait(interval):
                self.step()
                executed += 1
                if max_ticks is not None and executed >= max_ticks:
                    return

        self._stop.clear()
        self._ticker = threading.Thread(target=loop, name="socmatrix-ticker", daemon=True)
        self._ticker.start()
        logger.info("ticker started: interval=%.3fs", interval)

    def stop(self) -> None:
        self._stop.set()
        if self._ticker is not None:
            self._ticker.join(timeout=5.0)
            self._ticker = None

    # -- log access ------------------------------------------------------------

    def head_seq(self) -> int:
        with self._lock:
            return self.kernel.log.head_seq

    def records_since(self, seq: int) -> list[LogRecord]:
        with self._lock:
            return self.kernel.log.since(seq)

    def wait_for_records(self, seq: int, timeout: float) -> bool:
        """Block until a record with seq greater than `seq` exists."""
        with self._new_records:
            return self._new_records.wait_for(
                lambda: self.kernel.log.head_seq > seq, timeout
            )

    # -- snapshot readers --------------------------------------------------------

    @property
    def world(self) -> World:
        return self.kernel.world

    def summary(self) -> dict[str, Any]:
        with self._lock:
            kernel = self.kernel
            metrics = kernel.latest_metrics or kernel.compute_metrics()
            return {
                "tick": kernel.tick,
                "agents": len(kernel.world.agents),
                "pending_conflicts": len(kernel.book.pending_queue()),
                "params": {
                    name: kernel.world.params[name].to_dict()
                    for name in sorted(kernel.world.params)
                },
                "metrics": metrics.to_dict(),
            }

    def agent_view(self, agent_id: str) -> dict[str, Any]:
        with self._lock:
            agent = self.kernel.world.agent(agent_id)
            role = self.kernel.world.role(agent.role_id)
            buffer = self.kernel.buffers[agent.id]
            return {
                "id": agent.id,
                "role": role.id,
                "tier": role.tier,
                "zone": agent.zone_id,
                "tick": agent.tick,
                "stack": agent.stack.to_dict() if agent.stack else None,
                "last_action": agent.last_action,
                "top_memories": [
                    buffer.get(eid).to_dict() for eid in agent.selected_memory_ids
                ],
            }

    def topology_view(self) -> dict[str, Any]:
        with self._lock:
            return self.kernel.topology_snapshot()

    def capsules_view(self) -> dict[str, Any]:
        with self._lock:
            store = self.kernel.store
            capsules = [store.capsules[c].to_dict() for c in sorted(store.capsules)]
            edges = [
                {"parent": parent, "child": capsule["id"]}
                for capsule in capsules
                for parent in capsule["provenance"]
            ]
            return {"capsules": capsules, "edges": edges}

    def conflicts_view(self, status: str | None = None) -> list[dict[str, Any]]:
        with self._lock:
            if status == "pending":
                conflicts = self.kernel.book.pending_queue()
            else:
                conflicts = self.kernel.book.by_status(status)
            return [c.to_dict() for c in conflicts]

    def conflict_status(self, conflict_id: int) -> str:
        with self._lock:
            return self.kernel.book.get(conflict_id).status

    def param_spec(self, name: str) -> dict[str, Any]:
        with self._lock:
            world = self.kernel.world
            if name not in world.params:
                raise WorldError(f"unknown live param '{name}'")
            return world.params[name].to_dict()

    def metrics_view(self, window: int | None = None) -> dict[str, Any]:
        with self._lock:
            return self.kernel.compute_metrics(window).to_dict()
