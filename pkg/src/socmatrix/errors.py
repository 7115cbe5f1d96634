"""Exception types shared across the kernel."""
from __future__ import annotations


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate; message names the offending entity."""


class WorldError(ValueError):
    """Invalid world mutation (unknown id, non-adjacent move, out-of-domain param)."""


class ConflictStateError(ValueError):
    """Verdict applied to a conflict that is not pending (first verdict wins)."""


class ProviderError(RuntimeError):
    """Cognition provider failed or returned an invariant-violating response."""


class PluginError(ValueError):
    """Plugin registration or capability violation."""


class IsolationError(PluginError):
    """Plugin attempted to touch storage outside its own namespace."""


class ChainError(ValueError):
    """Event-log chain verification failed (tamper, gap, or truncation)."""


class ReplayError(ValueError):
    """Replayed state diverged from a recorded snapshot hash."""
