"""Plugin host with per-plugin storage isolation and declared capabilities.

Each plugin owns exactly one storage namespace (its own id); any read or
write outside it is rejected and logged, never silently dropped. Read access
to kernel structures is granted only through declared capabilities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import IsolationError, PluginError

CAPABILITIES = ("read_topology", "read_capsules", "provider_variant")


@dataclass(frozen=True)
class PluginManifest:
    id: str
    capabilities: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise PluginError("plugin id must be non-empty")
        unknown = sorted(set(self.capabilities) - set(CAPABILITIES))
        if unknown:
            raise PluginError(f"plugin '{self.id}' declares unknown capabilities {unknown}")

    @property
    def namespace(self) -> str:
        return self.id


class PluginContext:
    """Capability-gated view handed to plugin hooks."""

    def __init__(self, host: "PluginHost", manifest: PluginManifest) -> None:
        self._host = host
        self._manifest = manifest

    def _check_key(self, key: str, op: str) -> None:
        prefix = self._manifest.namespace + "/"
        if not key.startswith(prefix):
            self._host.log_violation(self._manifest.id, op, key)
            raise IsolationError(
                f"plugin '{self._manifest.id}' may not {op} key '{key}' "
                f"outside namespace '{prefix}*'"
            )

    def storage_put(self, key: str, value: Any) -> None:
        self._check_key(key, "write")
        self._host.storage[self._manifest.namespace][key] = value

    def storage_get(self, key: str) -> Any:
        self._check_key(key, "read")
        return self._host.storage[self._manifest.namespace].get(key)

    def topology(self) -> dict[str, Any]:
        self._require("read_topology")
        return self._host.topology_reader()

    def capsules(self) -> dict[str, Any]:
        self._require("read_capsules")
        return self._host.capsules_reader()

    def _require(self, capability: str) -> None:
        if capability not in self._manifest.capabilities:
            self._host.log_violation(self._manifest.id, "capability", capability)
            raise PluginError(
                f"plugin '{self._manifest.id}' did not declare capability '{capability}'"
            )


@dataclass
class Registration:
    manifest: PluginManifest
    context: PluginContext
    hooks: dict[str, Callable]


@dataclass
class PluginHost:
    topology_reader: Callable[[], dict[str, Any]] = lambda: {}
    capsules_reader: Callable[[], dict[str, Any]] = lambda: {}
    registrations: dict[str, Registration] = field(default_factory=dict)
    storage: dict[str, dict[str, Any]] = field(default_factory=dict)
    violations: list[dict[str, str]] = field(default_factory=list)

    def register(self, manifest: PluginManifest, hooks: dict[str, Callable] | None = None) -> Registration:
        if manifest.id in self.registrations:
            raise PluginError(f"duplicate plugin id '{manifest.id}'")
        provider = (hooks or {}).get("provider")
        if provider is not None and "provider_variant" not in manifest.capabilities:
            raise PluginError(
                f"plugin '{manifest.id}' supplies a provider without the "
                f"'provider_variant' capability"
            )
        self.storage[manifest.namespace] = {}
        registration = Registration(
            manifest=manifest,
            context=PluginContext(self, manifest),
            hooks=dict(hooks or {}),
        )
        self.registrations[manifest.id] = registration
        return registration

    def log_violation(self, plugin_id: str, op: str, target: str) -> None:
        self.violations.append({"plugin": plugin_id, "op": op, "target": target})

    def provider_variants(self) -> dict[str, Any]:
        return {
            plugin_id: reg.hooks["provider"]
            for plugin_id, reg in sorted(self.registrations.items())
            if "provider" in reg.hooks
        }

    def dispatch_tick(self, tick: int) -> None:
        """Observer hook fan-out; plugin failures are contained, not fatal."""
        for plugin_id in sorted(self.registrations):
            hook = self.registrations[plugin_id].hooks.get("on_tick")
            if hook is None:
                continue
            try:
                hook(self.registrations[plugin_id].context, tick)
            except (PluginError, IsolationError):
                continue
