"""socmatrix: a deterministic society-centric multi-agent simulation kernel.

Rules live on the space (prioritized rule layers injected by coordinate),
knowledge circulates as content-addressed capsules, alignment arises from
social-graph position, and rule conflicts escalate to a human arbiter
through a service API.
"""
from .canonical import canonical_json, state_hash
from .capsules import CapsuleStore, KnowledgeCapsule, ancestors, create_capsule, find_by_concept, fuse
from .cognition import (
    CognitionRequest,
    CognitionResponse,
    DecisionMode,
    StubProvider,
    decide,
    propose_action,
    stub_logits,
    zone_digest,
)
from .ecie import ContextStack, active_layers, compose_context, refresh_all, sync_rate
from .errors import (
    ChainError,
    ConflictStateError,
    IsolationError,
    PluginError,
    ProviderError,
    ReplayError,
    ScenarioError,
    WorldError,
)
from .eventlog import EventLog, LogRecord, read_log, verify_chain
from .handshake import Conflict, ConflictBook, ProposedAction
from .kernel import (
    Kernel,
    KernelConfig,
    MetricsReport,
    PlaybackProvider,
    ReplayResult,
    RunResult,
    replay,
    run_simulation,
    value_injection_experiment,
)
from .memory import (
    AbstractionPolicy,
    MemoryBuffer,
    MemoryEvent,
    RetrievalQuery,
    abstract_chunk,
    record_event,
    score_events,
    select_memories,
)
from .plugins import PluginHost, PluginManifest
from .topology import (
    CommunityPartition,
    SocialGraph,
    clustering_coefficient,
    conformity_term,
    detect_communities,
    role_alignment_bias,
    update_edge,
)
from .world import World, build_world, load_scenario, place_agent, set_live_param

__version__ = "0.1.0"
