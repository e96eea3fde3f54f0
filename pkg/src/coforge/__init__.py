"""Co-creating grounded LLM service agents: build, teach, simulate, audit."""

from .agents import COOKLIST_FACETS, AgentSpec, compose_definition
from .engine import Engine, EngineConfig
from .errors import CoforgeError
from .knowledge import AttributedResponse, KnowledgeBase, SourceLocator, chunk_document
from .personas import PERSONA_FIXTURES, PersonaSpec
from .providers import ChatTurn, GenParams, MockProvider, RemoteProvider, cosine, hash_embed
from .sessions import ChatMessage, GroupSession

__version__ = "0.1.0"

__all__ = [
    "AgentSpec",
    "AttributedResponse",
    "COOKLIST_FACETS",
    "ChatMessage",
    "ChatTurn",
    "CoforgeError",
    "Engine",
    "EngineConfig",
    "GenParams",
    "GroupSession",
    "KnowledgeBase",
    "MockProvider",
    "PERSONA_FIXTURES",
    "PersonaSpec",
    "RemoteProvider",
    "SourceLocator",
    "chunk_document",
    "compose_definition",
    "cosine",
    "hash_embed",
    "__version__",
]
