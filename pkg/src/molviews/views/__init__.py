"""Structure and task views: prompts, embedding providers, cache."""

from molviews.views.cache import EmbeddingCache, entry_name, prompt_digest
from molviews.views.embedding import (
    StructureViewVector,
    ViewEmbedding,
    WrongCount,
    assemble_structure_view,
    embed,
    embed_molecules,
)
from molviews.views.prompts import (
    BBBP_TASK_QUESTION,
    STRUCTURE_QUESTIONS,
    PromptTemplate,
    build_structure_prompts,
    build_task_prompt,
)
from molviews.views.providers import (
    DimMismatch,
    HttpEmbeddingProvider,
    MockProvider,
    ProviderError,
    ProviderFailure,
    ProviderUnreachable,
    RateLimited,
    mock_embed,
)

__all__ = [
    "EmbeddingCache", "entry_name", "prompt_digest",
    "ViewEmbedding", "StructureViewVector", "embed", "embed_molecules", "assemble_structure_view",
    "PromptTemplate", "STRUCTURE_QUESTIONS", "BBBP_TASK_QUESTION",
    "build_structure_prompts", "build_task_prompt",
    "MockProvider", "HttpEmbeddingProvider", "mock_embed",
    "DimMismatch", "WrongCount", "ProviderFailure", "ProviderUnreachable", "ProviderError", "RateLimited",
]
