from docforge.reward.rewards import (
    DEFAULT_WEIGHTS,
    GoldInvalid,
    RewardReport,
    RewardWeights,
    Task,
    global_regularization,
    reward_formula,
    reward_kie,
    reward_table,
    reward_text,
)
from docforge.reward.validators import (
    CheckReport,
    JsonCheckReport,
    KieSchema,
    SchemaDefinitionError,
    canonical_latex_tokens,
    validate_json_strict,
    validate_latex,
    validate_tag_closure,
)

__all__ = [
    "DEFAULT_WEIGHTS",
    "CheckReport",
    "GoldInvalid",
    "JsonCheckReport",
    "KieSchema",
    "RewardReport",
    "RewardWeights",
    "SchemaDefinitionError",
    "Task",
    "canonical_latex_tokens",
    "global_regularization",
    "reward_formula",
    "reward_kie",
    "reward_table",
    "reward_text",
    "validate_json_strict",
    "validate_latex",
    "validate_tag_closure",
]
