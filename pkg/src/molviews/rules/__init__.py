"""Rule view: rule-generation prompts, the rule language, and rule features."""

from molviews.rules.dsl import (
    BadPattern,
    DuplicateRuleId,
    ExternalDescriptor,
    MissingExternal,
    NonFiniteResult,
    Rule,
    RuleError,
    RuleSet,
    RuleSyntaxError,
    UnknownDescriptor,
    parse_rules,
    ruleset_to_json,
    serialize_rules,
)
from molviews.rules.features import (
    NormalizationStats,
    RuleFeatureVector,
    StatsMismatch,
    apply_normalization,
    evaluate_rules,
    fit_normalization,
    invert_normalization,
    normalize_matrix,
)
from molviews.rules.prompts import (
    SubsetTooLarge,
    build_data_rule_prompt,
    build_scientific_rule_prompt,
    sample_data_subsets,
)

__all__ = [
    "Rule", "RuleSet", "ExternalDescriptor", "RuleFeatureVector", "NormalizationStats",
    "parse_rules", "serialize_rules", "ruleset_to_json", "evaluate_rules",
    "fit_normalization", "apply_normalization", "invert_normalization", "normalize_matrix",
    "build_scientific_rule_prompt", "build_data_rule_prompt", "sample_data_subsets",
    "RuleError", "RuleSyntaxError", "UnknownDescriptor", "DuplicateRuleId", "BadPattern",
    "MissingExternal", "NonFiniteResult", "StatsMismatch", "SubsetTooLarge",
]
