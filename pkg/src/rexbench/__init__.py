"""Interactive workbench for authoring rule-based relation extractors."""

from .corpus import (Corpus, CorpusBuilder, CorpusFormatError, build_indices,
                     ingest, load_corpus)
from .rules import (Registry, Rule, Ruleset, RuleError, RuleSafetyError,
                    RuleSyntaxError, RuleTypeError, check_safety, infer_types,
                    parse_rule, predicate_graph, print_rule)
from .compiler import CompiledRule, compile_rule, expand_intensional, optimize
from .executor import (Extraction, MaterializationResult, TupleSet, eval_plan,
                       extractions, incremental_update, materialize_ruleset)

__all__ = [
    "Corpus", "CorpusBuilder", "CorpusFormatError", "build_indices", "ingest",
    "load_corpus", "Registry", "Rule", "Ruleset", "RuleError",
    "RuleSafetyError", "RuleSyntaxError", "RuleTypeError", "check_safety",
    "infer_types", "parse_rule", "predicate_graph", "print_rule",
    "CompiledRule", "compile_rule", "expand_intensional", "optimize",
    "Extraction", "MaterializationResult", "TupleSet", "eval_plan",
    "extractions", "incremental_update", "materialize_ruleset",
]

__version__ = "0.1.0"
