from .loader import (
    DEFAULT_SCENARIO,
    default_scenario,
    dump_scenario,
    load_scenario,
    load_scenario_file,
    read_scenario_file,
    resolve_path,
    sha256_text,
    update_scenario,
)
from .models import (
    Fragment,
    FragmentCatalog,
    Machine,
    QueryProfile,
    Scenario,
    Stage,
    Topology,
    WorkflowDefinition,
)
from .patterns import (
    DistributionPattern,
    pattern_from_product_set,
    pattern_from_spec,
    resolve_pattern,
)


__all__ = [
    "DEFAULT_SCENARIO",
    "DistributionPattern",
    "Fragment",
    "FragmentCatalog",
    "Machine",
    "QueryProfile",
    "Scenario",
    "Stage",
    "Topology",
    "WorkflowDefinition",
    "default_scenario",
    "dump_scenario",
    "load_scenario",
    "load_scenario_file",
    "pattern_from_product_set",
    "pattern_from_spec",
    "read_scenario_file",
    "resolve_path",
    "resolve_pattern",
    "sha256_text",
    "update_scenario",
]
