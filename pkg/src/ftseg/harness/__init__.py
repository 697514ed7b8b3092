from .config import (
    OUTPUT_DIR_ENV,
    DatasetSpec,
    ExperimentSpec,
    ModelSpec,
    SpecError,
    load_spec,
    spec_from_dict,
    validate_spec,
)
from .literature import LITERATURE_RESULTS
from .runner import (
    AggregateTable,
    AggregationError,
    ExperimentError,
    RunResult,
    aggregate,
    audit,
    emit_report,
    execute_run,
    load_results,
    prepare_data,
    run_experiment,
)

__all__ = [
    "AggregateTable",
    "AggregationError",
    "DatasetSpec",
    "ExperimentError",
    "ExperimentSpec",
    "LITERATURE_RESULTS",
    "ModelSpec",
    "OUTPUT_DIR_ENV",
    "RunResult",
    "SpecError",
    "aggregate",
    "audit",
    "emit_report",
    "execute_run",
    "load_results",
    "load_spec",
    "prepare_data",
    "run_experiment",
    "spec_from_dict",
    "validate_spec",
]
