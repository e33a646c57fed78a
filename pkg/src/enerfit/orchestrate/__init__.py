"""Pipeline orchestration: run configs, artifact store, and the executor."""

from .config import (
    BadValueError,
    InconsistentError,
    MissingFieldError,
    RunConfig,
    UnknownFieldError,
    load_config_file,
    validate_run_config,
)
from .runner import (
    ALL_STEPS,
    BadStepsError,
    MissingArtifactError,
    Orchestrator,
    RunRecord,
    StepStatus,
)
from .store import (
    SERVICES,
    ArtifactStore,
    ModelVersion,
    NotFoundError,
    TaskMismatchError,
    new_ulid,
)

__all__ = [
    "ALL_STEPS",
    "ArtifactStore",
    "BadStepsError",
    "BadValueError",
    "InconsistentError",
    "MissingArtifactError",
    "MissingFieldError",
    "ModelVersion",
    "NotFoundError",
    "Orchestrator",
    "RunConfig",
    "RunRecord",
    "SERVICES",
    "StepStatus",
    "TaskMismatchError",
    "UnknownFieldError",
    "load_config_file",
    "new_ulid",
    "validate_run_config",
]
