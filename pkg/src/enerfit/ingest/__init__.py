"""Data ingestion: source validation, fetch, cleaning, scaling, splitting."""

from .pipeline import (
    BadRatioError,
    CleanReport,
    IngestArtifacts,
    IngestConfig,
    RowSplit,
    SchemaMismatchError,
    SplitDataset,
    StepError,
    TooFewRowsError,
    clean,
    load_split,
    run_ingestion,
    split,
)
from .scalers import (
    EmptyTableError,
    ScalerBundle,
    ScalerSet,
    UnseenCategoryError,
    fit_scalers,
    inverse_transform,
    table_fingerprint,
    transform,
)
from .sources import (
    ConnectorConfig,
    DataSource,
    HttpStatusError,
    IoError,
    MalformedCsvError,
    RawTable,
    UnrecognizedSourceError,
    UnsupportedSourceError,
    fetch,
    parse_csv,
    validate_source,
)

__all__ = [
    "BadRatioError",
    "CleanReport",
    "ConnectorConfig",
    "DataSource",
    "EmptyTableError",
    "HttpStatusError",
    "IngestArtifacts",
    "IngestConfig",
    "IoError",
    "MalformedCsvError",
    "RawTable",
    "RowSplit",
    "ScalerBundle",
    "ScalerSet",
    "SchemaMismatchError",
    "SplitDataset",
    "StepError",
    "TooFewRowsError",
    "UnrecognizedSourceError",
    "UnseenCategoryError",
    "UnsupportedSourceError",
    "clean",
    "fetch",
    "fit_scalers",
    "inverse_transform",
    "load_split",
    "parse_csv",
    "run_ingestion",
    "split",
    "table_fingerprint",
    "transform",
    "validate_source",
]
