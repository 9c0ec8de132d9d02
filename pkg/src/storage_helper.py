"""
File persistence for experiment tables.

CSV files start with the schema comment line, then a header row with the
ExperimentRecord fields in declaration order. Floats are written with 17
significant digits so a parsed file reproduces the table exactly.
"""

import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from src.models import EllSample, ExperimentConfig, ExperimentRecord, OutputFormat

load_dotenv()

logger = logging.getLogger(__name__)

SCHEMA_LINE = "# kaczeros-schema v1"
SCHEMA_NAME = "kaczeros-schema v1"
RESULTS_DIR = Path(os.getenv("KACZEROS_RESULTS_DIR", "results"))

COLUMNS: Tuple[str, ...] = tuple(ExperimentRecord.model_fields)
ELL_COLUMNS: Tuple[str, ...] = tuple(EllSample.model_fields)


def _ensure_parent(path: Path) -> None:
    """Create the output directory if it doesn't exist"""
    path.parent.mkdir(parents=True, exist_ok=True)


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _json_default(o: Any) -> Any:
    """JSON serializer for enums; everything else is rejected."""
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"Object of type {o.__class__.__name__} is not JSON serializable")


def default_output_path(config: ExperimentConfig) -> Path:
    """results/<mode>_<model>.<ext> when the config names no output path."""
    ext = "json" if config.output_format == OutputFormat.JSON else "csv"
    name = f"{config.mode.value.lower()}_{config.model.descriptor.replace('=', '')}.{ext}"
    return RESULTS_DIR / name


def records_to_csv(records: Sequence[ExperimentRecord], path: Path) -> None:
    """
    Write records as a versioned CSV table.

    Args:
        records: Rows in output order
        path: Destination file
    """
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(SCHEMA_LINE + "\n")
        writer = csv.writer(f)
        writer.writerow(COLUMNS)
        for record in records:
            writer.writerow([_format_cell(getattr(record, name)) for name in COLUMNS])
    logger.info(f"Wrote {len(records)} rows to {path}")


def records_from_csv(path: Path) -> List[ExperimentRecord]:
    """Parse a file written by records_to_csv."""
    with open(path, "r", newline="", encoding="utf-8") as f:
        first = f.readline().rstrip("\r\n")
        if first != SCHEMA_LINE:
            raise ValueError(f"{path} does not start with '{SCHEMA_LINE}', found '{first}'")
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"{path} has columns {reader.fieldnames}, expected {list(COLUMNS)}")
        rows = []
        for row in reader:
            rows.append(ExperimentRecord.model_validate({k: (v if v != "" else None) for k, v in row.items()}))
    return rows


def records_to_json(records: Sequence[ExperimentRecord], path: Path, config: Optional[ExperimentConfig] = None) -> None:
    """Write records, with the producing config, as one JSON document."""
    _ensure_parent(path)
    document: Dict[str, Any] = {
        "schema": SCHEMA_NAME,
        "config": config.model_dump(mode="json") if config is not None else None,
        "records": [record.model_dump() for record in records],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, default=_json_default)
    logger.info(f"Wrote {len(records)} rows to {path}")


def records_from_json(path: Path) -> List[ExperimentRecord]:
    with open(path, "r", encoding="utf-8") as f:
        document = json.load(f)
    if document.get("schema") != SCHEMA_NAME:
        raise ValueError(f"{path} has schema {document.get('schema')!r}, expected {SCHEMA_NAME!r}")
    return [ExperimentRecord.model_validate(row) for row in document["records"]]


def save_records(
    records: Sequence[ExperimentRecord],
    path: Path,
    output_format: OutputFormat,
    config: Optional[ExperimentConfig] = None,
) -> Path:
    """Write in the requested format; returns the path written."""
    path = Path(path)
    try:
        if output_format == OutputFormat.JSON:
            records_to_json(records, path, config)
        else:
            records_to_csv(records, path)
    except Exception as e:
        logger.error(f"Failed to save results to {path}: {e}", exc_info=True)
        raise
    return path


def load_records(path: Path) -> List[ExperimentRecord]:
    """Read either format, chosen by file extension."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return records_from_json(path)
    return records_from_csv(path)


def ell_table_path(path: Path) -> Path:
    """Sibling file for the ell table: results.csv -> results.ell.csv"""
    path = Path(path)
    return path.with_name(f"{path.stem}.ell.csv")


def save_ell_table(samples: Sequence[EllSample], path: Path) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(SCHEMA_LINE + "\n")
        writer = csv.writer(f)
        writer.writerow(ELL_COLUMNS)
        for sample in samples:
            writer.writerow([_format_cell(getattr(sample, name)) for name in ELL_COLUMNS])
    logger.info(f"Wrote {len(samples)} ell samples to {path}")
