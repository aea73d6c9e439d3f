"""
Readers and writers for every artifact a run produces. Floats are written
with repr() so the same values always give the same bytes.
"""

import csv
import hashlib
import json
import logging

from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy

from qgarchbench.components.diagnostics import AcfSeries, Histogram
from qgarchbench.model import PARAM_NAMES, QgarchPosterior, SeriesData
from qgarchbench.utils.errors import DataFormatError
from qgarchbench.utils.mcmc_op import CHAIN_CSV_HEADER, ChainResult

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def series_digest(series: SeriesData) -> str:
    """Hash of the observation values, independent of the file they came from."""
    return hashlib.sha256(series.y.astype("<f8").tobytes()).hexdigest()


def write_rows_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_series_csv(path: PathLike, series: SeriesData) -> Path:
    """Headerless, one observation per line."""
    path = Path(path)
    with open(path, "w") as f:
        for v in series.y:
            f.write(repr(float(v)))
            f.write("\n")
    return path


def read_series_csv(path: PathLike) -> SeriesData:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"Data file not found: {path}")
    values = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line.split(",")[0]))
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise DataFormatError(f"{path}: no observations")
    try:
        return SeriesData(y=numpy.asarray(values), meta={"source": str(path)})
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}") from e


def write_series_json(
    path: PathLike, series: SeriesData, config_hash: Optional[str] = None
) -> Path:
    path = Path(path)
    doc: Dict[str, Any] = {}
    if config_hash is not None:
        doc["config_hash"] = config_hash
    doc["y"] = [float(v) for v in series.y]
    doc["meta"] = series.meta
    with open(path, "w") as f:
        json.dump(doc, f, indent=4)
        f.write("\n")
    return path


def read_series_json(path: PathLike) -> SeriesData:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"Data file not found: {path}")
    try:
        with open(path) as f:
            doc = json.load(f)
        return SeriesData(y=numpy.asarray(doc["y"], dtype=numpy.float64), meta=doc.get("meta", {}))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"{path}: {e}") from e


def read_series(path: PathLike) -> SeriesData:
    if Path(path).suffix.lower() == ".json":
        return read_series_json(path)
    return read_series_csv(path)


def write_chain_csv(
    path: PathLike, result: ChainResult, posterior: Optional[QgarchPosterior] = None
) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        result.write_csv_to_file(f, posterior)
    return path


def read_chain_csv(path: PathLike) -> Tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]:
    """Returns (samples over alpha, beta, omega, gamma; log_post; accepted fraction)."""
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"Chain file not found: {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CHAIN_CSV_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(CHAIN_CSV_HEADER)}")
        rows = [row for row in reader if row]
    if not rows:
        raise DataFormatError(f"{path}: chain is empty")
    try:
        table = numpy.asarray([[float(v) for v in row] for row in rows])
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}") from e
    if table.shape[1] != len(CHAIN_CSV_HEADER):
        raise DataFormatError(f"{path}: ragged rows")
    samples = table[:, 1 : 1 + len(PARAM_NAMES)]
    return samples, table[:, -2], table[:, -1]


def _jsonable(value: Any) -> Any:
    if isinstance(value, numpy.ndarray):
        return value.tolist()
    if isinstance(value, numpy.generic):
        return value.item()
    return value


def write_proposal_history(
    path: PathLike, history: Sequence[Mapping[str, Any]], config_hash: Optional[str] = None
) -> Path:
    path = Path(path)
    with open(path, "w") as f:
        for entry in history:
            doc: Dict[str, Any] = {}
            if config_hash is not None:
                doc["config_hash"] = config_hash
            doc.update({k: _jsonable(v) for k, v in entry.items()})
            f.write(json.dumps(doc))
            f.write("\n")
    return path


def read_proposal_history(path: PathLike) -> List[Dict[str, Any]]:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def write_acf_csv(path: PathLike, series: AcfSeries) -> Path:
    rows = ([int(t), repr(float(v))] for t, v in zip(series.lags, series.values))
    return write_rows_csv(path, ["lag", "acf"], rows)


def write_histogram_csv(path: PathLike, hist: Histogram) -> Path:
    return write_rows_csv(path, ["bin_left", "bin_right", "count"], hist.rows())


def write_manifest(path: PathLike, config_hash: str, files: Sequence[PathLike]) -> Path:
    """Lists every artifact relative to the manifest directory with its digest."""
    path = Path(path)
    root = path.parent
    doc = {
        "config_hash": config_hash,
        "files": [
            {
                "path": Path(p).relative_to(root).as_posix(),
                "config_hash": config_hash,
                "sha256": file_sha256(p),
            }
            for p in sorted(files, key=lambda p: Path(p).relative_to(root).as_posix())
        ],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=4)
        f.write("\n")
    return path
