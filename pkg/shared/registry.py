import hashlib
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from core.functions import build_function_spec
from shared.config import CORPUS_FILE
from shared.errors import CorpusFormatError, InputError
from shared.logger import setup_logger
from shared.models import ConditionId, CorpusEntry, Status

logger = setup_logger(__name__)

# Record format: blank-line separated blocks of `key = value` lines, `#` comments.
REQUIRED_KEYS = ("name", "function", "dim", "box", "expected", "provenance")
OPTIONAL_KEYS = ("constraints", "affine", "failing")
KNOWN_KEYS = REQUIRED_KEYS + OPTIONAL_KEYS

# every expected verdict names where it comes from: `provenance = TAG: reason`
PROVENANCE_TAGS = ("PAPER", "TRIVIAL", "DERIVED")


def compute_entry_id(record: Dict[str, str]) -> str:
    """
    Deterministic entry ID: SHA256 over the normalized record,
    keys sorted, surrounding whitespace stripped.
    """
    hasher = hashlib.sha256()
    for key in sorted(record):
        hasher.update(f"{key}={record[key].strip()}\n".encode("utf-8"))
    return hasher.hexdigest()


def parse_records(text: str) -> List[Tuple[int, Dict[str, str]]]:
    """
    Splits corpus text into records.
    Returns (first line number, {key: value}) pairs; line numbers are 1-based.
    """
    records: List[Tuple[int, Dict[str, str]]] = []
    current: Dict[str, str] = {}
    start: Optional[int] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if current:
                records.append((start, current))
            current, start = {}, None
            continue

        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise CorpusFormatError(f"expected 'key = value', got {line!r}", lineno)
        if key not in KNOWN_KEYS:
            raise CorpusFormatError(f"unknown key {key!r}", lineno)
        if key in current:
            raise CorpusFormatError(f"duplicate key {key!r}", lineno)
        if start is None:
            start = lineno
        current[key] = value.strip()

    if current:
        records.append((start, current))
    return records


def build_entry(record: Dict[str, str], lineno: int) -> CorpusEntry:
    missing = [k for k in REQUIRED_KEYS if not record.get(k)]
    if missing:
        raise CorpusFormatError(f"record is missing {', '.join(missing)}", lineno)

    try:
        dim = int(record["dim"])
    except ValueError:
        raise CorpusFormatError(f"dim must be an integer, got {record['dim']!r}", lineno)

    try:
        expected = Status(record["expected"].lower())
    except ValueError:
        raise CorpusFormatError(f"unknown expected verdict {record['expected']!r}", lineno)

    tag, sep, reason = record["provenance"].partition(":")
    if tag.strip() not in PROVENANCE_TAGS or not sep or not reason.strip():
        raise CorpusFormatError(
            f"provenance must be one of {', '.join(PROVENANCE_TAGS)} followed by ': reason', "
            f"got {record['provenance']!r}",
            lineno,
        )

    failing: Optional[ConditionId] = None
    if record.get("failing"):
        try:
            failing = ConditionId(record["failing"])
        except ValueError:
            raise CorpusFormatError(f"unknown failing condition {record['failing']!r}", lineno)

    try:
        spec = build_function_spec(
            record["function"],
            dim,
            [record["constraints"]] if record.get("constraints") else [],
            record["box"],
            [record["affine"]] if record.get("affine") else [],
        )
    except InputError as e:
        raise CorpusFormatError(f"entry {record['name']!r}: {e}", lineno) from e

    return CorpusEntry(
        name=record["name"],
        spec=spec,
        expected=expected,
        expected_failing=failing,
        provenance=record["provenance"],
        entry_id=compute_entry_id(record),
        record=dict(record),
    )


def load_corpus(path: Path = CORPUS_FILE) -> List[CorpusEntry]:
    """
    Loads and validates a corpus file.
    An empty corpus is an error: the cross-check needs at least one entry.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"Corpus file not found: {path}")

    records = parse_records(path.read_text(encoding="utf-8"))
    if not records:
        raise CorpusFormatError(f"corpus {path} has no entries")

    entries: List[CorpusEntry] = []
    seen: Dict[str, int] = {}
    for lineno, record in records:
        entry = build_entry(record, lineno)
        if entry.name in seen:
            raise CorpusFormatError(f"duplicate entry name {entry.name!r} (first at line {seen[entry.name]})", lineno)
        seen[entry.name] = lineno
        entries.append(entry)

    logger.info(f"Loaded {len(entries)} corpus entries from {path}")
    return entries
