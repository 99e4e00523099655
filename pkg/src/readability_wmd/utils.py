"""
Utility functions for reading and writing pipeline files
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Iterator, Tuple, Union

from pydantic import BaseModel

from readability_wmd.errors import CorpusFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def iter_jsonl(path: PathLike) -> Iterator[Tuple[int, Any]]:
    """
    Iterate over a JSON Lines file

    Blank lines are skipped.

    Args:
        path (PathLike): File to read

    Yields:
        Tuple[int, Any]: 1-based line number and decoded value

    Raises:
        CorpusFormatError: on a line that is not valid JSON, with its line number
    """
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                value = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc.msg}", line_no) from exc
            yield line_no, value


def write_jsonl(path: PathLike, rows: Iterable[Union[BaseModel, dict]]) -> int:
    """
    Write rows as JSON Lines

    Args:
        path (PathLike): Destination file
        rows (Iterable): pydantic models or plain dicts

    Returns:
        int: Number of rows written
    """
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            handle.write(to_json(row) + "\n")
            count += 1
    return count


def to_json(value: Union[BaseModel, dict, list], indent: Union[int, None] = None) -> str:
    """Canonical JSON text: sorted keys, no wall-clock data"""
    if isinstance(value, BaseModel):
        value = value.model_dump(mode="json")
    return json.dumps(value, sort_keys=True, ensure_ascii=False, indent=indent)


def write_json(path: PathLike, value: Union[BaseModel, dict, list]) -> None:
    Path(path).write_text(to_json(value, indent=2) + "\n", encoding="utf-8")


def canonical_hash(value: Union[BaseModel, dict, list]) -> str:
    """SHA-256 of the canonical JSON form of `value`"""
    return hashlib.sha256(to_json(value).encode("utf-8")).hexdigest()
