"""Film and relation dataset parsing plus vote preprocessing.

Films arrive as CSV (pipe-delimited ``actors``/``directors`` columns) or as
JSON objects with the same keys. Relations arrive as the JSON objects
produced by the debutant-relation prompt::

    {"star name": "...", "is related": 1, "related star name": "..."}

Every transform here returns new records; inputs are never mutated.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
import unicodedata
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FILM_COLUMNS = ("title", "year", "actors", "directors", "imdb_rating", "imdb_votes")
RELATION_KEYS = ("star name", "is related", "related star name")


class IngestError(Exception):
    """Fatal input problem: unreadable source, missing header, wrong shape."""


@dataclass(frozen=True)
class RowError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass(frozen=True)
class FilmRecord:
    title: str
    year: int
    actors: tuple[str, ...]
    directors: tuple[str, ...] = ()
    imdb_rating: float | None = None
    imdb_votes: float | None = None
    votes_norm: float | None = None

    @property
    def principals(self) -> tuple[str, ...]:
        """Actors then directors, each person once, billing order kept."""
        seen = dict.fromkeys(self.actors)
        seen.update(dict.fromkeys(self.directors))
        return tuple(seen)

    @property
    def film_id(self) -> str:
        return f"{self.title} ({self.year})"


@dataclass(frozen=True)
class RelationRecord:
    star_name: str
    is_related: bool
    related_star_name: str = ""

    def __post_init__(self):
        if self.is_related and not self.related_star_name:
            raise ValueError(f"{self.star_name!r}: related flag set but no related star name")
        if not self.is_related and self.related_star_name:
            raise ValueError(f"{self.star_name!r}: related star name given but related flag is 0")


@dataclass(frozen=True)
class YearWindow:
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"empty year window {self.start}-{self.end}")

    def __contains__(self, year: int) -> bool:
        return self.start <= year <= self.end

    def __str__(self) -> str:
        return f"{self.start}-{self.end}"

    @classmethod
    def parse(cls, text: str) -> "YearWindow":
        try:
            start, end = (int(part) for part in text.split("-"))
        except ValueError:
            raise ValueError(f"year window must look like 1990-2014, got {text!r}") from None
        return cls(start, end)


@dataclass(frozen=True)
class PreprocessConfig:
    actor_cap: int = 10
    graph_window: YearWindow = YearWindow(1990, 2014)
    cohort_window: YearWindow = YearWindow(2015, 2019)
    winsorize_quantile: float | None = None

    def __post_init__(self):
        if self.actor_cap < 1:
            raise ValueError("actor_cap must be >= 1")
        if self.graph_window.end >= self.cohort_window.start:
            raise ValueError("graph window must end before the cohort window starts")
        if self.winsorize_quantile is not None and not 0.0 < self.winsorize_quantile <= 1.0:
            raise ValueError("winsorize_quantile must be in (0, 1]")


@dataclass
class ParseResult:
    records: list = field(default_factory=list)
    errors: list[RowError] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def normalize_name(name: str) -> str:
    """Canonical person name: NFC form, outer whitespace trimmed, case kept."""
    return unicodedata.normalize("NFC", name).strip()


def _split_names(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        parts: Iterable = value.split("|")
    elif isinstance(value, (list, tuple)):
        parts = value
    else:
        raise ValueError(f"expected a name list, got {type(value).__name__}")
    names = (normalize_name(str(p)) for p in parts if p is not None)
    # keep first billing of a name listed twice
    return tuple(dict.fromkeys(n for n in names if n))


def _is_blank(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return isinstance(value, str) and value.strip().lower() in ("", "na", "nan", "null", "none")


def _number(value, label: str) -> float:
    try:
        return float(str(value).replace(",", "")) if isinstance(value, str) else float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{label} is not a number: {value!r}") from None


def _parse_rating(value) -> float | None:
    if _is_blank(value):
        return None
    rating = _number(value, "imdb_rating")
    if not 0.0 <= rating <= 10.0:
        raise ValueError(f"imdb_rating {rating} outside [0, 10]")
    return rating


def _parse_votes(value) -> float | None:
    if _is_blank(value):
        return None
    votes = _number(value, "imdb_votes")
    if votes < 0 or not votes.is_integer():
        raise ValueError(f"imdb_votes must be a non-negative integer, got {value!r}")
    return votes


def _parse_year(value) -> int:
    if _is_blank(value):
        raise ValueError("missing year")
    year = _number(value, "year")
    if not year.is_integer():
        raise ValueError(f"year must be an integer, got {value!r}")
    return int(year)


def _film_from_mapping(row: dict) -> FilmRecord:
    title = normalize_name(str(row.get("title") or ""))
    if not title:
        raise ValueError("missing title")
    return FilmRecord(
        title=title,
        year=_parse_year(row.get("year")),
        actors=_split_names(row.get("actors")),
        directors=_split_names(row.get("directors")),
        imdb_rating=_parse_rating(row.get("imdb_rating")),
        imdb_votes=_parse_votes(row.get("imdb_votes")),
    )


def _json_objects(text: str) -> list[tuple[int, object]]:
    """(position, object) pairs from a JSON array or line-delimited JSON."""
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IngestError(f"invalid JSON: {exc}") from exc
        return list(enumerate(data, start=1))
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append((lineno, json.loads(line)))
        except json.JSONDecodeError as exc:
            raise IngestError(f"line {lineno}: invalid JSON: {exc}") from exc
    return out


def _read(source: str | IO[str]) -> str:
    if isinstance(source, str):
        return source
    try:
        return source.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read source: {exc}") from exc


def parse_films(source: str | IO[str], fmt: str = "csv") -> ParseResult:
    """Parse film rows.

    ``source`` is either the raw text or an open text stream. Rows that fail
    validation are recorded in ``errors`` with their line number (CSV) or
    record position (JSON) and left out of ``records``. Rows with an empty
    actor list are kept; :func:`drop_missing_actors` removes them later.
    """
    text = _read(source)
    result = ParseResult()
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames is None:
            raise IngestError("empty films CSV (header required)")
        header = [h.strip() for h in reader.fieldnames]
        missing = [c for c in FILM_COLUMNS if c not in header]
        if missing:
            raise IngestError(f"films CSV missing columns: {', '.join(missing)}")
        reader.fieldnames = header
        for row in reader:
            try:
                if None in row:
                    raise ValueError("more cells than header columns")
                result.records.append(_film_from_mapping(row))
            except ValueError as exc:
                result.errors.append(RowError(reader.line_num, str(exc)))
    elif fmt == "json":
        for pos, obj in _json_objects(text):
            try:
                if not isinstance(obj, dict):
                    raise ValueError("film entry is not an object")
                result.records.append(_film_from_mapping(obj))
            except ValueError as exc:
                result.errors.append(RowError(pos, str(exc)))
    else:
        raise ValueError(f"unknown films format {fmt!r} (csv or json)")
    for err in result.errors:
        logger.warning("films: %s", err)
    return result


def _parse_flag(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip().lower() in ("0", "1", "true", "false"):
        return value.strip().lower() in ("1", "true")
    raise ValueError(f"'is related' must be 1/0 or true/false, got {value!r}")


def parse_relations(source: str | IO[str]) -> ParseResult:
    """Parse debutant relation objects into :class:`RelationRecord`.

    Invalid objects go to ``errors``. A repeated star name keeps the first
    occurrence and adds a warning.
    """
    text = _read(source)
    result = ParseResult()
    seen: set[str] = set()
    for pos, obj in _json_objects(text):
        try:
            if not isinstance(obj, dict):
                raise ValueError("relation entry is not an object")
            absent = [k for k in RELATION_KEYS[:2] if k not in obj]
            if absent:
                raise ValueError(f"missing keys: {', '.join(absent)}")
            star = normalize_name(str(obj["star name"] or ""))
            if not star:
                raise ValueError("empty star name")
            related = obj.get("related star name")
            record = RelationRecord(
                star_name=star,
                is_related=_parse_flag(obj["is related"]),
                related_star_name=normalize_name(str(related)) if related is not None else "",
            )
        except ValueError as exc:
            result.errors.append(RowError(pos, str(exc)))
            continue
        if star in seen:
            result.warnings.append(f"record {pos}: duplicate star name {star!r}, keeping first")
            continue
        seen.add(star)
        result.records.append(record)
    for err in result.errors:
        logger.warning("relations: %s", err)
    for msg in result.warnings:
        logger.warning("relations: %s", msg)
    return result


def drop_missing_actors(films: Sequence[FilmRecord]) -> list[FilmRecord]:
    return [f for f in films if f.actors]


def filter_years(films: Sequence[FilmRecord], window: YearWindow) -> list[FilmRecord]:
    return [f for f in films if f.year in window]


def impute_votes(films: Sequence[FilmRecord]) -> list[FilmRecord]:
    """Fill missing ``imdb_votes`` with the median of the present ones."""
    present = [f.imdb_votes for f in films if f.imdb_votes is not None]
    if len(present) == len(films):
        return list(films)
    if not present:
        raise ValueError("cannot impute votes: every film is missing imdb_votes")
    median = float(statistics.median(present))
    return [f if f.imdb_votes is not None else replace(f, imdb_votes=median) for f in films]


def normalize_votes(
    films: Sequence[FilmRecord], winsorize_quantile: float | None = None
) -> list[FilmRecord]:
    """Min-max scale votes into ``votes_norm``.

    With ``winsorize_quantile`` set, votes above that quantile are clipped
    for the scaling only; ``imdb_votes`` itself is left untouched so the
    transform stays idempotent. A constant vote column maps to 1.0.
    """
    if not films:
        return []
    if any(f.imdb_votes is None for f in films):
        raise ValueError("normalize_votes needs imputed votes")
    votes = np.array([f.imdb_votes for f in films], dtype=float)
    if winsorize_quantile is not None:
        votes = np.minimum(votes, np.quantile(votes, winsorize_quantile))
    lo, hi = float(votes.min()), float(votes.max())
    if hi == lo:
        return [replace(f, votes_norm=1.0) for f in films]
    span = hi - lo
    return [replace(f, votes_norm=(float(v) - lo) / span) for f, v in zip(films, votes)]


def apply_actor_cap(films: Sequence[FilmRecord], cap: int) -> list[FilmRecord]:
    if cap < 1:
        raise ValueError("cap must be >= 1")
    return [f if len(f.actors) <= cap else replace(f, actors=f.actors[:cap]) for f in films]


def preprocess(films: Sequence[FilmRecord], config: PreprocessConfig | None = None) -> list[FilmRecord]:
    """Graph-window films, cleaned: drop castless rows, impute, scale, cap."""
    config = config or PreprocessConfig()
    kept = filter_years(drop_missing_actors(films), config.graph_window)
    kept = impute_votes(kept) if kept else kept
    kept = normalize_votes(kept, config.winsorize_quantile)
    return apply_actor_cap(kept, config.actor_cap)


def cohort_films(films: Sequence[FilmRecord], config: PreprocessConfig | None = None) -> list[FilmRecord]:
    """Cohort-window films with a cast. Billing is not capped here."""
    config = config or PreprocessConfig()
    return filter_years(drop_missing_actors(films), config.cohort_window)
