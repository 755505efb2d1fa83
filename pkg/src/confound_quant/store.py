"""Feature records, JSONL interchange, and cohort assembly.

A record describes one artwork: identifying metadata plus a fixed-length
feature vector.  Records travel as JSON Lines, one object per line, with
exactly the fields ``id``, ``artist``, ``movement``, ``genre``,
``material``, ``provenance``, ``features``.  Parsing is strict: unknown
fields, missing fields, duplicate ids, and inconsistent feature dimensions
are all errors that name the offending line.

Cohort assembly slices a dataset for one focal artist and one stratum
(movement, genre, material): the focal artist's real works, their generated
works, and the real works of every peer artist holding at least
``min_peer_count`` works in the stratum.  Generated records are matched on
genre and material only, so a generated record may leave ``movement``
empty.  A pooled variant unions several movements into a single stratum.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, TextIO

from .errors import ConfoundQuantError

DEFAULT_MIN_PEER_COUNT = 35

RECORD_FIELDS = ("id", "artist", "movement", "genre", "material", "provenance", "features")


class RecordError(ConfoundQuantError):
    pass


class CohortError(ConfoundQuantError):
    pass


class Provenance(str, Enum):
    REAL = "real"
    GENERATED = "generated"


def _norm(value: str) -> str:
    return unicodedata.normalize("NFC", value).strip()


@dataclass(frozen=True)
class FeatureRecord:
    id: str
    artist: str
    movement: str
    genre: str
    material: str
    provenance: Provenance
    features: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.id:
            raise RecordError("record id must be non-empty")
        if not self.features:
            raise RecordError(f"record {self.id!r} has an empty feature vector")
        if self.provenance is Provenance.REAL and not self.movement:
            raise RecordError(f"real record {self.id!r} has no movement")


@dataclass(frozen=True)
class Cohort:
    """Inputs to one bias computation: focal works and peer works."""

    focal_artist: str
    movement: str | None  # None for a pooled (cross-movement) cohort
    genre: str
    material: str
    focal_real: tuple[FeatureRecord, ...]
    focal_generated: tuple[FeatureRecord, ...]
    peers: tuple[tuple[str, tuple[FeatureRecord, ...]], ...]

    @property
    def peer_artists(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.peers)


@dataclass(frozen=True)
class DatasetSummary:
    n_records: int
    n_real: int
    n_generated: int
    n_artists: int
    dimension: int
    movements: tuple[str, ...]
    genres: tuple[str, ...]
    materials: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "n_records": self.n_records,
            "n_real": self.n_real,
            "n_generated": self.n_generated,
            "n_artists": self.n_artists,
            "dimension": self.dimension,
            "movements": list(self.movements),
            "genres": list(self.genres),
            "materials": list(self.materials),
        }


def _record_from_obj(obj: object, where: str) -> FeatureRecord:
    if not isinstance(obj, dict):
        raise RecordError(f"{where}: expected a JSON object")
    extra = sorted(set(obj) - set(RECORD_FIELDS))
    if extra:
        raise RecordError(f"{where}: unknown fields {extra}")
    missing = sorted(set(RECORD_FIELDS) - set(obj))
    if missing:
        raise RecordError(f"{where}: missing fields {missing}")
    for name in RECORD_FIELDS[:-1]:
        if not isinstance(obj[name], str):
            raise RecordError(f"{where}: field {name!r} must be a string")
    try:
        provenance = Provenance(obj["provenance"])
    except ValueError:
        raise RecordError(
            f"{where}: provenance must be 'real' or 'generated', "
            f"got {obj['provenance']!r}"
        ) from None
    raw = obj["features"]
    if not isinstance(raw, list) or not raw:
        raise RecordError(f"{where}: features must be a non-empty array")
    feats = []
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise RecordError(f"{where}: features[{i}] is not a number")
        f = float(v)
        if f != f or f in (float("inf"), float("-inf")):
            raise RecordError(f"{where}: features[{i}] is not finite")
        feats.append(f)
    try:
        return FeatureRecord(
            id=_norm(obj["id"]),
            artist=_norm(obj["artist"]),
            movement=_norm(obj["movement"]),
            genre=_norm(obj["genre"]),
            material=_norm(obj["material"]),
            provenance=provenance,
            features=tuple(feats),
        )
    except RecordError as exc:
        raise RecordError(f"{where}: {exc}") from None


def load_records(source: TextIO | Iterable[str]) -> list[FeatureRecord]:
    """Parse JSONL records, rejecting duplicates and ragged dimensions."""
    records: list[FeatureRecord] = []
    seen: dict[str, int] = {}
    dim: int | None = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        where = f"line {lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"{where}: invalid JSON: {exc.msg}") from None
        rec = _record_from_obj(obj, where)
        if rec.id in seen:
            raise RecordError(
                f"{where}: duplicate id {rec.id!r} (first seen on line {seen[rec.id]})"
            )
        if dim is None:
            dim = len(rec.features)
        elif len(rec.features) != dim:
            raise RecordError(
                f"{where}: feature dimension {len(rec.features)} differs from {dim}"
            )
        seen[rec.id] = lineno
        records.append(rec)
    return records


def load_records_path(path: str) -> list[FeatureRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return load_records(fh)
        except RecordError as exc:
            raise RecordError(f"{path}: {exc}") from None


def dump_records(records: Iterable[FeatureRecord], sink: TextIO) -> None:
    """Write records as JSONL in the interchange field order."""
    for rec in records:
        obj = {
            "id": rec.id,
            "artist": rec.artist,
            "movement": rec.movement,
            "genre": rec.genre,
            "material": rec.material,
            "provenance": rec.provenance.value,
            "features": list(rec.features),
        }
        sink.write(json.dumps(obj, ensure_ascii=False) + "\n")


def summarize(records: Sequence[FeatureRecord]) -> DatasetSummary:
    if not records:
        raise RecordError("no records to summarize")
    return DatasetSummary(
        n_records=len(records),
        n_real=sum(1 for r in records if r.provenance is Provenance.REAL),
        n_generated=sum(1 for r in records if r.provenance is Provenance.GENERATED),
        n_artists=len({r.artist for r in records}),
        dimension=len(records[0].features),
        movements=tuple(sorted({r.movement for r in records if r.movement})),
        genres=tuple(sorted({r.genre for r in records})),
        materials=tuple(sorted({r.material for r in records})),
    )


def _count_ok(count: int, threshold: int, strict: bool) -> bool:
    return count > threshold if strict else count >= threshold


def build_cohort(
    records: Sequence[FeatureRecord],
    focal_artist: str,
    movement: str,
    genre: str,
    material: str,
    *,
    min_peer_count: int = DEFAULT_MIN_PEER_COUNT,
    min_focal_count: int | None = None,
    strict_threshold: bool = False,
) -> Cohort:
    """Assemble the cohort for one focal artist in one stratum.

    Real works must match movement, genre, and material; generated works
    match genre and material only.  Peer artists need at least
    ``min_peer_count`` real works in the stratum (strictly more with
    ``strict_threshold``), and the focal artist needs ``min_focal_count``
    (defaults to ``min_peer_count``), so a sparsely represented artist is
    rejected rather than matched against a handful of works.
    """
    return _build(
        records,
        focal_artist,
        frozenset([movement]),
        movement,
        genre,
        material,
        min_peer_count=min_peer_count,
        min_focal_count=min_focal_count,
        strict_threshold=strict_threshold,
    )


def build_pooled_cohort(
    records: Sequence[FeatureRecord],
    focal_artist: str,
    movements: Iterable[str],
    genre: str,
    material: str,
    *,
    min_peer_count: int = DEFAULT_MIN_PEER_COUNT,
    min_focal_count: int | None = None,
    strict_threshold: bool = False,
) -> Cohort:
    """Like :func:`build_cohort` but pooling several movements as one stratum."""
    pool = frozenset(movements)
    if not pool:
        raise CohortError("pooled cohort needs at least one movement")
    return _build(
        records,
        focal_artist,
        pool,
        None,
        genre,
        material,
        min_peer_count=min_peer_count,
        min_focal_count=min_focal_count,
        strict_threshold=strict_threshold,
    )


def _build(
    records: Sequence[FeatureRecord],
    focal_artist: str,
    movements: frozenset[str],
    label: str | None,
    genre: str,
    material: str,
    *,
    min_peer_count: int,
    min_focal_count: int | None,
    strict_threshold: bool,
) -> Cohort:
    if min_peer_count < 1:
        raise CohortError("min_peer_count must be at least 1")
    if min_focal_count is None:
        min_focal_count = min_peer_count

    focal_real: list[FeatureRecord] = []
    focal_generated: list[FeatureRecord] = []
    peer_real: dict[str, list[FeatureRecord]] = {}
    for rec in records:
        if rec.genre != genre or rec.material != material:
            continue
        if rec.provenance is Provenance.GENERATED:
            if rec.artist == focal_artist:
                focal_generated.append(rec)
            continue
        if rec.movement not in movements:
            continue
        if rec.artist == focal_artist:
            focal_real.append(rec)
        else:
            peer_real.setdefault(rec.artist, []).append(rec)

    stratum = f"movement={label or '+'.join(sorted(movements))}, genre={genre}, material={material}"
    if not _count_ok(len(focal_real), min_focal_count, strict_threshold):
        raise CohortError(
            f"focal artist {focal_artist!r} has {len(focal_real)} real works in "
            f"{stratum}; needs {'more than' if strict_threshold else 'at least'} "
            f"{min_focal_count}"
        )
    if not focal_generated:
        raise CohortError(
            f"focal artist {focal_artist!r} has no generated works in "
            f"genre={genre}, material={material}"
        )
    peers = tuple(
        (name, tuple(works))
        for name, works in sorted(peer_real.items())
        if _count_ok(len(works), min_peer_count, strict_threshold)
    )
    if not peers:
        raise CohortError(f"no peer artist reaches the work-count threshold in {stratum}")
    return Cohort(
        focal_artist=focal_artist,
        movement=label,
        genre=genre,
        material=material,
        focal_real=tuple(focal_real),
        focal_generated=tuple(focal_generated),
        peers=peers,
    )
