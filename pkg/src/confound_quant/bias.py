"""Covariate-matching bias score for one focal artist.

The score compares two average nearest-neighbor distances computed inside a
cohort (see :mod:`confound_quant.store`):

    numerator   = mean over generated works g of dist(g, nearest focal real work)
    denominator = mean over peer artists j of
                  mean over focal real works a of dist(a, nearest work of peer j)

The numerator asks how close the generated works sit to the artist's own
real works; the denominator normalizes by how far the artist's real works
sit from each peer's body of work, so scores are comparable across artists
and movements.  Matching is with replacement, and ties go to the candidate
with the lexicographically smallest record id (candidates are scanned in
id order and the first minimum wins).

``simpson_check`` contrasts per-movement scores with the score of a pooled
cohort that ignores the movement boundary; a pooled score sitting below
every stratified score is the aggregation-reversal signature worth
flagging.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfoundQuantError
from .matching import BACKEND, DistanceKind, nn_match
from .store import (
    Cohort,
    FeatureRecord,
    build_cohort,
    build_pooled_cohort,
    DEFAULT_MIN_PEER_COUNT,
)


class BiasError(ConfoundQuantError):
    pass


@dataclass(frozen=True)
class MatchPair:
    query_id: str
    match_id: str
    distance: float


@dataclass(frozen=True)
class PeerTerm:
    """One peer artist's contribution to the denominator."""

    artist: str
    mean_distance: float
    pairs: tuple[MatchPair, ...]


@dataclass(frozen=True)
class BiasReport:
    focal_artist: str
    movement: str | None
    genre: str
    material: str
    distance: DistanceKind
    backend: str
    numerator: float
    denominator: float
    bias: float
    exceeds_one: bool
    numerator_pairs: tuple[MatchPair, ...]
    peer_terms: tuple[PeerTerm, ...]
    match_multiplicity: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict:
        return {
            "focal_artist": self.focal_artist,
            "movement": self.movement,
            "genre": self.genre,
            "material": self.material,
            "distance": self.distance.value,
            "backend": self.backend,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "bias": self.bias,
            "exceeds_one": self.exceeds_one,
            "numerator_pairs": [
                {"query": p.query_id, "match": p.match_id, "distance": p.distance}
                for p in self.numerator_pairs
            ],
            "peer_terms": [
                {
                    "artist": t.artist,
                    "mean_distance": t.mean_distance,
                    "pairs": [
                        {"query": p.query_id, "match": p.match_id, "distance": p.distance}
                        for p in t.pairs
                    ],
                }
                for t in self.peer_terms
            ],
            "match_multiplicity": [
                {"match": m, "count": c} for m, c in self.match_multiplicity
            ],
        }


def _by_id(records: Iterable[FeatureRecord]) -> list[FeatureRecord]:
    return sorted(records, key=lambda r: r.id)


def _features(records: Sequence[FeatureRecord]) -> np.ndarray:
    return np.asarray([r.features for r in records], dtype=np.float64)


def _match_pairs(
    queries: Sequence[FeatureRecord],
    candidates: Sequence[FeatureRecord],
    kind: DistanceKind,
) -> tuple[tuple[MatchPair, ...], float]:
    indices, dists = nn_match(_features(queries), _features(candidates), kind)
    pairs = tuple(
        MatchPair(q.id, candidates[j].id, float(d))
        for q, j, d in zip(queries, indices, dists)
    )
    return pairs, float(dists.mean())


def compute_bias(cohort: Cohort, kind: DistanceKind = DistanceKind.EUCLIDEAN) -> BiasReport:
    """Score one cohort.  Raises on a degenerate (zero) denominator."""
    kind = DistanceKind(kind)
    focal_real = _by_id(cohort.focal_real)
    generated = _by_id(cohort.focal_generated)

    numerator_pairs, numerator = _match_pairs(generated, focal_real, kind)

    peer_terms = []
    for artist, works in cohort.peers:
        pairs, mean_dist = _match_pairs(focal_real, _by_id(works), kind)
        peer_terms.append(PeerTerm(artist, mean_dist, pairs))
    denominator = sum(t.mean_distance for t in peer_terms) / len(peer_terms)
    if denominator == 0.0:
        raise BiasError(
            f"degenerate denominator: focal artist {cohort.focal_artist!r} is "
            "indistinguishable from every peer"
        )

    counts: dict[str, int] = {}
    for p in numerator_pairs:
        counts[p.match_id] = counts.get(p.match_id, 0) + 1
    bias = numerator / denominator
    return BiasReport(
        focal_artist=cohort.focal_artist,
        movement=cohort.movement,
        genre=cohort.genre,
        material=cohort.material,
        distance=kind,
        backend=BACKEND,
        numerator=numerator,
        denominator=denominator,
        bias=bias,
        exceeds_one=bias > 1.0,
        numerator_pairs=numerator_pairs,
        peer_terms=tuple(peer_terms),
        match_multiplicity=tuple(sorted(counts.items())),
    )


@dataclass(frozen=True)
class SimpsonReport:
    focal_artist: str
    genre: str
    material: str
    distance: DistanceKind
    stratified: tuple[tuple[str, BiasReport], ...]  # (movement, report)
    pooled: BiasReport
    understates: bool  # pooled score below every stratified score

    def as_dict(self) -> dict:
        return {
            "focal_artist": self.focal_artist,
            "genre": self.genre,
            "material": self.material,
            "distance": self.distance.value,
            "stratified": [
                {"movement": m, "bias": r.bias} for m, r in self.stratified
            ],
            "pooled_bias": self.pooled.bias,
            "understates": self.understates,
        }


def simpson_check(
    records: Sequence[FeatureRecord],
    focal_artist: str,
    movements: Sequence[str],
    genre: str,
    material: str,
    *,
    kind: DistanceKind = DistanceKind.EUCLIDEAN,
    min_peer_count: int = DEFAULT_MIN_PEER_COUNT,
    min_focal_count: int | None = None,
) -> SimpsonReport:
    """Per-movement scores next to the pooled score over the same movements."""
    if len(movements) < 2:
        raise BiasError("simpson check needs at least two movements")
    kind = DistanceKind(kind)
    stratified = []
    for movement in movements:
        cohort = build_cohort(
            records,
            focal_artist,
            movement,
            genre,
            material,
            min_peer_count=min_peer_count,
            min_focal_count=min_focal_count,
        )
        stratified.append((movement, compute_bias(cohort, kind)))
    pooled_cohort = build_pooled_cohort(
        records,
        focal_artist,
        movements,
        genre,
        material,
        min_peer_count=min_peer_count,
        min_focal_count=min_focal_count,
    )
    pooled = compute_bias(pooled_cohort, kind)
    understates = all(pooled.bias < r.bias for _, r in stratified)
    return SimpsonReport(
        focal_artist=focal_artist,
        genre=genre,
        material=material,
        distance=kind,
        stratified=tuple(stratified),
        pooled=pooled,
        understates=understates,
    )
