"""Seeded synthetic feature data: movements and artists as Gaussian clusters.

The generative model is deliberately the smallest one in which a shared
style category acts as a genuine confounder:

* each movement has a centroid in feature space (and a spread used when a
  generator imitates the movement as a whole);
* each artist offsets the centroid of every movement they belong to, and
  their real works scatter around that center with the global artist
  spread;
* generated works come in two modes.  ``movement-aware`` draws from the
  same per-artist mixture as the real works (a faithful generator);
  ``movement-blind`` draws from a single Gaussian at the grand mean of all
  movement centroids with the pooled spread (the mean of the movement
  spreads), modeling a generator that ignores movement structure entirely.

Genres are pure replication labels: they carry no distributional signal,
but each (artist, movement, genre) cell gets an independent substream, so
they provide honest repeated strata for the group-level statistics.

Determinism contract: a config fully determines the dataset.  Streams are
split with a named portable scheme - Philox keyed by SeedSequence entropy
``[seed, sha256(tag), ...]`` per (purpose, artist, movement, genre) - so
adding or removing one artist never perturbs another artist's draws.
Output ordering is canonical (sorted by record id).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .bias import compute_bias
from .errors import ConfoundQuantError, ParseFailure
from .matching import DistanceKind
from .stats import GroupComparison, compare_movement_groups
from .store import FeatureRecord, Provenance, build_cohort

STANDARD_SEEDS: tuple[int, ...] = tuple(range(1, 21))

MAX_SEED = 2 ** 64 - 1


class SynthError(ConfoundQuantError):
    pass


class ConfigParseError(SynthError, ParseFailure):
    pass


class GeneratorMode(str, Enum):
    AWARE = "movement-aware"
    BLIND = "movement-blind"

    @classmethod
    def parse(cls, text: str) -> "GeneratorMode":
        aliases = {"aware": cls.AWARE, "blind": cls.BLIND}
        try:
            return aliases.get(text.lower()) or cls(text.lower())
        except ValueError:
            raise SynthError(
                f"unknown generator mode {text!r} (expected movement-aware or "
                "movement-blind)"
            ) from None


@dataclass(frozen=True)
class MovementSpec:
    name: str
    centroid: tuple[float, ...]
    spread: float


@dataclass(frozen=True)
class Membership:
    movement: str
    offset: tuple[float, ...]
    real_count: int


@dataclass(frozen=True)
class ArtistSpec:
    name: str
    memberships: tuple[Membership, ...]
    focal: bool = False

    @property
    def single_movement(self) -> bool:
        return len(self.memberships) == 1


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    dimension: int
    movements: tuple[MovementSpec, ...]
    artists: tuple[ArtistSpec, ...]
    generated_count: int
    mode: GeneratorMode
    artist_spread: float
    genres: tuple[str, ...] = ("landscape",)
    material: str = "oil-on-canvas"

    def __post_init__(self) -> None:
        problems = config_violations(self)
        if problems:
            raise SynthError("invalid config: " + "; ".join(problems))

    def movement(self, name: str) -> MovementSpec:
        for m in self.movements:
            if m.name == name:
                return m
        raise SynthError(f"unknown movement {name!r}")


def config_violations(cfg: SynthConfig) -> list[str]:
    out: list[str] = []
    if not 0 <= cfg.seed <= MAX_SEED:
        out.append("seed must fit in 64 bits")
    if cfg.dimension < 2:
        out.append("dimension must be at least 2")
    if cfg.generated_count < 1:
        out.append("generated_count must be at least 1")
    if cfg.artist_spread <= 0:
        out.append("artist_spread must be positive")
    if not cfg.movements:
        out.append("at least one movement required")
    names = [m.name for m in cfg.movements]
    if len(set(names)) != len(names):
        out.append("duplicate movement names")
    for m in cfg.movements:
        if not m.name:
            out.append("movement with empty name")
        if len(m.centroid) != cfg.dimension:
            out.append(f"movement {m.name!r} centroid is {len(m.centroid)}-d")
        if m.spread <= 0:
            out.append(f"movement {m.name!r} spread must be positive")
    if not cfg.artists:
        out.append("at least one artist required")
    artist_names = [a.name for a in cfg.artists]
    if len(set(artist_names)) != len(artist_names):
        out.append("duplicate artist names")
    declared = set(names)
    for a in cfg.artists:
        if not a.name:
            out.append("artist with empty name")
        if not a.memberships:
            out.append(f"artist {a.name!r} has no movement memberships")
        seen = set()
        for mem in a.memberships:
            if mem.movement not in declared:
                out.append(f"artist {a.name!r} references unknown movement {mem.movement!r}")
            if mem.movement in seen:
                out.append(f"artist {a.name!r} lists movement {mem.movement!r} twice")
            seen.add(mem.movement)
            if len(mem.offset) != cfg.dimension:
                out.append(f"artist {a.name!r} offset for {mem.movement!r} is {len(mem.offset)}-d")
            if mem.real_count < 1:
                out.append(f"artist {a.name!r} real_count for {mem.movement!r} must be at least 1")
    if not cfg.genres:
        out.append("at least one genre required")
    if len(set(cfg.genres)) != len(cfg.genres):
        out.append("duplicate genres")
    if not cfg.material:
        out.append("material must be non-empty")
    return out


def _stream(seed: int, *tags: str) -> np.random.Generator:
    entropy = [seed]
    for tag in tags:
        digest = hashlib.sha256(tag.encode("utf-8")).digest()
        entropy.append(int.from_bytes(digest[:8], "big"))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _grand_mean(cfg: SynthConfig) -> np.ndarray:
    return np.mean([m.centroid for m in cfg.movements], axis=0)


def _pooled_spread(cfg: SynthConfig) -> float:
    return float(np.mean([m.spread for m in cfg.movements]))


def _artist_center(cfg: SynthConfig, mem: Membership) -> np.ndarray:
    return np.asarray(cfg.movement(mem.movement).centroid) + np.asarray(mem.offset)


def generate_dataset(cfg: SynthConfig) -> list[FeatureRecord]:
    """All real and generated records for a config, sorted by record id."""
    records: list[FeatureRecord] = []
    for artist in cfg.artists:
        for genre in cfg.genres:
            for mem in artist.memberships:
                rng = _stream(cfg.seed, "real", artist.name, mem.movement, genre)
                center = _artist_center(cfg, mem)
                draws = rng.normal(center, cfg.artist_spread, size=(mem.real_count, cfg.dimension))
                for i, row in enumerate(draws):
                    records.append(
                        FeatureRecord(
                            id=f"{artist.name}-{genre}-real-{mem.movement}-{i:04d}",
                            artist=artist.name,
                            movement=mem.movement,
                            genre=genre,
                            material=cfg.material,
                            provenance=Provenance.REAL,
                            features=tuple(row.tolist()),
                        )
                    )
            if not artist.focal:
                continue
            rng = _stream(cfg.seed, "generated", artist.name, genre)
            if cfg.mode is GeneratorMode.BLIND:
                draws = rng.normal(
                    _grand_mean(cfg), _pooled_spread(cfg), size=(cfg.generated_count, cfg.dimension)
                )
            else:
                weights = np.asarray([mem.real_count for mem in artist.memberships], dtype=float)
                weights /= weights.sum()
                rows = []
                for _ in range(cfg.generated_count):
                    mem = artist.memberships[rng.choice(len(artist.memberships), p=weights)]
                    rows.append(rng.normal(_artist_center(cfg, mem), cfg.artist_spread))
                draws = np.asarray(rows)
            for i, row in enumerate(draws):
                records.append(
                    FeatureRecord(
                        id=f"{artist.name}-{genre}-gen-{i:04d}",
                        artist=artist.name,
                        movement="",
                        genre=genre,
                        material=cfg.material,
                        provenance=Provenance.GENERATED,
                        features=tuple(row.tolist()),
                    )
                )
    records.sort(key=lambda r: r.id)
    return records


# ---------------------------------------------------------------------------
# Presets and scenarios
# ---------------------------------------------------------------------------


def case_study_config(
    seed: int,
    mode: GeneratorMode = GeneratorMode.BLIND,
    *,
    separation: float = 3.0,
    artist_spread: float = 0.5,
    movement_spread: float = 0.5,
    real_count: int = 40,
    generated_count: int = 20,
    genres: tuple[str, ...] = ("landscape", "portrait", "still-life"),
) -> SynthConfig:
    """Two movements, one single-movement artist per movement, one dual.

    The movements sit at -separation and +separation along the first axis,
    and all artist offsets run along that same axis.  The dual artist's
    per-movement centers are pulled 40% of the way toward the opposite
    movement, so their style genuinely straddles the boundary.  The offsets
    are arranged so the intended score ordering (first single artist above
    the second, dual artist last) holds in the numerator and the
    denominator separately: the first single artist sits farther from the
    grand mean than the second AND closer to their own peers.  A ratio
    ordering backed by both parts survives any monotone distance metric,
    which is what keeps the ordering stable across euclidean, manhattan,
    and chebyshev.
    """
    d = 8
    e = np.eye(d)
    c_low = tuple((-separation * e[0]).tolist())
    c_high = tuple((separation * e[0]).tolist())
    blend = 0.4

    def off(scale: float) -> tuple[float, ...]:
        return tuple((scale * e[0]).tolist())

    # Effective dual centers: (1-blend)*own centroid + blend*other centroid,
    # expressed as an offset from the own centroid.
    pull = blend * 2 * separation

    artists = (
        ArtistSpec("arden", (Membership("luminism", off(-1.5), real_count),), focal=True),
        ArtistSpec("blythe", (Membership("tonalism", off(-0.5), real_count),), focal=True),
        ArtistSpec(
            "cassel",
            (
                Membership("luminism", off(pull), real_count),
                Membership("tonalism", off(-pull), real_count),
            ),
            focal=True,
        ),
        ArtistSpec("dorian", (Membership("luminism", off(-1.0), real_count),)),
        ArtistSpec("elsworth", (Membership("luminism", off(-2.0), real_count),)),
        ArtistSpec("farrow", (Membership("tonalism", off(1.5), real_count),)),
        ArtistSpec("greer", (Membership("tonalism", off(2.5), real_count),)),
    )
    return SynthConfig(
        seed=seed,
        dimension=d,
        movements=(
            MovementSpec("luminism", c_low, movement_spread),
            MovementSpec("tonalism", c_high, movement_spread),
        ),
        artists=artists,
        generated_count=generated_count,
        mode=mode,
        artist_spread=artist_spread,
        genres=genres,
    )


def minimal_config(
    seed: int,
    mode: GeneratorMode = GeneratorMode.AWARE,
    *,
    artist_spread: float = 0.5,
    movement_spread: float = 0.5,
    real_count: int = 40,
    generated_count: int | None = None,
) -> SynthConfig:
    """One movement, one focal artist, two peers, one genre."""
    d = 4
    e = np.eye(d)
    if generated_count is None:
        generated_count = real_count
    return SynthConfig(
        seed=seed,
        dimension=d,
        movements=(MovementSpec("luminism", tuple((0.0 * e[0]).tolist()), movement_spread),),
        artists=(
            ArtistSpec("arden", (Membership("luminism", tuple((0.5 * e[1]).tolist()), real_count),), focal=True),
            ArtistSpec("dorian", (Membership("luminism", tuple((1.5 * e[2]).tolist()), real_count),)),
            ArtistSpec("elsworth", (Membership("luminism", tuple((1.5 * e[3]).tolist()), real_count),)),
        ),
        generated_count=generated_count,
        mode=mode,
        artist_spread=artist_spread,
    )


PRESETS: dict[str, Callable[..., SynthConfig]] = {
    "case-study": case_study_config,
    "paper-shape": case_study_config,
    "minimal": minimal_config,
}


@dataclass(frozen=True)
class ScenarioSpec:
    preset: str
    seed: int
    mode: GeneratorMode = GeneratorMode.BLIND

    def resolve(self) -> SynthConfig:
        try:
            builder = PRESETS[self.preset]
        except KeyError:
            raise SynthError(
                f"unknown preset {self.preset!r} (available: "
                + ", ".join(sorted(PRESETS)) + ")"
            ) from None
        return builder(self.seed, self.mode)


@dataclass(frozen=True)
class ScenarioScore:
    artist: str
    movement: str
    genre: str
    bias: float


@dataclass(frozen=True)
class ArtistMean:
    artist: str
    single_movement: bool
    mean_bias: float


@dataclass(frozen=True)
class ScenarioReport:
    preset: str
    seed: int
    mode: GeneratorMode
    distance: DistanceKind
    scores: tuple[ScenarioScore, ...]
    artist_means: tuple[ArtistMean, ...]
    mean_bias: float
    group: GroupComparison | None

    def as_dict(self) -> dict:
        return {
            "preset": self.preset,
            "seed": self.seed,
            "mode": self.mode.value,
            "distance": self.distance.value,
            "scores": [
                {"artist": s.artist, "movement": s.movement, "genre": s.genre, "bias": s.bias}
                for s in self.scores
            ],
            "artist_means": [
                {"artist": m.artist, "single_movement": m.single_movement, "mean_bias": m.mean_bias}
                for m in self.artist_means
            ],
            "mean_bias": self.mean_bias,
            "group": self.group.as_dict() if self.group else None,
        }


def run_scenario(spec: ScenarioSpec, kind: DistanceKind = DistanceKind.EUCLIDEAN) -> ScenarioReport:
    """Generate a preset's dataset and score every focal artist.

    One bias score per (focal artist, movement, genre) cohort; the peer
    threshold is the preset's per-cell real count, so every other artist
    with a full cell participates as a peer.  When the preset has both
    single-movement and multi-movement focal artists, their score groups
    are compared with the rank-sum test.
    """
    kind = DistanceKind(kind)
    cfg = spec.resolve()
    records = generate_dataset(cfg)
    min_count = min(
        mem.real_count for artist in cfg.artists for mem in artist.memberships
    )

    scores: list[ScenarioScore] = []
    single_scores: list[float] = []
    multi_scores: list[float] = []
    per_artist: dict[str, list[float]] = {}
    for artist in cfg.artists:
        if not artist.focal:
            continue
        for mem in artist.memberships:
            for genre in cfg.genres:
                cohort = build_cohort(
                    records,
                    artist.name,
                    mem.movement,
                    genre,
                    cfg.material,
                    min_peer_count=min_count,
                )
                report = compute_bias(cohort, kind)
                scores.append(ScenarioScore(artist.name, mem.movement, genre, report.bias))
                per_artist.setdefault(artist.name, []).append(report.bias)
                (single_scores if artist.single_movement else multi_scores).append(report.bias)

    if not scores:
        raise SynthError("no focal artists in preset; nothing to score")
    artist_means = tuple(
        ArtistMean(
            artist.name,
            artist.single_movement,
            sum(per_artist[artist.name]) / len(per_artist[artist.name]),
        )
        for artist in cfg.artists
        if artist.name in per_artist
    )
    group = None
    if single_scores and multi_scores:
        group = compare_movement_groups(single_scores, multi_scores)
    return ScenarioReport(
        preset=spec.preset,
        seed=spec.seed,
        mode=cfg.mode,
        distance=kind,
        scores=tuple(scores),
        artist_means=artist_means,
        mean_bias=sum(s.bias for s in scores) / len(scores),
        group=group,
    )


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def config_from_dict(obj: dict) -> SynthConfig:
    """Build a config from parsed JSON mirroring the SynthConfig fields."""
    if not isinstance(obj, dict):
        raise SynthError("config must be a JSON object")

    def need(key: str):
        if key not in obj:
            raise SynthError(f"config is missing {key!r}")
        return obj[key]

    try:
        movements = tuple(
            MovementSpec(m["name"], tuple(float(x) for x in m["centroid"]), float(m["spread"]))
            for m in need("movements")
        )
        artists = tuple(
            ArtistSpec(
                a["name"],
                tuple(
                    Membership(
                        mem["movement"],
                        tuple(float(x) for x in mem["offset"]),
                        int(mem["real_count"]),
                    )
                    for mem in a["memberships"]
                ),
                focal=bool(a.get("focal", False)),
            )
            for a in need("artists")
        )
        return SynthConfig(
            seed=int(need("seed")),
            dimension=int(need("dimension")),
            movements=movements,
            artists=artists,
            generated_count=int(need("generated_count")),
            mode=GeneratorMode.parse(str(need("mode"))),
            artist_spread=float(need("artist_spread")),
            genres=tuple(obj.get("genres", ("landscape",))),
            material=str(obj.get("material", "oil-on-canvas")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SynthError(f"malformed config: {exc}") from None


def load_config(path: str) -> SynthConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(
                f"{path}: invalid JSON: {exc.msg} (line {exc.lineno})"
            ) from None
    return config_from_dict(obj)
