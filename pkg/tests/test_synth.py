import dataclasses
import io
import json

import pytest

from confound_quant.errors import ParseFailure
from confound_quant.matching import DistanceKind
from confound_quant.store import Provenance, dump_records, load_records, summarize
from confound_quant.synth import (
    ArtistSpec,
    ConfigParseError,
    GeneratorMode,
    Membership,
    MovementSpec,
    PRESETS,
    STANDARD_SEEDS,
    ScenarioSpec,
    SynthConfig,
    SynthError,
    case_study_config,
    config_from_dict,
    config_violations,
    generate_dataset,
    load_config,
    minimal_config,
    run_scenario,
)


def tiny_config(seed=1, mode=GeneratorMode.AWARE, artists=None, **kw):
    movements = kw.pop(
        "movements",
        (
            MovementSpec("m1", (-2.0, 0.0), 0.5),
            MovementSpec("m2", (2.0, 0.0), 0.5),
        ),
    )
    if artists is None:
        artists = (
            ArtistSpec("ada", (Membership("m1", (0.0, 0.5), 5),), focal=True),
            ArtistSpec("bey", (Membership("m1", (0.0, -0.5), 5),)),
        )
    defaults = dict(
        seed=seed,
        dimension=2,
        movements=movements,
        artists=artists,
        generated_count=4,
        mode=mode,
        artist_spread=0.3,
    )
    defaults.update(kw)
    return SynthConfig(**defaults)


class TestDeterminism:
    def test_same_config_same_bytes(self):
        cfg = tiny_config()
        a, b = generate_dataset(cfg), generate_dataset(cfg)
        assert a == b
        sink_a, sink_b = io.StringIO(), io.StringIO()
        dump_records(a, sink_a)
        dump_records(b, sink_b)
        assert sink_a.getvalue() == sink_b.getvalue()

    def test_output_sorted_by_id(self):
        records = generate_dataset(tiny_config())
        ids = [r.id for r in records]
        assert ids == sorted(ids)
        assert len(set(ids)) == len(ids)

    def test_seed_changes_features(self):
        a = generate_dataset(tiny_config(seed=1))
        b = generate_dataset(tiny_config(seed=2))
        assert [r.id for r in a] == [r.id for r in b]
        assert a != b

    def test_adding_an_artist_leaves_others_untouched(self):
        base = tiny_config()
        extra = tiny_config(
            artists=base.artists
            + (ArtistSpec("cyd", (Membership("m2", (0.0, 0.0), 5),)),)
        )
        small = {r.id: r for r in generate_dataset(base)}
        big = {r.id: r for r in generate_dataset(extra)}
        for id_, rec in small.items():
            assert big[id_] == rec
        assert set(big) - set(small) == {
            f"cyd-landscape-real-m2-{i:04d}" for i in range(5)
        }

    def test_real_records_independent_of_mode(self):
        aware = generate_dataset(tiny_config(mode=GeneratorMode.AWARE))
        blind = generate_dataset(tiny_config(mode=GeneratorMode.BLIND))
        real_a = [r for r in aware if r.provenance is Provenance.REAL]
        real_b = [r for r in blind if r.provenance is Provenance.REAL]
        assert real_a == real_b
        gen_a = [r for r in aware if r.provenance is Provenance.GENERATED]
        gen_b = [r for r in blind if r.provenance is Provenance.GENERATED]
        assert gen_a != gen_b

    def test_genres_are_independent_replicates(self):
        cfg = tiny_config(genres=("landscape", "portrait"))
        records = generate_dataset(cfg)
        by_genre = {}
        for r in records:
            if r.artist == "ada" and r.provenance is Provenance.REAL:
                by_genre.setdefault(r.genre, []).append(r.features)
        assert by_genre["landscape"] != by_genre["portrait"]


class TestModes:
    def test_blind_draws_sit_at_grand_mean(self):
        cfg = tiny_config(
            mode=GeneratorMode.BLIND,
            movements=(
                MovementSpec("m1", (-2.0, 0.0), 1e-9),
                MovementSpec("m2", (2.0, 0.0), 1e-9),
            ),
        )
        gens = [
            r for r in generate_dataset(cfg) if r.provenance is Provenance.GENERATED
        ]
        assert gens
        for r in gens:
            # grand mean of the two centroids is the origin
            assert abs(r.features[0]) < 1e-6
            assert abs(r.features[1]) < 1e-6

    def test_aware_draws_follow_artist_centers(self):
        cfg = tiny_config(artist_spread=1e-9)
        gens = [
            r for r in generate_dataset(cfg) if r.provenance is Provenance.GENERATED
        ]
        for r in gens:
            assert r.features[0] == pytest.approx(-2.0, abs=1e-6)
            assert r.features[1] == pytest.approx(0.5, abs=1e-6)

    def test_aware_dual_membership_mixture(self):
        dual = ArtistSpec(
            "dua",
            (
                Membership("m1", (0.0, 0.0), 5),
                Membership("m2", (0.0, 0.0), 5),
            ),
            focal=True,
        )
        cfg = tiny_config(artists=(dual,), artist_spread=1e-9, generated_count=12)
        gens = [
            r for r in generate_dataset(cfg) if r.provenance is Provenance.GENERATED
        ]
        firsts = {round(r.features[0]) for r in gens}
        assert firsts == {-2, 2}

    def test_mode_parsing(self):
        assert GeneratorMode.parse("aware") is GeneratorMode.AWARE
        assert GeneratorMode.parse("BLIND") is GeneratorMode.BLIND
        assert GeneratorMode.parse("movement-aware") is GeneratorMode.AWARE
        assert GeneratorMode.parse("Movement-Blind") is GeneratorMode.BLIND
        with pytest.raises(SynthError, match="unknown generator mode"):
            GeneratorMode.parse("psychic")


class TestValidation:
    def test_valid_config_has_no_violations(self):
        assert config_violations(tiny_config()) == []

    @pytest.mark.parametrize(
        "patch, fragment",
        [
            (dict(seed=-1), "64 bits"),
            (dict(seed=2 ** 64), "64 bits"),
            (dict(generated_count=0), "generated_count"),
            (dict(artist_spread=0.0), "artist_spread"),
            (dict(genres=()), "at least one genre"),
            (dict(genres=("a", "a")), "duplicate genres"),
            (dict(material=""), "material"),
        ],
    )
    def test_scalar_violations(self, patch, fragment):
        with pytest.raises(SynthError, match=fragment):
            tiny_config(**patch)

    def test_dimension_must_cover_vectors(self):
        with pytest.raises(SynthError, match="dimension must be at least 2"):
            tiny_config(
                dimension=1,
                movements=(MovementSpec("m1", (0.0,), 0.5),),
                artists=(
                    ArtistSpec("ada", (Membership("m1", (0.0,), 5),), focal=True),
                ),
            )

    def test_centroid_dimension_checked(self):
        with pytest.raises(SynthError, match="centroid is 3-d"):
            tiny_config(movements=(MovementSpec("m1", (0.0, 0.0, 0.0), 0.5),))

    def test_offset_dimension_checked(self):
        with pytest.raises(SynthError, match="offset for 'm1' is 3-d"):
            tiny_config(
                artists=(
                    ArtistSpec("ada", (Membership("m1", (0.0, 0.0, 0.0), 5),)),
                )
            )

    def test_unknown_movement_reference(self):
        with pytest.raises(SynthError, match="unknown movement 'm9'"):
            tiny_config(
                artists=(ArtistSpec("ada", (Membership("m9", (0.0, 0.0), 5),)),)
            )

    def test_duplicate_membership(self):
        with pytest.raises(SynthError, match="lists movement 'm1' twice"):
            tiny_config(
                artists=(
                    ArtistSpec(
                        "ada",
                        (
                            Membership("m1", (0.0, 0.0), 5),
                            Membership("m1", (1.0, 0.0), 5),
                        ),
                    ),
                )
            )

    def test_duplicate_artists(self):
        with pytest.raises(SynthError, match="duplicate artist"):
            tiny_config(
                artists=(
                    ArtistSpec("ada", (Membership("m1", (0.0, 0.0), 5),)),
                    ArtistSpec("ada", (Membership("m2", (0.0, 0.0), 5),)),
                )
            )

    def test_real_count_positive(self):
        with pytest.raises(SynthError, match="real_count"):
            tiny_config(artists=(ArtistSpec("ada", (Membership("m1", (0.0, 0.0), 0),)),))


class TestPresets:
    def test_standard_seed_list(self):
        assert STANDARD_SEEDS == tuple(range(1, 21))

    def test_case_study_shape(self):
        cfg = case_study_config(7)
        singles = [a for a in cfg.artists if a.single_movement and a.focal]
        duals = [a for a in cfg.artists if not a.single_movement]
        assert len(singles) == 2
        assert len(duals) == 1
        assert duals[0].focal
        assert len(cfg.movements) == 2
        assert len(cfg.genres) == 3

    def test_case_study_record_count(self):
        records = generate_dataset(case_study_config(7))
        # 8 artist-movement cells x 3 genres x 40 real, 3 focal x 3 genres x 20 generated
        assert len(records) == 8 * 3 * 40 + 3 * 3 * 20
        summary = summarize(records)
        assert summary.n_real == 960
        assert summary.n_generated == 180

    def test_alias_resolves_to_same_config(self):
        assert PRESETS["paper-shape"] is PRESETS["case-study"]
        a = ScenarioSpec("case-study", 3).resolve()
        b = ScenarioSpec("paper-shape", 3).resolve()
        assert a == b

    def test_minimal_preset_single_score(self):
        report = run_scenario(ScenarioSpec("minimal", 5, GeneratorMode.AWARE))
        assert len(report.scores) == 1
        assert report.scores[0].artist == "arden"
        assert report.group is None
        assert report.mean_bias == report.scores[0].bias

    def test_unknown_preset_lists_options(self):
        with pytest.raises(SynthError, match="case-study.*minimal.*paper-shape"):
            ScenarioSpec("mystery", 1).resolve()

    def test_spread_collapse_drives_bias_to_zero(self):
        cfg = minimal_config(3, GeneratorMode.AWARE, artist_spread=1e-6)
        assert cfg.generated_count == 40
        spec_records = generate_dataset(cfg)
        from confound_quant.bias import compute_bias
        from confound_quant.store import build_cohort

        cohort = build_cohort(
            spec_records, "arden", "luminism", "landscape", "oil-on-canvas",
            min_peer_count=40,
        )
        assert compute_bias(cohort).bias < 1e-3


@pytest.fixture(scope="module")
def blind_report():
    return run_scenario(ScenarioSpec("case-study", 7, GeneratorMode.BLIND))


class TestScenario:
    def test_score_grid(self, blind_report):
        # (arden 1 + blythe 1 + cassel 2 memberships) x 3 genres
        assert len(blind_report.scores) == 12
        artists = {s.artist for s in blind_report.scores}
        assert artists == {"arden", "blythe", "cassel"}
        assert blind_report.mode is GeneratorMode.BLIND
        assert blind_report.distance is DistanceKind.EUCLIDEAN

    def test_group_comparison_present(self, blind_report):
        group = blind_report.group
        assert group is not None
        assert group.n_single == 6
        assert group.n_multi == 6

    def test_artist_means(self, blind_report):
        means = {m.artist: m for m in blind_report.artist_means}
        assert set(means) == {"arden", "blythe", "cassel"}
        assert means["cassel"].single_movement is False
        per_artist = {}
        for s in blind_report.scores:
            per_artist.setdefault(s.artist, []).append(s.bias)
        for name, vals in per_artist.items():
            assert means[name].mean_bias == pytest.approx(sum(vals) / len(vals))

    def test_as_dict_shape(self, blind_report):
        d = blind_report.as_dict()
        assert d["preset"] == "case-study"
        assert d["mode"] == "movement-blind"
        assert len(d["scores"]) == 12
        assert d["group"]["n_single"] == 6

    def test_distance_kind_accepted_as_string(self):
        report = run_scenario(ScenarioSpec("minimal", 2, GeneratorMode.AWARE), "manhattan")
        assert report.distance is DistanceKind.MANHATTAN


class TestConfigFiles:
    def config_dict(self):
        return {
            "seed": 11,
            "dimension": 2,
            "movements": [
                {"name": "m1", "centroid": [-2.0, 0.0], "spread": 0.5},
                {"name": "m2", "centroid": [2.0, 0.0], "spread": 0.5},
            ],
            "artists": [
                {
                    "name": "ada",
                    "focal": True,
                    "memberships": [
                        {"movement": "m1", "offset": [0.0, 0.5], "real_count": 5}
                    ],
                },
                {
                    "name": "bey",
                    "memberships": [
                        {"movement": "m1", "offset": [0.0, -0.5], "real_count": 5}
                    ],
                },
            ],
            "generated_count": 4,
            "mode": "aware",
            "artist_spread": 0.3,
        }

    def test_round_trip(self):
        cfg = config_from_dict(self.config_dict())
        assert cfg == tiny_config(seed=11)

    def test_defaults_applied(self):
        cfg = config_from_dict(self.config_dict())
        assert cfg.genres == ("landscape",)
        assert cfg.material == "oil-on-canvas"

    def test_missing_key(self):
        obj = self.config_dict()
        del obj["seed"]
        with pytest.raises(SynthError, match="missing 'seed'"):
            config_from_dict(obj)

    def test_malformed_member(self):
        obj = self.config_dict()
        obj["artists"][0]["memberships"][0].pop("offset")
        with pytest.raises(SynthError, match="malformed config"):
            config_from_dict(obj)

    def test_non_object_rejected(self):
        with pytest.raises(SynthError, match="JSON object"):
            config_from_dict([1, 2])

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(self.config_dict()))
        cfg = load_config(str(path))
        assert cfg.seed == 11
        records = generate_dataset(cfg)
        assert load_records(io.StringIO(dump_to_text(records))) == records

    def test_invalid_json_is_parse_failure(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ConfigParseError, match="invalid JSON"):
            load_config(str(path))
        with pytest.raises(ParseFailure):
            load_config(str(path))

    def test_mode_flag_override_pattern(self):
        cfg = config_from_dict(self.config_dict())
        flipped = dataclasses.replace(cfg, mode=GeneratorMode.BLIND)
        assert flipped.mode is GeneratorMode.BLIND
        assert flipped.seed == cfg.seed


def dump_to_text(records):
    sink = io.StringIO()
    dump_records(records, sink)
    return sink.getvalue()
