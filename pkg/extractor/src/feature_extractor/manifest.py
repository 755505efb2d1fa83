"""Extraction manifests: which images to process and how to train.

A manifest is a YAML mapping with an ``images`` list and optional
training settings.  Every image row names a file plus the artist,
movement, genre, material, and provenance that will be copied verbatim
into the exported records; relative paths resolve against the manifest's
own directory, and every file must exist up front.  Training classes are
the movements of the real rows (or an explicit ``labels`` list, whose
order fixes the class indices), and there must be at least two of them.

Example::

    split: 0.8
    epochs: 3
    seed: 7
    output: features.jsonl
    images:
      - {path: imgs/vela-1.png, artist: vela, movement: luminism,
         genre: landscape, material: oil}
      - {path: imgs/vela-g1.png, artist: vela, movement: "",
         genre: landscape, material: oil, provenance: generated}

``provenance`` defaults to ``real``; generated rows may leave the
movement blank (a movement-blind generator does not know it).  ``id``
defaults to the file's stem and must be unique.
"""

from __future__ import annotations

import dataclasses
import pathlib

import yaml

from .errors import ManifestError, ManifestParseError

PROVENANCES = ("real", "generated")
OPTIMIZERS = ("adam", "sgd")
MIN_IMAGE_SIZE = 32  # the conv stack downsamples 32x; smaller inputs vanish


@dataclasses.dataclass(frozen=True)
class ImageRow:
    path: pathlib.Path
    id: str
    artist: str
    movement: str
    genre: str
    material: str
    provenance: str


@dataclasses.dataclass(frozen=True)
class ExtractionManifest:
    rows: tuple[ImageRow, ...]
    labels: tuple[str, ...]  # class order for the training head
    split: float = 0.8
    optimizer: str = "adam"
    learning_rate: float = 1e-4
    batch_size: int = 50
    epochs: int = 3
    image_size: int = 224
    seed: int = 0
    output: pathlib.Path | None = None


def _string(obj: dict, key: str, where: str, default: str | None = None) -> str:
    if key not in obj:
        if default is not None:
            return default
        raise ManifestError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, str):
        raise ManifestError(f"{where}: {key} must be a string")
    return value.strip()


def _number(doc: dict, key: str, default, *, integer: bool = False):
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        kind = "an integer" if integer else "a number"
        raise ManifestError(f"{key} must be {kind}")
    if integer and not isinstance(value, int):
        raise ManifestError(f"{key} must be an integer")
    return value


def _row(obj: object, base: pathlib.Path, index: int) -> ImageRow:
    where = f"images[{index}]"
    if not isinstance(obj, dict):
        raise ManifestError(f"{where}: each image row must be a mapping")
    raw_path = _string(obj, "path", where)
    if not raw_path:
        raise ManifestError(f"{where}: path must be non-empty")
    path = pathlib.Path(raw_path)
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        raise ManifestError(f"{where}: image file not found: {path}")
    provenance = _string(obj, "provenance", where, default=PROVENANCES[0])
    if provenance not in PROVENANCES:
        raise ManifestError(
            f"{where}: provenance must be one of {', '.join(PROVENANCES)}"
        )
    movement = _string(obj, "movement", where)
    if not movement and provenance == "real":
        raise ManifestError(f"{where}: real rows need a movement label")
    row = ImageRow(
        path=path,
        id=_string(obj, "id", where, default=path.stem),
        artist=_string(obj, "artist", where),
        movement=movement,
        genre=_string(obj, "genre", where),
        material=_string(obj, "material", where),
        provenance=provenance,
    )
    for field in ("id", "artist", "genre", "material"):
        if not getattr(row, field):
            raise ManifestError(f"{where}: {field} must be non-empty")
    return row


def load_manifest(path: str | pathlib.Path) -> ExtractionManifest:
    source = pathlib.Path(path)
    try:
        doc = yaml.safe_load(source.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ManifestParseError(f"invalid YAML in {source}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestParseError(f"{source}: manifest must be a YAML mapping")

    raw_rows = doc.get("images")
    if not isinstance(raw_rows, list) or not raw_rows:
        raise ManifestError("manifest needs a non-empty 'images' list")
    base = source.resolve().parent
    rows = tuple(_row(obj, base, i) for i, obj in enumerate(raw_rows))

    seen: dict[str, int] = {}
    for i, row in enumerate(rows):
        if row.id in seen:
            raise ManifestError(
                f"duplicate image id {row.id!r} (images[{seen[row.id]}] and "
                f"images[{i}])"
            )
        seen[row.id] = i

    real_movements = sorted({r.movement for r in rows if r.provenance == "real"})
    raw_labels = doc.get("labels")
    if raw_labels is None:
        labels = tuple(real_movements)
    else:
        if (not isinstance(raw_labels, list) or not raw_labels
                or not all(isinstance(l, str) and l.strip() for l in raw_labels)):
            raise ManifestError("labels must be a list of non-empty strings")
        labels = tuple(l.strip() for l in raw_labels)
        if len(set(labels)) != len(labels):
            raise ManifestError("labels must be unique")
        missing = [m for m in real_movements if m not in labels]
        if missing:
            raise ManifestError(
                f"real rows use movements outside 'labels': {', '.join(missing)}"
            )
    if len(labels) < 2:
        raise ManifestError(
            "need at least two movement labels to train; got "
            f"[{', '.join(labels)}]"
        )

    split = _number(doc, "split", 0.8)
    if not 0.0 < split < 1.0:
        raise ManifestError(f"split must be strictly between 0 and 1, got {split}")
    optimizer = doc.get("optimizer", OPTIMIZERS[0])
    if optimizer not in OPTIMIZERS:
        raise ManifestError(
            f"unknown optimizer {optimizer!r} (supported: {', '.join(OPTIMIZERS)})"
        )
    learning_rate = _number(doc, "learning_rate", 1e-4)
    if learning_rate <= 0:
        raise ManifestError("learning_rate must be positive")
    batch_size = _number(doc, "batch_size", 50, integer=True)
    if batch_size < 1:
        raise ManifestError("batch_size must be at least 1")
    epochs = _number(doc, "epochs", 3, integer=True)
    if epochs < 1:
        raise ManifestError("epochs must be at least 1")
    image_size = _number(doc, "image_size", 224, integer=True)
    if image_size < MIN_IMAGE_SIZE:
        raise ManifestError(f"image_size must be at least {MIN_IMAGE_SIZE}")

    output = None
    if "output" in doc:
        raw_out = doc["output"]
        if not isinstance(raw_out, str) or not raw_out.strip():
            raise ManifestError("output must be a non-empty path string")
        output = pathlib.Path(raw_out.strip())
        if not output.is_absolute():
            output = base / output

    return ExtractionManifest(
        rows=rows,
        labels=labels,
        split=split,
        optimizer=optimizer,
        learning_rate=float(learning_rate),
        batch_size=batch_size,
        epochs=epochs,
        image_size=image_size,
        seed=_number(doc, "seed", 0, integer=True),
        output=output,
    )
