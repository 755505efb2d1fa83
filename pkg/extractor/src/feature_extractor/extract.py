"""Fine-tune the classifier on movement labels, then export features.

Only real rows train the network (generated rows are what downstream
analysis evaluates, and movement-blind ones carry no label anyway); the
split is stratified per class so small manifests keep every movement in
the training set.  Extraction then runs over every readable row, real
and generated, in manifest order.  Unreadable images are skipped with a
warning and listed in the training log.

With a fixed manifest seed, two runs produce identical record ids and
metadata in identical order.  Feature values are exported at full float
precision with no normalization; downstream matching is scale and
translation invariant, so a global affine change of the embedding would
not alter bias scores anyway.
"""

from __future__ import annotations

import dataclasses
import json
import pathlib
import random
import warnings

import torch
from PIL import Image
from torch import nn
from torchvision import transforms

from .errors import ManifestError
from .manifest import ExtractionManifest, ImageRow
from .network import LAYERS, StyleNetwork, build_network

# standard channel statistics matching the published backbone weights
_MEAN = (0.485, 0.456, 0.406)
_STD = (0.229, 0.224, 0.225)


@dataclasses.dataclass(frozen=True)
class TrainingLog:
    arch: str
    layer: str
    pretrained: bool
    seed: int
    classes: tuple[str, ...]
    dimension: int
    n_records: int
    n_train: int
    n_val: int
    epochs: int
    losses: tuple[float, ...]  # mean training loss per epoch
    val_accuracies: tuple[float, ...]  # per epoch; empty without a val split
    val_accuracy: float | None  # best across epochs
    skipped: tuple[str, ...]  # ids of unreadable images

    def as_dict(self) -> dict:
        return {
            "arch": self.arch,
            "layer": self.layer,
            "pretrained": self.pretrained,
            "seed": self.seed,
            "classes": list(self.classes),
            "dimension": self.dimension,
            "n_records": self.n_records,
            "n_train": self.n_train,
            "n_val": self.n_val,
            "epochs": self.epochs,
            "losses": list(self.losses),
            "val_accuracies": list(self.val_accuracies),
            "val_accuracy": self.val_accuracy,
            "skipped": list(self.skipped),
        }


def _transform(size: int) -> transforms.Compose:
    return transforms.Compose([
        transforms.Resize((size, size)),
        transforms.ToTensor(),
        transforms.Normalize(_MEAN, _STD),
    ])


def _batches(rows: list[ImageRow], size: int):
    for start in range(0, len(rows), size):
        yield rows[start:start + size]


def _split_rows(manifest: ExtractionManifest, kept: list[ImageRow],
                rng: random.Random) -> tuple[list[ImageRow], list[ImageRow]]:
    by_class: dict[str, list[ImageRow]] = {}
    for row in kept:
        if row.provenance == "real":
            by_class.setdefault(row.movement, []).append(row)
    train: list[ImageRow] = []
    val: list[ImageRow] = []
    for label in manifest.labels:
        rows = by_class.get(label, [])
        rng.shuffle(rows)
        cut = max(1, int(manifest.split * len(rows))) if rows else 0
        train.extend(rows[:cut])
        val.extend(rows[cut:])
    return train, val


def _accuracy(net: StyleNetwork, rows: list[ImageRow], tensors: dict,
              index: dict[str, int], batch_size: int) -> float:
    net.eval()
    hits = 0
    with torch.no_grad():
        for batch in _batches(rows, batch_size):
            x = torch.stack([tensors[r.id] for r in batch])
            want = torch.tensor([index[r.movement] for r in batch])
            hits += int((net(x).argmax(dim=1) == want).sum())
    return hits / len(rows)


def train_and_extract(
    manifest: ExtractionManifest,
    *,
    arch: str = "resnet50",
    layer: str = "penultimate",
    pretrained: bool = True,
    out: str | pathlib.Path | None = None,
) -> tuple[pathlib.Path, TrainingLog]:
    """Train on the manifest, write the feature file, return its path and log.

    A ``<output>.log.json`` sidecar records the run (classes, dimension,
    losses, best validation accuracy, skipped images).
    """
    if layer not in LAYERS:
        raise ValueError(f"unknown layer {layer!r} (choose from {LAYERS})")
    out_path = pathlib.Path(out) if out is not None else manifest.output
    if out_path is None:
        raise ManifestError("no output path: set 'output' in the manifest "
                            "or pass --out")

    torch.manual_seed(manifest.seed)
    rng = random.Random(manifest.seed)

    reader = _transform(manifest.image_size)
    tensors: dict[str, torch.Tensor] = {}
    kept: list[ImageRow] = []
    skipped: list[str] = []
    for row in manifest.rows:
        try:
            with Image.open(row.path) as img:
                tensors[row.id] = reader(img.convert("RGB"))
        except OSError as exc:
            warnings.warn(f"skipping unreadable image {row.path}: {exc}",
                          stacklevel=2)
            skipped.append(row.id)
            continue
        kept.append(row)

    train, val = _split_rows(manifest, kept, rng)
    present = sorted({r.movement for r in train})
    if len(present) < 2:
        raise ManifestError(
            "need readable real images from at least two movement classes "
            f"to train; got [{', '.join(present)}]"
        )

    net = build_network(arch, len(manifest.labels), pretrained)
    params = net.parameters()
    if manifest.optimizer == "adam":
        optim = torch.optim.Adam(params, lr=manifest.learning_rate)
    else:
        optim = torch.optim.SGD(params, lr=manifest.learning_rate, momentum=0.9)
    loss_fn = nn.CrossEntropyLoss()
    index = {label: i for i, label in enumerate(manifest.labels)}

    losses: list[float] = []
    accuracies: list[float] = []
    for _ in range(manifest.epochs):
        net.train()
        order = train[:]
        rng.shuffle(order)
        total = 0.0
        for batch in _batches(order, manifest.batch_size):
            x = torch.stack([tensors[r.id] for r in batch])
            y = torch.tensor([index[r.movement] for r in batch])
            optim.zero_grad()
            loss = loss_fn(net(x), y)
            loss.backward()
            optim.step()
            total += float(loss.detach()) * len(batch)
        losses.append(total / len(train))
        if val:
            accuracies.append(_accuracy(net, val, tensors, index,
                                        manifest.batch_size))

    net.eval()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        with torch.no_grad():
            for batch in _batches(kept, manifest.batch_size):
                x = torch.stack([tensors[r.id] for r in batch])
                vectors = net.features(x, layer)
                for row, vector in zip(batch, vectors):
                    fh.write(json.dumps({
                        "id": row.id,
                        "artist": row.artist,
                        "movement": row.movement,
                        "genre": row.genre,
                        "material": row.material,
                        "provenance": row.provenance,
                        "features": [float(v) for v in vector],
                    }) + "\n")

    log = TrainingLog(
        arch=arch,
        layer=layer,
        pretrained=pretrained,
        seed=manifest.seed,
        classes=manifest.labels,
        dimension=net.feature_dim(layer),
        n_records=len(kept),
        n_train=len(train),
        n_val=len(val),
        epochs=manifest.epochs,
        losses=tuple(losses),
        val_accuracies=tuple(accuracies),
        val_accuracy=max(accuracies) if accuracies else None,
        skipped=tuple(skipped),
    )
    log_path = out_path.with_suffix(".log.json")
    log_path.write_text(json.dumps(log.as_dict(), indent=2) + "\n",
                        encoding="utf-8")
    return out_path, log
