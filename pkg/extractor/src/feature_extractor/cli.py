"""Command-line entry point.

Exit codes: 0 success, 1 for manifest or training problems, 2 for
unparsable manifest files and usage errors.  The feature file and its
``.log.json`` sidecar are the outputs; stdout gets a one-line summary.
"""

import dataclasses
import sys

import click

from . import __version__
from .errors import ExtractorError, ManifestParseError
from .extract import train_and_extract
from .manifest import load_manifest
from .network import ARCHS, LAYERS


@click.command(name="extract")
@click.version_option(version=__version__)
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="YAML manifest listing images and training settings.")
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Feature file to write; overrides the manifest's output.")
@click.option("--arch", default="resnet50", show_default=True,
              type=click.Choice(ARCHS), help="Backbone architecture.")
@click.option("--layer", default="penultimate", show_default=True,
              type=click.Choice(LAYERS), help="Which activations to export.")
@click.option("--pretrained/--no-pretrained", default=True, show_default=True,
              help="Start from published classification weights.")
@click.option("--seed", default=None, type=int,
              help="Override the manifest seed.")
def main(manifest_path, out, arch, layer, pretrained, seed):
    """Fine-tune a residual classifier on art-movement labels and export
    penultimate-layer feature vectors as JSON Lines records."""
    try:
        manifest = load_manifest(manifest_path)
        if seed is not None:
            manifest = dataclasses.replace(manifest, seed=seed)
        out_path, log = train_and_extract(
            manifest, arch=arch, layer=layer, pretrained=pretrained, out=out,
        )
    except ManifestParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (ExtractorError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    accuracy = ("n/a" if log.val_accuracy is None
                else f"{log.val_accuracy:.3f}")
    click.echo(f"wrote {log.n_records} {log.dimension}-d records to "
               f"{out_path} (best validation accuracy {accuracy}, "
               f"{len(log.skipped)} skipped)")


if __name__ == "__main__":
    main()
