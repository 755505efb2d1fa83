"""Shared exception bases.

Every domain failure raised by this package derives from
:class:`ConfoundQuantError`, so the command-line layer can map any of them
to a single error line and a documented exit code.  Failures to parse an
input text (DAG description, model file, config file) additionally derive
from :class:`ParseFailure`; the CLI reports those with the usage/parse exit
code instead of the domain-error one.
"""

from __future__ import annotations


class ConfoundQuantError(Exception):
    """Base for all domain errors raised by this package."""


class ParseFailure(ConfoundQuantError):
    """Input text could not be parsed at all."""
