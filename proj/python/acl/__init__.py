"""Annealed Langevin sampling of multi-observation posteriors with compositional scores."""

import json as _json

from ._acl import *  # noqa: F401,F403
from . import _acl


def _doc(config):
    return config if isinstance(config, str) else _json.dumps(config)


def tune(config, out_dir=""):
    """Tune both or one method for a config (dict or JSON string); returns the exit code."""
    return _acl.tune(_doc(config), out_dir)


def sample(config, out_dir=""):
    return _acl.sample(_doc(config), out_dir)


def sweep(config, out_dir=""):
    return _acl.sweep(_doc(config), out_dir)


def resolved_config(config):
    return _json.loads(_acl.resolved_config(_doc(config)))
