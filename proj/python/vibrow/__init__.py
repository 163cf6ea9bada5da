from ._core import *  # noqa: F401,F403
from ._core import __version__

import json as _json


def run_config(config):
    """Run a config given as a dict; returns the manifest dict."""
    return _json.loads(run(_json.dumps(config)))


def compute_config(config):
    return compute(_json.dumps(config))
