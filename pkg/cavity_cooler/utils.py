import logging
import math
import os
import tempfile
from importlib import metadata
from pathlib import Path

import backoff

logger = logging.getLogger(__name__)

DIST_NAME = "cavity-cooler"


def tool_version():
    try:
        return metadata.version(DIST_NAME)
    except metadata.PackageNotFoundError:
        return "0+unknown"


def format_float(value):
    """Shortest round-tripping text for a float; empty for None."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


@backoff.on_exception(
    backoff.expo,
    OSError,
    max_tries=3,
    on_backoff=lambda details: logger.warning(f"retry backoff: {details}"),
    on_giveup=lambda details: logger.warning(f"retry abort: {details}"),
    jitter=None,
)
def _replace(src, dst):
    os.replace(src, dst)


def atomic_write_text(path, text):
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        _replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path
