"""Output plumbing: atomic writes, run manifests, deterministic CSV."""

from __future__ import annotations

import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor


def atomic_write_text(path, text):
    """Write via a sibling temp file and rename, so readers never see partial data."""
    path = os.path.abspath(path)
    d = os.path.dirname(path)
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x):
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=False) + "\n")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def versions():
    import numpy
    import scipy

    from . import __version__

    return {
        "normkam": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "python": ".".join(map(str, sys.version_info[:3])),
    }


def write_manifest(out_path, command, inputs, outputs, settings, t_start):
    """Record inputs (hashed), outputs, tolerances/settings and wall time
    next to the primary output; every output file is listed here."""
    manifest = {
        "command": list(command),
        "inputs": {os.path.abspath(p): sha256_file(p) for p in inputs if p},
        "outputs": [os.path.abspath(p) for p in outputs],
        "settings": settings,
        "versions": versions(),
        "wall_time_s": round(time.time() - t_start, 3),
    }
    path = str(out_path) + ".manifest.json"
    write_json(path, manifest)
    return path


def parallel_map(fn, items, threads=1):
    """Map preserving input order; value-type tasks only, no shared state."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
