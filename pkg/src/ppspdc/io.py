"""CSV + JSON artifact writing.

Data files hold only a header row (column names with units in brackets)
and ``repr``-formatted numbers, so identical inputs give byte-identical
files.  Everything that may vary between runs (timestamp, versions) goes to
the JSON sidecar, whose ``config_hash`` covers the resolved configuration
only.
"""
from datetime import datetime, timezone
import json
import math
from pathlib import Path
import platform

import numpy as np

from . import __version__

FORMAT_VERSION = 1


def csv_table(columns, rows):
    """Header plus rows; floats are written with repr for round-tripping."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v).replace(",", ";").replace("\n", " ")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return str(obj)


def _clean(obj):
    # JSON has no inf/nan; write them as strings.
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return str(float(obj))
    return obj


def versions():
    import scipy
    return {"ppspdc": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def write_artifacts(directory, stem, csv_text, metadata, config=None, tolerances=None,
                    extra_csv=None):
    """Write ``stem.csv`` (and any ``extra_csv`` {suffix: text}) plus ``stem.json``.

    Returns the list of written paths.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(csv_text)
    paths.append(csv_path)
    for suffix, text in (extra_csv or {}).items():
        p = out / f"{stem}_{suffix}.csv"
        with open(p, "w", newline="\n") as fh:
            fh.write(text)
        paths.append(p)
    meta = {
        "format_version": FORMAT_VERSION,
        "artifact": stem,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "versions": versions(),
        "tolerances": tolerances or {},
        **metadata,
    }
    if config is not None:
        meta["config_hash"] = config.config_hash()
        meta["config"] = config.as_dict()
    json_path = out / f"{stem}.json"
    with open(json_path, "w") as fh:
        json.dump(_clean(json.loads(json.dumps(meta, default=_json_default))), fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    paths.append(json_path)
    return paths


def data_section(path):
    """CSV file contents; the whole file is data, so this is what determinism compares."""
    return Path(path).read_text()
