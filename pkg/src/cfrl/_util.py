"""Small shared helpers: seeded sub-streams, digests, canonical file output."""

import hashlib
import json
import os

import numpy as np

from .errors import ConfigError


def named_rng(seed, *names):
    """Generator for a named sub-stream of the master seed.

    Identical (seed, names) always yields the same stream, so independent
    pipeline stages can share one user-facing seed without colliding.
    """
    entropy = [int(seed) & 0xFFFFFFFF]
    for name in names:
        digest = hashlib.sha256(str(name).encode("utf-8")).digest()
        entropy.append(int.from_bytes(digest[:4], "little"))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def cell_rng(seed, *key):
    """Generator for one cell of a keyed grid (all key parts integers)."""
    entropy = [int(seed) & 0xFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in key]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj):
    """Canonical JSON output: sorted keys, trailing newline, repr floats."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def write_csv(path, header, rows):
    """Minimal deterministic CSV writer; floats rendered with repr."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_cell(v) for v in row) + "\n")


def _cell(value):
    # np.float64 subclasses float, so coerce before repr to avoid the
    # np.float64(...) wrapper in the output
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    text = str(value)
    if "," in text or '"' in text or "\n" in text:
        text = '"' + text.replace('"', '""') + '"'
    return text


def default_jobs():
    """Worker count for embarrassingly parallel stages (CFRL_JOBS overrides)."""
    env = os.environ.get("CFRL_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"CFRL_JOBS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError(f"CFRL_JOBS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1
