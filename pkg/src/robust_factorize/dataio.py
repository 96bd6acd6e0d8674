"""Image dataset loading and report persistence."""

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError

LAYOUTS = ("orl", "yaleb", "flat")
_FLAT_RE = re.compile(r"^(?P<label>.+)_(?P<idx>[^_]+)\.(?P<ext>pgm|png)$", re.IGNORECASE)


@dataclass
class Dataset:
    x: np.ndarray
    labels: np.ndarray
    image_shape: tuple
    name: str = ""
    label_names: tuple = ()

    @property
    def n_classes(self):
        return int(len(np.unique(self.labels)))


# -- PGM --------------------------------------------------------------------

def _pnm_tokens(data, count, pos):
    tokens = []
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise DataError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path):
    """Read a P2 or P5 PGM file and return (image in [0, 1], maxval)."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise DataError(f"{path}: not a PGM file")
    try:
        (w, h, maxval), pos = _pnm_tokens(data, 3, 2)
        width, height, maxval = int(w), int(h), int(maxval)
    except (DataError, ValueError) as exc:
        raise DataError(f"{path}: bad PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise DataError(f"{path}: bad PGM header")
    count = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header from raster
        raster = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) < count * dtype.itemsize:
            raise DataError(f"{path}: truncated raster")
        values = np.frombuffer(raster[:count * dtype.itemsize], dtype=dtype)
    else:
        try:
            values = np.array(data[pos:].split()[:count], dtype=np.int64)
        except ValueError as exc:
            raise DataError(f"{path}: bad P2 raster") from exc
        if values.size < count:
            raise DataError(f"{path}: truncated raster")
    img = values.astype(np.float64).reshape(height, width) / maxval
    return img, maxval


def write_pgm(path, img):
    """Write an 8-bit binary PGM from an array of values in [0, 1]."""
    img = np.asarray(img, dtype=np.float64)
    raw = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    height, width = raw.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(raw.tobytes())


def _read_png(path):
    try:
        from PIL import Image
    except ImportError as exc:
        raise DataError("PNG support needs Pillow installed") from exc
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float64)
    return arr / 255.0


def _read_image(path):
    if path.suffix.lower() == ".png":
        return _read_png(path)
    return read_pgm(path)[0]


# -- directory layouts ------------------------------------------------------

def _subject_dir_files(root, pattern):
    entries = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        files = sorted(f for f in sub.iterdir() if f.is_file() and f.suffix.lower() == ".pgm")
        if pattern is not None and not pattern.match(sub.name):
            continue
        entries.extend((sub.name, f) for f in files)
    return entries


def _flat_files(root):
    entries = []
    for f in sorted(root.iterdir()):
        m = _FLAT_RE.match(f.name) if f.is_file() else None
        if m:
            entries.append((m.group("label"), f))
    # subject first, then filename
    return sorted(entries, key=lambda e: (e[0], e[1].name))


def load_image_dir(path, layout="orl", name=None):
    """Load a directory of grayscale images as a pixels-by-images matrix.

    Layouts: ``orl`` (``s<k>/<i>.pgm``), ``yaleb`` (one folder of PGMs per
    subject) and ``flat`` (``<label>_<i>.pgm`` or ``.png`` in one folder).
    Subjects and files are taken in lexicographic order; label ids follow
    the sorted subject names.
    """
    root = Path(path)
    if layout not in LAYOUTS:
        raise DataError(f"unknown layout {layout!r}")
    if not root.is_dir():
        raise DataError(f"{root} is not a directory")
    if layout == "orl":
        entries = _subject_dir_files(root, re.compile(r"^s\d+$"))
    elif layout == "yaleb":
        entries = _subject_dir_files(root, None)
    else:
        entries = _flat_files(root)
    if not entries:
        raise DataError(f"no images found in {root} (layout {layout})")

    names = sorted({subject for subject, _ in entries})
    ids = {s: i for i, s in enumerate(names)}
    columns, labels, shape = [], [], None
    for subject, f in entries:
        img = _read_image(f)
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise DataError(f"{f}: image shape {img.shape} differs from {shape}")
        columns.append(img.reshape(-1))
        labels.append(ids[subject])
    x = np.stack(columns, axis=1)
    return Dataset(x=x, labels=np.array(labels, dtype=np.int64), image_shape=tuple(shape),
                   name=name or root.name, label_names=tuple(names))


# -- reports ----------------------------------------------------------------

def save_report(reports, path, config=None, dataset=None):
    """Serialize run reports to JSON.

    ``reports`` is a :class:`~robust_factorize.bench.RunReport` or a list of
    them.  Per-repeat records are flattened into one ``repeats`` array.
    """
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    doc = {
        "config": config or {},
        "dataset": dataset or {},
        "repeats": [rec for rep in reports for rec in rep.records()],
        "aggregate": {rep.key: rep.aggregate() for rep in reports},
        "cells": [rep.header() for rep in reports],
    }
    try:
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def load_report(path):
    """Inverse of :func:`save_report`; returns ``(reports, document)``."""
    from .bench import RunReport

    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc
    reports = [RunReport.from_header(h) for h in doc.get("cells", [])]
    by_key = {r.key: r for r in reports}
    for rec in doc["repeats"]:
        by_key[f"{rec['method']}/{rec['weight']}"].add_record(rec)
    return reports, doc
