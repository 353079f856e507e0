"""Readers and writers for PPM (P6), PFM and ASCII PLY files."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .exceptions import DataError


def write_ppm(path, image) -> None:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[..., 0]
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"PPM needs an (H, W, 3) or (H, W) image, got {img.shape}")
    h, w, _ = img.shape
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


_PPM_HEADER = re.compile(rb"P6\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    m = _PPM_HEADER.match(raw)
    if m is None:
        raise DataError(f"{path}: not a binary PPM (P6) file")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise DataError(f"{path}: only 8-bit PPM is supported (maxval {maxval})")
    body = raw[m.end() : m.end() + w * h * 3]
    if len(body) != w * h * 3:
        raise DataError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3).astype(np.float64) / 255.0


def write_pfm(path, array) -> None:
    """Little-endian PFM (scale -1.0); rows are stored bottom-to-top."""
    a = np.asarray(array, dtype=np.float64)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[..., 0]
    if a.ndim == 2:
        tag = "Pf"
    elif a.ndim == 3 and a.shape[2] == 3:
        tag = "PF"
    else:
        raise ValueError(f"PFM holds 1 or 3 channels, got shape {a.shape}")
    h, w = a.shape[:2]
    with open(path, "wb") as f:
        f.write(f"{tag}\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(np.ascontiguousarray(a[::-1]).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    """Returns (H, W) for grey PFM and (H, W, 3) for colour, as float64."""
    with open(path, "rb") as f:
        tag = f.readline().strip()
        if tag not in (b"PF", b"Pf"):
            raise DataError(f"{path}: not a PFM file")
        dims = f.readline().split()
        scale = float(f.readline().strip())
        data = f.read()
    try:
        w, h = int(dims[0]), int(dims[1])
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path}: bad PFM dimensions") from exc
    channels = 3 if tag == b"PF" else 1
    dtype = "<f4" if scale < 0 else ">f4"
    n = w * h * channels
    if len(data) < 4 * n:
        raise DataError(f"{path}: truncated PFM data")
    a = np.frombuffer(data[: 4 * n], dtype=dtype).astype(np.float64)
    a = a.reshape(h, w, channels) if channels == 3 else a.reshape(h, w)
    return a[::-1].copy()


def write_ply(path, points) -> None:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(pts)}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    lines += [f"{x!r} {y!r} {z!r}" for x, y, z in pts.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_ply(path) -> np.ndarray:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != "ply":
        raise DataError(f"{path}: not a PLY file")
    n = None
    props: list[str] = []
    body_start = None
    for i, line in enumerate(text[1:], start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format" and parts[1] != "ascii":
            raise DataError(f"{path}: only ASCII PLY is supported")
        if parts[0] == "element" and parts[1] == "vertex":
            n = int(parts[2])
        elif parts[0] == "property" and n is not None:
            props.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if n is None or body_start is None:
        raise DataError(f"{path}: malformed PLY header")
    try:
        cols = [props.index(c) for c in ("x", "y", "z")]
    except ValueError as exc:
        raise DataError(f"{path}: PLY lacks x/y/z properties") from exc
    rows = text[body_start : body_start + n]
    if len(rows) != n:
        raise DataError(f"{path}: expected {n} vertices, found {len(rows)}")
    if n == 0:
        return np.zeros((0, 3))
    data = np.array([[float(v) for v in r.split()] for r in rows])
    return data[:, cols]
