"""Shared fixture builders for the file-based tests."""

import numpy as np
from PIL import Image

from stemnoise.distortions import add_white_noise, gaussian_blur

AWGN_LADDER = (5.0, 10.0, 15.0, 20.0, 30.0)
BLUR_LADDER = (0.5, 1.0, 2.0, 3.0, 4.0)


def save_float(path, image):
    """Store a float luminance grid losslessly (32-bit float TIFF)."""
    Image.fromarray(np.asarray(image, dtype=np.float32), mode="F").save(path)
    return path


def write_ladder_manifest(directory, camera, crop=128):
    """AWGN and blur ladders of a crop of ``camera``, with severity as dmos."""
    base = camera[:crop, :crop]
    rows = ["path,subset,dmos"]
    for s in AWGN_LADDER:
        name = f"wn_{s:g}.tif"
        save_float(directory / name, add_white_noise(base, s, seed=0))
        rows.append(f"{name},wn,{s}")
    for s in BLUR_LADDER:
        name = f"blur_{s:g}.tif"
        save_float(directory / name, gaussian_blur(base, s))
        rows.append(f"{name},gblur,{s}")
    manifest = directory / "manifest.csv"
    manifest.write_text("\n".join(rows) + "\n")
    return manifest
