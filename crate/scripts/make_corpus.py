#!/usr/bin/env python3
"""Regenerate the JPEG fixtures under testdata/.

Sources are the sample images bundled with scikit-image. Encoding, coefficient
dumps and reference decodes go through scripts/jpegtool.c (system libjpeg), so
every fixture is produced independently of the Rust code under test.

    cc -O2 -o /tmp/jpegtool scripts/jpegtool.c -ljpeg
    python3 scripts/make_corpus.py /tmp/jpegtool
"""
import os
import subprocess
import sys
import tempfile

import numpy as np
from PIL import Image
from skimage import data
from skimage.color import rgb2gray
from skimage.transform import resize

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "testdata")


def gray(img):
    img = np.asarray(img)
    if img.ndim == 3:
        img = rgb2gray(img[..., :3]) * 255.0
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def crop(img, h, w, y=0, x=0):
    return img[y:y + h, x:x + w]


def write_pgm(path, img):
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(np.ascontiguousarray(img).tobytes())


def encode(tool, img, out, quality, restart_rows=0, *flags):
    with tempfile.NamedTemporaryFile(suffix=".pgm", delete=False) as tmp:
        path = tmp.name
    write_pgm(path, img)
    subprocess.check_call([tool, "enc", path, out, str(quality), str(restart_rows), *flags])
    os.unlink(path)


def main(tool):
    q75 = os.path.join(ROOT, "q75")
    mixed = os.path.join(ROOT, "mixed")
    reject = os.path.join(ROOT, "reject")
    oracle = os.path.join(ROOT, "oracle")
    for d in (q75, mixed, reject, oracle):
        os.makedirs(d, exist_ok=True)

    big = {
        "astronaut": gray(data.astronaut()),
        "brick": gray(data.brick()),
        "camera": gray(data.camera()),
        "grass": gray(data.grass()),
        "gravel": gray(data.gravel()),
        "moon": gray(data.moon()),
        "ihc": gray(data.immunohistochemistry()),
        "motorcycle": crop(gray(data.stereo_motorcycle()[0]), 500, 512, 0, 100),
        "hubble": crop(gray(data.hubble_deep_field()), 512, 512, 200, 300),
        "retina": gray(resize(data.retina(), (512, 512), anti_aliasing=True) * 255.0),
    }
    # motorcycle crop is 500 rows; pad by edge replication to 512x512
    big["motorcycle"] = np.pad(big["motorcycle"], ((0, 12), (0, 0)), mode="edge")

    for name, img in big.items():
        assert img.shape == (512, 512), (name, img.shape)
        encode(tool, img, os.path.join(q75, name + ".jpg"), 75)

    small = [
        ("camera_q30_96x64", crop(big["camera"], 64, 96, 100, 200), 30, 0, ()),
        ("camera_q50_128", crop(big["camera"], 128, 128, 200, 150), 50, 0, ()),
        ("brick_q60_80x120", crop(big["brick"], 120, 80), 60, 0, ()),
        ("grass_q70_64", crop(big["grass"], 64, 64, 32, 32), 70, 0, ()),
        ("gravel_q80_128", crop(big["gravel"], 128, 128, 256, 256), 80, 0, ()),
        ("moon_q85_100x75", crop(big["moon"], 75, 100, 300, 100), 85, 0, ()),
        ("astronaut_q90_64", crop(big["astronaut"], 64, 64, 100, 200), 90, 0, ()),
        ("ihc_q95_96", crop(big["ihc"], 96, 96, 50, 50), 95, 0, ()),
        ("hubble_q100_48", crop(big["hubble"], 48, 48, 0, 0), 100, 0, ()),
        ("coins_q75_37x53", crop(gray(data.coins()), 53, 37, 100, 100), 75, 0, ()),
        ("text_q65_odd", crop(gray(data.text()), 61, 99), 65, 0, ()),
        ("page_q75_restart", crop(gray(data.page()), 96, 128), 75, 1, ()),
        ("camera_q90_restart2", crop(big["camera"], 80, 120, 300, 300), 90, 2, ()),
        ("grass_q75_optimized", crop(big["grass"], 96, 64), 75, 0, ("optimize",)),
        ("micro_q88_102", gray(data.microaneurysms()), 88, 0, ()),
        ("chess_q40_200", gray(data.checkerboard()), 40, 0, ()),
        ("flat_q75_8", np.full((8, 8), 128, np.uint8), 75, 0, ()),
        ("tiny_q75_1x1", np.full((1, 1), 77, np.uint8), 75, 0, ()),
    ]
    for name, img, q, rst, flags in small:
        encode(tool, img, os.path.join(mixed, name + ".jpg"), q, rst, *flags)

    encode(tool, crop(big["camera"], 64, 64), os.path.join(reject, "progressive.jpg"), 75, 0, "progressive")
    encode(tool, crop(big["camera"], 64, 64), os.path.join(reject, "arithmetic.jpg"), 75, 0, "arith")
    Image.fromarray(crop(data.astronaut(), 64, 64)).save(os.path.join(reject, "color.jpg"), quality=75)

    ref = os.path.join(q75, "camera.jpg")
    subprocess.check_call([tool, "dump", ref, os.path.join(oracle, "camera_q75.coef")])
    subprocess.check_call([tool, "decode", ref, os.path.join(oracle, "camera_q75.pgm")])
    for name in ("page_q75_restart", "coins_q75_37x53", "camera_q90_restart2",
                 "grass_q75_optimized", "tiny_q75_1x1"):
        src = os.path.join(mixed, name + ".jpg")
        subprocess.check_call([tool, "dump", src, os.path.join(oracle, name + ".coef")])
    subprocess.check_call([tool, "decode", os.path.join(mixed, "coins_q75_37x53.jpg"),
                           os.path.join(oracle, "coins_q75_37x53.pgm")])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "jpegtool")
