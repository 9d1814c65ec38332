#!/usr/bin/env python3
"""Prepare the benchmark series used by esplab.

Laser: the 10093-step Santa Fe laser series (McNames extended set), taken
from the `reservoirpy` wheel, min-max normalized to [0, 1] and written as
one value per line to data/laser.txt.

Sunspot: download the SILSO monthly mean total sunspot number
(SN_m_tot_V2.0.txt) from https://www.sidc.be/SILSO/datafiles into
data/SN_m_tot_V2.0.txt. Skipped with a warning when offline.
"""
import glob
import io
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

import numpy as np

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
SILSO_URL = "https://www.sidc.be/SILSO/INFO/snmtotcsv.php"


def laser():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "reservoirpy==0.4.2",
             "--no-deps", "-q", "-d", tmp],
            check=True,
        )
        wheel = glob.glob(os.path.join(tmp, "*.whl"))[0]
        raw = zipfile.ZipFile(wheel).read("reservoirpy/datasets/santafe_laser.npy")
    x = np.load(io.BytesIO(raw)).astype(np.float64).ravel()
    x = (x - x.min()) / (x.max() - x.min())
    with open(os.path.join(ROOT, "laser.txt"), "w") as f:
        for v in x:
            f.write(f"{v:.17g}\n")
    print(f"laser.txt: {len(x)} values")


def sunspot():
    try:
        with urllib.request.urlopen(SILSO_URL, timeout=20) as r:
            body = r.read()
    except OSError as e:
        print(f"sunspot: download failed ({e}); fetch SN_m_tot_V2.0 manually", file=sys.stderr)
        return
    with open(os.path.join(ROOT, "SN_m_tot_V2.0.txt"), "wb") as f:
        f.write(body)
    print("SN_m_tot_V2.0.txt written")


if __name__ == "__main__":
    os.makedirs(ROOT, exist_ok=True)
    laser()
    sunspot()
