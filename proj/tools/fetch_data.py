#!/usr/bin/env python3
"""Fetch the servo and ozone benchmark CSVs into data/.

Both files come from public archives whose terms are friendlier to
download-on-demand than to redistribution. The script normalizes them to
the loader's expectations: header row, comma-separated, no missing cells.

Offline use: pass --servo-raw / --ozone-raw pointing at already-downloaded
copies of the raw files and no network access is attempted for that file.
"""

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

SERVO_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/servo/servo.data"
OZONE_URL = "https://hastie.su.domains/ElemStatLearn/datasets/LAozone.data"

SERVO_HEADER = ["motor", "screw", "pgain", "vgain", "class"]
SERVO_SHAPE = (167, 5)
OZONE_HEADER = ["ozone", "vh", "wind", "humidity", "temp", "ibh", "dpg", "ibt", "vis", "doy"]
OZONE_SHAPE = (330, 10)


def read_raw(url, local_path):
    if local_path:
        return Path(local_path).read_text(encoding="utf-8")
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read().decode("utf-8")


def parse_rows(text):
    rows = list(csv.reader(io.StringIO(text)))
    return [r for r in rows if r and any(cell.strip() for cell in r)]


def complete(row):
    return all(cell.strip() not in ("", "?", "NA") for cell in row)


def write_csv(path, header, rows, expected_shape):
    rows = [r for r in rows if complete(r)]
    got = (len(rows), len(header))
    if got != expected_shape:
        sys.exit(f"error: {path.name}: expected {expected_shape} (rows, cols), got {got}")
    bad = [r for r in rows if len(r) != len(header)]
    if bad:
        sys.exit(f"error: {path.name}: ragged row {bad[0]}")
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows x {len(header)} cols)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default=Path(__file__).resolve().parent.parent / "data",
                    type=Path, help="destination directory (default: data/)")
    ap.add_argument("--servo-raw", help="local copy of servo.data instead of downloading")
    ap.add_argument("--ozone-raw", help="local copy of LAozone.data instead of downloading")
    ap.add_argument("--only", choices=["servo", "ozone"], help="fetch just one dataset")
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    if args.only in (None, "servo"):
        rows = parse_rows(read_raw(SERVO_URL, args.servo_raw))
        # servo.data ships without a header row
        write_csv(args.out_dir / "servo.csv", SERVO_HEADER, rows, SERVO_SHAPE)

    if args.only in (None, "ozone"):
        rows = parse_rows(read_raw(OZONE_URL, args.ozone_raw))
        if rows and rows[0][0].strip().lower() == "ozone":
            rows = rows[1:]
        write_csv(args.out_dir / "ozone.csv", OZONE_HEADER, rows, OZONE_SHAPE)


if __name__ == "__main__":
    main()
