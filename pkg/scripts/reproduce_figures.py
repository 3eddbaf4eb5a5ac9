"""Regenerate the data behind every figure preset (or a chosen subset).

    python3 scripts/reproduce_figures.py                 # all presets
    python3 scripts/reproduce_figures.py fig-fid2mode --samples 2000
"""

import argparse
import time

from uasim.config import PRESETS
from uasim.experiment import default_threads, figure_command


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("presets", nargs="*", default=sorted(PRESETS), metavar="PRESET")
    parser.add_argument("--out-dir", default="figures")
    parser.add_argument("--samples", type=int, help="override Monte-Carlo sample counts")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()
    threads = args.threads or default_threads()
    for preset in args.presets:
        t0 = time.perf_counter()
        paths = figure_command(preset, out_dir=args.out_dir, samples=args.samples, threads=threads,
                               echo=lambda *_: None)
        print(f"{preset}: {len(paths)} file(s) in {time.perf_counter() - t0:.1f}s")
        for p in paths:
            print(f"  {p}")


if __name__ == "__main__":
    main()
