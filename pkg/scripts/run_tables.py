"""Run every shipped experiment config at each reference sample size.

Writes one markdown table per (config, n) to the output directory and prints
them with the wall time. Example:

    python scripts/run_tables.py --out results --workers 1
"""

import argparse
import time
from pathlib import Path

from chainorder.harness import load_config, render_table, run_experiment, spec_from_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

# reference sample sizes for each generator
SIZES = {
    "q1.yaml": (500, 1000, 1500),
    "q2.yaml": (500, 1000, 1500),
    "q3.yaml": (1000, 1500, 2000),
    "q6_k2.yaml": (5000,),
    "q6_k3.yaml": (5000,),
    "q7.yaml": (5000,),
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results", help="output directory (default: results)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    parser.add_argument("--replications", type=int, default=None,
                        help="override the config replication count")
    parser.add_argument("--penalty", default=None, help="penalty convention override")
    parser.add_argument("--only", nargs="*", default=None, help="config file names to run")
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, sizes in SIZES.items():
        if args.only and name not in args.only:
            continue
        cfg = load_config(CONFIGS / name)
        for n in sizes:
            run_cfg = dict(cfg, n=n)
            run_cfg.pop("output", None)
            if args.replications is not None:
                run_cfg["replications"] = args.replications
            if args.penalty is not None:
                run_cfg["penalty"] = args.penalty
            start = time.perf_counter()
            table = run_experiment(spec_from_config(run_cfg), workers=args.workers)
            text = render_table(table, "markdown")
            target = out / f"{Path(name).stem}_n{n}.md"
            target.write_text(f"{Path(name).stem}, n={n}\n\n{text}", encoding="utf-8")
            print(f"## {Path(name).stem}, n={n} ({time.perf_counter() - start:.1f} s)\n")
            print(text)


if __name__ == "__main__":
    main()
