"""Repeat the baseline comparison over many channel draws.

The trained predictor is shared; only the gain matrix and the initial power
profile change between rows.

    python3 experiments/gain_seed_sensitivity.py --seeds 20
"""

import argparse
import dataclasses
import statistics

from harshnet.harness.experiment import compare_on, prepare_model
from harshnet.harness.scenario import load_scenario


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args(argv)

    sc = load_scenario(args.config)
    model, _, test, _ = prepare_model(sc)
    print(f"{'seed':>4} {'power -%':>9} {'SINR +%':>9} {'both':>5}")
    rows = []
    for seed in range(args.seeds):
        s = dataclasses.replace(sc, gain_seed=seed, init_seed=seed)
        r = compare_on(s, model, test).summary()
        both = r["power_reduction_pct"] > 0 and r["sinr_gain_pct"] > 0
        rows.append((r["power_reduction_pct"], r["sinr_gain_pct"], both))
        print(f"{seed:4d} {r['power_reduction_pct']:9.1f} {r['sinr_gain_pct']:9.1f} {'yes' if both else 'no':>5}")
    print(f"power lower on {sum(p > 0 for p, _, _ in rows)}/{len(rows)}, "
          f"SINR higher on {sum(g > 0 for _, g, _ in rows)}/{len(rows)}, "
          f"both on {sum(b for _, _, b in rows)}/{len(rows)}; "
          f"median SINR change {statistics.median(g for _, g, _ in rows):+.1f}%")


if __name__ == "__main__":
    main()
