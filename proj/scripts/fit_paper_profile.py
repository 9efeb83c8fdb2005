#!/usr/bin/env python3
"""Fits [ledger] block_interval and the mean network latency so the simulated
table4_processing_time row totals land as close as possible (least squares)
to the published reference rows, then writes configs/paper-profile.ini.

The published absolute seconds are testbed artifacts and are never a pass/fail
target; this profile only demonstrates that the simulation can be placed in
the same regime. Usage:

  fit_paper_profile.py <medchain-binary> [out.ini]
"""
import json
import pathlib
import subprocess
import sys
import tempfile

REFERENCE_ROWS = {  # n_transactions -> published per-device processing seconds
    50: [20.0, 22.0, 18.0, 23.0],
    100: [31.0, 41.0, 37.0, 45.0],
    150: [55.0, 62.0, 58.0, 67.0],
    200: [82.0, 84.0, 73.0, 91.0],
}

CONFIG_TEMPLATE = """[run]
seed = 42

[devices]
count = 4
sample_period = 400

[net]
latency = normal:{latency_mean}:30

[ledger]
block_interval = {block_interval}
max_block_txs = 16

[bench]
batch_sizes = 50,100,150,200
trials = {trials}
"""


def run_bench(binary, block_interval, latency_mean, trials, workdir):
    cfg = workdir / f"fit-{block_interval}-{latency_mean}.ini"
    cfg.write_text(CONFIG_TEMPLATE.format(block_interval=block_interval,
                                          latency_mean=latency_mean, trials=trials))
    out = workdir / f"out-{block_interval}-{latency_mean}"
    subprocess.run([binary, "bench", "--config", str(cfg), "--out-dir", str(out)],
                   check=True, capture_output=True)
    report = json.loads((out / "report.json").read_text())
    return {row["n_transactions"]: sum(d["processing_time_s"] for d in row["devices"])
            for row in report["batches"]}


def sse(sim_totals):
    return sum((sim_totals[n] - sum(row)) ** 2 for n, row in REFERENCE_ROWS.items())


def main():
    if len(sys.argv) < 2:
        sys.stderr.write(__doc__)
        return 2
    binary = sys.argv[1]
    out_path = pathlib.Path(sys.argv[2] if len(sys.argv) > 2 else
                            pathlib.Path(__file__).resolve().parent.parent /
                            "configs" / "paper-profile.ini")

    grid_b = [500, 800, 1000, 1500, 2000]
    grid_l = [30, 60, 120, 240, 480]
    best = None
    with tempfile.TemporaryDirectory() as tmp:
        workdir = pathlib.Path(tmp)
        for b in grid_b:
            for latency in grid_l:
                totals = run_bench(binary, b, latency, trials=2, workdir=workdir)
                err = sse(totals)
                print(f"block_interval={b:5d} latency_mean={latency:4d} sse={err:10.2f}")
                if best is None or err < best[0]:
                    best = (err, b, latency)
        _, b, latency = best
        totals = run_bench(binary, b, latency, trials=5, workdir=workdir)

    lines = [f"# Fitted so the simulated processing-time rows land in the same regime",
             f"# as the published reference rows (least-squares grid over",
             f"# block_interval x latency_mean; sse={best[0]:.2f}).",
             f"# Per-row totals, simulated vs reference (deviation must be <= 25%):"]
    worst = 0.0
    for n, row in sorted(REFERENCE_ROWS.items()):
        ref = sum(row)
        dev = abs(totals[n] - ref) / ref
        worst = max(worst, dev)
        lines.append(f"#   N={n:3d}: {totals[n]:7.1f}s vs {ref:5.1f}s ({dev * 100:4.1f}%)")
    lines.append("")
    lines.append(CONFIG_TEMPLATE.format(block_interval=b, latency_mean=latency, trials=5))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines))
    print(f"wrote {out_path} (worst row deviation {worst * 100:.1f}%)")
    if worst > 0.25:
        print("ERROR: fitted profile deviates more than 25% on some row")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
