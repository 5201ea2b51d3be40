"""
Seeded experiments and their output files
=========================================

The same runner sits behind the ``paulitomo`` command; every trial uses its
own generator derived from the seed, so reruns give identical records.
"""

import tempfile
from pathlib import Path

from paulitomo import harness

out = Path(tempfile.mkdtemp()) / "tomo"
config = harness.ExperimentConfig(
    kind="tomo", state="random_mixed:7", n=2, epsilon=0.3, delta=0.1, trials=20, seed=5, out=str(out), workers=1
)
print(config.to_text())

result = harness.run_experiment(config)
s = result.metric("success")
print(f"success rate {s['mean']:.3f}, 95% Wilson interval [{s['wilson_low']:.3f}, {s['wilson_high']:.3f}]")
print(sorted(p.name for p in out.iterdir()))
print((out / "trials.jsonl").read_text().splitlines()[0])

# the saved records re-aggregate to the same summary
assert harness.report(out / "trials.jsonl") == result.summary

# exact ground truth for a test state
oracle = harness.oracle_report("ghz", subsets=[(0, 1)], bases=["ZZZ", "XXX"], n=3)
print("GHZ(3) ZZZ distribution:", oracle["distributions"]["ZZZ"])
print("GHZ(3) XXX distribution:", oracle["distributions"]["XXX"])

# the command-line equivalent:
#   paulitomo tomo --state random_mixed:7 --n 2 --epsilon 0.3 --trials 20 --seed 5 --out results/tomo
#   paulitomo report results/tomo/trials.jsonl
