"""JGA with predicted vs gold previous state under a noisy oracle.

Sweeps coupled noise levels (p_drop = p_corrupt_value = level) over several
seeds and writes one TSV row per (level, seed, state source).

    python scripts/error_propagation.py --corpus corpus.jsonl --split test --out propagation.tsv
"""

import argparse
import statistics

from tabledst.dataset import read_corpus
from tabledst.evaluation import evaluate_records
from tabledst.io import make_meta, write_tsv
from tabledst.templating import ContextConfig
from tabledst.tracker import NoiseModel, NoisyOracle, OracleGenerator, StateSource, track_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--split", default="test")
    parser.add_argument("--levels", default="0,0.025,0.05,0.1,0.2")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--context", default="prev-state")
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    _, records = read_corpus(args.corpus)
    records = [r for r in records if not args.split or r.split == args.split]
    cfg = ContextConfig.preset(args.context)
    oracle = OracleGenerator.from_records(records)
    levels = [float(x) for x in args.levels.split(",")]

    rows = []
    for level in levels:
        for seed in range(args.seeds):
            gen = NoisyOracle(oracle, NoiseModel(p_drop=level, p_corrupt_value=level, seed=seed))
            for source in StateSource:
                jga = evaluate_records(track_corpus(records, gen, cfg, source, workers=1), records).jga
                rows.append([level, seed, source.value, round(jga, 6)])
        by_source = {s.value: statistics.fmean(r[3] for r in rows if r[0] == level and r[2] == s.value) for s in StateSource}
        print(f"level {level}: " + ", ".join(f"{k} {v:.4f}" for k, v in by_source.items()))

    meta = make_meta("propagation", corpus=args.corpus, split=args.split, context=args.context, seeds=args.seeds)
    write_tsv(args.out, meta, ["level", "seed", "state_source", "jga"], rows)


if __name__ == "__main__":
    main()
