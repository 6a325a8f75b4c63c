"""Per-turn output/input length for every representation and context preset.

    python scripts/length_profile.py --corpus corpus.jsonl --out lengths.tsv
"""

import argparse

from tabledst.bench import REPRESENTATIONS, itc_check, profile_corpus
from tabledst.dataset import read_corpus
from tabledst.io import make_meta, write_tsv
from tabledst.templating import ContextConfig

PRESETS = ("prev-state", "last4+prev-state", "full-history")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    _, records = read_corpus(args.corpus)
    rows = []
    for preset in PRESETS:
        for rep in REPRESENTATIONS:
            summary = profile_corpus(records, ContextConfig.preset(preset), rep).summary()
            rows.append([preset, rep, summary["input_tokens"]["median"], summary["output_tokens"]["median"], summary["output_tokens"]["mean"]])
            print("\t".join(map(str, rows[-1])))
    itc = itc_check(records)
    print(f"ops per turn: min {itc.min_ops}, max {itc.max_ops}, mode {itc.mode_ops}, histogram {dict(sorted(itc.ops_histogram.items()))}")
    meta = make_meta("length-profile", corpus=args.corpus)
    write_tsv(args.out, meta, ["context", "representation", "input_median", "output_median", "output_mean"], rows)


if __name__ == "__main__":
    main()
