"""Write a synthetic corpus in a MultiWoz on-disk layout.

    python scripts/make_synthetic_corpus.py --version 2.2 --dialogues 9917 --out data/synthetic22
"""

import argparse

from tabledst.synthetic import generate_corpus, write_layout


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--version", choices=("2.1", "2.2", "2.4"), default="2.2")
    parser.add_argument("--dialogues", type=int, default=9917)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    dialogues = generate_corpus(args.dialogues, seed=args.seed)
    root = write_layout(args.out, dialogues, args.version)
    print(f"wrote {len(dialogues)} dialogues to {root}")


if __name__ == "__main__":
    main()
