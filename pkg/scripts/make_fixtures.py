"""Write the synthetic fixture files to a directory for CLI experimentation.

Produces everything the szzset subcommands consume: two repository
histories with matching link datasets (the seven-commit demo and the
seeded benchmark), a commit-level link CSV, and a recorded provider
cache so `szzset adapt` can run offline.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from szzset.commitsets import save_dataset
from szzset.history import history_to_json
from szzset.ingest import commit_links_to_csv
from szzset.synthetic import make_adaptation_fixture, make_benchmark, two_origin_demo


def write_fixtures(out: Path, seed: int, n_links: int) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, text: str) -> None:
        path = out / name
        path.write_text(text)
        written.append(path)

    demo = two_origin_demo()
    emit("demo_history.json", json.dumps(history_to_json(demo.history), indent=2) + "\n")
    save_dataset(demo.dataset, out / "demo_links.jsonl")
    written.append(out / "demo_links.jsonl")

    bench = make_benchmark(seed=seed, n_links=n_links)
    emit("bench_history.json", json.dumps(history_to_json(bench.history), indent=2) + "\n")
    save_dataset(bench.dataset, out / "bench_links.jsonl")
    written.append(out / "bench_links.jsonl")

    links, cache = make_adaptation_fixture()
    emit("links.csv", commit_links_to_csv(links))
    emit("cache.json", json.dumps(cache, indent=2, sort_keys=True) + "\n")
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fixtures", help="target directory")
    parser.add_argument("--seed", type=int, default=7, help="benchmark seed")
    parser.add_argument("--n-links", type=int, default=20, help="benchmark link count")
    args = parser.parse_args(argv)

    for path in write_fixtures(Path(args.out), args.seed, args.n_links):
        print(f"wrote {path}")
    print()
    print("try, for example:")
    print(f"  szzset run {args.out}/bench_history.json {args.out}/bench_links.jsonl")
    print(f"  szzset blame {args.out}/demo_history.json c6")
    print(f"  szzset adapt {args.out}/links.csv --cache {args.out}/cache.json --out adapted.jsonl")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
