#!/usr/bin/env python3
# Copyright 2026 The Apunim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert the Kumar et al. toxicity ratings (JSON lines) into apunim inputs.

The corpus is shared by its authors on request and is not bundled here.
Each input line holds a comment with a ``ratings`` list. Every rating carries
``worker_id``, ``toxic_score`` (0-4) and the worker's survey answers.

    python3 kumar_to_csv.py ratings.jsonl out/ --sample 20000 --seed 0

``--sample`` draws that many comments uniformly without replacement, using
``--seed``. Any stratification used elsewhere is not reproduced. Survey
answers given as lists are joined with ``+``. Attributes come from the first
rating seen for each worker.
"""

import argparse
import json
import pathlib
import random

import pandas as pd

DIMENSIONS = [
    "gender", "race", "age_range", "education", "political_affilation",
    "lgbtq_status", "is_parent", "religion_important", "technology_impact",
    "personally_been_target",
]


def as_group(value) -> str:
    if value is None:
        return ""
    if isinstance(value, list):
        return "+".join(sorted(str(v) for v in value))
    return str(value)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source", type=pathlib.Path)
    parser.add_argument("output_dir", type=pathlib.Path)
    parser.add_argument("--sample", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    with args.source.open() as fh:
        comments = [json.loads(line) for line in fh if line.strip()]
    if args.sample is not None and args.sample < len(comments):
        comments = random.Random(args.seed).sample(comments, args.sample)

    rows, workers = [], {}
    for comment in comments:
        for rating in comment["ratings"]:
            wid = str(rating["worker_id"])
            rows.append((str(comment["comment_id"]), wid, str(rating["toxic_score"])))
            workers.setdefault(wid, {d: as_group(rating.get(d)) for d in DIMENSIONS})

    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    annotations = pd.DataFrame(rows, columns=["item_id", "annotator_id", "value"])
    annotations.drop_duplicates(["item_id", "annotator_id"]).to_csv(
        out / "annotations.csv", index=False)
    annotators = pd.DataFrame.from_dict(workers, orient="index")
    annotators.index.name = "annotator_id"
    annotators.reset_index().to_csv(out / "annotators.csv", index=False)

    config = {
        "scale": {"kind": "ordinal", "levels": ["0", "1", "2", "3", "4"]},
        "dimensions": [
            {"name": d, "groups": sorted(g for g in annotators[d].unique() if g)}
            for d in DIMENSIONS
        ],
        "analysis": {"alpha": 0.2, "partitions": 100, "fwer": 0.95, "seed": args.seed},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
