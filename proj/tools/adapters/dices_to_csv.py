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
"""Convert a DICES CSV export into the apunim input files.

The DICES corpora are distributed by their authors and are not bundled here.
Download ``diverse_safety_adversarial_dialog_350.csv`` (or the 990 variant),
then run::

    python3 dices_to_csv.py diverse_safety_adversarial_dialog_350.csv out/

This writes ``annotations.csv``, ``annotators.csv`` and ``config.json``.

* The label is ``Q3_bias_overall`` on the ordinal scale No < Unsure < Yes.
* Each rater becomes one annotator. Rater attributes come from the first
  row seen for that rater.
* Race values are shortened (``Black/African American`` becomes
  ``African American``, ``Asian/Asian subcontinent`` becomes ``Asian``).
  Other values are kept verbatim.
"""

import argparse
import json
import pathlib

import pandas as pd

LEVELS = ["No", "Unsure", "Yes"]
DIMENSIONS = {
    "race": "rater_race",
    "gender": "rater_gender",
    "age": "rater_age",
    "education": "rater_education",
}
AGE_ORDER = ["gen z", "millenial", "gen x+"]
RACE_NAMES = {
    "Black/African American": "African American",
    "Asian/Asian subcontinent": "Asian",
    "LatinX, Latino, Hispanic or Spanish Origin": "Latinx",
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source", type=pathlib.Path)
    parser.add_argument("output_dir", type=pathlib.Path)
    parser.add_argument("--label", default="Q3_bias_overall")
    args = parser.parse_args()

    df = pd.read_csv(args.source, dtype=str, keep_default_na=False)
    df = df[df[args.label].isin(LEVELS)]
    df["rater_race"] = df["rater_race"].replace(RACE_NAMES)

    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    annotations = df[["item_id", "rater_id", args.label]].drop_duplicates(["item_id", "rater_id"])
    annotations.columns = ["item_id", "annotator_id", "value"]
    annotations.to_csv(out / "annotations.csv", index=False)

    raters = df.drop_duplicates("rater_id")
    annotators = pd.DataFrame({"annotator_id": raters["rater_id"]})
    for name, column in DIMENSIONS.items():
        annotators[name] = raters[column].values
    annotators.to_csv(out / "annotators.csv", index=False)

    dims = []
    for name in DIMENSIONS:
        groups = sorted(g for g in annotators[name].unique() if g)
        entry = {"name": name, "groups": groups}
        if name == "age" and set(groups) <= set(AGE_ORDER):
            entry["ordinal_order"] = [a for a in AGE_ORDER if a in groups]
        dims.append(entry)
    config = {
        "scale": {"kind": "ordinal", "levels": LEVELS},
        "dimensions": dims,
        "analysis": {"alpha": 0.2, "partitions": 100, "fwer": 0.95},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
