#!/usr/bin/env python3
# Copyright 2026 the pevo authors
# SPDX-License-Identifier: Apache-2.0
"""Convert common benchmark dumps into the task-bank record format.

The task bank reads line-delimited JSON objects with fields
{"id"?, "input", "gold"?}. This adapter maps JSONL or CSV files whose
columns use other names (question/answer, prompt/target, ...) onto that
shape so they can be fed to `pevo run` unchanged.

Usage:
  convert_tasks.py INPUT [-o OUT.jsonl] [--input-field NAME]
                   [--gold-field NAME] [--id-field NAME]
"""

import argparse
import csv
import json
import sys

INPUT_ALIASES = ["input", "question", "prompt", "text", "instruction", "task"]
GOLD_ALIASES = ["gold", "answer", "target", "label", "output", "expected"]
ID_ALIASES = ["id", "task_id", "qid", "name"]


def pick_field(record, preferred, aliases, kind, required):
    if preferred:
        if preferred not in record:
            raise KeyError(f"record has no field '{preferred}' for {kind}")
        return preferred
    for alias in aliases:
        if alias in record:
            return alias
    if required:
        raise KeyError(
            f"cannot find a {kind} field; tried {aliases}; use --{kind}-field")
    return None


def iter_records(path):
    if path.endswith(".csv"):
        with open(path, newline="", encoding="utf-8") as fh:
            yield from csv.DictReader(fh)
        return
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                raise SystemExit(f"{path}:{line_no}: not valid JSON: {e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("input", help="source file (.jsonl or .csv)")
    ap.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    ap.add_argument("--input-field", default=None)
    ap.add_argument("--gold-field", default=None)
    ap.add_argument("--id-field", default=None)
    args = ap.parse_args()

    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    count = 0
    input_field = gold_field = id_field = None
    for record in iter_records(args.input):
        if input_field is None:
            input_field = pick_field(record, args.input_field, INPUT_ALIASES, "input", True)
            gold_field = pick_field(record, args.gold_field, GOLD_ALIASES, "gold", False)
            id_field = pick_field(record, args.id_field, ID_ALIASES, "id", False)
        row = {"input": str(record[input_field])}
        if id_field and record.get(id_field) is not None:
            row["id"] = str(record[id_field])
        if gold_field and record.get(gold_field) is not None:
            row["gold"] = str(record[gold_field])
        out.write(json.dumps(row, ensure_ascii=False) + "\n")
        count += 1
    if args.output:
        out.close()
    print(f"wrote {count} task records", file=sys.stderr)


if __name__ == "__main__":
    main()
