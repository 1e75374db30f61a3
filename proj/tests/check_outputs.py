#!/usr/bin/env python3
"""Runs every cfnrec subcommand and validates what it writes."""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def main() -> int:
    cli, schema_dir, out = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    shutil.rmtree(out, ignore_errors=True)
    out.mkdir(parents=True)

    schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())
    failures = []

    def run(expect, *args):
        r = subprocess.run([cli, *args], capture_output=True, text=True)
        if r.returncode != expect:
            failures.append(f"{' '.join(args)}: exit {r.returncode}, expected {expect}\n{r.stderr}")

    def validate(path, schema):
        try:
            doc = json.loads((out / path).read_text())
            jsonschema.Draft202012Validator(schemas[schema], registry=registry).validate(doc)
        except (OSError, ValueError, jsonschema.ValidationError) as e:
            failures.append(f"{path}: {e}")

    def header(path, expected):
        try:
            first = (out / path).read_text().splitlines()[0]
        except (OSError, IndexError) as e:
            failures.append(f"{path}: {e}")
            return
        if first != expected:
            failures.append(f"{path}: header {first!r}, expected {expected!r}")

    common = ["--seed", "5", "--theta", "0.9"]
    run(0, "sweep", *common, "--q", "1,2", "--k", "100,400", "--trials", "4", "--out", str(out / "sweep"))
    validate("sweep/sweep.json", "sweep.schema.json")
    run(0, "sweep", *common, "--q", "1", "--k", "100,400", "--trials", "4", "--format", "csv",
        "--out", str(out / "sweep_csv"))
    header("sweep_csv/points.csv", "q,n,k,successes,trials,rate,ci_lo,ci_hi")
    header("sweep_csv/k_star.csv", "q,n,k_star,k_star_interpolated")

    run(0, "simulate", *common, "--q", "2", "--k", "3000", "--out", str(out / "sim"))
    header("sim/correlations.csv", "u,v,c")
    for samples in ("samples.txt", "samples.cfnb"):
        run(0, "reconstruct", *common, "--samples", str(out / "sim" / samples), "--tree", str(out / "sim/tree.nwk"),
            "--out", str(out / "rec"))
        validate("rec/reconstruct.json", "reconstruct.schema.json")
        header("rec/metric.csv", "u,v,d")

    # Too few samples: a structured failure, exit 1.
    run(0, "simulate", *common, "--q", "3", "--k", "5", "--out", str(out / "tiny"))
    run(1, "reconstruct", *common, "--samples", str(out / "tiny/samples.txt"), "--tree", str(out / "tiny/tree.nwk"),
        "--out", str(out / "tiny_rec"))
    validate("tiny_rec/reconstruct.json", "reconstruct.schema.json")

    run(0, "majority-gain", "--theta", "0.85", "--out", str(out / "gain"))
    validate("gain/majority_gain.json", "majority_gain.schema.json")
    run(0, "majority-gain", "--theta", "0.85", "--format", "csv", "--out", str(out / "gain_csv"))
    header("gain_csv/majority_gain.csv", "eta,gain")

    run(0, "info-check", "--seed", "5", "--theta", "0.55", "--q", "4,6", "--k", "1000", "--out", str(out / "info"))
    validate("info/info_check.json", "info_check.schema.json")

    run(0, "calibrate", *common, "--q", "1", "--k", "20,40,80,160", "--trials", "20", "--out", str(out / "cal"))
    validate("cal/constants.json", "constants.schema.json")

    config = out / "config.json"
    config.write_text(json.dumps({"seed": 3, "q": [1], "k": [200], "trials": 2, "theta": {"min": 0.85, "max": 0.95},
                                  "method": "general"}))
    validate("config.json", "config.schema.json")
    run(0, "sweep", "--config", str(config), "--out", str(out / "from_config"))
    validate("from_config/sweep.json", "sweep.schema.json")

    run(0, "sweep", "--seed", "8", "--theta", "0.9", "--q", "2", "--k", "500", "--trials", "1", "--out", str(out / "one"))
    validate("one/sweep.json", "sweep.schema.json")

    for d in ("same_a", "same_b"):
        run(0, "sweep", "--config", str(config), "--threads", "2", "--out", str(out / d))
    try:
        if (out / "same_a/sweep.json").read_bytes() != (out / "same_b/sweep.json").read_bytes():
            failures.append("identical configs gave different reports")
    except OSError as e:
        failures.append(str(e))

    run(0, "sweep", "--seed", "4", "--theta", "0.8", "--theta-max", "0.9", "--method", "general", "--q", "1",
        "--k", "300", "--trials", "2", "--out", str(out / "interval"))
    validate("interval/sweep.json", "sweep.schema.json")
    run(2, "sweep", "--seed", "4", "--theta-max", "0.9", "--out", str(out / "bad_interval"))

    for f in failures:
        print("FAIL:", f)
    print(f"{len(failures)} problems")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
