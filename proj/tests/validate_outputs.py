"""Cross-check the analyze outputs against the JSON schemas with jsonschema."""

import json
import pathlib
import subprocess
import sys

import jsonschema


def main() -> int:
    cli, work, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    work.mkdir(parents=True, exist_ok=True)
    raw, canon, out = work / "raw.csv", work / "canon.csv", work / "run"
    subprocess.run([cli, "synth", "-o", str(raw), "--seed", "9", "--n-tx", "1500"], check=True)
    subprocess.run([cli, "ingest", "-i", str(raw), "-o", str(canon)], check=True)
    code = subprocess.run([cli, "analyze", "-i", str(canon), "-o", str(out)]).returncode
    if code not in (0, 2):
        print(f"analyze exited {code}")
        return 1

    def schema(name):
        s = json.loads((schema_dir / f"{name}.schema.json").read_text())
        jsonschema.Draft202012Validator.check_schema(s)
        return jsonschema.Draft202012Validator(s)

    checks = [(schema("manifest"), out / "manifest.json"), (schema("series_report"), out / "series.json")]
    snap = schema("snapshot_report")
    checks += [(snap, p) for p in sorted((out / "reports").glob("window_*.json"))]
    bad = 0
    for validator, path in checks:
        for err in validator.iter_errors(json.loads(path.read_text())):
            print(f"{path.name}: {err.json_path}: {err.message}")
            bad += 1
    print(f"validated {len(checks)} files, {bad} errors")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
