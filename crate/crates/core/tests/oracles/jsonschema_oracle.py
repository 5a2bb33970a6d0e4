"""Validity verdicts from the Python jsonschema package (Draft 7).
Writes tests/golden/validation.json."""
import importlib.metadata
import json
import pathlib

import jsonschema

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent.parent / "fixtures"
SCHEMAS = {
    "produce": "produce.schema.json",
    "vega": "vega-lite-lite.schema.json",
    "tracery": "tracery.schema.json",
    "cyclic": "cyclic.schema.json",
}


def main():
    cases = json.loads((FIXTURES / "validation" / "cases.json").read_text())
    schemas = {k: json.loads((FIXTURES / "schemas" / v).read_text()) for k, v in SCHEMAS.items()}
    verdicts = []
    for case in cases:
        validator = jsonschema.Draft7Validator(schemas[case["schema"]])
        errors = list(validator.iter_errors(case["instance"]))
        verdicts.append({"schema": case["schema"], "valid": not errors})
    out = HERE.parent / "golden" / "validation.json"
    out.write_text(json.dumps({"jsonschema": importlib.metadata.version("jsonschema"), "verdicts": verdicts}, indent=1) + "\n")


if __name__ == "__main__":
    main()
