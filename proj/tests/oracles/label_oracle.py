"""Independent labeling oracle for tests/data/label_fixture.jsonl.

Runs `typegate check --format json` on each sample by hand, stubs out missing
packages (unresolved names used only as attribute or call roots, found with
Python's own ast), drops import errors, and keeps diagnostics on the bug
line. Writes tests/data/label_oracle.json.

Usage: label_oracle.py path/to/typegate
"""

import ast
import json
import pathlib
import re
import subprocess
import sys
import tempfile

UNDEFINED = re.compile(r"^name '([A-Za-z_][A-Za-z_0-9]*)' is not defined$")


def run_check(tool, source, stubs, annotations):
    with tempfile.TemporaryDirectory() as tmp:
        src = pathlib.Path(tmp) / "f.py"
        src.write_text(source)
        cmd = [tool, "check", "--format", "json", str(src)]
        if annotations:
            cmd.append("--annotations")
        if stubs:
            stub = pathlib.Path(tmp) / "s.pyi"
            stub.write_text(stubs)
            cmd += ["--stubs", str(stub)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode in (0, 1, 3), proc.stderr
        return json.loads(proc.stdout)


def package_like(source, name):
    tree = ast.parse(source)
    roots = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Attribute) and isinstance(node.value, ast.Name):
            roots.add(id(node.value))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            roots.add(id(node.func))
    uses = [n for n in ast.walk(tree) if isinstance(n, ast.Name) and n.id == name]
    return bool(uses) and all(id(n) in roots for n in uses)


def label(tool, sample, annotations):
    source, stubs = sample["source"], sample["stubs"] or ""
    result = run_check(tool, source, stubs, annotations)
    if not result["analyzable"]:
        return {"type_related": False, "matched_categories": []}
    missing = sorted({m.group(1) for d in result["diagnostics"] if d["category"] == "name-error"
                      for m in [UNDEFINED.match(d["message"])] if m and package_like(source, m.group(1))})
    if missing:
        stubs = stubs + "".join("import %s\n" % name for name in missing)
        result = run_check(tool, source, stubs, annotations)
    kept = [d for d in result["diagnostics"] if d["category"] != "import-error"]
    if any(d["category"] == "internal-error" for d in kept):
        return {"type_related": False, "matched_categories": []}
    line = sample["bug"]["line"]
    matched = [d["category"] for d in kept if d["line"] == line]
    return {"type_related": bool(matched), "matched_categories": matched}


def main():
    tool = sys.argv[1]
    data = pathlib.Path(__file__).resolve().parents[1] / "data"
    samples = [json.loads(l) for l in (data / "label_fixture.jsonl").read_text().splitlines()]
    out = {}
    for s in samples:
        out[s["id"]] = {"plain": label(tool, s, False), "annotations": label(tool, s, True)}
    (data / "label_oracle.json").write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    related = sum(v["plain"]["type_related"] for v in out.values())
    print("samples", len(out), "type-related", related)


if __name__ == "__main__":
    main()
