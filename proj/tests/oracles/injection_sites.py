"""Brute-force injection-site enumeration with Python's ast over the mini
corpus and the label pool: every body load of a local name, paired with all
other local names. Writes tests/data/injection_sites.json as
{id: [[line, col, name, [candidates...]], ...]}."""

import ast
import json
import pathlib


def sites(source):
    fn = ast.parse(source).body[0]
    skip = set()
    for node in ast.walk(fn):
        if isinstance(node, ast.AnnAssign):
            skip.update(id(n) for n in ast.walk(node.annotation))
    names = [n for stmt in fn.body for n in ast.walk(stmt) if isinstance(n, ast.Name) and id(n) not in skip]
    local = sorted({a.arg for a in fn.args.args} | {n.id for n in names if isinstance(n.ctx, ast.Store)})
    out = []
    for n in sorted(names, key=lambda n: (n.lineno, n.col_offset)):
        if isinstance(n.ctx, ast.Load) and n.id in local:
            others = [m for m in local if m != n.id]
            if others:
                out.append([n.lineno, n.col_offset, n.id, others])
    return out


def main():
    data = pathlib.Path(__file__).resolve().parents[1] / "data"
    out = {}
    for line in (data / "label_pool.jsonl").read_text().splitlines():
        s = json.loads(line)
        out[s["id"]] = sites(s["source"])
    (data / "injection_sites.json").write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print("functions", len(out), "sites", sum(len(v) for v in out.values()))


if __name__ == "__main__":
    main()
