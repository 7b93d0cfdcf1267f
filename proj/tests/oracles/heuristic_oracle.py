"""Second implementation of the heuristic detector's scoring, built on
Python's ast, over mini-10..mini-19. Writes tests/data/heuristic_oracle.json:
per function, every scored load as [line, col, name, rarity, distance, score]
and the argmax load."""

import ast
import json
import pathlib


def annotation_ids(fn):
    skip = set()
    trees = [a.annotation for a in fn.args.args if a.annotation] + ([fn.returns] if fn.returns else [])
    for node in ast.walk(fn):
        if isinstance(node, ast.AnnAssign):
            trees.append(node.annotation)
    for t in trees:
        skip.update(id(n) for n in ast.walk(t))
    return skip


def scores(source):
    fn = ast.parse(source).body[0]
    skip = annotation_ids(fn)
    body_names = []
    for stmt in fn.body:
        for node in ast.walk(stmt):
            if isinstance(node, ast.Name) and id(node) not in skip:
                body_names.append(node)
    defaults = [n for d in fn.args.defaults for n in ast.walk(d) if isinstance(n, ast.Name)]
    pos = lambda n: (n.lineno, n.col_offset)

    params = [(a.arg, (a.lineno, a.col_offset)) for a in fn.args.args]
    stores = [(n.id, pos(n)) for n in body_names if isinstance(n.ctx, ast.Store)]
    bindings = params + stores
    local = {name for name, _ in bindings}

    count = {}
    for name, _ in params:
        count[name] = count.get(name, 0) + 1
    for n in body_names + defaults:
        count[n.id] = count.get(n.id, 0) + 1

    rows = []
    for n in sorted(body_names, key=pos):
        if not isinstance(n.ctx, ast.Load) or n.id not in local:
            continue
        mine = [p for name, p in bindings if name == n.id]
        before = [p for p in mine if p < pos(n)]
        if before:
            distance = n.lineno - max(before)[0]
        else:
            distance = min(abs(n.lineno - p[0]) for p in mine)
        rows.append([n.lineno, n.col_offset, n.id, 1.0 / count[n.id], float(distance)])

    def normalized(k):
        vals = [r[k] for r in rows]
        lo, hi = min(vals), max(vals)
        return [(v - lo) / (hi - lo) if hi > lo else 0.0 for v in vals]

    if rows:
        a, b = normalized(3), normalized(4)
        for r, x, y in zip(rows, a, b):
            r.append((x + y) / 2)
    best = None
    for r in rows:
        if best is None or r[5] > best[5]:
            best = r
    return rows, best


def main():
    data = pathlib.Path(__file__).resolve().parents[1] / "data"
    samples = [json.loads(l) for l in (data / "mini_corpus.jsonl").read_text().splitlines()][10:20]
    out = {}
    for s in samples:
        rows, best = scores(s["source"])
        out[s["id"]] = {"rows": rows, "best": best}
    (data / "heuristic_oracle.json").write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print("functions", len(out))


if __name__ == "__main__":
    main()
