"""Writes tests/data/mini_corpus.jsonl: twenty well-typed functions used by the
mutation, labeling and detector suites. Rerun after editing FUNCTIONS."""

import ast
import json
import pathlib
import re

FUNCTIONS = [
    ("util/text.py", '''def join_words(words, sep):
    out = ""
    count = 0
    for word in words:
        if count > 0:
            out = out + sep
        out = out + word
        count += 1
    return out
'''),
    ("util/text.py", '''def pad_left(text, width):
    fill = " "
    missing = width - len(text)
    if missing <= 0:
        return text
    return fill * missing + text
'''),
    ("util/stats.py", '''def mean(values):
    total = 0.0
    n = 0
    for v in values:
        total = total + v
        n = n + 1
    if n == 0:
        return 0.0
    return total / n
'''),
    ("util/stats.py", '''def clamp(value, low, high):
    if value < low:
        return low
    if value > high:
        return high
    return value
'''),
    ("io/paths.py", '''def split_ext(name):
    dot = name.rfind(".")
    if dot < 0:
        return (name, "")
    stem = name[:dot]
    ext = name[dot:]
    return (stem, ext)
'''),
    ("io/paths.py", '''def count_lines(text):
    lines = text.split("\\n")
    blank = 0
    for line in lines:
        if line.strip() == "":
            blank += 1
    return len(lines) - blank
'''),
    ("core/index.py", '''def build_index(keys):
    index = {}
    position = 0
    for key in keys:
        index[key] = position
        position += 1
    return index
'''),
    ("core/index.py", '''def first_missing(seen, limit):
    candidate = 0
    while candidate < limit:
        if candidate not in seen:
            return candidate
        candidate = candidate + 1
    return limit
'''),
    ("core/buffer.py", '''def chunk(items, size):
    chunks = []
    current = []
    for item in items:
        current.append(item)
        if len(current) == size:
            chunks.append(current)
            current = []
    if current:
        chunks.append(current)
    return chunks
'''),
    ("core/buffer.py", '''def encode_all(parts, encoding):
    payload = b""
    for part in parts:
        data = part.encode(encoding)
        payload = payload + data
    return payload
'''),
    ("web/query.py", '''def format_query(params):
    query = ""
    sep = "?"
    for name in sorted(params):
        value = params[name]
        query = query + sep + name + "=" + str(value)
        sep = "&"
    return query
'''),
    ("web/query.py", '''def parse_port(spec, default):
    host = spec
    port = default
    colon = spec.find(":")
    if colon >= 0:
        host = spec[:colon]
        port = int(spec[colon + 1:])
    return (host, port)
'''),
    ("game/score.py", '''def apply_bonus(score, streak):
    bonus = 0
    if streak > 3:
        bonus = streak * 10
    elif streak > 1:
        bonus = 5
    total = score + bonus
    return total
'''),
    ("game/score.py", '''def ranking(names, scores):
    best = None
    best_score = -1
    i = 0
    while i < len(names):
        if scores[i] > best_score:
            best_score = scores[i]
            best = names[i]
        i += 1
    return best
'''),
    ("data/merge.py", '''def merge_counts(left, right):
    merged = dict(left)
    for key in right:
        previous = merged.get(key, 0)
        merged[key] = previous + right[key]
    return merged
'''),
    ("data/merge.py", '''def dedupe(items):
    seen = set()
    result = []
    for item in items:
        if item in seen:
            continue
        seen.add(item)
        result.append(item)
    return result
'''),
    ("num/series.py", '''def running_max(values):
    peak = None
    peaks = []
    for value in values:
        if peak is None or value > peak:
            peak = value
        peaks.append(peak)
    return peaks
'''),
    ("num/series.py", '''def scale(values: list, factor: float) -> list:
    scaled: list = []
    for value in values:
        scaled.append(value * factor)
    return scaled
'''),
    ("num/poly.py", '''def horner(coeffs: list, x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc
'''),
    ("num/poly.py", '''def describe(count: int, label: str) -> str:
    noun = label
    if count != 1:
        noun = label + "s"
    return str(count) + " " + noun
'''),
]


def signature(source):
    for line in source.splitlines():
        if line.lstrip().startswith("def"):
            return re.sub(r"\s+", " ", line.strip())
    raise ValueError("no def line")


def main():
    root = pathlib.Path(__file__).resolve().parents[1]
    out = root / "data" / "mini_corpus.jsonl"
    out.parent.mkdir(exist_ok=True)
    lines = []
    for n, (path, source) in enumerate(FUNCTIONS):
        ast.parse(source)
        sample = {
            "id": "mini-%02d" % n,
            "repo": "desk/mini",
            "file_path": path,
            "function_signature": signature(source),
            "source": source,
            "stubs": None,
            "label": "correct",
            "bug": None,
            "type_related": None,
            "matched_categories": None,
        }
        lines.append(json.dumps(sample, ensure_ascii=False, separators=(",", ":")))
    out.write_text("\n".join(lines) + "\n")
    print("wrote", out, len(lines))


if __name__ == "__main__":
    main()
